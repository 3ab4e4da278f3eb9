"""Synthetic separable fixtures: a uniform-depth taxonomy whose labels carry
their own token vocabularies, and documents drawn from those vocabularies
plus shared noise. Used by the test suite and the `make-fixture` command.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document, tokenize
from .rng import Xorshift64Star
from .taxonomy import Taxonomy, loads_taxonomy


@dataclass(frozen=True)
class FixtureConfig:
    depth: int = 3
    branching: int = 3
    docs_per_leaf: int = 8
    tokens_per_doc: int = 30
    words_per_node: int = 6
    noise_words: int = 40
    noise_rate: float = 0.2
    seed: int = 0


def _node_name(level: int, index_path: tuple[int, ...]) -> str:
    return f"L{level}_" + "_".join(str(i) for i in index_path)


def make_taxonomy(cfg: FixtureConfig) -> Taxonomy:
    """Leaf descriptions are built from the leaf's own vocabulary plus its
    ancestors', so description-based positives and hard negatives share real
    tokens with the documents."""
    lines = []

    def emit(level: int, index_path: tuple[int, ...]) -> None:
        name = _node_name(level, index_path)
        parent = "ROOT" if level == 1 else _node_name(level - 1, index_path[:-1])
        if level == cfg.depth:
            words = []
            for lv in range(1, cfg.depth + 1):
                words.extend(_node_vocab(lv, index_path[:lv], cfg.words_per_node))
            lines.append(f"{name}\t{parent}\t{' '.join(words)}")
        else:
            lines.append(f"{name}\t{parent}")
        if level < cfg.depth:
            for i in range(cfg.branching):
                emit(level + 1, index_path + (i,))

    for i in range(cfg.branching):
        emit(1, (i,))
    return loads_taxonomy("\n".join(lines) + "\n")


def _node_vocab(level: int, index_path: tuple[int, ...], words: int) -> list[str]:
    stem = _node_name(level, index_path).lower()
    return [f"{stem}w{i}" for i in range(words)]


def make_corpus(taxonomy: Taxonomy, cfg: FixtureConfig) -> list[Document]:
    """One document per (leaf, slot): a mixture of the leaf's ancestor
    vocabularies and shared noise words."""
    rng = Xorshift64Star(cfg.seed)
    noise = [f"noise{i}" for i in range(cfg.noise_words)]
    docs: list[Document] = []
    for path in taxonomy.leaf_paths():
        # per-level vocabularies along the path
        level_vocabs = []
        for level, nid in enumerate(path, start=1):
            name = taxonomy.node(nid).name
            index_path = tuple(int(x) for x in name.split("_")[1:])
            level_vocabs.append(_node_vocab(level, index_path, cfg.words_per_node))
        leaf_name = taxonomy.node(path.leaf).name
        # deeper levels contribute more tokens: weight 2^(level-1)
        weights = [2.0 ** (lv - 1) for lv in range(1, len(level_vocabs) + 1)]
        total_w = sum(weights)
        for slot in range(cfg.docs_per_leaf):
            words = []
            for _ in range(cfg.tokens_per_doc):
                if rng.random() < cfg.noise_rate:
                    words.append(rng.choice(noise))
                    continue
                r = rng.random() * total_w
                for lv, w in enumerate(weights):
                    if r < w:
                        words.append(rng.choice(level_vocabs[lv]))
                        break
                    r -= w
            text = " ".join(words)
            docs.append(
                Document(
                    id=f"{leaf_name}-{slot}",
                    text=text,
                    tokens=tuple(tokenize(text)),
                    gold=path,
                )
            )
    return docs


def split_corpus(
    docs: list[Document], holdout_per_leaf: int, seed: int
) -> tuple[list[Document], list[Document]]:
    """(train, heldout) with `holdout_per_leaf` docs per leaf held out."""
    rng = Xorshift64Star(seed)
    by_leaf: dict[int, list[Document]] = {}
    for doc in docs:
        by_leaf.setdefault(doc.gold.leaf, []).append(doc)
    train: list[Document] = []
    held: list[Document] = []
    for leaf in sorted(by_leaf):
        group = by_leaf[leaf]
        if holdout_per_leaf >= len(group):
            raise ValueError("holdout would leave no training docs for a leaf")
        picked = set(d.id for d in rng.sample(group, holdout_per_leaf))
        for doc in group:
            (held if doc.id in picked else train).append(doc)
    return train, held
