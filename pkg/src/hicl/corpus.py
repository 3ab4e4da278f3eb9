"""Corpus loading, hashing tokenizer and few-shot training-set sampling.

Corpus file: UTF-8, one JSON record per line with fields
``{"id": str, "text": str, "labels": [level-1 name, ..., level-C name]}``.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .rng import Xorshift64Star
from .taxonomy import LabelPath, Taxonomy

VOCAB_SIZE = 1 << 15

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class CorpusError(ValueError):
    pass


class SamplingMode(enum.Enum):
    BALANCED = "balanced"
    IMBALANCED = "imbalanced"


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    tokens: tuple[int, ...]
    gold: LabelPath


@dataclass(frozen=True)
class FewShotConfig:
    q: int
    seed: int
    mode: SamplingMode = SamplingMode.BALANCED

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("shot count q must be >= 0")


def _fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def hash_token(token: str) -> int:
    """XOR-fold a 64-bit FNV-1a hash down to a 15-bit bucket id."""
    h = _fnv1a_64(token.encode("utf-8"))
    h ^= h >> 32
    h ^= h >> 16
    h &= 0xFFFF
    return (h ^ (h >> 15)) & (VOCAB_SIZE - 1)


def tokenize(text: str) -> list[int]:
    """Lowercase, split on whitespace/punctuation, hash into 2^15 buckets."""
    return [hash_token(tok) for tok in _TOKEN_RE.findall(text.lower())]


def load_corpus(source: str | Path, taxonomy: Taxonomy) -> list[Document]:
    docs: list[Document] = []
    with open(source, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_no}: malformed JSON record: {exc}") from None
            docs.append(_parse_record(rec, taxonomy, line_no))
    if not docs:
        raise CorpusError(f"{source}: empty corpus")
    return docs


def _parse_record(rec: dict, taxonomy: Taxonomy, line_no: int) -> Document:
    for key in ("id", "text", "labels"):
        if key not in rec:
            raise CorpusError(f"line {line_no}: record missing field {key!r}")
    text = rec["text"]
    if not isinstance(text, str) or not text.strip():
        raise CorpusError(f"line {line_no}: empty text")
    labels = rec["labels"]
    if not isinstance(labels, list) or len(labels) != taxonomy.depth:
        raise CorpusError(
            f"line {line_no}: expected {taxonomy.depth} labels (one per level), "
            f"got {labels!r}"
        )
    try:
        gold = taxonomy.resolve_path(labels)
    except Exception as exc:
        raise CorpusError(f"line {line_no}: unresolvable label path: {exc}") from None
    tokens = tuple(tokenize(text))
    if not tokens:
        raise CorpusError(f"line {line_no}: text has no tokens")
    return Document(id=str(rec["id"]), text=text, tokens=tokens, gold=gold)


def save_corpus(docs: Iterable[Document], taxonomy: Taxonomy, target: str | Path) -> None:
    with open(target, "w", encoding="utf-8") as f:
        for doc in docs:
            rec = {
                "id": doc.id,
                "text": doc.text,
                "labels": taxonomy.path_names(doc.gold),
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def group_by_path(corpus: Iterable[Document]) -> dict[tuple[int, ...], list[Document]]:
    groups: dict[tuple[int, ...], list[Document]] = {}
    for doc in corpus:
        groups.setdefault(doc.gold.node_ids, []).append(doc)
    return groups


def sample_few_shot(corpus: list[Document], cfg: FewShotConfig) -> list[Document]:
    """Balanced Q-shot sampling: per label path, all documents when the group
    has at most Q, otherwise a uniform sample of exactly Q."""
    if not corpus:
        raise CorpusError("cannot sample from an empty corpus")
    if cfg.mode is not SamplingMode.BALANCED:
        raise ValueError("sample_few_shot requires BALANCED mode")
    rng = Xorshift64Star(cfg.seed)
    picked: list[Document] = []
    for _, group in sorted(group_by_path(corpus).items()):
        if len(group) <= cfg.q:
            picked.extend(group)
        else:
            picked.extend(rng.sample(group, cfg.q))
    picked.sort(key=lambda d: d.id)
    return picked


def sample_imbalanced(corpus: list[Document], cfg: FewShotConfig) -> list[Document]:
    """Imbalanced variant: per path, draw the group size uniformly from
    [0, min(count, Q)] before sampling."""
    if not corpus:
        raise CorpusError("cannot sample from an empty corpus")
    if cfg.mode is not SamplingMode.IMBALANCED:
        raise ValueError("sample_imbalanced requires IMBALANCED mode")
    rng = Xorshift64Star(cfg.seed)
    picked: list[Document] = []
    for _, group in sorted(group_by_path(corpus).items()):
        n = rng.randint(0, min(len(group), cfg.q))
        picked.extend(rng.sample(group, n))
    picked.sort(key=lambda d: d.id)
    return picked
