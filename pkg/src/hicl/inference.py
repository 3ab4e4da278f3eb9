"""Iterative layer-by-layer classification with retrieved demonstrations.

For each query: encode once, retrieve Top-K label-diverse demonstrations once,
then walk the label tree level by level. At each level the candidate set is
the intersection of the current node's children with the demonstrations'
labels at that level; the LLM picks from it, and replies that match no
candidate fall back to the most similar retrieved instance's label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import prompts
from .corpus import Document, tokenize
from .llm import DemoContext, LLMClient, LLMContext, LLMResponseError
from .indexer import EncoderParams, encode
from .retrieval import (
    IndexedInstance,
    RetrievalDatabase,
    score_all,
    search_topk_diverse,
)
from .taxonomy import LabelPath, ROOT_ID, ROOT_NAME, Taxonomy


class InferenceError(ValueError):
    pass


@dataclass(frozen=True)
class Demonstration:
    doc_id: str
    text: str
    path: LabelPath
    score: float


@dataclass(frozen=True)
class InferenceConfig:
    k: int = 3
    temperature: float = 0.2
    iterative: bool = True
    demos: bool = True
    pruning: bool = True
    candidate_set: bool = True
    fallback_policy: str = "paper"       # "paper" | "consistent"
    per_level_retrieval: bool = False
    diversity_key: str = "path"          # "path" | "leaf"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.fallback_policy not in ("paper", "consistent"):
            raise ValueError(f"unknown fallback policy {self.fallback_policy!r}")


@dataclass(frozen=True)
class LevelTrace:
    level: int
    demo_ids: tuple[str, ...]
    candidates: tuple[str, ...]
    raw_reply: str
    parsed_label: str
    fallback_used: bool


@dataclass(frozen=True)
class InferenceTrace:
    levels: tuple[LevelTrace, ...]
    final_path: LabelPath
    final_names: tuple[str, ...]
    llm_calls: int
    template_version: str = prompts.TEMPLATE_VERSION
    db_fingerprint: str = ""


# ---------------------------------------------------------------------------
# Label descriptions


def generate_label_description(
    taxonomy: Taxonomy, path: LabelPath, llm: LLMClient
) -> str:
    """Ask the LLM to expand the path text into a description and cache it on
    the leaf node. Idempotent: a stored description short-circuits the call."""
    taxonomy.validate_path(path)
    cached = taxonomy.description_of(path.leaf)
    if cached is not None:
        return cached
    prompt = prompts.DESCRIBE.format(path_text=taxonomy.path_text(path))
    reply = llm.complete(prompt).strip()
    if not reply:
        raise InferenceError(
            f"empty description reply for {taxonomy.path_text(path)!r}"
        )
    taxonomy.set_description(path.leaf, reply)
    return reply


# ---------------------------------------------------------------------------
# Candidate sets and prompts


def candidate_label_set(
    current: int,
    demos: Sequence[Demonstration],
    level: int,
    cfg: InferenceConfig,
    taxonomy: Taxonomy,
) -> list[int]:
    """Candidate node ids at `level` under `current`. With pruning on, the
    intersection of children with the demos' level labels (children as a
    whole when the intersection is empty); intersection candidates are
    ordered by best demo rank, everything else by node id."""
    children = taxonomy.children_of(current)
    if not children:
        raise InferenceError(
            f"node {taxonomy.node(current).name!r} is a leaf; no further levels"
        )
    if not cfg.pruning or not demos:
        return children
    rank: dict[int, int] = {}
    for i, demo in enumerate(demos):
        nid = demo.path.node_ids[level - 1]
        rank.setdefault(nid, i)
    inter = [c for c in children if c in rank]
    if not inter:
        return children
    inter.sort(key=lambda c: (rank[c], c))
    return inter


def assemble_prompt_level(
    query_text: str,
    current_name: str,
    demos: Sequence[tuple[str, str, str]],  # (demo text, demo current, demo answer)
    candidate_names: Sequence[str],
    cfg: InferenceConfig,
) -> str:
    parts = [prompts.INSTRUCTION_LEVEL]
    for text, cur, answer in demos:
        parts.append(prompts.DEMO_BLOCK.format(text=text, current=cur, answer=answer))
    if candidate_names:
        parts.append(
            prompts.QUERY_BLOCK.format(
                text=query_text,
                current=current_name,
                candidates=", ".join(candidate_names),
            )
        )
    else:
        parts.append(prompts.QUERY_BLOCK_FREE.format(text=query_text, current=current_name))
    return "".join(parts)


_WS_RE = re.compile(r"\s+")


def _norm(text: str) -> str:
    return _WS_RE.sub(" ", text).strip().lower()


def parse_llm_label(reply: str, candidates: Sequence[str]) -> Optional[str]:
    """Matching cascade: exact, case-insensitive, then whitespace-normalized
    containment of exactly one candidate. None means no (unambiguous) match."""
    stripped = reply.strip()
    for cand in candidates:
        if stripped == cand:
            return cand
    lowered = _norm(reply)
    exact_ci = [c for c in candidates if _norm(c) == lowered]
    if len(exact_ci) == 1:
        return exact_ci[0]
    contained = [c for c in candidates if _norm(c) in lowered]
    if len(contained) == 1:
        return contained[0]
    return None


# ---------------------------------------------------------------------------
# Classification


def classify_retrieval_only(
    query_text: str, db: RetrievalDatabase, params: EncoderParams
) -> LabelPath:
    """Top-1 retrieved instance's full path; no LLM involved."""
    vectors = encode(tokenize(query_text), params).m
    return score_all(db, vectors)[0][0].path


def _demonstrations(
    ranked: Sequence[tuple[IndexedInstance, float]],
    doc_texts: Mapping[str, str],
) -> list[Demonstration]:
    demos = []
    for inst, score in ranked:
        text = doc_texts.get(inst.doc_id)
        if text is None:
            raise InferenceError(f"no text available for retrieved doc {inst.doc_id!r}")
        demos.append(Demonstration(inst.doc_id, text, inst.path, score))
    return demos


def classify_iterative(
    query_text: str,
    db: RetrievalDatabase,
    params: EncoderParams,
    taxonomy: Taxonomy,
    cfg: InferenceConfig,
    llm: LLMClient,
    doc_texts: Mapping[str, str],
) -> InferenceTrace:
    if not db.instances:
        raise InferenceError("empty retrieval database")
    if taxonomy.depth < 1:
        raise InferenceError("taxonomy has no labels")
    query_vectors = encode(tokenize(query_text), params).m
    ranked_all = score_all(db, query_vectors)
    top1 = ranked_all[0][0]

    demos: list[Demonstration] = []
    if cfg.demos:
        demos = _demonstrations(
            search_topk_diverse(db, query_vectors, cfg.k, cfg.diversity_key), doc_texts
        )

    if not cfg.candidate_set:
        return _classify_pick_similar(query_text, demos, top1, taxonomy, db, llm)
    if not cfg.iterative:
        return _classify_full_path(query_text, demos, top1, taxonomy, db, llm)

    levels: list[LevelTrace] = []
    chosen: list[int] = []
    current = ROOT_ID
    llm_calls = 0
    j = 1
    while j <= taxonomy.depth:
        level_demos = demos
        if cfg.per_level_retrieval and cfg.demos:
            level_demos = _retrieve_through(
                db, query_vectors, cfg, current, j, doc_texts
            ) or demos
        candidate_ids = candidate_label_set(current, level_demos, j, cfg, taxonomy)
        candidate_names = [taxonomy.node(c).name for c in candidate_ids]
        demo_blocks = []
        demo_ctx = []
        for demo in level_demos:
            demo_current = (
                ROOT_NAME if j == 1 else taxonomy.node(demo.path.node_ids[j - 2]).name
            )
            demo_answer = taxonomy.node(demo.path.node_ids[j - 1]).name
            demo_blocks.append((demo.text, demo_current, demo_answer))
            demo_ctx.append(DemoContext(demo.score, demo_answer, demo.text))
        current_name = ROOT_NAME if current == ROOT_ID else taxonomy.node(current).name
        prompt = assemble_prompt_level(
            query_text, current_name, demo_blocks, candidate_names, cfg
        )
        context = LLMContext(
            mode="level",
            candidates=tuple(candidate_names),
            demos=tuple(demo_ctx),
            level=j,
        )
        reply = llm.complete(prompt, context=context)
        llm_calls += 1

        fallback_used = False
        if len(candidate_ids) == 1:
            parsed_id = candidate_ids[0]
        else:
            name = parse_llm_label(reply, candidate_names)
            if name is not None:
                parsed_id = candidate_ids[candidate_names.index(name)]
            else:
                fallback_used = True
                replace, tail = _fallback_labels(
                    ranked_all, demos, current, chosen, j, cfg, taxonomy
                )
                if replace:
                    # Top-1's path adopted wholesale; earlier levels are
                    # overwritten in the final path but keep their traces.
                    chosen = []
                    start_level = 1
                else:
                    start_level = j
                # the fallback may pin the entire remaining path
                for offset, nid in enumerate(tail):
                    levels.append(
                        LevelTrace(
                            level=start_level + offset,
                            demo_ids=tuple(d.doc_id for d in level_demos),
                            candidates=tuple(candidate_names) if offset == 0 else (),
                            raw_reply=reply if offset == 0 else "",
                            parsed_label=taxonomy.node(nid).name,
                            fallback_used=True,
                        )
                    )
                    chosen.append(nid)
                if len(chosen) == taxonomy.depth:
                    break
                current = chosen[-1]
                j = len(chosen) + 1
                continue
        chosen.append(parsed_id)
        levels.append(
            LevelTrace(
                level=j,
                demo_ids=tuple(d.doc_id for d in level_demos),
                candidates=tuple(candidate_names),
                raw_reply=reply,
                parsed_label=taxonomy.node(parsed_id).name,
                fallback_used=fallback_used,
            )
        )
        current = parsed_id
        j += 1

    final = LabelPath(tuple(chosen))
    taxonomy.validate_path(final)
    return InferenceTrace(
        levels=tuple(levels),
        final_path=final,
        final_names=tuple(taxonomy.path_names(final)),
        llm_calls=llm_calls,
        db_fingerprint=db.encoder_fingerprint,
    )


def _retrieve_through(
    db: RetrievalDatabase,
    query_vectors,
    cfg: InferenceConfig,
    current: int,
    level: int,
    doc_texts: Mapping[str, str],
) -> list[Demonstration]:
    """Top-K diverse among instances whose path passes through the current
    node (per-level re-retrieval flag)."""
    if current == ROOT_ID:
        ranked = search_topk_diverse(db, query_vectors, cfg.k, cfg.diversity_key)
        return _demonstrations(ranked, doc_texts)
    passing = [
        inst for inst in db.instances if inst.path.node_ids[level - 2] == current
    ]
    if not passing:
        return []
    sub = RetrievalDatabase(
        instances=tuple(passing),
        depth=db.depth,
        dim=db.dim,
        encoder_fingerprint=db.encoder_fingerprint,
    )
    ranked = search_topk_diverse(sub, query_vectors, cfg.k, cfg.diversity_key)
    return _demonstrations(ranked, doc_texts)


def _fallback_labels(
    ranked_all: Sequence[tuple[IndexedInstance, float]],
    demos: Sequence[Demonstration],
    current: int,
    chosen: Sequence[int],
    level: int,
    cfg: InferenceConfig,
    taxonomy: Taxonomy,
) -> tuple[bool, list[int]]:
    """Labels to adopt when the reply matches no candidate. Returns
    (replace, node ids): ids start at `level` and more than one pins the
    remaining path; replace=True discards the levels decided so far."""
    children = set(taxonomy.children_of(current))
    top1 = ranked_all[0][0]

    if cfg.fallback_policy == "consistent":
        for demo in demos:
            passes = level == 1 or demo.path.node_ids[level - 2] == current
            if passes and demo.path.node_ids[level - 1] in children:
                return False, [demo.path.node_ids[level - 1]]

    fb = top1.path.node_ids[level - 1]
    if fb in children:
        return False, [fb]
    # Top-1's label does not continue the path decided so far: adopt the
    # remaining path of the most similar instance that passes through the
    # current node, or Top-1's path wholesale when none does.
    for inst, _ in ranked_all:
        if inst.path.node_ids[: level - 1] == tuple(chosen):
            return False, list(inst.path.node_ids[level - 1 :])
    return True, list(top1.path.node_ids)


def _classify_full_path(
    query_text: str,
    demos: Sequence[Demonstration],
    top1: IndexedInstance,
    taxonomy: Taxonomy,
    db: RetrievalDatabase,
    llm: LLMClient,
) -> InferenceTrace:
    """Single-call variant: the candidate set is all full label paths."""
    all_paths = taxonomy.leaf_paths()
    path_texts = [taxonomy.path_text(p) for p in all_paths]
    parts = [prompts.INSTRUCTION_FULL_PATH]
    demo_ctx = []
    for demo in demos:
        answer = taxonomy.path_text(demo.path)
        parts.append(prompts.DEMO_BLOCK_FULL_PATH.format(text=demo.text, answer=answer))
        demo_ctx.append(DemoContext(demo.score, answer, demo.text))
    parts.append(
        prompts.QUERY_BLOCK_FULL_PATH.format(
            text=query_text, candidates="; ".join(path_texts)
        )
    )
    context = LLMContext(
        mode="full-path", candidates=tuple(path_texts), demos=tuple(demo_ctx)
    )
    reply = llm.complete("".join(parts), context=context)
    name = parse_llm_label(reply, path_texts)
    fallback_used = name is None
    final = all_paths[path_texts.index(name)] if name is not None else top1.path
    return InferenceTrace(
        levels=(
            LevelTrace(
                level=0,
                demo_ids=tuple(d.doc_id for d in demos),
                candidates=tuple(path_texts),
                raw_reply=reply,
                parsed_label=taxonomy.path_text(final),
                fallback_used=fallback_used,
            ),
        ),
        final_path=final,
        final_names=tuple(taxonomy.path_names(final)),
        llm_calls=1,
        db_fingerprint=db.encoder_fingerprint,
    )


def _classify_pick_similar(
    query_text: str,
    demos: Sequence[Demonstration],
    top1: IndexedInstance,
    taxonomy: Taxonomy,
    db: RetrievalDatabase,
    llm: LLMClient,
) -> InferenceTrace:
    """No-candidate-set variant: the LLM picks the most similar demo text and
    its label path is adopted."""
    if not demos:
        raise InferenceError("the no-candidate-set mode requires demonstrations")
    parts = [prompts.INSTRUCTION_PICK_SIMILAR]
    demo_ctx = []
    for i, demo in enumerate(demos, start=1):
        parts.append(prompts.PICK_SIMILAR_ITEM.format(index=i, text=demo.text))
        demo_ctx.append(
            DemoContext(demo.score, taxonomy.path_text(demo.path), demo.text)
        )
    parts.append(prompts.PICK_SIMILAR_QUERY.format(text=query_text))
    context = LLMContext(mode="pick-similar", candidates=(), demos=tuple(demo_ctx))
    reply = llm.complete("".join(parts), context=context)
    match = re.search(r"\d+", reply)
    fallback_used = False
    if match and 1 <= int(match.group()) <= len(demos):
        final = demos[int(match.group()) - 1].path
    else:
        final = top1.path
        fallback_used = True
    return InferenceTrace(
        levels=(
            LevelTrace(
                level=0,
                demo_ids=tuple(d.doc_id for d in demos),
                candidates=(),
                raw_reply=reply,
                parsed_label=taxonomy.path_text(final),
                fallback_used=fallback_used,
            ),
        ),
        final_path=final,
        final_names=tuple(taxonomy.path_names(final)),
        llm_calls=1,
        db_fingerprint=db.encoder_fingerprint,
    )
