"""Micro/Macro-F1 over hierarchical label sets, per-level slices and the
Top-K oracle-overlap score.

Each document contributes the set of labels on its path (C labels). Micro-F1
uses global TP/FP/FN counts over label occurrences; macro averages per-class
F1 over classes with gold support, unweighted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .taxonomy import LabelPath, Taxonomy


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ClassScore:
    label_id: int
    name: str
    level: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    micro_f1: float
    macro_f1: float
    per_level: tuple[tuple[int, float, float], ...]  # (level, micro, macro)
    per_class: tuple[ClassScore, ...]
    n_docs: int


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def _score_label_sets(
    pairs: Sequence[tuple[set[int], set[int]]],
    taxonomy: Taxonomy,
    restrict_level: int | None = None,
) -> tuple[float, float, list[ClassScore]]:
    tp = fp = fn = 0
    per_class: dict[int, list[int]] = {}

    def keep(nid: int) -> bool:
        return restrict_level is None or taxonomy.node(nid).level == restrict_level

    for gold, pred in pairs:
        g = {n for n in gold if keep(n)}
        p = {n for n in pred if keep(n)}
        tp += len(g & p)
        fp += len(p - g)
        fn += len(g - p)
        for nid in g | p:
            counts = per_class.setdefault(nid, [0, 0, 0, 0])  # tp, fp, fn, support
            counts[0] += int(nid in g and nid in p)
            counts[1] += int(nid in p and nid not in g)
            counts[2] += int(nid in g and nid not in p)
            counts[3] += int(nid in g)

    micro = _f1(tp, fp, fn)
    scores = []
    for nid in sorted(per_class):
        ctp, cfp, cfn, support = per_class[nid]
        if support == 0:
            continue  # macro averages only classes with gold support
        node = taxonomy.node(nid)
        prec = ctp / (ctp + cfp) if ctp + cfp else 0.0
        rec = ctp / (ctp + cfn) if ctp + cfn else 0.0
        scores.append(
            ClassScore(nid, node.name, node.level, prec, rec, _f1(ctp, cfp, cfn), support)
        )
    macro = sum(s.f1 for s in scores) / len(scores) if scores else 0.0
    return micro, macro, scores


def micro_macro_f1(
    pairs: Sequence[tuple[LabelPath, LabelPath]], taxonomy: Taxonomy
) -> EvalReport:
    if not pairs:
        raise EvaluationError("no (gold, predicted) pairs to score")
    sets = []
    for gold, pred in pairs:
        taxonomy.validate_path(gold)
        taxonomy.validate_path(pred)
        sets.append((set(gold.node_ids), set(pred.node_ids)))
    micro, macro, per_class = _score_label_sets(sets, taxonomy)
    per_level = []
    for level in range(1, taxonomy.depth + 1):
        lv_micro, lv_macro, _ = _score_label_sets(sets, taxonomy, restrict_level=level)
        per_level.append((level, lv_micro, lv_macro))
    return EvalReport(
        micro_f1=micro,
        macro_f1=macro,
        per_level=tuple(per_level),
        per_class=tuple(per_class),
        n_docs=len(pairs),
    )


def topk_oracle_f1(
    golds: Sequence[LabelPath],
    topk_paths: Sequence[Sequence[LabelPath]],
    taxonomy: Taxonomy,
) -> EvalReport:
    """Per document, scores the candidate path with the largest label overlap
    with gold (ties go to the higher-ranked candidate)."""
    if len(golds) != len(topk_paths):
        raise EvaluationError(
            f"{len(golds)} golds vs {len(topk_paths)} candidate lists"
        )
    pairs = []
    for gold, candidates in zip(golds, topk_paths):
        if not candidates:
            raise EvaluationError("a document has an empty candidate list")
        gold_set = set(gold.node_ids)
        best = max(
            enumerate(candidates),
            key=lambda pair: (len(gold_set & set(pair[1].node_ids)), -pair[0]),
        )[1]
        pairs.append((gold, best))
    return micro_macro_f1(pairs, taxonomy)


def format_report(report: EvalReport) -> str:
    lines = [
        f"documents: {report.n_docs}",
        f"micro-F1:  {report.micro_f1:.4f}",
        f"macro-F1:  {report.macro_f1:.4f}",
        "per level:",
    ]
    for level, micro, macro in report.per_level:
        lines.append(f"  level {level}: micro {micro:.4f}  macro {macro:.4f}")
    lines.append("per class:")
    for s in report.per_class:
        lines.append(
            f"  [{s.level}] {s.name}: P {s.precision:.3f} R {s.recall:.3f} "
            f"F1 {s.f1:.3f} (support {s.support})"
        )
    return "\n".join(lines)
