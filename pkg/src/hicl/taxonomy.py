"""Hierarchical label tree: loading, validation, path queries and label texts.

Taxonomy file grammar (UTF-8, one node per line):

    name <TAB> parent <TAB> description

- ``parent`` is ``ROOT`` for level-1 nodes, otherwise the parent's name.
  When a name is not globally unique the parent must be given as the full
  path from level 1, joined with ``/`` (e.g. ``AI/speech``).
- The description field is optional. Lines starting with ``#`` and blank
  lines are ignored.

The tree is immutable after load except for label descriptions, which are
filled in by the description-generation step before inference.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

ROOT_ID = 0
ROOT_NAME = "Root"


class TaxonomyError(ValueError):
    pass


class LabelTextMode(enum.Enum):
    ORIGINAL_LEAF = "original-leaf"
    PATH_TEXT = "path-text"
    DESCRIPTION = "description"


@dataclass(frozen=True)
class LabelNode:
    id: int
    name: str
    level: int
    parent: Optional[int]  # None only for the virtual root


@dataclass(frozen=True)
class LabelPath:
    """Node ids for levels 1..C, each a child of the previous."""

    node_ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.node_ids)

    def __iter__(self):
        return iter(self.node_ids)

    @property
    def leaf(self) -> int:
        return self.node_ids[-1]


class Taxonomy:
    def __init__(self, nodes: list[LabelNode], descriptions: dict[int, str]):
        self._nodes: dict[int, LabelNode] = {n.id: n for n in nodes}
        self._descriptions = dict(descriptions)
        self._children: dict[int, list[int]] = {n.id: [] for n in nodes}
        for n in nodes:
            if n.parent is not None:
                self._children[n.parent].append(n.id)
        for ids in self._children.values():
            ids.sort()
        self._validate()
        self.depth = max(n.level for n in nodes) if len(nodes) > 1 else 0
        self._levels: dict[int, list[int]] = {}
        for n in nodes:
            if n.level >= 1:
                self._levels.setdefault(n.level, []).append(n.id)
        for ids in self._levels.values():
            ids.sort()
        self._level_index = {
            nid: i for ids in self._levels.values() for i, nid in enumerate(ids)
        }

    # -- validation -------------------------------------------------------

    def _validate(self) -> None:
        if ROOT_ID not in self._nodes:
            raise TaxonomyError("missing virtual root node")
        for n in self._nodes.values():
            if n.id == ROOT_ID:
                continue
            parent = self._nodes.get(n.parent)
            if parent is None:
                raise TaxonomyError(f"orphan node {n.name!r}: unknown parent id {n.parent}")
            if n.level != parent.level + 1:
                raise TaxonomyError(
                    f"node {n.name!r} has level {n.level}, parent {parent.name!r} "
                    f"has level {parent.level}"
                )
        for pid, child_ids in self._children.items():
            names = [self._nodes[c].name for c in child_ids]
            if len(set(names)) != len(names):
                dup = next(x for x in names if names.count(x) > 1)
                raise TaxonomyError(
                    f"duplicate sibling name {dup!r} under {self._nodes[pid].name!r}"
                )
        leaf_levels = {n.level for n in self._nodes.values() if not self._children[n.id]}
        if len(leaf_levels) > 1:
            raise TaxonomyError(
                f"non-uniform leaf depth: leaves found at levels {sorted(leaf_levels)}; "
                "all leaves must sit at the same level"
            )

    # -- queries ----------------------------------------------------------

    def node(self, node_id: int) -> LabelNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise TaxonomyError(f"unknown node id {node_id}") from None

    def children_of(self, node_id: int) -> list[int]:
        if node_id not in self._nodes:
            raise TaxonomyError(f"unknown node id {node_id}")
        return list(self._children[node_id])

    def is_leaf(self, node_id: int) -> bool:
        return not self._children[self.node(node_id).id]

    def level_nodes(self, level: int) -> list[int]:
        """Ids of all nodes at a level, in stable id order."""
        return list(self._levels.get(level, []))

    def level_index(self, node_id: int) -> int:
        """Position of a node within its level's id-ordered list."""
        return self._level_index[node_id]

    def level_widths(self) -> list[int]:
        return [len(self._levels[j]) for j in range(1, self.depth + 1)]

    def leaf_ids(self) -> list[int]:
        return [nid for nid in sorted(self._nodes) if nid != ROOT_ID and self.is_leaf(nid)]

    def path_to(self, node_id: int) -> LabelPath:
        """Root-to-node path (node ids for levels 1..level(node))."""
        chain = []
        cur = self.node(node_id)
        while cur.id != ROOT_ID:
            chain.append(cur.id)
            cur = self._nodes[cur.parent]
        return LabelPath(tuple(reversed(chain)))

    def leaf_paths(self) -> list[LabelPath]:
        return [self.path_to(nid) for nid in self.leaf_ids()]

    def validate_path(self, path: LabelPath) -> None:
        if len(path) != self.depth:
            raise TaxonomyError(
                f"path length {len(path)} != taxonomy depth {self.depth}"
            )
        prev = ROOT_ID
        for nid in path:
            if nid not in self._children.get(prev, []):
                raise TaxonomyError(
                    f"node id {nid} is not a child of node id {prev}"
                )
            prev = nid

    def resolve_path(self, names: Iterable[str]) -> LabelPath:
        """Level-1..C names -> LabelPath, checking every parent-child edge."""
        ids = []
        cur = ROOT_ID
        for name in names:
            match = [c for c in self._children[cur] if self._nodes[c].name == name]
            if not match:
                raise TaxonomyError(
                    f"label {name!r} is not a child of {self._nodes[cur].name!r}"
                )
            cur = match[0]
            ids.append(cur)
        path = LabelPath(tuple(ids))
        self.validate_path(path)
        return path

    def path_names(self, path: LabelPath) -> list[str]:
        return [self._nodes[nid].name for nid in path]

    def full_path_name(self, node_id: int) -> str:
        return "/".join(self._nodes[n].name for n in self.path_to(node_id))

    # -- label texts ------------------------------------------------------

    def path_text(self, path: LabelPath) -> str:
        """Leaf-to-root names joined with ' of '."""
        names = self.path_names(path)
        return " of ".join(reversed(names))

    def description_of(self, node_id: int) -> Optional[str]:
        return self._descriptions.get(node_id)

    def set_description(self, node_id: int, text: str) -> None:
        self.node(node_id)
        self._descriptions[node_id] = text

    def label_text(self, path: LabelPath, mode: LabelTextMode) -> str:
        self.validate_path(path)
        if mode is LabelTextMode.ORIGINAL_LEAF:
            return self._nodes[path.leaf].name
        if mode is LabelTextMode.PATH_TEXT:
            return self.path_text(path)
        desc = self._descriptions.get(path.leaf)
        if desc is None:
            raise TaxonomyError(
                f"no description stored for leaf {self._nodes[path.leaf].name!r}"
            )
        return desc

    # -- serialization ----------------------------------------------------

    def dumps(self) -> str:
        out = io.StringIO()
        for nid in sorted(self._nodes):
            if nid == ROOT_ID:
                continue
            n = self._nodes[nid]
            parent = (
                "ROOT" if n.parent == ROOT_ID else self.full_path_name(n.parent)
            )
            desc = self._descriptions.get(nid, "")
            if desc:
                out.write(f"{n.name}\t{parent}\t{desc}\n")
            else:
                out.write(f"{n.name}\t{parent}\n")
        return out.getvalue()

    def dump(self, target: str | Path) -> None:
        Path(target).write_text(self.dumps(), encoding="utf-8")


@dataclass
class _Record:
    name: str
    parent_ref: str
    description: Optional[str]
    line_no: int
    parent_idx: Optional[int] = field(default=None)  # -1 means ROOT


def loads_taxonomy(text: str) -> Taxonomy:
    records: list[_Record] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2 or not parts[0].strip() or not parts[1].strip():
            raise TaxonomyError(f"line {line_no}: expected 'name<TAB>parent[<TAB>description]'")
        desc = parts[2].strip() if len(parts) > 2 and parts[2].strip() else None
        records.append(_Record(parts[0].strip(), parts[1].strip(), desc, line_no))
    if not records:
        raise TaxonomyError("empty taxonomy document")

    by_name: dict[str, list[int]] = {}
    for i, rec in enumerate(records):
        by_name.setdefault(rec.name, []).append(i)

    # Name-based parent resolution first; path-qualified references may need
    # several passes since they walk through already-resolved ancestors.
    for rec in records:
        if rec.parent_ref == "ROOT":
            rec.parent_idx = -1
        elif "/" not in rec.parent_ref:
            cands = by_name.get(rec.parent_ref, [])
            if not cands:
                raise TaxonomyError(
                    f"line {rec.line_no}: orphan node {rec.name!r}: "
                    f"unknown parent {rec.parent_ref!r}"
                )
            if len(cands) > 1:
                raise TaxonomyError(
                    f"line {rec.line_no}: ambiguous parent reference {rec.parent_ref!r}; "
                    "use the full path form 'a/b/c'"
                )
            rec.parent_idx = cands[0]

    pending = [r for r in records if r.parent_idx is None]
    while pending:
        progressed = False
        still = []
        for rec in pending:
            idx = _resolve_path_ref(rec.parent_ref, records, by_name)
            if idx is not None:
                rec.parent_idx = idx
                progressed = True
            else:
                still.append(rec)
        if not progressed:
            bad = still[0]
            raise TaxonomyError(
                f"line {bad.line_no}: orphan node {bad.name!r}: "
                f"cannot resolve parent path {bad.parent_ref!r}"
            )
        pending = still

    # Levels via parent-chain walks; a revisit means a cycle.
    levels: dict[int, int] = {}

    def level_of(i: int, trail: set[int]) -> int:
        if i in levels:
            return levels[i]
        if i in trail:
            raise TaxonomyError(f"cycle detected involving node {records[i].name!r}")
        trail.add(i)
        p = records[i].parent_idx
        lv = 1 if p == -1 else level_of(p, trail) + 1
        levels[i] = lv
        return lv

    for i in range(len(records)):
        level_of(i, set())

    nodes = [LabelNode(ROOT_ID, ROOT_NAME, 0, None)]
    descriptions: dict[int, str] = {}
    for i, rec in enumerate(records):
        nid = i + 1
        parent_id = ROOT_ID if rec.parent_idx == -1 else rec.parent_idx + 1
        nodes.append(LabelNode(nid, rec.name, levels[i], parent_id))
        if rec.description:
            descriptions[nid] = rec.description
    return Taxonomy(nodes, descriptions)


def _resolve_path_ref(
    ref: str, records: list[_Record], by_name: dict[str, list[int]]
) -> Optional[int]:
    parts = ref.split("/")
    cur = -1  # ROOT
    for name in parts:
        cands = [
            i
            for i in by_name.get(name, [])
            if records[i].parent_idx == cur
        ]
        if len(cands) != 1:
            return None
        cur = cands[0]
    return cur


def load_taxonomy(source: str | Path) -> Taxonomy:
    return loads_taxonomy(Path(source).read_text(encoding="utf-8"))
