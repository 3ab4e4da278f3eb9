"""Retrieval database of per-level index vectors.

Exact linear-scan search with level-weighted cosine similarity
(weight 2^(j-1)/(2^C - 1) at level j) and a greedy distinct-label Top-K
filter. The on-disk format is a versioned binary: magic ``HRDB``, header,
fixed-width instance records with little-endian f32 vectors, trailing CRC32.
"""

from __future__ import annotations

import binascii
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Document
from .indexer import EncoderParams, encode, params_fingerprint
from .taxonomy import LabelPath, Taxonomy

DB_MAGIC = b"HRDB"
DB_VERSION = 1


class RetrievalError(ValueError):
    pass


@dataclass(frozen=True)
class IndexedInstance:
    doc_id: str
    vectors: tuple[np.ndarray, ...]  # C vectors, stored as f32
    path: LabelPath
    insertion_ordinal: int


@dataclass(frozen=True)
class RetrievalDatabase:
    instances: tuple[IndexedInstance, ...]
    depth: int
    dim: int
    encoder_fingerprint: str

    def __len__(self) -> int:
        return len(self.instances)


def level_weights(depth: int) -> np.ndarray:
    """w_j = 2^(j-1) / (2^C - 1); doubles per level and sums to 1."""
    if depth < 1:
        raise RetrievalError("depth must be >= 1")
    return np.array([2.0 ** (j - 1) for j in range(1, depth + 1)]) / (2.0 ** depth - 1)


def _unit(vec: np.ndarray, level: int) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise RetrievalError(f"zero-norm index vector at level {level}")
    return vec / norm


def similarity(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> float:
    """Level-weighted cosine similarity between two C-vector sets."""
    if len(a) != len(b):
        raise RetrievalError(f"depth mismatch: {len(a)} vs {len(b)}")
    weights = level_weights(len(a))
    total = 0.0
    for j, (va, vb) in enumerate(zip(a, b), start=1):
        if va.shape != vb.shape:
            raise RetrievalError(f"vector width mismatch at level {j}")
        total += weights[j - 1] * float(_unit(va, j) @ _unit(vb, j))
    return total


def _instance_vectors(doc: Document, params: EncoderParams) -> tuple[np.ndarray, ...]:
    out = encode(doc.tokens, params)
    return tuple(np.asarray(m, dtype=np.float32) for m in out.m)


def build_database(
    trainset: Sequence[Document],
    params: EncoderParams,
    taxonomy: Taxonomy,
) -> RetrievalDatabase:
    if not trainset:
        raise RetrievalError("cannot build a database from an empty trainset")
    instances = []
    for ordinal, doc in enumerate(trainset):
        taxonomy.validate_path(doc.gold)
        instances.append(
            IndexedInstance(
                doc_id=doc.id,
                vectors=_instance_vectors(doc, params),
                path=doc.gold,
                insertion_ordinal=ordinal,
            )
        )
    return RetrievalDatabase(
        instances=tuple(instances),
        depth=taxonomy.depth,
        dim=params.dim,
        encoder_fingerprint=params_fingerprint(params),
    )


def append_instance(
    db: RetrievalDatabase, doc: Document, params: EncoderParams
) -> RetrievalDatabase:
    """Returns a new snapshot with the document appended; never mutates db."""
    fp = params_fingerprint(params)
    if fp != db.encoder_fingerprint:
        raise RetrievalError(
            f"encoder fingerprint mismatch: db built with {db.encoder_fingerprint}, "
            f"got {fp}"
        )
    ordinal = max((i.insertion_ordinal for i in db.instances), default=-1) + 1
    inst = IndexedInstance(
        doc_id=doc.id,
        vectors=_instance_vectors(doc, params),
        path=doc.gold,
        insertion_ordinal=ordinal,
    )
    return RetrievalDatabase(
        instances=db.instances + (inst,),
        depth=db.depth,
        dim=db.dim,
        encoder_fingerprint=db.encoder_fingerprint,
    )


def score_all(
    db: RetrievalDatabase, query_vectors: Sequence[np.ndarray]
) -> list[tuple[IndexedInstance, float]]:
    """All instances scored and sorted by (score desc, insertion ordinal asc)."""
    if not db.instances:
        raise RetrievalError("empty retrieval database")
    scored = [
        (inst, similarity(query_vectors, inst.vectors)) for inst in db.instances
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0].insertion_ordinal))
    return scored


def search_topk_diverse(
    db: RetrievalDatabase,
    query_vectors: Sequence[np.ndarray],
    k: int,
    diversity_key: str = "path",
) -> list[tuple[IndexedInstance, float]]:
    """Greedy Top-K with pairwise-distinct labels. The default key is the full
    label path; ``leaf`` keys on the leaf node only."""
    if k < 1:
        raise RetrievalError("k must be >= 1")
    if diversity_key not in ("path", "leaf"):
        raise RetrievalError(f"unknown diversity key {diversity_key!r}")
    seen: set = set()
    picked = []
    for inst, score in score_all(db, query_vectors):
        key = inst.path.node_ids if diversity_key == "path" else inst.path.leaf
        if key in seen:
            continue
        seen.add(key)
        picked.append((inst, score))
        if len(picked) == k:
            break
    return picked


# ---------------------------------------------------------------------------
# Persistence


def db_to_bytes(db: RetrievalDatabase) -> bytes:
    fp = bytes.fromhex(db.encoder_fingerprint)
    body = bytearray(DB_MAGIC)
    body += struct.pack(
        "<HBHIB", DB_VERSION, db.depth, db.dim, len(db.instances), len(fp)
    )
    body += fp
    for inst in db.instances:
        raw_id = inst.doc_id.encode("utf-8")
        body += struct.pack("<H", len(raw_id))
        body += raw_id
        body += struct.pack(f"<{db.depth}I", *inst.path.node_ids)
        for vec in inst.vectors:
            body += np.ascontiguousarray(vec, dtype="<f4").tobytes()
    crc = binascii.crc32(bytes(body)) & 0xFFFFFFFF
    return bytes(body) + struct.pack("<I", crc)


def db_from_bytes(data: bytes, taxonomy: Optional[Taxonomy] = None) -> RetrievalDatabase:
    if len(data) < 4 + 10 + 4 or data[:4] != DB_MAGIC:
        raise RetrievalError("not a retrieval database file (bad magic)")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    if binascii.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise RetrievalError("database file checksum failure")
    version, depth, dim, count, fp_len = struct.unpack_from("<HBHIB", data, 4)
    if version != DB_VERSION:
        raise RetrievalError(f"unsupported database file version {version}")
    off = 4 + struct.calcsize("<HBHIB")
    fingerprint = data[off : off + fp_len].hex()
    off += fp_len
    if taxonomy is not None and taxonomy.depth != depth:
        raise RetrievalError(
            f"depth mismatch: database has C={depth}, taxonomy has C={taxonomy.depth}"
        )
    instances = []
    try:
        for ordinal in range(count):
            (id_len,) = struct.unpack_from("<H", data, off)
            off += 2
            doc_id = data[off : off + id_len].decode("utf-8")
            off += id_len
            path = LabelPath(struct.unpack_from(f"<{depth}I", data, off))
            off += 4 * depth
            vectors = []
            for _ in range(depth):
                vec = np.frombuffer(data, dtype="<f4", count=dim, offset=off).copy()
                off += 4 * dim
                vectors.append(vec)
            if taxonomy is not None:
                taxonomy.validate_path(path)
            instances.append(IndexedInstance(doc_id, tuple(vectors), path, ordinal))
    except struct.error:
        raise RetrievalError("database file truncated") from None
    if off != len(data) - 4:
        raise RetrievalError("database file truncated or has trailing bytes")
    return RetrievalDatabase(
        instances=tuple(instances),
        depth=depth,
        dim=dim,
        encoder_fingerprint=fingerprint,
    )


def save_db(db: RetrievalDatabase, target: str | Path) -> None:
    Path(target).write_bytes(db_to_bytes(db))


def load_db(source: str | Path, taxonomy: Optional[Taxonomy] = None) -> RetrievalDatabase:
    return db_from_bytes(Path(source).read_bytes(), taxonomy)
