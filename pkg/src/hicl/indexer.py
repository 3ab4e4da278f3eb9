"""Per-level index-vector encoder and its multi-task trainer.

The encoder maps a hashed token sequence to one index vector per hierarchy
level: t = mean of token embeddings, m_j = tanh(A_j t + b_j). Training
combines three objectives with hand-derived gradients:

- masked-token prediction over the shared embedding table (weight-tied),
- per-level softmax classification of the gold label path,
- a contrastive loss whose hard negatives come from the labels with the
  most similar label texts.
"""

from __future__ import annotations

import binascii
import hashlib
import logging
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .corpus import Document, VOCAB_SIZE, group_by_path, tokenize
from .rng import Xorshift64Star
from .taxonomy import LabelTextMode, Taxonomy

log = logging.getLogger(__name__)


class IndexerError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Parameters and gradients


@dataclass
class EncoderParams:
    E: np.ndarray            # (V, d) embedding table, also the output projection
    A: list[np.ndarray]      # per-level (d, d) projections
    b: list[np.ndarray]      # per-level (d,) biases
    W: list[np.ndarray]      # per-level (width_j, d) classifier heads

    @property
    def vocab_size(self) -> int:
        return self.E.shape[0]

    @property
    def dim(self) -> int:
        return self.E.shape[1]

    @property
    def depth(self) -> int:
        return len(self.A)

    def level_widths(self) -> list[int]:
        return [w.shape[0] for w in self.W]

    def tensors(self) -> dict[str, np.ndarray]:
        out = {"E": self.E}
        for j in range(self.depth):
            out[f"A{j}"] = self.A[j]
            out[f"b{j}"] = self.b[j]
            out[f"W{j}"] = self.W[j]
        return out

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            E=self.E.copy(),
            A=[a.copy() for a in self.A],
            b=[x.copy() for x in self.b],
            W=[w.copy() for w in self.W],
        )


def init_params(
    level_widths: Sequence[int],
    seed: int,
    dim: int = 64,
    vocab_size: int = VOCAB_SIZE,
) -> EncoderParams:
    """Uniform(-0.05, 0.05) init for weights, zero biases."""
    gen = np.random.Generator(np.random.PCG64(seed))
    u = lambda *shape: gen.uniform(-0.05, 0.05, shape)
    return EncoderParams(
        E=u(vocab_size, dim),
        A=[u(dim, dim) for _ in level_widths],
        b=[np.zeros(dim) for _ in level_widths],
        W=[u(width, dim) for width in level_widths],
    )


class Grads:
    """Gradient accumulator mirroring EncoderParams shapes."""

    def __init__(self, params: EncoderParams):
        self.E = np.zeros_like(params.E)
        self.A = [np.zeros_like(a) for a in params.A]
        self.b = [np.zeros_like(x) for x in params.b]
        self.W = [np.zeros_like(w) for w in params.W]

    def tensors(self) -> dict[str, np.ndarray]:
        out = {"E": self.E}
        for j in range(len(self.A)):
            out[f"A{j}"] = self.A[j]
            out[f"b{j}"] = self.b[j]
            out[f"W{j}"] = self.W[j]
        return out

    def add_scaled(self, other: "Grads", scale: float) -> None:
        self.E += scale * other.E
        for j in range(len(self.A)):
            self.A[j] += scale * other.A[j]
            self.b[j] += scale * other.b[j]
            self.W[j] += scale * other.W[j]


# ---------------------------------------------------------------------------
# Forward / backward


@dataclass
class EncoderOutput:
    m: list[np.ndarray]       # C index vectors
    h: np.ndarray             # (n, d) per-token embeddings
    tokens: tuple[int, ...]
    t: np.ndarray             # (d,) mean-pooled text embedding


def encode(tokens: Sequence[int], params: EncoderParams) -> EncoderOutput:
    if len(tokens) == 0:
        raise IndexerError("cannot encode an empty token list")
    toks = tuple(int(x) for x in tokens)
    h = params.E[list(toks)]
    t = h.mean(axis=0)
    m = [np.tanh(params.A[j] @ t + params.b[j]) for j in range(params.depth)]
    return EncoderOutput(m=m, h=h, tokens=toks, t=t)


def _encode_backward(
    out: EncoderOutput,
    dm: list[Optional[np.ndarray]],
    params: EncoderParams,
    grads: Grads,
) -> None:
    dt = np.zeros_like(out.t)
    for j, dmj in enumerate(dm):
        if dmj is None:
            continue
        dpre = dmj * (1.0 - out.m[j] ** 2)
        grads.A[j] += np.outer(dpre, out.t)
        grads.b[j] += dpre
        dt += params.A[j].T @ dpre
    np.add.at(grads.E, list(out.tokens), dt / len(out.tokens))


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


# ---------------------------------------------------------------------------
# Losses


def mlm_loss(
    tokens: Sequence[int],
    params: EncoderParams,
    rng: Optional[Xorshift64Star] = None,
    mask_rate: float = 0.15,
    mask_positions: Optional[Sequence[int]] = None,
) -> tuple[float, Grads]:
    """Mean cross-entropy of predicting masked token ids from the mean of the
    unmasked embeddings, with the embedding table as tied output weights."""
    n = len(tokens)
    if n < 2:
        raise IndexerError("masked-token loss needs at least 2 tokens")
    if mask_positions is None:
        if rng is None:
            raise IndexerError("either rng or mask_positions is required")
        count = min(max(1, math.ceil(mask_rate * n)), n - 1)
        mask_positions = sorted(rng.sample(range(n), count))
    else:
        mask_positions = sorted(int(i) for i in mask_positions)
        if not 0 < len(mask_positions) < n:
            raise IndexerError("mask must leave at least one token unmasked")

    masked = set(mask_positions)
    rest = [int(tokens[i]) for i in range(n) if i not in masked]
    targets = [int(tokens[i]) for i in mask_positions]

    t_rest = params.E[rest].mean(axis=0)
    p = _softmax(params.E @ t_rest)
    loss = float(-np.mean(np.log(p[targets])))

    grads = Grads(params)
    dlogits = p.copy()
    counts = Counter(targets)
    for tok, c in counts.items():
        dlogits[tok] -= c / len(targets)
    grads.E += np.outer(dlogits, t_rest)
    dt = params.E.T @ dlogits
    np.add.at(grads.E, rest, dt / len(rest))
    return loss, grads


def cls_loss(
    output: EncoderOutput,
    gold_level_indices: Sequence[int],
    params: EncoderParams,
) -> tuple[float, Grads]:
    """Sum over levels of softmax cross-entropy W_j m_j vs the gold label."""
    if len(gold_level_indices) != params.depth:
        raise IndexerError(
            f"gold path has {len(gold_level_indices)} levels, encoder has {params.depth}"
        )
    grads = Grads(params)
    dm: list[Optional[np.ndarray]] = []
    loss = 0.0
    for j, g in enumerate(gold_level_indices):
        width = params.W[j].shape[0]
        if not 0 <= g < width:
            raise IndexerError(f"level {j + 1} gold index {g} out of range [0, {width})")
        p = _softmax(params.W[j] @ output.m[j])
        loss += float(-np.log(p[g]))
        dlogits = p.copy()
        dlogits[g] -= 1.0
        grads.W[j] += np.outer(dlogits, output.m[j])
        dm.append(params.W[j].T @ dlogits)
    _encode_backward(output, dm, params, grads)
    return loss, grads


def contrastive_level_loss(
    cos_pos: float,
    cos_negs: Sequence[float],
    tau: float,
    include_positive: bool = False,
) -> tuple[float, float, np.ndarray]:
    """One level of the contrastive loss on raw cosine values.

    Returns (loss, dL/dcos_pos, dL/dcos_negs). The printed form puts only the
    negatives in the denominator; include_positive switches to the standard
    InfoNCE denominator.
    """
    if tau <= 0:
        raise IndexerError("temperature must be positive")
    s_pos = cos_pos / tau
    s_neg = np.asarray(cos_negs, dtype=float) / tau
    den = np.concatenate([[s_pos], s_neg]) if include_positive else s_neg
    zmax = den.max()
    lse = zmax + math.log(np.exp(den - zmax).sum())
    loss = -(s_pos - lse)
    soft = np.exp(den - lse)
    if include_positive:
        d_pos = (-1.0 + soft[0]) / tau
        d_negs = soft[1:] / tau
    else:
        d_pos = -1.0 / tau
        d_negs = soft / tau
    return loss, d_pos, d_negs


@dataclass(frozen=True)
class GroupMember:
    id: str
    tokens: tuple[int, ...]


@dataclass(frozen=True)
class ContrastiveGroup:
    anchor: GroupMember
    positive: GroupMember
    hard_negatives: tuple[GroupMember, ...]
    random_negatives: tuple[GroupMember, ...]

    @property
    def negatives(self) -> tuple[GroupMember, ...]:
        return self.hard_negatives + self.random_negatives


def _cos(a: np.ndarray, b: np.ndarray, ida: str, idb: str) -> tuple[float, float, float]:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0:
        raise IndexerError(f"zero-norm index vector for member {ida!r}")
    if nb == 0.0:
        raise IndexerError(f"zero-norm index vector for member {idb!r}")
    return float(a @ b) / (na * nb), na, nb


def _dcos(a: np.ndarray, b: np.ndarray, cos_ab: float, na: float, nb: float):
    da = b / (na * nb) - cos_ab * a / (na * na)
    db = a / (na * nb) - cos_ab * b / (nb * nb)
    return da, db


def dcl_loss(
    group: ContrastiveGroup,
    params: EncoderParams,
    tau: float,
    include_positive: bool = False,
) -> tuple[float, Grads]:
    """Contrastive loss over all levels of a (anchor, positive, negatives) group."""
    if not group.negatives:
        raise IndexerError("contrastive group has no negatives")
    anchor = encode(group.anchor.tokens, params)
    pos = encode(group.positive.tokens, params)
    negs = [encode(m.tokens, params) for m in group.negatives]

    grads = Grads(params)
    dm_anchor: list[Optional[np.ndarray]] = [None] * params.depth
    dm_pos: list[Optional[np.ndarray]] = [None] * params.depth
    dm_negs: list[list[Optional[np.ndarray]]] = [[None] * params.depth for _ in negs]

    total = 0.0
    for j in range(params.depth):
        cp, nap, npp = _cos(anchor.m[j], pos.m[j], group.anchor.id, group.positive.id)
        cns = []
        norm_info = []
        for out, member in zip(negs, group.negatives):
            c, na, nn = _cos(anchor.m[j], out.m[j], group.anchor.id, member.id)
            cns.append(c)
            norm_info.append((na, nn))
        loss_j, d_pos, d_negs = contrastive_level_loss(cp, cns, tau, include_positive)
        total += loss_j

        da, dp = _dcos(anchor.m[j], pos.m[j], cp, nap, npp)
        dm_anchor[j] = d_pos * da
        dm_pos[j] = d_pos * dp
        for k, (out, (na, nn)) in enumerate(zip(negs, norm_info)):
            da_k, dn_k = _dcos(anchor.m[j], out.m[j], cns[k], na, nn)
            dm_anchor[j] = dm_anchor[j] + d_negs[k] * da_k
            dm_negs[k][j] = d_negs[k] * dn_k

    _encode_backward(anchor, dm_anchor, params, grads)
    _encode_backward(pos, dm_pos, params, grads)
    for out, dm in zip(negs, dm_negs):
        _encode_backward(out, dm, params, grads)
    return total, grads


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 5e-5
    epochs: int = 20
    alpha: float = 1.0
    beta: float = 0.01
    tau: float = 0.1
    mask_rate: float = 0.15
    seed: int = 0
    dim: int = 64
    n_hard: int = 4
    n_random: int = 10
    infonce_denominator: bool = False
    label_text_mode: LabelTextMode = LabelTextMode.PATH_TEXT

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")


def total_loss(
    tokens: Sequence[int],
    gold_level_indices: Sequence[int],
    group: Optional[ContrastiveGroup],
    params: EncoderParams,
    cfg: TrainConfig,
    rng: Optional[Xorshift64Star] = None,
    mask_positions: Optional[Sequence[int]] = None,
) -> tuple[float, Grads]:
    """Multi-task loss: mlm + alpha * cls + beta * dcl."""
    loss, grads = mlm_loss(tokens, params, rng, cfg.mask_rate, mask_positions)
    if cfg.alpha > 0:
        out = encode(tokens, params)
        l_cls, g_cls = cls_loss(out, gold_level_indices, params)
        loss += cfg.alpha * l_cls
        grads.add_scaled(g_cls, cfg.alpha)
    if cfg.beta > 0:
        if group is None:
            raise IndexerError("beta > 0 requires a contrastive group")
        l_con, g_con = dcl_loss(group, params, cfg.tau, cfg.infonce_denominator)
        loss += cfg.beta * l_con
        grads.add_scaled(g_con, cfg.beta)
    return loss, grads


# ---------------------------------------------------------------------------
# Hard-negative pools from label-text similarity


class DescSimilarity:
    """Pairwise cosine over bag-of-token-count vectors of leaf label texts,
    computed once at setup; used to pick hard-negative labels."""

    def __init__(self, taxonomy: Taxonomy, mode: LabelTextMode):
        self.mode = mode
        self.leaf_ids = taxonomy.leaf_ids()
        self._texts: dict[int, str] = {}
        counts: dict[int, Counter] = {}
        for leaf in self.leaf_ids:
            path = taxonomy.path_to(leaf)
            if mode is LabelTextMode.DESCRIPTION and taxonomy.description_of(leaf) is None:
                # fall back to the path text when no description was generated
                text = taxonomy.path_text(path)
            else:
                text = taxonomy.label_text(path, mode)
            self._texts[leaf] = text
            counts[leaf] = Counter(tokenize(text))
        self._counts = counts

    def text_of(self, leaf: int) -> str:
        return self._texts[leaf]

    def similarity(self, leaf_a: int, leaf_b: int) -> float:
        ca, cb = self._counts[leaf_a], self._counts[leaf_b]
        dot = sum(v * cb.get(k, 0) for k, v in ca.items())
        na = math.sqrt(sum(v * v for v in ca.values()))
        nb = math.sqrt(sum(v * v for v in cb.values()))
        if na == 0.0 or nb == 0.0:
            return 0.0
        return dot / (na * nb)

    def top_similar(self, leaf: int, k: int = 4) -> list[int]:
        """The k most label-text-similar leaves, excluding the leaf itself;
        ties broken by lower node id."""
        scored = [
            (-self.similarity(leaf, other), other)
            for other in self.leaf_ids
            if other != leaf
        ]
        scored.sort()
        return [other for _, other in scored[:k]]


def build_desc_similarity(taxonomy: Taxonomy, mode: LabelTextMode) -> DescSimilarity:
    return DescSimilarity(taxonomy, mode)


def select_contrastive_group(
    anchor: Document,
    trainset: Sequence[Document],
    taxonomy: Taxonomy,
    desc_sim: DescSimilarity,
    rng: Xorshift64Star,
    n_hard: int = 4,
    n_random: int = 10,
) -> ContrastiveGroup:
    """Positive from the anchor's label (its label description when the anchor
    is the only sample); hard negatives from the most similar labels' pools;
    random negatives from any other label."""
    if len(desc_sim.leaf_ids) < 2:
        raise IndexerError("taxonomy has a single leaf; no negatives possible")
    by_path = group_by_path(trainset)
    anchor_key = anchor.gold.node_ids

    def desc_member(leaf: int) -> GroupMember:
        text = desc_sim.text_of(leaf)
        return GroupMember(id=f"desc:{leaf}", tokens=tuple(tokenize(text)))

    def doc_member(doc: Document) -> GroupMember:
        return GroupMember(id=doc.id, tokens=doc.tokens)

    same = [d for d in by_path.get(anchor_key, []) if d.id != anchor.id]
    positive = doc_member(rng.choice(same)) if same else desc_member(anchor.gold.leaf)

    hard_labels = desc_sim.top_similar(anchor.gold.leaf, k=n_hard)
    hard: list[GroupMember] = []
    for i in range(n_hard):
        leaf = hard_labels[i % len(hard_labels)]
        pool = [doc_member(d) for d in by_path.get(taxonomy.path_to(leaf).node_ids, [])]
        pool.append(desc_member(leaf))
        hard.append(rng.choice(pool))

    other_docs = [d for d in trainset if d.gold.node_ids != anchor_key]
    other_leaves = [l for l in desc_sim.leaf_ids if l != anchor.gold.leaf]
    rand: list[GroupMember] = []
    for _ in range(n_random):
        if other_docs:
            rand.append(doc_member(rng.choice(other_docs)))
        else:
            rand.append(desc_member(rng.choice(other_leaves)))

    return ContrastiveGroup(
        anchor=doc_member(anchor),
        positive=positive,
        hard_negatives=tuple(hard),
        random_negatives=tuple(rand),
    )


# ---------------------------------------------------------------------------
# Training


class _Adam:
    def __init__(self, params: EncoderParams, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.tensors().items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors().items()}
        self.t = 0

    def step(self, params: EncoderParams, grads: Grads, lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        tensors = params.tensors()
        for name, g in grads.tensors().items():
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * np.square(g)
            tensors[name] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train_indexer(
    trainset: Sequence[Document],
    taxonomy: Taxonomy,
    cfg: TrainConfig,
    params: Optional[EncoderParams] = None,
    epoch_callback: Optional[Callable[[int, float], None]] = None,
) -> EncoderParams:
    """Adam with a linear-to-zero learning-rate schedule (no warmup), one
    contrastive group per anchor per step, `cfg.epochs` passes."""
    if not trainset:
        raise IndexerError("cannot train on an empty trainset")
    if params is None:
        params = init_params(taxonomy.level_widths(), cfg.seed, cfg.dim)
    else:
        params = params.copy()
    if cfg.epochs == 0:
        return params

    desc_sim = build_desc_similarity(taxonomy, cfg.label_text_mode)
    rng = Xorshift64Star(cfg.seed)
    adam = _Adam(params)
    total_steps = cfg.epochs * len(trainset)
    step = 0
    gold_idx = {
        d.id: [taxonomy.level_index(nid) for nid in d.gold] for d in trainset
    }
    for epoch in range(cfg.epochs):
        order = list(range(len(trainset)))
        rng.shuffle(order)
        epoch_loss = 0.0
        for i in order:
            anchor = trainset[i]
            group = None
            if cfg.beta > 0:
                group = select_contrastive_group(
                    anchor, trainset, taxonomy, desc_sim, rng, cfg.n_hard, cfg.n_random
                )
            loss, grads = total_loss(
                anchor.tokens, gold_idx[anchor.id], group, params, cfg, rng
            )
            if not math.isfinite(loss):
                raise IndexerError(
                    f"training diverged: non-finite loss at epoch {epoch}, doc {anchor.id}"
                )
            lr_t = cfg.lr * (1.0 - step / total_steps)
            adam.step(params, grads, lr_t)
            step += 1
            epoch_loss += loss
        mean_loss = epoch_loss / len(trainset)
        log.info("epoch %d/%d mean loss %.4f", epoch + 1, cfg.epochs, mean_loss)
        if epoch_callback is not None:
            epoch_callback(epoch, mean_loss)
    return params


# ---------------------------------------------------------------------------
# Gradient checking


def relative_error(a: float, f: float) -> float:
    scale = max(abs(a), abs(f))
    if scale < 1e-6:
        return 0.0 if abs(a - f) < 1e-8 else abs(a - f)
    return abs(a - f) / scale


def check_gradients(
    loss_fn: Callable[[EncoderParams], tuple[float, Grads]],
    params: EncoderParams,
    rng: Xorshift64Star,
    n_coords: int = 20,
    h: float = 1e-5,
) -> float:
    """Compare analytic gradients against central finite differences on a
    random sample of coordinates with nonzero analytic gradient. Returns the
    worst relative error seen."""
    _, grads = loss_fn(params)
    pools: list[tuple[str, np.ndarray]] = []
    total = 0
    for name, g in grads.tensors().items():
        flat = np.flatnonzero(np.abs(g.ravel()) > 1e-12)
        if flat.size:
            pools.append((name, flat))
            total += flat.size
    if total == 0:
        raise IndexerError("loss has no nonzero gradient coordinates to check")
    picked: list[tuple[str, int]] = []
    for _ in range(min(n_coords, total)):
        r = rng.randbelow(total)
        for name, flat in pools:
            if r < flat.size:
                picked.append((name, int(flat[r])))
                break
            r -= flat.size

    tensors = params.tensors()
    worst = 0.0
    for name, idx in picked:
        arr = tensors[name]
        orig = arr.flat[idx]
        arr.flat[idx] = orig + h
        lp, _ = loss_fn(params)
        arr.flat[idx] = orig - h
        lm, _ = loss_fn(params)
        arr.flat[idx] = orig
        fd = (lp - lm) / (2 * h)
        analytic = grads.tensors()[name].flat[idx]
        worst = max(worst, relative_error(analytic, fd))
    return worst


# ---------------------------------------------------------------------------
# Persistence (versioned binary, little-endian f32 tensors, trailing CRC32)

PARAMS_MAGIC = b"HPRM"
PARAMS_VERSION = 1


def params_to_bytes(params: EncoderParams) -> bytes:
    widths = params.level_widths()
    head = PARAMS_MAGIC + struct.pack(
        "<HIHB", PARAMS_VERSION, params.vocab_size, params.dim, params.depth
    )
    head += struct.pack(f"<{len(widths)}I", *widths)
    body = bytearray(head)
    for name in _tensor_order(params.depth):
        arr = params.tensors()[name]
        body += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    crc = binascii.crc32(bytes(body)) & 0xFFFFFFFF
    return bytes(body) + struct.pack("<I", crc)


def _tensor_order(depth: int) -> list[str]:
    return (
        ["E"]
        + [f"A{j}" for j in range(depth)]
        + [f"b{j}" for j in range(depth)]
        + [f"W{j}" for j in range(depth)]
    )


def params_from_bytes(data: bytes) -> EncoderParams:
    if len(data) < 4 + 9 + 4 or data[:4] != PARAMS_MAGIC:
        raise IndexerError("not a params file (bad magic)")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    if binascii.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise IndexerError("params file checksum failure")
    version, vocab, dim, depth = struct.unpack_from("<HIHB", data, 4)
    if version != PARAMS_VERSION:
        raise IndexerError(f"unsupported params file version {version}")
    off = 4 + struct.calcsize("<HIHB")
    widths = list(struct.unpack_from(f"<{depth}I", data, off))
    off += 4 * depth

    def read(shape: tuple[int, ...]) -> np.ndarray:
        nonlocal off
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=off)
        off += 4 * count
        return arr.astype(np.float64).reshape(shape)

    E = read((vocab, dim))
    A = [read((dim, dim)) for _ in range(depth)]
    b = [read((dim,)) for _ in range(depth)]
    W = [read((widths[j], dim)) for j in range(depth)]
    if off != len(data) - 4:
        raise IndexerError("params file truncated or has trailing bytes")
    return EncoderParams(E=E, A=A, b=b, W=W)


def save_params(params: EncoderParams, target: str | Path) -> None:
    Path(target).write_bytes(params_to_bytes(params))


def load_params(source: str | Path) -> EncoderParams:
    return params_from_bytes(Path(source).read_bytes())


def params_fingerprint(params: EncoderParams) -> str:
    """Stable hex fingerprint of the serialized parameters."""
    return hashlib.sha256(params_to_bytes(params)).hexdigest()[:32]
