"""Iterative decoders for the secret QC-LDPC code.

Both decoders work on the Tanner graph of H stored as flat edge arrays in
check-major order, with a per-block-column gather table for the variable
side.  Every check row and every variable in a block sees its edges in the
same relative order, so decoding commutes with block-wise cyclic shifts
exactly, floating point included.

Batched entry points take an (frames, n) array and decode all frames in
lock-step, retiring each one at zero syndrome.
"""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .gf2 import QcMatrix

BF_MAX_ITERS = 300
SPA_MAX_ITERS = 100
_LLR_CLIP = 40.0


@dataclass(frozen=True)
class TannerGraph:
    n: int
    n_checks: int
    dc: int
    p: int
    edge_var: np.ndarray  # (n_checks * dc,) variable of each edge, check-major
    var_edges: tuple[np.ndarray, ...]  # per block column: (p, dv_i) edge indices
    column_weights: tuple[int, ...]

    @property
    def n_edges(self) -> int:
        return self.n_checks * self.dc

    def var_degree(self) -> np.ndarray:
        return np.repeat(np.asarray(self.column_weights), self.p)

    def syndrome(self, words: np.ndarray) -> np.ndarray:
        """Per-frame parity checks of an (F, n) array -> (F, n_checks)."""
        g = words[:, self.edge_var].reshape(words.shape[0], self.n_checks, self.dc)
        return (g.sum(axis=2, dtype=np.int32) & 1).astype(np.uint8)

    def gather_var(self, edge_vals: np.ndarray) -> np.ndarray:
        """Sum edge values into their variables -> (F, n)."""
        return np.concatenate([edge_vals[:, idx].sum(axis=2) for idx in self.var_edges], axis=1)


@functools.lru_cache(maxsize=32)
def tanner_graph(h: QcMatrix) -> TannerGraph:
    p = h.p
    row_w = h.row_weights()
    if len(set(row_w)) != 1:
        raise ValidationError(f"H must have constant row weight, got block-row weights {row_w}")
    dc = row_w[0]
    supports = [[blk.support for blk in row] for row in h.blocks]
    n_checks = h.rows0 * p
    edge_var = np.empty(n_checks * dc, dtype=np.int64)
    j = np.arange(p)
    var_edges = []
    offsets = [np.cumsum([0] + [len(s) for s in row[:-1]]) for row in supports]
    for bi, row in enumerate(supports):
        pos = 0
        for i, sup in enumerate(row):
            for s in sup:
                checks = bi * p + j
                edge_var[checks * dc + pos] = i * p + (j + s) % p
                pos += 1
    for i in range(h.cols0):
        cols = []
        for bi, row in enumerate(supports):
            for r, s in enumerate(row[i]):
                checks = bi * p + (j - s) % p
                cols.append(checks * dc + offsets[bi][i] + r)
        var_edges.append(np.stack(cols, axis=1) if cols else np.zeros((p, 0), dtype=np.int64))
    return TannerGraph(
        n=h.cols0 * p,
        n_checks=n_checks,
        dc=dc,
        p=p,
        edge_var=edge_var,
        var_edges=tuple(var_edges),
        column_weights=tuple(h.column_weights()),
    )


@dataclass(frozen=True)
class BfConfig:
    """Fixed per-block decision thresholds for message-passing bit flipping."""

    b_per_block: tuple[int, ...]
    max_iters: int = BF_MAX_ITERS

    def __post_init__(self):
        object.__setattr__(self, "b_per_block", tuple(int(b) for b in self.b_per_block))
        if self.max_iters <= 0:
            raise ValidationError("max_iters must be positive")

    def check_against(self, column_weights: Sequence[int]) -> None:
        if len(column_weights) != len(self.b_per_block):
            raise ValidationError(f"{len(self.b_per_block)} thresholds for {len(column_weights)} blocks")
        for d, b in zip(column_weights, self.b_per_block):
            if not math.ceil(d / 2) <= b <= d - 1:
                raise ValidationError(f"threshold {b} outside [{math.ceil(d / 2)}, {d - 1}] for degree {d}")

    @classmethod
    def gallager_a(cls, column_weights: Sequence[int], max_iters: int = BF_MAX_ITERS) -> "BfConfig":
        return cls(tuple(d - 1 for d in column_weights), max_iters)


@dataclass
class DecodeOutcome:
    word: np.ndarray
    iterations_used: int
    converged: bool


def _as_graph(h) -> TannerGraph:
    return h if isinstance(h, TannerGraph) else tanner_graph(h)


def _as_batch(received, n: int) -> np.ndarray:
    y = np.atleast_2d(np.asarray(received, dtype=np.uint8))
    if y.shape[1] != n:
        raise ValidationError(f"received word length {y.shape[1]} != code length {n}")
    return y


def bf_decode_batch(h, received: np.ndarray, cfg: BfConfig):
    """Returns (words, iterations, converged) for an (F, n) batch."""
    g = _as_graph(h)
    cfg.check_against(g.column_weights)
    y = _as_batch(received, g.n)
    frames = y.shape[0]
    words = y.copy()
    iters = np.zeros(frames, dtype=np.int64)
    converged = ~g.syndrome(y).any(axis=1)
    active = np.flatnonzero(~converged)
    if active.size == 0:
        return words, iters, converged

    b_edge = np.repeat(np.asarray(cfg.b_per_block), g.p)[g.edge_var]
    # majority vote of channel value and all check estimates
    flip_at = np.repeat([d // 2 + 1 for d in g.column_weights], g.p)
    ya = y[active]
    y_edge = ya[:, g.edge_var]
    msg = y_edge.copy()
    seen: list[set[bytes]] = [set() for _ in active]
    for it in range(1, cfg.max_iters + 1):
        par = msg.reshape(len(active), g.n_checks, g.dc).sum(axis=2, dtype=np.int32) & 1
        estimate = np.repeat(par.astype(np.uint8), g.dc, axis=1) ^ msg
        disagree = estimate ^ y_edge
        count = g.gather_var(disagree.astype(np.int32))
        decided = ya ^ (count >= flip_at).astype(np.uint8)
        done = ~g.syndrome(decided).any(axis=1)
        words[active] = decided
        iters[active] = it
        if done.any():
            converged[active[done]] = True
            keep = ~done
            active, ya, y_edge = active[keep], ya[keep], y_edge[keep]
            if active.size == 0:
                break
            count, disagree, msg = count[keep], disagree[keep], msg[keep]
            seen = [s for s, k in zip(seen, keep) if k]
        extrinsic = count[:, g.edge_var] - disagree
        new = y_edge ^ (extrinsic >= b_edge).astype(np.uint8)
        # the update is deterministic, so a repeated message state means the
        # frame cycles through failed decisions forever
        stuck = np.zeros(len(active), dtype=bool)
        for f, row in enumerate(np.packbits(new, axis=1)):
            key = hashlib.blake2b(row.tobytes(), digest_size=16).digest()
            stuck[f] = key in seen[f]
            seen[f].add(key)
        msg = new
        if stuck.any():
            keep = ~stuck
            active, ya, y_edge, msg = active[keep], ya[keep], y_edge[keep], msg[keep]
            seen = [s for s, k in zip(seen, keep) if k]
            if active.size == 0:
                break
    return words, iters, converged


def bf_decode(h, received: np.ndarray, cfg: BfConfig) -> DecodeOutcome:
    words, iters, conv = bf_decode_batch(h, received, cfg)
    return DecodeOutcome(words[0], int(iters[0]), bool(conv[0]))


def _phi(x: np.ndarray) -> np.ndarray:
    # phi(x) = -log tanh(x/2), an involution on (0, inf)
    x = np.clip(x, 1e-12, _LLR_CLIP)
    return np.log1p(2.0 / np.expm1(x))


def spa_decode_batch(h, received: np.ndarray, crossover: float, max_iters: int = SPA_MAX_ITERS):
    """Log-domain sum-product decoding over a binary symmetric channel."""
    if not 0 < crossover < 0.5:
        raise ValidationError(f"crossover must lie in (0, 1/2), got {crossover}")
    g = _as_graph(h)
    y = _as_batch(received, g.n)
    frames = y.shape[0]
    words = y.copy()
    iters = np.zeros(frames, dtype=np.int64)
    converged = ~g.syndrome(y).any(axis=1)
    active = np.flatnonzero(~converged)
    if active.size == 0:
        return words, iters, converged

    l0 = math.log((1 - crossover) / crossover)
    lch = (1.0 - 2.0 * y[active].astype(np.float64)) * l0
    lvc = lch[:, g.edge_var]
    shape = (len(active), g.n_checks, g.dc)
    for it in range(1, max_iters + 1):
        mag = _phi(np.abs(lvc)).reshape(shape)
        neg = (lvc < 0).reshape(shape)
        total_mag = mag.sum(axis=2, keepdims=True)
        total_neg = neg.sum(axis=2, keepdims=True) & 1
        sign = 1.0 - 2.0 * (total_neg ^ neg)
        lcv = (sign * _phi(total_mag - mag)).reshape(len(active), -1)
        post = lch + g.gather_var(lcv)
        decided = (post < 0).astype(np.uint8)
        done = ~g.syndrome(decided).any(axis=1)
        words[active] = decided
        iters[active] = it
        if done.any():
            converged[active[done]] = True
            keep = ~done
            active, lch, post, lcv = active[keep], lch[keep], post[keep], lcv[keep]
            if active.size == 0:
                break
            shape = (len(active), g.n_checks, g.dc)
        lvc = np.clip(post[:, g.edge_var] - lcv, -_LLR_CLIP, _LLR_CLIP)
    return words, iters, converged


def spa_decode(h, received: np.ndarray, crossover: float, max_iters: int = SPA_MAX_ITERS) -> DecodeOutcome:
    words, iters, conv = spa_decode_batch(h, received, crossover, max_iters)
    return DecodeOutcome(words[0], int(iters[0]), bool(conv[0]))
