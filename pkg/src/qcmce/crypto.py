"""McEliece cryptosystem over irregular QC-LDPC codes.

Private key: H = [H_0 | ... | H_{n0-1}], an invertible sparse Q with average
weight m, and S.  Public key: the redundancy column of the systematic
G' = S^-1 G Q^-1, i.e. (n0-1) circulants, (n0-1) p bits.

Bit vectors are numpy uint8 arrays; internally blocks are packed ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analysis.threshold import bf_threshold_opt
from .codes import DegreeProfile, QProfile, generate_h, generate_q
from .decoders import BfConfig, bf_decode_batch, spa_decode_batch, tanner_graph
from .errors import DecodingFailure, GenerationExhausted, Singular, ValidationError
from .gf2 import (
    Circulant,
    QcMatrix,
    blocks_to_vec,
    circ_inv,
    circ_mul,
    circ_transpose,
    qc_inv,
    qc_mul,
    qc_transpose,
    qc_vec_mul_blocks,
    vec_to_blocks,
)

DECODERS = ("bf", "spa")
SAFETY_MARGIN = 0.05
Q_ATTEMPTS = 1000


@dataclass(frozen=True)
class SystemParams:
    """Public system parameters.

    ``bf_thresholds`` defaults to the optimum of the threshold engine.  With
    ``validate`` the nominal propagated weight ceil(t' m) must not exceed the
    threshold engine's t_th reduced by ``safety_margin``.
    """

    profile: DegreeProfile
    m: Fraction
    t_prime: int
    decoder: str = "bf"
    bf_thresholds: tuple[int, ...] = ()
    max_iters: int = 0
    safety_margin: float = SAFETY_MARGIN
    validate: bool = True
    t_th: int = field(default=-1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "m", Fraction(self.m))
        if self.decoder not in DECODERS:
            raise ValidationError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if self.t_prime < 0 or self.t_prime > self.n:
            raise ValidationError(f"t'={self.t_prime} outside [0, n]")
        if (self.m * self.n0).denominator != 1 or self.m < 1:
            raise ValidationError(f"m={self.m} must be >= 1 and a multiple of 1/{self.n0}")
        if not 0 <= self.safety_margin < 1:
            raise ValidationError("safety_margin must lie in [0, 1)")
        if not self.max_iters:
            object.__setattr__(self, "max_iters", 300 if self.decoder == "bf" else 100)
        need_threshold = self.validate or (self.decoder == "bf" and not self.bf_thresholds)
        if need_threshold and self.t_th < 0:
            report = bf_threshold_opt(self.n, self.profile.dv_per_block)
            object.__setattr__(self, "t_th", report.t_th)
            if not self.bf_thresholds:
                object.__setattr__(self, "bf_thresholds", report.best_b)
        if self.bf_thresholds:
            object.__setattr__(self, "bf_thresholds", tuple(int(b) for b in self.bf_thresholds))
            BfConfig(self.bf_thresholds, self.max_iters).check_against(self.profile.dv_per_block)
        if self.validate:
            limit = math.floor(self.t_th * (1 - self.safety_margin))
            if self.t > limit:
                raise ValidationError(
                    f"t = ceil(t' m) = {self.t} exceeds the threshold {self.t_th} less {self.safety_margin:.0%} margin ({limit})"
                )

    @property
    def n0(self) -> int:
        return self.profile.n0

    @property
    def p(self) -> int:
        return self.profile.p

    @property
    def k0(self) -> int:
        return self.n0 - 1

    @property
    def n(self) -> int:
        return self.n0 * self.p

    @property
    def k(self) -> int:
        return self.k0 * self.p

    @property
    def t(self) -> int:
        return math.ceil(self.t_prime * self.m)

    @property
    def crossover(self) -> float:
        return min(max(self.t, 1) / self.n, 0.49)

    def bf_config(self) -> BfConfig:
        return BfConfig(self.bf_thresholds, self.max_iters)


@dataclass(frozen=True)
class PublicKey:
    params: SystemParams
    gpub_right_column: tuple[Circulant, ...]

    def __post_init__(self):
        if len(self.gpub_right_column) != self.params.k0:
            raise ValidationError(f"expected {self.params.k0} public circulants")

    @property
    def key_size_bits(self) -> int:
        return self.params.k0 * self.params.p

    def matrix(self) -> QcMatrix:
        """Full systematic G' = [I | column]."""
        p, k0 = self.params.p, self.params.k0
        rows = []
        for i in range(k0):
            row = [Circulant.identity(p) if j == i else Circulant.zero(p) for j in range(k0)]
            rows.append(row + [self.gpub_right_column[i]])
        return QcMatrix.from_blocks(rows)


@dataclass(frozen=True)
class PrivateKey:
    params: SystemParams
    h: QcMatrix
    q: QcMatrix
    s: QcMatrix
    public: PublicKey = field(repr=False)

    def secret_generator(self) -> QcMatrix:
        return systematic_generator(self.h)

    def public_parity_check(self) -> QcMatrix:
        """H' = H Q^T, a valid parity-check matrix of the public code."""
        return qc_mul(self.h, qc_transpose(self.q))


def systematic_generator(h: QcMatrix) -> QcMatrix:
    """G = [I_k | Z] with Z_i = (H_{n0-1}^-1 H_i)^T, so that G H^T = 0."""
    n0, p = h.cols0, h.p
    last_inv = circ_inv(h[0, n0 - 1])
    rows = []
    for i in range(n0 - 1):
        row = [Circulant.identity(p) if j == i else Circulant.zero(p) for j in range(n0 - 1)]
        row.append(circ_transpose(circ_mul(last_inv, h[0, i])))
        rows.append(row)
    return QcMatrix.from_blocks(rows)


def keygen(params: SystemParams, rng: np.random.Generator, q_override: QcMatrix | None = None):
    """Returns (PublicKey, PrivateKey).

    S is the leftmost k0 x k0 block of G Q^-1, so G' = S^-1 G Q^-1 comes out
    systematic; a Q giving a singular S is redrawn.  ``q_override`` fixes Q
    (test mode, e.g. the block identity).
    """
    h = generate_h(params.profile, rng)
    g = systematic_generator(h)
    k0, n0 = params.k0, params.n0
    for _ in range(Q_ATTEMPTS):
        # S(1) depends only on the weight grid's parities, so redraw the grid too
        if q_override is None:
            q = generate_q(QProfile.random(n0, params.p, params.m, rng), rng)
        else:
            q = q_override
        gq = qc_mul(g, qc_inv(q))
        s = gq.submatrix(range(k0), range(k0))
        try:
            s_inv = qc_inv(s)
        except Singular:
            if q_override is not None:
                raise
            continue
        column = qc_mul(s_inv, gq.submatrix(range(k0), [n0 - 1]))
        pk = PublicKey(params, tuple(column[i, 0] for i in range(k0)))
        return pk, PrivateKey(params, h, q, s, pk)
    raise GenerationExhausted("no Q with invertible S within the attempt budget")


def _check_len(v: np.ndarray, length: int, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint8)
    if v.ndim != 1 or v.size != length:
        raise ValidationError(f"{what} must have length {length}, got shape {v.shape}")
    if (v > 1).any():
        raise ValidationError(f"{what} must be a 0/1 vector")
    return v


def random_error(n: int, weight: int, rng: np.random.Generator) -> np.ndarray:
    e = np.zeros(n, dtype=np.uint8)
    e[rng.choice(n, size=weight, replace=False)] = 1
    return e


def public_encode(pk: PublicKey, u_blocks: list[int]) -> list[int]:
    """u G' in block form: the systematic part is u itself."""
    red = 0
    for ui, c in zip(u_blocks, pk.gpub_right_column):
        if ui:
            red ^= circ_mul(Circulant(pk.params.p, ui), c).bits
    return list(u_blocks) + [red]


def encrypt(pk: PublicKey, u: np.ndarray, rng: np.random.Generator, error: np.ndarray | None = None) -> np.ndarray:
    """x = u G' + e with e uniform over weight-t' vectors; ``error`` forces e."""
    prm = pk.params
    u = _check_len(u, prm.k, "message")
    e = random_error(prm.n, prm.t_prime, rng) if error is None else _check_len(error, prm.n, "error")
    c = blocks_to_vec(public_encode(pk, vec_to_blocks(u, prm.k0, prm.p)), prm.p)
    return c ^ e


def decode_codeword(sk: PrivateKey, words: np.ndarray):
    """Decode an (F, n) batch with the secret code; returns (words, converged)."""
    prm = sk.params
    if prm.decoder == "bf":
        out, _, conv = bf_decode_batch(sk.h, words, prm.bf_config())
    else:
        out, _, conv = spa_decode_batch(sk.h, words, prm.crossover, prm.max_iters)
    return out, conv


def decrypt_batch(sk: PrivateKey, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decrypt an (F, n) batch; returns (plaintexts (F, k), ok (F,)).

    A frame is accepted only if the decoder reaches zero syndrome and the
    recovered plaintext re-encrypts to within t' of the ciphertext.
    """
    prm = sk.params
    xs = np.atleast_2d(np.asarray(xs, dtype=np.uint8))
    if xs.shape[1] != prm.n:
        raise ValidationError(f"ciphertext must have length {prm.n}")
    x_blocks = [vec_to_blocks(x, prm.n0, prm.p) for x in xs]
    spread = np.stack([blocks_to_vec(qc_vec_mul_blocks(xb, sk.q), prm.p) for xb in x_blocks])
    decoded, conv = decode_codeword(sk, spread)
    graph = tanner_graph(sk.h)
    conv &= ~graph.syndrome(decoded).any(axis=1)
    plain = np.zeros((xs.shape[0], prm.k), dtype=np.uint8)
    for f in np.flatnonzero(conv):
        v = vec_to_blocks(decoded[f], prm.n0, prm.p)[: prm.k0]
        u = qc_vec_mul_blocks(v, sk.s)
        residual = [a ^ b for a, b in zip(public_encode(sk.public, u), x_blocks[f])]
        if sum(r.bit_count() for r in residual) > prm.t_prime:
            conv[f] = False
            continue
        plain[f] = blocks_to_vec(u, prm.p)
    return plain, conv


def decrypt(sk: PrivateKey, x: np.ndarray) -> np.ndarray:
    x = _check_len(x, sk.params.n, "ciphertext")
    plain, ok = decrypt_batch(sk, x[None, :])
    if not ok[0]:
        raise DecodingFailure("decoding did not converge to a consistent codeword")
    return plain[0]

