"""Private-key objects: irregular QC-LDPC parity-check matrix H, transformation
matrix Q and scrambling matrix S, plus degree-distribution bookkeeping."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GenerationExhausted, InfeasibleProfile, Singular, ValidationError
from .gf2 import Circulant, QcMatrix, circ_from_support, gf2_rank_rows, is_invertible, qc_inv

RDF_ATTEMPTS = 100_000
INVERTIBLE_ATTEMPTS = 1000
GRID_MOVES = 10_000
RESTARTS = 1000


def log2_binomial(n: int, k: int) -> float:
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)


@dataclass(frozen=True)
class DegreeProfile:
    """Per-block column weights of H = [H_0 | ... | H_{n0-1}].

    ``security_bits`` is the enumeration floor: every block must admit at least
    2**security_bits distinct supports, i.e. log2 C(p, d_v^(i)) >= security_bits.
    """

    dv_per_block: tuple[int, ...]
    p: int
    security_bits: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "dv_per_block", tuple(int(d) for d in self.dv_per_block))
        if not self.dv_per_block:
            raise ValidationError("degree profile needs at least one block")
        for d in self.dv_per_block:
            if d < 2 or d >= self.p:
                raise ValidationError(f"column weight {d} outside [2, p) for p={self.p}")
        floor = log2_binomial(self.p, min(self.dv_per_block))
        if floor < self.security_bits:
            raise ValidationError(
                f"log2 C({self.p}, {min(self.dv_per_block)}) = {floor:.1f} below security floor {self.security_bits}"
            )

    @property
    def n0(self) -> int:
        return len(self.dv_per_block)

    @property
    def dc(self) -> int:
        return sum(self.dv_per_block)

    @property
    def dv_avg(self) -> Fraction:
        return Fraction(self.dc, self.n0)

    @property
    def is_regular(self) -> bool:
        return len(set(self.dv_per_block)) == 1


@dataclass(frozen=True)
class DegreePolynomials:
    """Coefficients keyed by degree i (the x^(i-1) term)."""

    lambda_coeffs: dict[int, Fraction]
    rho_coeffs: dict[int, Fraction]
    v_coeffs: dict[int, Fraction]
    c_coeffs: dict[int, Fraction]


def edge_to_node(edge: dict[int, Fraction]) -> dict[int, Fraction]:
    total = sum(f / i for i, f in edge.items())
    return {i: (f / i) / total for i, f in edge.items()}


def node_to_edge(node: dict[int, Fraction]) -> dict[int, Fraction]:
    total = sum(i * f for i, f in node.items())
    return {i: i * f / total for i, f in node.items()}


def degree_polynomials(profile: DegreeProfile) -> DegreePolynomials:
    v: dict[int, Fraction] = {}
    for d in profile.dv_per_block:
        v[d] = v.get(d, Fraction(0)) + Fraction(1, profile.n0)
    v = dict(sorted(v.items()))
    c = {profile.dc: Fraction(1)}
    return DegreePolynomials(node_to_edge(v), node_to_edge(c), v, c)


def _differences(support: Sequence[int], p: int) -> list[int]:
    return [(a - b) % p for a in support for b in support if a != b]


def pooled_differences_distinct(supports: Sequence[Sequence[int]], p: int) -> bool:
    diffs = [d for s in supports for d in _differences(s, p)]
    return len(diffs) == len(set(diffs))


def _rdf_block(d: int, p: int, used: set[int], rng: np.random.Generator, budget: int | None = None) -> list[int]:
    """Grow a support of size d whose differences avoid ``used`` and each other."""
    budget = RDF_ATTEMPTS if budget is None else budget
    attempts = 0
    while attempts < budget:
        support: list[int] = []
        diffs: set[int] = set()
        stalls = 0
        while len(support) < d and stalls < 4 * p:
            attempts += 1
            x = int(rng.integers(p))
            if x in support:
                stalls += 1
                continue
            new = []
            for s in support:
                new.append((x - s) % p)
                new.append((s - x) % p)
            if len(set(new)) != len(new) or any(nd in used or nd in diffs for nd in new):
                stalls += 1
                continue
            support.append(x)
            diffs.update(new)
        if len(support) == d:
            return sorted(support)
    raise GenerationExhausted(f"no difference-family block of weight {d} at p={p} within {budget} draws")


def generate_h(profile: DegreeProfile, rng: np.random.Generator, require_invertible_last: bool = True) -> QcMatrix:
    """Random-difference-family H with no 4-cycles.

    With ``require_invertible_last`` the last block is redrawn until it is an
    invertible circulant, which the systematic generator matrix needs.
    """
    p = profile.p
    needed = sum(d * (d - 1) for d in profile.dv_per_block)
    if needed > p - 1:
        raise InfeasibleProfile(f"profile needs {needed} distinct differences, only {p - 1} exist at p={p}")
    last = profile.dv_per_block[-1]
    if require_invertible_last and last % 2 == 0:
        raise InfeasibleProfile(
            f"last block weight {last} is even, so H_(n0-1) is never invertible; put an odd weight last"
        )
    # heaviest blocks first: they are the hardest to fit
    order = sorted(range(profile.n0), key=lambda i: -profile.dv_per_block[i])
    for _ in range(RESTARTS):
        used: set[int] = set()
        supports: dict[int, list[int]] = {}
        try:
            for i in order:
                d = profile.dv_per_block[i]
                s = _rdf_block(d, p, used, rng)
                if i == profile.n0 - 1 and require_invertible_last:
                    for _ in range(INVERTIBLE_ATTEMPTS):
                        if is_invertible(circ_from_support(p, s)):
                            break
                        s = _rdf_block(d, p, used, rng)
                    else:
                        raise GenerationExhausted(f"no invertible weight-{d} block at p={p}")
                used.update(_differences(s, p))
                supports[i] = s
        except GenerationExhausted:
            continue
        break
    else:
        raise GenerationExhausted(f"no difference family for profile {profile.dv_per_block} at p={p}")
    supports = [supports[i] for i in range(profile.n0)]
    return QcMatrix.from_blocks([[circ_from_support(p, s) for s in supports]])


@dataclass(frozen=True)
class QProfile:
    n0: int
    p: int
    m_target: Fraction
    block_weights: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        m = Fraction(self.m_target)
        object.__setattr__(self, "m_target", m)
        if m < 1:
            raise InfeasibleProfile(f"m must be at least 1, got {m}")
        if (m * self.n0).denominator != 1:
            raise InfeasibleProfile(
                f"m={m} is not a multiple of 1/{self.n0}; circulant blocks only realize integer block-row sums"
            )
        if not self.block_weights:
            object.__setattr__(self, "block_weights", q_block_weights(self.n0, m))
        lo, hi = math.floor(m), math.ceil(m)
        w = self.block_weights
        if len(w) != self.n0 or any(len(r) != self.n0 for r in w):
            raise ValidationError("block weight grid must be n0 x n0")
        sums = [sum(r) for r in w] + [sum(w[i][j] for i in range(self.n0)) for j in range(self.n0)]
        if any(s not in (lo, hi) for s in sums):
            raise InfeasibleProfile(f"row/column sums {sums} not all in {{{lo}, {hi}}}")
        if any(x > self.p for r in w for x in r):
            raise InfeasibleProfile("block weight exceeds p")

    @property
    def m(self) -> Fraction:
        return Fraction(sum(map(sum, self.block_weights)), self.n0)

    @classmethod
    def random(cls, n0: int, p: int, m, rng: np.random.Generator) -> "QProfile":
        return cls(n0, p, Fraction(m), q_block_weights(n0, Fraction(m), rng))


def _parity_invertible(grid: np.ndarray) -> bool:
    rows = [int(sum((int(x) & 1) << j for j, x in enumerate(r))) for r in grid]
    return gf2_rank_rows(rows) == len(rows)


def q_block_weights(n0: int, m: Fraction, rng: np.random.Generator | None = None) -> tuple[tuple[int, ...], ...]:
    """Integer grid with every row and column sum in {floor(m), ceil(m)}.

    Starts from floor(m/n0) everywhere and spreads the remainder over disjoint
    permutation patterns (cyclic shifts of one random permutation), the last
    one partial.  Q can only be invertible if the grid is invertible mod 2
    (Q evaluated at x = 1), so the grid is then randomized by 2x2 switches,
    which keep every row and column sum, until that holds.
    """
    m = Fraction(m)
    total = m * n0
    if total.denominator != 1:
        raise InfeasibleProfile(f"m={m} is not a multiple of 1/{n0}")
    if m.denominator == 1 and m.numerator % 2 == 0:
        raise InfeasibleProfile(f"even integer m={m}: every row of Q(1) is even, so Q is always singular")
    total = int(total)
    rng = np.random.default_rng(0) if rng is None else rng
    base = total // (n0 * n0)
    rem = total - base * n0 * n0
    full, partial = divmod(rem, n0)
    perm = rng.permutation(n0)
    rows = rng.permutation(n0)
    grid = np.full((n0, n0), base, dtype=int)
    for s in range(full):
        for i in range(n0):
            grid[i, perm[(i + s) % n0]] += 1
    for i in rows[:partial]:
        grid[i, perm[(i + full) % n0]] += 1
    lo, hi = max(0, base - 1), base + 2
    for _ in range(GRID_MOVES):
        if _parity_invertible(grid):
            return tuple(tuple(int(x) for x in r) for r in grid)
        if n0 < 2:
            break
        i, k = rng.choice(n0, 2, replace=False)
        j, l = rng.choice(n0, 2, replace=False)
        cand = grid.copy()
        cand[i, j] += 1
        cand[k, l] += 1
        cand[i, l] -= 1
        cand[k, j] -= 1
        if cand.min() >= lo and cand.max() <= hi:
            grid = cand
    raise InfeasibleProfile(f"no block-weight grid for m={m}, n0={n0} is invertible mod 2")


def _random_circulant(p: int, weight: int, rng: np.random.Generator) -> Circulant:
    if weight == 0:
        return Circulant.zero(p)
    return circ_from_support(p, (int(x) for x in rng.choice(p, size=weight, replace=False)))


def generate_q(qprofile: QProfile, rng: np.random.Generator) -> QcMatrix:
    p = qprofile.p
    for _ in range(INVERTIBLE_ATTEMPTS):
        q = QcMatrix.from_blocks([[_random_circulant(p, w, rng) for w in row] for row in qprofile.block_weights])
        try:
            qc_inv(q)
        except Singular:
            continue
        return q
    raise GenerationExhausted("no invertible Q within the attempt budget")


def generate_s(k0: int, p: int, rng: np.random.Generator) -> QcMatrix:
    """Dense random invertible k0 x k0 QC matrix."""
    for _ in range(INVERTIBLE_ATTEMPTS):
        blocks = [[Circulant.from_first_row(rng.integers(0, 2, p, dtype=np.uint8)) for _ in range(k0)] for _ in range(k0)]
        s = QcMatrix.from_blocks(blocks)
        try:
            qc_inv(s)
        except Singular:
            continue
        return s
    raise GenerationExhausted("no invertible S within the attempt budget")


def check_realizable_m(m: Fraction, n0: int) -> Fraction:
    """Round m up to the 1/n0 grid keygen can build, warning when it moves."""
    m = Fraction(m)
    realized = Fraction(math.ceil(m * n0), n0)
    if realized != m:
        warnings.warn(f"m={m} is not realizable with circulant blocks; using {realized}", stacklevel=2)
    return realized
