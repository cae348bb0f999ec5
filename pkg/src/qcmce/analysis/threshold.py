"""Bit-flipping decoding threshold of irregular QC-LDPC codes.

A fixed number t of errors enters the decoder.  Under a cycle-free
assumption, and with errors spread evenly over the blocks, the average number
of residual errors evolves as

    q_l = t - sum_j lambda_j [t f_b(j, q_{l-1}) - (n - t) g_b(j, q_{l-1})]

with q_0 = t.  The threshold t_th is the largest t for which q_l -> 0.
Decision thresholds are attached to node degrees, so blocks sharing a column
weight share a threshold and a regular code has a single b.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from ..codes import DegreeProfile

CONVERGED_BELOW = 1e-2
STAGNATION = 1e-6
MAX_RECURSION = 10_000


def _degrees(profile) -> tuple[int, ...]:
    if isinstance(profile, DegreeProfile):
        return profile.dv_per_block
    return tuple(int(d) for d in profile)


def _lbinom(n: float, k: float) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@functools.lru_cache(maxsize=1 << 16)
def _check_probs_int(q: int, dc: int, n: int) -> tuple[float, float, float, float]:
    """Hypergeometric parity sums at an integer number q of errors."""

    def parity_split(errs: int) -> tuple[float, float]:
        # errs errors among the n-1 other positions; how many land in the
        # dc-1 other positions of one check, even vs odd
        if errs <= 0:
            return 1.0, 0.0
        denom = _lbinom(n - 1, errs)
        even = odd = 0.0
        for j in range(0, min(dc - 1, errs) + 1):
            if errs - j > n - dc:
                continue
            w = math.exp(_lbinom(dc - 1, j) + _lbinom(n - dc, errs - j) - denom)
            if j % 2:
                odd += w
            else:
                even += w
        s = even + odd
        return even / s, odd / s

    p_cc, p_ci = parity_split(q)
    p_ic, p_ii = parity_split(q - 1) if q >= 1 else (1.0, 0.0)
    return p_cc, p_ci, p_ic, p_ii


def check_probs(q: float, dc: int, n: int) -> tuple[float, float, float, float]:
    """(p_cc, p_ci, p_ic, p_ii) for q residual errors in a length-n word.

    p_cc / p_ci: a correct bit sees an even / odd number of errors among the
    other dc - 1 bits of one of its checks (check satisfied / unsatisfied).
    p_ic / p_ii: the same for a bit in error.  Non-integer q interpolates
    linearly between the neighbouring integers, which keeps both pairs
    summing to one.
    """
    if not 0 <= q <= n - 1:
        raise ValueError(f"q={q} outside [0, n-1] for n={n}")
    if not 1 <= dc <= n:
        raise ValueError(f"check degree {dc} outside [1, n]")
    lo = math.floor(q)
    frac = q - lo
    a = _check_probs_int(lo, dc, n)
    if frac == 0:
        return a
    b = _check_probs_int(lo + 1, dc, n)
    return tuple((1 - frac) * x + frac * y for x, y in zip(a, b))


def binomial_tail(d: int, b: int, p_hit: float, p_miss: float) -> float:
    """sum_{z=b}^{d-1} C(d-1, z) p_hit^z p_miss^(d-1-z)."""
    return sum(math.comb(d - 1, z) * p_hit**z * p_miss ** (d - 1 - z) for z in range(b, d))


def f_b(j: int, q: float, n: int, profile, b: Sequence[int]) -> float:
    """Probability that a bit in error of block j gets corrected."""
    dv = _degrees(profile)
    _, _, p_ic, p_ii = check_probs(q, sum(dv), n)
    return binomial_tail(dv[j], b[j], p_ic, p_ii)


def g_b(j: int, q: float, n: int, profile, b: Sequence[int]) -> float:
    """Probability that a correct bit of block j gets flipped."""
    dv = _degrees(profile)
    p_cc, p_ci, _, _ = check_probs(q, sum(dv), n)
    return binomial_tail(dv[j], b[j], p_ci, p_cc)


def edge_fractions(profile) -> tuple[float, ...]:
    """Per-block share of the Tanner graph edges (lambda split over blocks)."""
    dv = _degrees(profile)
    total = sum(dv)
    return tuple(d / total for d in dv)


def error_recursion(
    t: int, n: int, profile, b: Sequence[int], max_iters: int = MAX_RECURSION
) -> tuple[bool, list[float]]:
    dv = _degrees(profile)
    if not 0 <= t <= n:
        raise ValueError(f"t={t} outside [0, n]")
    dc = sum(dv)
    lam = edge_fractions(dv)
    q = float(t)
    traj = [q]
    for _ in range(max_iters):
        if q < CONVERGED_BELOW:
            return True, traj
        p_cc, p_ci, p_ic, p_ii = check_probs(min(q, n - 1), dc, n)
        corr = 0.0
        for d, bj, lj in zip(dv, b, lam):
            corr += lj * (t * binomial_tail(d, bj, p_ic, p_ii) - (n - t) * binomial_tail(d, bj, p_ci, p_cc))
        q_next = max(t - corr, 0.0)
        traj.append(q_next)
        if q_next >= q or (q - q_next) / q < STAGNATION:
            return q_next < CONVERGED_BELOW, traj
        q = q_next
    return q < CONVERGED_BELOW, traj


def converges(t: int, n: int, profile, b: Sequence[int]) -> bool:
    return error_recursion(t, n, profile, b)[0]


def bf_threshold(n: int, profile, b: Sequence[int]) -> int:
    """Largest t whose recursion converges (0 if even t=1 fails)."""
    dv = _degrees(profile)
    b = tuple(b)
    if not converges(1, n, dv, b):
        return 0
    lo, step = 1, 16
    while lo + step <= n // 2 and converges(lo + step, n, dv, b):
        lo += step
        step *= 2
    hi = min(lo + step, n // 2 + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if converges(mid, n, dv, b):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    n0: int
    profile: tuple[int, ...]
    best_b: tuple[int, ...]
    t_th: int
    trajectory: tuple[float, ...] = field(default=(), repr=False)


def b_range(d: int) -> range:
    return range(math.ceil(d / 2), d)


def _expand(degs: Sequence[int], choice: Sequence[int], dv: Sequence[int]) -> tuple[int, ...]:
    per_degree = dict(zip(degs, choice))
    return tuple(per_degree[d] for d in dv)


@functools.lru_cache(maxsize=4096)
def _opt_cached(n: int, dv: tuple[int, ...], hint: tuple[int, ...] | None) -> tuple[tuple[int, ...], int]:
    degs = sorted(set(dv))
    grid = list(itertools.product(*(b_range(d) for d in degs)))
    best_choice, best_t = None, -1
    if hint is not None:
        hint_choice = tuple(dict(zip(dv, hint))[d] for d in degs)
        if hint_choice in grid:
            best_choice, best_t = hint_choice, bf_threshold(n, dv, _expand(degs, hint_choice, dv))
    for choice in grid:
        if choice == best_choice:
            continue
        b = _expand(degs, choice, dv)
        # a lexicographically smaller choice wins ties
        need = best_t if best_choice is not None and choice < best_choice else best_t + 1
        if need > 0 and not converges(need, n, dv, b):
            continue
        t = bf_threshold(n, dv, b)
        if t > best_t or (t == best_t and (best_choice is None or choice < best_choice)):
            best_choice, best_t = choice, t
    return _expand(degs, best_choice, dv), best_t


def bf_threshold_opt(n: int, profile, hint: Sequence[int] | None = None, trajectory: bool = False) -> ThresholdReport:
    """Threshold under the best fixed decision thresholds.

    Exhaustive over b(d) in [ceil(d/2), d-1] for each distinct degree d; ties
    go to the lexicographically smallest choice (ordered by degree).  ``hint``
    only changes the search order, never the result.
    """
    dv = _degrees(profile)
    best_b, t_th = _opt_cached(int(n), dv, tuple(hint) if hint is not None else None)
    traj = tuple(error_recursion(t_th, n, dv, best_b)[1]) if trajectory else ()
    return ThresholdReport(n=int(n), n0=len(dv), profile=dv, best_b=best_b, t_th=t_th, trajectory=traj)
