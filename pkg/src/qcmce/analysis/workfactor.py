"""Work factors of the dual-code attack (DCA) and the information-set-decoding
attack (ISDA), using Stern's algorithm with the Bernstein-Lange-Peters bit
operation count.

Quasi-cyclic structure helps the attacker in two ways:

* DCA looks for any of the p rows of the public parity-check matrix, all of
  the same weight, so the success probability per iteration is multiplied by
  ``multiplicity = p``.
* ISDA may decode any of the p block-shifted copies of one ciphertext.  Those
  are p syndromes of which one must be decoded, which buys sqrt(p) (decoding
  one out of many), not p.

After that convention, a single additive offset per attack is calibrated so
that the reference anchor weights are exactly the smallest weights reaching
their security level; see :func:`calibrate_offset`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

LOG2 = math.log(2)
REFERENCE_N = 16384
MAX_STERN_P = 20
MAX_WINDOW = 400

# (weight, security bits) pairs the offsets are tied to
DCA_ANCHORS = ((59, 100), (97, 160))
ISDA_ANCHORS = ((47, 100), (79, 160))

# frozen output of calibrate_offset() at n0=4, p=4096
DCA_OFFSET = -0.24
ISDA_OFFSET = 1.20


def log2_binomial(n: float, k: float) -> float:
    if k < 0 or k > n:
        return -math.inf
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / LOG2


def _log2_sum(*xs: float) -> float:
    m = max(xs)
    return m + math.log2(sum(2.0 ** (x - m) for x in xs))


@dataclass(frozen=True)
class ISDCost:
    log2_cost: float
    log2_iterations: float
    log2_iteration_cost: float
    stern_p: int
    window: int

    @property
    def iterations(self) -> float:
        return 2.0**self.log2_iterations


def _stern_point(n: int, k: int, w: int, sp: int, l: int, log2_speedup: float) -> tuple[float, float, float]:
    r = n - k
    kx, ky = k // 2, k - k // 2
    elim = math.log2(0.5 * r * r * (n + k))
    if sp == 0:
        succ = log2_binomial(r, w) - log2_binomial(n, w)
        it_cost = elim
    else:
        lx, ly = log2_binomial(kx, sp), log2_binomial(ky, sp)
        succ = lx + ly + log2_binomial(r - l, w - 2 * sp) - log2_binomial(n, w)
        lists = math.log2(l) + _log2_sum(math.log2(kx - sp + 1), 1 + (lx + ly) / 2)
        collisions = math.log2(2 * sp * r) + lx + ly - l
        it_cost = _log2_sum(elim, lists, collisions)
    succ = min(succ + log2_speedup, 0.0)
    return it_cost - succ, -succ, it_cost


@functools.lru_cache(maxsize=4096)
def isd_cost(n: int, k: int, w: int, multiplicity: int = 1, instances: int = 1) -> ISDCost:
    """Cheapest Stern parameters for finding one weight-w word in an [n, k] code.

    ``multiplicity`` counts target words of weight w (success probability
    scales linearly); ``instances`` counts independent targets of which one
    must be hit (scales with the square root).
    """
    if w == 0:
        elim = math.log2(0.5 * (n - k) ** 2 * (n + k))
        return ISDCost(elim, 0.0, elim, 0, 0)
    if not 0 < w < n - k:
        raise ValueError(f"weight {w} infeasible for an [{n}, {k}] code")
    speedup = math.log2(multiplicity) + 0.5 * math.log2(instances)
    best = None
    for sp in range(0, min(w // 2, MAX_STERN_P) + 1):
        windows = [0] if sp == 0 else range(1, min(n - k - (w - 2 * sp), MAX_WINDOW) + 1)
        for l in windows:
            cost, iters, it_cost = _stern_point(n, k, w, sp, l, speedup)
            if best is None or cost < best.log2_cost:
                best = ISDCost(cost, iters, it_cost, sp, l)
    return best


@dataclass(frozen=True)
class WorkFactorReport:
    attack: str
    log2_wf: float
    isd_params: dict
    speedup_log2: float
    calibration_log2: float


def dca_wf(n0: int, p: int, dv_prime: int, offset: float = DCA_OFFSET) -> WorkFactorReport:
    """Find a row of H' = H Q^T: weight n0*dv' words in the [n0 p, p] dual code."""
    n = n0 * p
    cost = isd_cost(n, p, n0 * dv_prime, multiplicity=p)
    return WorkFactorReport(
        attack="DCA",
        log2_wf=cost.log2_cost + offset,
        isd_params={"n": n, "k": p, "w": n0 * dv_prime, "stern_p": cost.stern_p, "window": cost.window},
        speedup_log2=math.log2(p),
        calibration_log2=offset,
    )


def isda_wf(n0: int, p: int, t_prime: int, offset: float = ISDA_OFFSET) -> WorkFactorReport:
    """Recover the weight-t' intentional error from one of p shifted ciphertexts."""
    n, k = n0 * p, (n0 - 1) * p
    cost = isd_cost(n, k, t_prime, instances=p)
    return WorkFactorReport(
        attack="ISDA",
        log2_wf=cost.log2_cost + offset,
        isd_params={"n": n, "k": k, "w": t_prime, "stern_p": cost.stern_p, "window": cost.window},
        speedup_log2=0.5 * math.log2(p),
        calibration_log2=offset,
    )


def min_weight_for(security_bits: float, wf, n0: int, p: int, max_weight: int = 1000) -> int:
    """Smallest weight whose work factor reaches ``security_bits``."""
    lo, hi = 1, 2
    while wf(n0, p, hi).log2_wf < security_bits:
        lo, hi = hi, hi * 2
        if hi > max_weight:
            raise ValueError(f"{security_bits} bits not reachable below weight {max_weight}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if wf(n0, p, mid).log2_wf >= security_bits:
            hi = mid
        else:
            lo = mid
    return hi if wf(n0, p, lo).log2_wf < security_bits else lo


def calibrate_offset(wf, anchors, n0: int = 4, p: int = REFERENCE_N // 4) -> tuple[float, float, float]:
    """Interval of additive offsets for which every anchor weight is exactly the
    minimal weight reaching its security level; returns (low, high, midpoint)."""
    low, high = -math.inf, math.inf
    for w, sec in anchors:
        at = wf(n0, p, w, offset=0.0).log2_wf
        below = wf(n0, p, w - 1, offset=0.0).log2_wf
        # need below + c < sec <= at + c
        low = max(low, sec - at)
        high = min(high, sec - below)
    if low >= high:
        raise ValueError(f"no single offset fits anchors {anchors}")
    return low, high, (low + high) / 2
