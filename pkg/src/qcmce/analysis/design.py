"""Four-step parameter design: security level -> (dv', t') -> m -> t -> p."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..codes import DegreeProfile
from ..errors import DesignError
from .threshold import _degrees, bf_threshold_opt
from .workfactor import REFERENCE_N, dca_wf, isda_wf, min_weight_for

SECURITY_RANGE = (48.0, 256.0)
P_MAX = 1 << 17

# mode -> (grid denominator as a power of n0, rounding, default threshold step)
#   paper        1/n0^2 grid, nearest; threshold target rounded up to a multiple of 25
#   paper-up     1/n0^2 grid, round up, exact threshold target
#   realizable   1/n0 grid, round up, exact threshold target
ROUNDING_MODES = {
    "paper": (2, "nearest", 25),
    "paper-up": (2, "up", 1),
    "realizable": (1, "up", 1),
}


@dataclass(frozen=True)
class DesignResult:
    security_bits: float
    profile: tuple[int, ...]
    rounding_mode: str
    dv_prime: int
    t_prime: int
    m: Fraction
    t: int
    threshold_target: int
    p: int
    n: int
    t_th: int
    best_b: tuple[int, ...]
    key_size_bits: int
    dca_log2: float
    isda_log2: float
    warnings: tuple[str, ...] = field(default=())

    def as_records(self) -> list[tuple[str, str]]:
        return [
            ("security_bits", f"{self.security_bits:g}"),
            ("profile", ",".join(map(str, self.profile))),
            ("rounding_mode", self.rounding_mode),
            ("dv_prime", str(self.dv_prime)),
            ("t_prime", str(self.t_prime)),
            ("m", f"{self.m} ({float(self.m):g})"),
            ("t", str(self.t)),
            ("threshold_target", str(self.threshold_target)),
            ("p", str(self.p)),
            ("n", str(self.n)),
            ("t_th", str(self.t_th)),
            ("best_b", ",".join(map(str, self.best_b))),
            ("key_size_bits", str(self.key_size_bits)),
            ("dca_log2_wf", f"{self.dca_log2:.2f}"),
            ("isda_log2_wf", f"{self.isda_log2:.2f}"),
        ] + [("warning", w) for w in self.warnings]


def round_m(dv_prime: int, dv_avg: Fraction, n0: int, mode: str) -> Fraction:
    if mode not in ROUNDING_MODES:
        raise DesignError(f"unknown rounding mode {mode!r}; choose from {sorted(ROUNDING_MODES)}")
    power, how, _ = ROUNDING_MODES[mode]
    grid = n0**power
    exact = Fraction(dv_prime) / dv_avg * grid
    if how == "up":
        steps = math.ceil(exact)
    else:
        # ties go up, so the result never undershoots by more than half a step
        steps = math.floor(exact + Fraction(1, 2))
    return Fraction(steps, grid)


def smallest_length(target: int, dv: Sequence[int], p_lo: int, p_max: int = P_MAX):
    """Smallest p with bf_threshold_opt(n0 p) >= target, assuming the threshold
    is non-decreasing in p.  Returns (p, report)."""
    n0 = len(dv)
    p_min = max(dv) + 1

    def th(p):
        return bf_threshold_opt(n0 * p, dv)

    probe = th(p_lo)
    # the threshold grows about linearly in n, which gives a close first guess
    guess = max(p_min, math.ceil(p_lo * target / max(probe.t_th, 1)))
    lo, hi = None, None
    step = max(1, guess // 100)
    r = th(guess)
    if r.t_th >= target:
        hi = guess
        while lo is None:
            cand = max(p_min, hi - step)
            if cand == hi:
                break
            if th(cand).t_th >= target:
                hi, step = cand, step * 2
            else:
                lo = cand
    else:
        lo = guess
        while hi is None:
            cand = lo + step
            if cand > p_max:
                raise DesignError(f"threshold {target} not reached for p <= {p_max}")
            if th(cand).t_th >= target:
                hi = cand
            else:
                lo, step = cand, step * 2
    while lo is not None and hi - lo > 1:
        mid = (lo + hi) // 2
        if th(mid).t_th >= target:
            hi = mid
        else:
            lo = mid
    return hi, th(hi)


def design_parameters(
    security_bits: float,
    profile,
    rounding_mode: str = "paper",
    threshold_step: int | None = None,
    reference_n: int = REFERENCE_N,
) -> DesignResult:
    """Run the design procedure for one H column-weight profile.

    Work factors are inverted at the reference length ``reference_n`` (their
    dependence on n is weak).  ``threshold_step`` rounds the threshold target
    up to a multiple of itself; the default depends on ``rounding_mode``.
    """
    lo_sec, hi_sec = SECURITY_RANGE
    if not lo_sec <= security_bits <= hi_sec:
        raise DesignError(f"security level {security_bits} outside tabulated range [{lo_sec:g}, {hi_sec:g}]")
    if rounding_mode not in ROUNDING_MODES:
        raise DesignError(f"unknown rounding mode {rounding_mode!r}; choose from {sorted(ROUNDING_MODES)}")
    dv = _degrees(profile)
    n0 = len(dv)
    if n0 < 2:
        raise DesignError("design needs at least two blocks")
    p_ref = reference_n // n0
    dv_prime = min_weight_for(security_bits, dca_wf, n0, p_ref)
    t_prime = min_weight_for(security_bits, isda_wf, n0, p_ref)

    dv_avg = Fraction(sum(dv), n0)
    m = round_m(dv_prime, dv_avg, n0, rounding_mode)
    if m < 1:
        raise DesignError(f"m={m} below 1: security level too low for d_v={dv_avg}")
    t = math.ceil(m * t_prime)
    step = ROUNDING_MODES[rounding_mode][2] if threshold_step is None else int(threshold_step)
    if step < 1:
        raise DesignError("threshold_step must be positive")
    target = -(-t // step) * step

    p, report = smallest_length(target, dv, p_ref)
    try:
        DegreeProfile(dv, p)
    except Exception as exc:
        raise DesignError(str(exc)) from exc

    notes = []
    if (m * n0).denominator != 1:
        notes.append(f"m={m} is not a multiple of 1/{n0}; keygen realizes {Fraction(math.ceil(m * n0), n0)}")
    if Fraction(dv_prime) / dv_avg != m:
        notes.append(f"m rounded from dv'/d_v = {float(Fraction(dv_prime) / dv_avg):.4f}")
    return DesignResult(
        security_bits=float(security_bits),
        profile=dv,
        rounding_mode=rounding_mode,
        dv_prime=dv_prime,
        t_prime=t_prime,
        m=m,
        t=t,
        threshold_target=target,
        p=p,
        n=n0 * p,
        t_th=report.t_th,
        best_b=report.best_b,
        key_size_bits=(n0 - 1) * p,
        dca_log2=dca_wf(n0, p_ref, dv_prime).log2_wf,
        isda_log2=isda_wf(n0, p_ref, t_prime).log2_wf,
        warnings=tuple(notes),
    )
