"""Monte-Carlo decoding experiments.

The all-zero codeword is sent through a channel that flips exactly w random
positions; both decoders are symmetric, so this loses no generality.  Every
(profile, decoder, weight) point draws from its own child of one
SeedSequence, so results do not depend on worker count or completion order.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis.threshold import bf_threshold_opt
from .codes import DegreeProfile, generate_h
from .decoders import BfConfig, bf_decode_batch, spa_decode_batch
from .errors import ValidationError
from .gf2 import QcMatrix

CSV_HEADER = ("profile", "decoder", "error_weight", "frames", "frame_errors", "bit_errors")
BATCH = 250


def worker_count() -> int:
    raw = os.environ.get("QCMCE_THREADS", "")
    try:
        return max(1, int(raw)) if raw else min(4, os.cpu_count() or 1)
    except ValueError:
        raise ValidationError(f"QCMCE_THREADS must be an integer, got {raw!r}") from None


def error_patterns(n: int, weight: int, frames: int, rng: np.random.Generator) -> np.ndarray:
    """(frames, n) array, each row uniform over weight-``weight`` vectors."""
    e = np.zeros((frames, n), dtype=np.uint8)
    if weight:
        pos = np.argpartition(rng.random((frames, n)), weight - 1, axis=1)[:, :weight]
        np.put_along_axis(e, pos, 1, axis=1)
    return e


@dataclass(frozen=True)
class PointResult:
    error_weight: int
    frames: int
    frame_errors: int
    bit_errors: int


def run_point(h: QcMatrix, decoder: str, weight: int, frames: int, rng: np.random.Generator, bf: BfConfig | None = None, spa_iters: int = 100) -> PointResult:
    n = h.cols0 * h.p
    fe = be = 0
    for start in range(0, frames, BATCH):
        batch = min(BATCH, frames - start)
        e = error_patterns(n, weight, batch, rng)
        if decoder == "bf":
            out, _, _ = bf_decode_batch(h, e, bf)
        elif decoder == "spa":
            out, _, _ = spa_decode_batch(h, e, min(max(weight, 1) / n, 0.49), spa_iters)
        else:
            raise ValidationError(f"unknown decoder {decoder!r}")
        residual = out.sum(axis=1)
        fe += int((residual > 0).sum())
        be += int(residual.sum())
    return PointResult(weight, frames, fe, be)


@dataclass(frozen=True)
class ExperimentSpec:
    p: int
    profiles: tuple[tuple[int, ...], ...]
    weights: tuple[int, ...]
    decoders: tuple[str, ...] = ("bf", "spa")
    trials: int = 1000
    seed: int = 0
    bf_thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        for d in self.decoders:
            if d not in ("bf", "spa"):
                raise ValidationError(f"unknown decoder {d!r}")
        if self.trials < 0:
            raise ValidationError("trials must be non-negative")


def bf_config_for(h: QcMatrix, override=None) -> BfConfig:
    if override:
        return BfConfig(tuple(override))
    return BfConfig(bf_threshold_opt(h.cols0 * h.p, tuple(h.column_weights())).best_b)


def build_codes(spec: ExperimentSpec) -> list[QcMatrix]:
    seeds = np.random.SeedSequence([spec.seed, 0]).spawn(len(spec.profiles))
    return [generate_h(DegreeProfile(prof, spec.p), np.random.default_rng(s)) for prof, s in zip(spec.profiles, seeds)]


def run_experiment(spec: ExperimentSpec, codes: list[QcMatrix] | None = None) -> list[tuple]:
    codes = build_codes(spec) if codes is None else codes
    jobs = []
    for pi, (prof, h) in enumerate(zip(spec.profiles, codes)):
        bf = bf_config_for(h, spec.bf_thresholds.get(prof)) if "bf" in spec.decoders else None
        for di, dec in enumerate(spec.decoders):
            for wi, w in enumerate(spec.weights):
                seed = np.random.SeedSequence([spec.seed, 1, pi, di, wi])
                jobs.append((prof, dec, h, w, seed, bf))

    def work(job):
        prof, dec, h, w, seed, bf = job
        r = run_point(h, dec, w, spec.trials, np.random.default_rng(seed), bf)
        return (",".join(map(str, prof)), dec, r.error_weight, r.frames, r.frame_errors, r.bit_errors)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(work, jobs))


def rows_to_csv(rows, header=CSV_HEADER) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def measure_capability(
    h: QcMatrix, bf: BfConfig, frames: int, seed: int, start: int = 1, max_weight: int | None = None, max_fer: float = 0.0
) -> int:
    """Largest w such that every weight start..w decodes ``frames`` trials with
    at most ``max_fer`` frame error rate (0 means no failure at all)."""
    n = h.cols0 * h.p
    max_weight = n // 2 if max_weight is None else max_weight
    w = start
    while w <= max_weight:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 2, w]))
        if run_point(h, "bf", w, frames, rng, bf).frame_errors > max_fer * frames:
            return w - 1
        w += 1
    return max_weight
