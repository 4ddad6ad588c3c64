"""Finite-shot simulation of the four-input run and statistical analysis of eps."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .bounds import BoundReport, bound_report
from .protocol import LABELS, PreparationLabel, ProbabilityMatrix

#: z-score of the 68% (one sigma) Wilson interval used for zero-count rows
WILSON_Z = 1.0


@dataclass(frozen=True)
class ShotRecord:
    label: PreparationLabel
    shots: int
    counts: tuple[int, int, int, int]
    seed: int

    def __post_init__(self):
        if len(self.counts) != 4 or min(self.counts) < 0:
            raise ValueError(f"counts must be four non-negative integers, got {self.counts}")
        if sum(self.counts) != self.shots:
            raise ValueError(f"counts {self.counts} do not sum to {self.shots} shots")

    def frequencies(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.shots


def _shots_per_row(shots: int | Sequence[int]) -> list[int]:
    per_row = [int(shots)] * len(LABELS) if np.ndim(shots) == 0 else [int(s) for s in shots]
    if len(per_row) != len(LABELS):
        raise ValueError(f"need one shot count per input, got {len(per_row)}")
    if min(per_row) < 1:
        raise ValueError("shots must be at least 1")
    return per_row


def simulate_run(matrix: ProbabilityMatrix, shots: int | Sequence[int], seed: int) -> list[ShotRecord]:
    """Multinomial draw of outcome counts for each input row."""
    rng = np.random.default_rng(seed)
    records = []
    for label, row, n in zip(LABELS, matrix.entries, _shots_per_row(shots)):
        p = np.clip(row, 0.0, None)
        counts = rng.multinomial(n, p / p.sum())
        records.append(ShotRecord(label, n, tuple(int(c) for c in counts), seed))
    return records


def wilson_half_width(count: int, shots: int, z: float = WILSON_Z) -> float:
    p = count / shots
    denom = 1.0 + z * z / shots
    return z / denom * math.sqrt(p * (1 - p) / shots + z * z / (4.0 * shots * shots))


def binomial_error(count: int, shots: int) -> float:
    """Projection-noise standard error; Wilson half-width when the count is zero."""
    if count == 0:
        return wilson_half_width(0, shots)
    p = count / shots
    return math.sqrt(p * (1 - p) / shots)


@dataclass(frozen=True)
class EpsilonReport:
    eps: tuple[float, ...]
    eps_err: tuple[float, ...]
    mean: float | None = None
    mean_err: float | None = None
    mean_err_propagated: float | None = None
    threshold: float | None = None
    sigma_distance: float | None = None
    tail_probability: float | None = None
    shots: tuple[int, ...] | None = field(default=None)

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_epsilons(records: Sequence[ShotRecord], outcome_assignment: Sequence[int]) -> EpsilonReport:
    """Forbidden-outcome rates and their projection-noise errors, ordered by input label."""
    by_label = {r.label: r for r in records}
    missing = [lab.value for lab in LABELS if lab not in by_label]
    if missing:
        raise KeyError(f"no shot record for inputs {missing}")
    eps, err, shots = [], [], []
    for label, column in zip(LABELS, outcome_assignment):
        rec = by_label[label]
        count = rec.counts[column]
        eps.append(count / rec.shots)
        err.append(binomial_error(count, rec.shots))
        shots.append(rec.shots)
    return EpsilonReport(tuple(eps), tuple(err), shots=tuple(shots))


def propagate_mean_error(eps_err: Sequence[float]) -> float:
    """Error on the mean of four independent estimates."""
    e = np.asarray(eps_err, dtype=float)
    return float(np.sqrt(np.sum(e**2)) / len(e))


def normal_tail(sigma: float) -> float:
    """One-sided upper tail of the standard normal."""
    return float(norm.sf(sigma))


def analyze(
    eps: Sequence[float],
    eps_err: Sequence[float],
    kappa: float = 0.01,
    mean_err_override: float | None = None,
    shots: Sequence[int] | None = None,
) -> tuple[EpsilonReport, BoundReport]:
    """Mean forbidden probability, its distance in sigma from the threshold, and the tail.

    ``mean_err`` is the propagated error unless ``mean_err_override`` is
    given; the propagated value is always kept in ``mean_err_propagated``.
    The tail probability is the one-sided normal tail at ``sigma_distance``,
    i.e. the chance of measuring a mean this low if the true mean sat on
    the threshold.
    """
    eps = [float(e) for e in eps]
    eps_err = [float(e) for e in eps_err]
    if len(eps) != 4 or len(eps_err) != 4:
        raise ValueError("need exactly four eps values and four errors")
    if any(not 0.0 <= e <= 1.0 for e in eps):
        raise ValueError("eps values must lie in [0, 1]")
    if any(e < 0 for e in eps_err):
        raise ValueError("errors must be non-negative")
    if shots is not None:
        # zero error bars on zero counts would give an infinite distance
        eps_err = [
            wilson_half_width(round(e * n), n) if err == 0.0 else err
            for e, err, n in zip(eps, eps_err, shots)
        ]

    mean = float(np.mean(eps))
    propagated = propagate_mean_error(eps_err)
    mean_err = propagated if mean_err_override is None else float(mean_err_override)
    bound = bound_report(mean, kappa)
    gap = bound.epsilon_threshold - mean
    if mean_err > 0:
        sigma = gap / mean_err
    else:
        sigma = math.copysign(math.inf, gap) if gap else 0.0
    report = EpsilonReport(
        eps=tuple(eps),
        eps_err=tuple(eps_err),
        mean=mean,
        mean_err=mean_err,
        mean_err_propagated=propagated,
        threshold=bound.epsilon_threshold,
        sigma_distance=sigma,
        tail_probability=normal_tail(sigma),
        shots=None if shots is None else tuple(int(n) for n in shots),
    )
    return report, bound


def analyze_records(
    records: Sequence[ShotRecord], outcome_assignment: Sequence[int], kappa: float
) -> tuple[EpsilonReport, BoundReport]:
    partial = estimate_epsilons(records, outcome_assignment)
    return analyze(partial.eps, partial.eps_err, kappa, shots=partial.shots)
