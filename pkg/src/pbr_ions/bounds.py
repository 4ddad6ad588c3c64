"""Overlap inequalities linking forbidden-outcome rates to classical trace distances.

For the four preparations ``phi0 phi0, phi0' phi1, phi1 phi0', phi1' phi1'``
any preparation-independent ontological model that reproduces mean
forbidden probability ``eps`` must satisfy

    D(mu0, mu1) + D(mu0, mu0') + D(mu1, mu1') >= 1 - 2 sqrt(eps).

The chain behind it is

    omega_joint >= omega4^2                       (product densities)
    omega4      >= omega01 + omega00' + omega11' - 2   (min4 lemma)
    omega_joint <= 4 eps                          (forbidden outcomes)

with ``omega4 = omega(mu0, mu0', mu1, mu1')`` and ``D = 1 - omega`` for pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .ontic import OnticDensity, SphereGrid, fibonacci_grid
from .protocol import phi_states
from .quantum import quantum_trace_distance

CHAIN_GRID = 10_000


class QuadratureError(RuntimeError):
    """A chain inequality failed beyond quadrature tolerance."""


def min4_lemma_gap(a: float, b: float, c: float, d: float) -> float:
    """``min(a,b,c,d) - [min(a,b) + min(b,c) + min(c,d) - b - c]``; never negative."""
    return min(a, b, c, d) - (min(a, b) + min(b, c) + min(c, d) - b - c)


def min4_lemma_gap_array(a, b, c, d) -> np.ndarray:
    a, b, c, d = map(np.asarray, (a, b, c, d))
    lower = np.minimum(a, b) + np.minimum(b, c) + np.minimum(c, d) - b - c
    return np.minimum(np.minimum(a, b), np.minimum(c, d)) - lower


def theorem_rhs(epsilon: float) -> float:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    return 1.0 - 2.0 * np.sqrt(epsilon)


def quantum_distances(kappa: float) -> dict[str, float]:
    """The three quantum trace distances entering the bound."""
    phi = phi_states(kappa)
    return {
        "D(phi0,phi1)": quantum_trace_distance(phi["phi0"], phi["phi1"]),
        "D(phi0,phi0')": quantum_trace_distance(phi["phi0"], phi["phi0'"]),
        "D(phi1,phi1')": quantum_trace_distance(phi["phi1"], phi["phi1'"]),
    }


def threshold_from_sum(distance_sum: float) -> float:
    return max(0.0, (1.0 - distance_sum) / 2.0) ** 2


def epsilon_threshold(kappa: float) -> float:
    """Smallest mean forbidden probability allowed when every ``D`` equals its quantum value."""
    if kappa < 0:
        raise ValueError(f"kappa must be non-negative, got {kappa}")
    return threshold_from_sum(sum(quantum_distances(kappa).values()))


@dataclass(frozen=True)
class BoundReport:
    epsilon_mean: float
    rhs: float
    quantum_distance_sum: float
    epsilon_threshold: float
    violated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(epsilon_mean: float, kappa: float) -> BoundReport:
    """Compare a measured mean forbidden probability with the equal-distance hypothesis.

    ``violated`` means the data exclude models whose classical trace
    distances equal the quantum ones.
    """
    s = sum(quantum_distances(kappa).values())
    threshold = threshold_from_sum(s)
    return BoundReport(
        epsilon_mean=float(epsilon_mean),
        rhs=theorem_rhs(epsilon_mean),
        quantum_distance_sum=s,
        epsilon_threshold=threshold,
        violated=bool(epsilon_mean < threshold),
    )


def nonidentical_bound(distances_a: Sequence[float], distances_b: Sequence[float], epsilon: float) -> bool:
    """Whether per-ion trace distances are consistent with forbidden rate ``epsilon``.

    Checks ``(1 - sum a)(1 - sum b) <= 4 eps``; a negative factor makes the
    bound vacuous and is clamped to zero.
    """
    if len(distances_a) != 3 or len(distances_b) != 3:
        raise ValueError("expected three trace distances per ion")
    fa = max(0.0, 1.0 - float(sum(distances_a)))
    fb = max(0.0, 1.0 - float(sum(distances_b)))
    return fa * fb <= 4.0 * epsilon


# -- chain verification -------------------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    omega_joint: float
    omega4: float
    omega_0_1: float
    omega_0_0p: float
    omega_1_1p: float
    d_0_1: float
    d_0_0p: float
    d_1_1p: float
    norms: tuple[float, float, float, float]
    product_slack: float  # omega_joint - omega4^2
    lemma_slack: float    # omega4 - (pair overlaps - norm(mu0) - norm(mu1))
    identity_gap: float   # max |D + omega - 1| over the three pairs
    epsilon_lower_bound_joint: float
    epsilon_lower_bound_chain: float

    def to_dict(self) -> dict:
        return asdict(self)


def _joint_overlap(v0, v0p, v1, v1p, weights, rows: int = 256) -> float:
    """4-overlap of the product densities A..D on the product grid."""
    total = 0.0
    w = np.asarray(weights)
    for start in range(0, len(w), rows):
        sl = slice(start, start + rows)
        m = np.minimum(
            np.minimum(np.outer(v0[sl], v0), np.outer(v0p[sl], v1)),
            np.minimum(np.outer(v1[sl], v0p), np.outer(v1p[sl], v1p)),
        )
        total += float(w[sl] @ m @ w)
    return total


def chain_from_values(v0, v0p, v1, v1p, weights) -> ChainReport:
    """Evaluate every link of the chain for densities sampled on a weighted node set."""
    v0, v0p, v1, v1p, w = (np.asarray(x, dtype=float) for x in (v0, v0p, v1, v1p, weights))
    norms = tuple(float(w @ v) for v in (v0, v0p, v1, v1p))

    def omega(*vals):
        return float(w @ np.min(vals, axis=0))

    def dist(a, b):
        return 0.5 * float(w @ np.abs(a - b))

    omega4 = omega(v0, v0p, v1, v1p)
    o01, o00p, o11p = omega(v0, v1), omega(v0, v0p), omega(v1, v1p)
    d01, d00p, d11p = dist(v0, v1), dist(v0, v0p), dist(v1, v1p)
    omega_joint = _joint_overlap(v0, v0p, v1, v1p, w)
    # lemma with (A, B, C, D) = (mu0', mu0, mu1, mu1')
    lemma_lower = o00p + o01 + o11p - norms[0] - norms[2]
    return ChainReport(
        omega_joint=omega_joint,
        omega4=omega4,
        omega_0_1=o01,
        omega_0_0p=o00p,
        omega_1_1p=o11p,
        d_0_1=d01,
        d_0_0p=d00p,
        d_1_1p=d11p,
        norms=norms,
        product_slack=omega_joint - omega4**2,
        lemma_slack=omega4 - lemma_lower,
        identity_gap=max(abs(d + o - 1.0) for d, o in ((d01, o01), (d00p, o00p), (d11p, o11p))),
        epsilon_lower_bound_joint=omega_joint / 4.0,
        epsilon_lower_bound_chain=threshold_from_sum(d01 + d00p + d11p),
    )


def overlap_chain_check(
    mu0: OnticDensity,
    mu0p: OnticDensity,
    mu1: OnticDensity,
    mu1p: OnticDensity,
    grid: SphereGrid | None = None,
    tol: float = 1e-4,
) -> ChainReport:
    """Build the product densities, integrate the joint 4-overlap, and check each link.

    The joint integral runs over the product of ``grid`` with itself, so keep
    the grid small (default ``CHAIN_GRID`` nodes).  Raises
    :class:`QuadratureError` if a link fails by more than ``tol``.
    """
    grid = grid or fibonacci_grid(CHAIN_GRID)
    pts = grid.nodes
    report = chain_from_values(mu0(pts), mu0p(pts), mu1(pts), mu1p(pts), grid.weights)
    failures = []
    if report.product_slack < -tol:
        failures.append(f"omega_joint < omega4^2 by {-report.product_slack:.3g}")
    if report.lemma_slack < -tol:
        failures.append(f"lemma violated by {-report.lemma_slack:.3g}")
    if report.identity_gap > tol:
        failures.append(f"D + omega deviates from 1 by {report.identity_gap:.3g}")
    if failures:
        raise QuadratureError("; ".join(failures))
    return report


def chain_bruteforce(p0, p0p, p1, p1p) -> dict[str, float]:
    """Enumerate the chain on a finite ontic space with counting measure.

    Plain loops over every ``(lambda1, lambda2)`` pair; meant as an oracle for
    :func:`chain_from_values`.
    """
    dists = [list(map(float, p)) for p in (p0, p0p, p1, p1p)]
    q0, q0p, q1, q1p = dists
    n = len(q0)
    if any(len(q) != n for q in dists):
        raise ValueError("all distributions must live on the same ontic space")

    joint = 0.0
    for i, j in itertools.product(range(n), repeat=2):
        joint += min(q0[i] * q0[j], q0p[i] * q1[j], q1[i] * q0p[j], q1p[i] * q1p[j])

    omega4 = sum(min(q0[i], q0p[i], q1[i], q1p[i]) for i in range(n))

    def omega(a, b):
        return sum(min(x, y) for x, y in zip(a, b))

    def dist(a, b):
        return 0.5 * sum(abs(x - y) for x, y in zip(a, b))

    return {
        "omega_joint": joint,
        "omega4": omega4,
        "omega_0_1": omega(q0, q1),
        "omega_0_0p": omega(q0, q0p),
        "omega_1_1p": omega(q1, q1p),
        "d_0_1": dist(q0, q1),
        "d_0_0p": dist(q0, q0p),
        "d_1_1p": dist(q1, q1p),
    }
