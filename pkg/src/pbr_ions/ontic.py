"""Ontological models on the Bloch sphere and the Kochen-Specker qubit model.

Densities are closed-form callables ``lambda -> mu(lambda)`` over unit
3-vectors; a :class:`SphereGrid` supplies the quadrature.  All integrals are
accumulated chunk by chunk in node order, so results do not depend on how
the grid is sharded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .quantum import PureState, bloch_vector

DEFAULT_GRID = 2_000_000
CHUNK = 1 << 18
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class SphereGrid:
    """Equal-weight Fibonacci lattice on the unit sphere."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    def chunks(self, chunk: int = CHUNK):
        for start in range(0, self.size, chunk):
            stop = start + chunk
            yield self.nodes[start:stop], self.weights[start:stop]

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray], chunk: int = CHUNK) -> float:
        total = 0.0
        for pts, w in self.chunks(chunk):
            total += float(np.dot(w, fn(pts)))
        return total


@lru_cache(maxsize=8)
def fibonacci_grid(n: int = DEFAULT_GRID) -> SphereGrid:
    if n < 1:
        raise ValueError("grid needs at least one node")
    i = np.arange(n, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = GOLDEN_ANGLE * i
    nodes = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    weights = np.full(n, 4.0 * np.pi / n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphereGrid(nodes, weights)


@dataclass(frozen=True)
class OnticDensity:
    """Probability density ``mu_psi`` over ontic states, with its quantum label."""

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    label: str = "mu"
    bloch: np.ndarray | None = field(default=None, compare=False)
    max_value: float | None = None

    def __call__(self, points) -> np.ndarray:
        return self.func(np.atleast_2d(np.asarray(points, dtype=float)))

    def normalization(self, grid: SphereGrid | None = None) -> float:
        return (grid or fibonacci_grid()).integrate(self.func)


@dataclass(frozen=True)
class ResponseFunction:
    """Outcome probabilities ``xi(k | M, lambda)`` for a fixed measurement ``M``."""

    func: Callable[[int, np.ndarray], np.ndarray] = field(compare=False)
    outcomes: tuple[str, ...] = ("+", "-")
    label: str = "M"

    def __call__(self, k: int, points) -> np.ndarray:
        return self.func(k, np.atleast_2d(np.asarray(points, dtype=float)))


def ks_density(psi: PureState) -> OnticDensity:
    """Kochen-Specker density ``(1/pi) (n.lambda) Theta(n.lambda)``, ``n`` the Bloch vector of psi."""
    n = bloch_vector(psi)
    n.setflags(write=False)

    def mu(points: np.ndarray) -> np.ndarray:
        return np.clip(points @ n, 0.0, None) / np.pi

    return OnticDensity(mu, label=f"KS{tuple(np.round(n, 4))}", bloch=n, max_value=1.0 / np.pi)


def ks_response(basis_vector: PureState) -> ResponseFunction:
    """Deterministic hemisphere rule for the measurement ``{|n>, |n_perp>}``.

    Outcome 0 (``|n>``) fires when ``n.lambda >= 0``; equator ties go to it.
    """
    n = bloch_vector(basis_vector)

    def xi(k: int, points: np.ndarray) -> np.ndarray:
        hit = (points @ n >= 0.0).astype(float)
        if k == 0:
            return hit
        if k == 1:
            return 1.0 - hit
        raise ValueError(f"outcome index must be 0 or 1, got {k}")

    return ResponseFunction(xi, label=f"n={tuple(np.round(n, 4))}")


def model_probability(mu: OnticDensity, response: ResponseFunction, k: int, grid: SphereGrid | None = None) -> float:
    """``int xi(k|M, lambda) mu(lambda) dlambda``."""
    grid = grid or fibonacci_grid()
    return grid.integrate(lambda pts: response(k, pts) * mu.func(pts))


def classical_trace_distance(mu0: OnticDensity, mu1: OnticDensity, grid: SphereGrid | None = None) -> float:
    """``D = 1/2 int |mu0 - mu1|``."""
    grid = grid or fibonacci_grid()
    return 0.5 * grid.integrate(lambda pts: np.abs(mu0.func(pts) - mu1.func(pts)))


def k_overlap(densities: Sequence[OnticDensity], grid: SphereGrid | None = None) -> float:
    """``omega(mu_1, ..., mu_k) = int min_i mu_i``."""
    if len(densities) < 2:
        raise ValueError("k-overlap needs at least two densities")
    grid = grid or fibonacci_grid()
    return grid.integrate(lambda pts: np.min([d.func(pts) for d in densities], axis=0))


def uniform_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_ontic(mu: OnticDensity, seed: int, n: int, batch: int = 1 << 16) -> np.ndarray:
    """Draw ``n`` ontic states from ``mu`` by rejection against the uniform sphere.

    Needs ``mu.max_value``.  The output depends only on ``(seed, n, batch)``.
    """
    if mu.max_value is None or mu.max_value <= 0:
        raise ValueError("rejection sampling needs a positive density bound")
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    have = 0
    while have < n:
        pts = uniform_sphere(rng, batch)
        keep = rng.random(batch) * mu.max_value < mu.func(pts)
        accepted.append(pts[keep])
        have += int(keep.sum())
    return np.concatenate(accepted)[:n]
