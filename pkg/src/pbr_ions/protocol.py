"""Input preparations, the joint measurement, and the outcome-probability matrix.

The four inputs are built by replaying the pulse sequence: a global
``U(pi/4, -pi/2)`` on ``|11>``, then addressed ``Uz(pi)`` pulses.  Each
addressed pulse leaks a coherent ``Uz(kappa*pi)`` onto the neighbouring ion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .quantum import (
    KET_1,
    DensityOperator,
    PureState,
    Unitary,
    born_probabilities,
    collective_rotation,
    controlled_phase,
    depolarize,
    diag_z_beta,
    hadamard,
    ms_gate,
    z_rotation,
)

ZERO_TOL = 1e-12


class ProtocolStructureError(RuntimeError):
    """The ideal zero pattern is not a bijection between inputs and outcomes."""


class PreparationLabel(enum.Enum):
    P00 = "00"
    P0p1 = "0'1"
    P10p = "10'"
    P1p1p = "1'1'"

    @property
    def addressed(self) -> tuple[int, ...]:
        """Ions receiving an addressed ``Uz(pi)`` pulse."""
        return _ADDRESSED[self]


_ADDRESSED = {
    PreparationLabel.P00: (),
    PreparationLabel.P0p1: (2,),
    PreparationLabel.P10p: (1,),
    PreparationLabel.P1p1p: (1, 2),
}

LABELS = tuple(PreparationLabel)


class Circuit(enum.Enum):
    HCZ = "hcz"
    MS = "ms"


@dataclass(frozen=True)
class CrosstalkConfig:
    kappa: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 0.5:
            raise ValueError(f"kappa must lie in [0, 0.5], got {self.kappa}")


def phi_states(kappa: float = 0.0) -> dict[str, PureState]:
    """Closed-form single-ion states ``phi0, phi1, phi0', phi1'``."""
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    leak = np.exp(1j * kappa * np.pi)
    return {
        "phi0": PureState([c, s]),
        "phi1": PureState([c, -s]),
        "phi0'": PureState([leak * c, s]),
        "phi1'": PureState([leak * c, -s]),
    }


def closed_form_input(label: PreparationLabel, kappa: float) -> PureState:
    """Product state the pulse sequence should produce, up to global phase."""
    phi = phi_states(kappa)
    left, right = {
        PreparationLabel.P00: ("phi0", "phi0"),
        PreparationLabel.P0p1: ("phi0'", "phi1"),
        PreparationLabel.P10p: ("phi1", "phi0'"),
        PreparationLabel.P1p1p: ("phi1'", "phi1'"),
    }[label]
    return phi[left].tensor(phi[right])


def preparation_sequence(label: PreparationLabel, config: CrosstalkConfig) -> Unitary:
    seq = collective_rotation(np.pi / 4, -np.pi / 2, n_qubits=2)
    for ion in label.addressed:
        neighbour = 2 if ion == 1 else 1
        seq = z_rotation(ion, np.pi) @ seq
        if config.kappa:
            seq = z_rotation(neighbour, config.kappa * np.pi) @ seq
    return seq


def prepare_input(label: PreparationLabel, config: CrosstalkConfig = CrosstalkConfig(0.0)) -> PureState:
    ground = PureState(np.kron(KET_1, KET_1))
    return preparation_sequence(label, config) @ ground


def measurement_circuit(alpha: float = np.pi, beta: float = 0.0) -> Unitary:
    """``(H⊗H) R_alpha (Z_beta⊗Z_beta)``, to be followed by a basis measurement."""
    return hadamard() @ controlled_phase(alpha) @ diag_z_beta(beta)


#: collective z phase inserted between the carrier and MS pulses
MS_LOCAL_PHASE = np.pi / 2


def measurement_circuit_ms(local_phase: float = MS_LOCAL_PHASE) -> Unitary:
    """Native-gate form of the measurement: ``U(pi/2, pi)`` then ``MS(pi/2, 0)``.

    A collective ``Uz(local_phase)`` sits between the two pulses.  Without it
    (``local_phase=0``) the outcome statistics differ from the H/CZ circuit;
    with ``pi/2`` the two agree on every input because the remaining
    difference is a diagonal phase just before the measurement.
    """
    seq = collective_rotation(np.pi / 2, np.pi, n_qubits=2)
    if local_phase:
        seq = z_rotation(2, local_phase) @ z_rotation(1, local_phase) @ seq
    return ms_gate(np.pi / 2, 0.0) @ seq


def circuit_unitary(circuit: Circuit | str) -> Unitary:
    circuit = Circuit(circuit)
    if circuit is Circuit.HCZ:
        return measurement_circuit(np.pi, 0.0)
    return measurement_circuit_ms()


def outcome_distribution(state: PureState | DensityOperator, circuit: Circuit | str = Circuit.HCZ) -> np.ndarray:
    return born_probabilities(circuit_unitary(circuit) @ state)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Rows follow ``LABELS``; columns follow the outcomes ``11, 10, 01, 00``."""

    entries: np.ndarray
    outcome_assignment: tuple[int, ...]
    kappa: float = 0.0
    noise_p: float = 0.0
    circuit: str = Circuit.HCZ.value

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.shape != (4, 4):
            raise ValueError(f"probability matrix must be 4x4, got {entries.shape}")
        if not np.allclose(entries.sum(axis=1), 1.0, atol=1e-10, rtol=0):
            raise ValueError("probability matrix rows must sum to 1")
        if entries.min() < -ZERO_TOL:
            raise ValueError("probability matrix has negative entries")
        if sorted(self.outcome_assignment) != [0, 1, 2, 3]:
            raise ProtocolStructureError(f"outcome assignment {self.outcome_assignment} is not a bijection")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "outcome_assignment", tuple(int(j) for j in self.outcome_assignment))


def find_outcome_assignment(entries: np.ndarray, tol: float = ZERO_TOL) -> tuple[int, ...]:
    """Locate the single vanishing outcome of each row; fail unless it is a bijection."""
    assignment = []
    for k, row in enumerate(np.asarray(entries)):
        zeros = np.flatnonzero(row < tol)
        if zeros.size != 1:
            raise ProtocolStructureError(f"row {k} has {zeros.size} vanishing outcomes, expected exactly 1")
        assignment.append(int(zeros[0]))
    if len(set(assignment)) != len(assignment):
        raise ProtocolStructureError(f"forbidden outcomes {assignment} are not pairwise distinct")
    return tuple(assignment)


def _raw_matrix(kappa: float, noise_p: float, circuit: Circuit) -> np.ndarray:
    config = CrosstalkConfig(kappa)
    u = circuit_unitary(circuit)
    rows = []
    for label in LABELS:
        psi = prepare_input(label, config)
        state = depolarize(psi, noise_p) if noise_p else psi
        rows.append(born_probabilities(u @ state))
    return np.array(rows)


def probability_matrix(
    config: CrosstalkConfig = CrosstalkConfig(0.0),
    noise_p: float = 0.0,
    circuit: Circuit | str = Circuit.HCZ,
) -> ProbabilityMatrix:
    circuit = Circuit(circuit)
    assignment = find_outcome_assignment(_raw_matrix(0.0, 0.0, circuit))
    entries = _raw_matrix(config.kappa, noise_p, circuit)
    return ProbabilityMatrix(entries, assignment, config.kappa, noise_p, circuit.value)


def forbidden_probabilities(matrix: ProbabilityMatrix) -> np.ndarray:
    """``(eps_1, ..., eps_4)``: each row's probability on its forbidden outcome."""
    return np.array([matrix.entries[k, j] for k, j in enumerate(matrix.outcome_assignment)])


#: forbidden outcome column per input, discovered at kappa = 0 and frozen
FORBIDDEN_OUTCOME = {
    PreparationLabel.P00: 3,    # |00>
    PreparationLabel.P0p1: 2,   # |01>
    PreparationLabel.P10p: 1,   # |10>
    PreparationLabel.P1p1p: 0,  # |11>
}


def calibrate_noise(target_mean: float, kappa: float = 0.01, circuit: Circuit | str = Circuit.HCZ) -> float:
    """Depolarizing strength giving a mean forbidden probability of ``target_mean``.

    Depolarizing is affine in ``p`` and sends every outcome to 1/4, so each
    forbidden probability is ``(1-p) eps_k + p/4`` and the mean inverts exactly.
    """
    base = forbidden_probabilities(probability_matrix(CrosstalkConfig(kappa), 0.0, circuit)).mean()
    if not base <= target_mean <= 0.25:
        raise ValueError(f"target mean {target_mean} outside reachable range [{base:.3g}, 0.25]")
    return float((target_mean - base) / (0.25 - base))
