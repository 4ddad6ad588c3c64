"""Exact one- and two-qubit quantum mechanics for the ion-trap gate set.

Basis convention
----------------
Single-qubit vectors are stored in the order ``(|1>, |0>)`` where ``|1>`` is
the S1/2 ground level and ``|0>`` the D5/2 level.  Two-qubit vectors are
``kron(qubit1, qubit2)``, so the storage order is ``|11>, |10>, |01>, |00>``.

Pauli operators are the textbook ones with ``|0>`` as the +1 eigenstate of
sigma_z, rewritten in the storage order above.  With this choice the
collective rotation ``U(pi/4, -pi/2)`` maps ``|11>`` to ``|phi0>|phi0>``.

Global phases are never stripped; compare states through ``|<a|b>|`` or
outcome distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-12

#: storage-order labels of the computational outcomes
OUTCOMES_1Q = ("1", "0")
OUTCOMES_2Q = ("11", "10", "01", "00")

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)

KET_1 = np.array([1, 0], dtype=complex)
KET_0 = np.array([0, 1], dtype=complex)


class QuantumError(ValueError):
    """Invalid quantum object or incompatible operands."""


def _check_dim(dim: int) -> None:
    if dim not in (2, 4):
        raise QuantumError(f"dimension must be 2 or 4, got {dim}")


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _check_dim(amps.size)
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > ATOL:
            raise QuantumError(f"state not normalized: sum |a|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes) -> PureState:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_qubits(self) -> int:
        return 1 if self.dim == 2 else 2

    def density(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: PureState) -> complex:
        """Inner product <self|other>."""
        if self.dim != other.dim:
            raise QuantumError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: PureState) -> PureState:
        return PureState(np.kron(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise QuantumError(f"density operator must be square, got {rho.shape}")
        _check_dim(rho.shape[0])
        if not np.allclose(rho, rho.conj().T, atol=ATOL, rtol=0):
            raise QuantumError("density operator is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > ATOL:
            raise QuantumError(f"density operator trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -ATOL:
            raise QuantumError("density operator has negative eigenvalues")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityOperator:
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class Unitary:
    matrix: np.ndarray
    label: str = field(default="U", compare=False)

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise QuantumError(f"unitary must be square, got {u.shape}")
        _check_dim(u.shape[0])
        if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=ATOL, rtol=0):
            raise QuantumError(f"{self.label} is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        """Compose with another unitary (``self`` acts last) or act on a state."""
        if isinstance(other, Unitary):
            if other.dim != self.dim:
                raise QuantumError("cannot compose unitaries of different size")
            return Unitary(self.matrix @ other.matrix, f"{self.label}·{other.label}")
        if isinstance(other, PureState):
            if other.dim != self.dim:
                raise QuantumError("unitary and state dimensions differ")
            return PureState(self.matrix @ other.amplitudes)
        if isinstance(other, DensityOperator):
            if other.dim != self.dim:
                raise QuantumError("unitary and state dimensions differ")
            u = self.matrix
            rho = u @ other.matrix @ u.conj().T
            return DensityOperator((rho + rho.conj().T) / 2)
        return NotImplemented

    def dagger(self) -> Unitary:
        return Unitary(self.matrix.conj().T, f"{self.label}†")


def _rotation_axis(phi: float) -> np.ndarray:
    return np.sin(phi) * SIGMA_Y - np.cos(phi) * SIGMA_X


def _on_qubit(op: np.ndarray, qubit_index: int) -> np.ndarray:
    if qubit_index == 1:
        return np.kron(op, IDENTITY)
    if qubit_index == 2:
        return np.kron(IDENTITY, op)
    raise QuantumError(f"qubit_index must be 1 or 2, got {qubit_index}")


def collective_rotation(theta: float, phi: float, n_qubits: int = 2) -> Unitary:
    """``exp(-i theta/2 sum_i [sin(phi) Y_i - cos(phi) X_i])`` on 1 or 2 qubits."""
    if n_qubits not in (1, 2):
        raise QuantumError(f"n_qubits must be 1 or 2, got {n_qubits}")
    # the axis operator squares to the identity
    single = np.cos(theta / 2) * IDENTITY - 1j * np.sin(theta / 2) * _rotation_axis(phi)
    matrix = single if n_qubits == 1 else np.kron(single, single)
    return Unitary(matrix, f"U({theta:g},{phi:g})")


def ms_gate(theta: float, phi: float) -> Unitary:
    """Two-ion Mølmer-Sørensen gate ``exp(-i theta/4 [A_1 + A_2]^2)``.

    With ``A`` the rotation axis operator, ``(A_1 + A_2)^2 = 2 + 2 A_1 A_2``,
    so the exponential is ``e^{-i theta/2} (cos(theta/2) - i sin(theta/2) A⊗A)``.
    """
    a = _rotation_axis(phi)
    aa = np.kron(a, a)
    matrix = np.exp(-0.5j * theta) * (np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * aa)
    return Unitary(matrix, f"MS({theta:g},{phi:g})")


def z_rotation(qubit_index: int, theta: float, n_qubits: int = 2) -> Unitary:
    """Addressed phase rotation ``exp(-i theta/2 Z)`` on one ion."""
    single = np.diag(np.exp(-0.5j * theta * np.diag(SIGMA_Z).real))
    if n_qubits == 1:
        if qubit_index != 1:
            raise QuantumError(f"qubit_index must be 1 for a single qubit, got {qubit_index}")
        return Unitary(single, f"Uz({theta:g})")
    if n_qubits != 2:
        raise QuantumError(f"n_qubits must be 1 or 2, got {n_qubits}")
    return Unitary(_on_qubit(single, qubit_index), f"Uz{qubit_index}({theta:g})")


_H = np.array([[-1, 1], [1, 1]], dtype=complex) / np.sqrt(2)


def hadamard(qubit_index: int | None = None, n_qubits: int = 2) -> Unitary:
    """Hadamard on one qubit, or on every qubit when ``qubit_index`` is None."""
    if n_qubits == 1:
        return Unitary(_H, "H")
    if qubit_index is None:
        return Unitary(np.kron(_H, _H), "H⊗H")
    return Unitary(_on_qubit(_H, qubit_index), f"H{qubit_index}")


def controlled_phase(alpha: float) -> Unitary:
    """``R_alpha``: multiplies only the ``|11>`` amplitude by ``e^{i alpha}``."""
    diag = np.ones(4, dtype=complex)
    diag[OUTCOMES_2Q.index("11")] = np.exp(1j * alpha)
    return Unitary(np.diag(diag), f"R({alpha:g})")


def diag_z_beta(beta: float, qubit_index: int | None = None, n_qubits: int = 2) -> Unitary:
    """``Z_beta = |0><0| + e^{i beta}|1><1|``; on both qubits when ``qubit_index`` is None."""
    single = np.diag([np.exp(1j * beta), 1.0]).astype(complex)
    if n_qubits == 1:
        return Unitary(single, f"Zβ({beta:g})")
    if qubit_index is None:
        return Unitary(np.kron(single, single), f"Zβ⊗Zβ({beta:g})")
    return Unitary(_on_qubit(single, qubit_index), f"Zβ{qubit_index}({beta:g})")


def born_probabilities(state: PureState | DensityOperator) -> np.ndarray:
    """Computational-basis outcome probabilities in storage order."""
    if isinstance(state, PureState):
        probs = np.abs(state.amplitudes) ** 2
    elif isinstance(state, DensityOperator):
        probs = np.diag(state.matrix).real.copy()
    else:
        raise TypeError(f"expected PureState or DensityOperator, got {type(state).__name__}")
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise QuantumError(f"probabilities sum to {total!r}")
    return np.clip(probs, 0.0, None)


def fidelity(psi0: PureState, psi1: PureState) -> float:
    return abs(psi0.overlap(psi1)) ** 2


def quantum_trace_distance(psi0: PureState, psi1: PureState) -> float:
    """Trace distance between pure states, ``sqrt(1 - |<psi0|psi1>|^2)``."""
    f = fidelity(psi0, psi1)
    return float(np.sqrt(max(0.0, 1.0 - f)))


def depolarize(state: PureState | DensityOperator, p: float) -> DensityOperator:
    """Mix ``state`` with the maximally mixed state: ``(1-p) rho + p I/d``."""
    if not 0.0 <= p <= 1.0:
        raise QuantumError(f"depolarizing probability must lie in [0, 1], got {p}")
    rho = state.density() if isinstance(state, PureState) else state
    d = rho.dim
    return DensityOperator((1 - p) * rho.matrix + p * np.eye(d) / d)


def reduced_density(state: PureState, keep: int) -> DensityOperator:
    """Partial trace of a two-qubit pure state down to qubit ``keep``."""
    if state.dim != 4:
        raise QuantumError("partial trace needs a two-qubit state")
    psi = state.amplitudes.reshape(2, 2)
    if keep == 1:
        rho = psi @ psi.conj().T
    elif keep == 2:
        rho = psi.T @ psi.conj()
    else:
        raise QuantumError(f"keep must be 1 or 2, got {keep}")
    return DensityOperator(rho)


def bloch_vector(state: PureState) -> np.ndarray:
    """Unit Bloch vector ``(<X>, <Y>, <Z>)`` of a single-qubit pure state."""
    if state.dim != 2:
        raise QuantumError("Bloch vector is defined for single qubits only")
    a = state.amplitudes
    vec = np.array([np.vdot(a, s @ a).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])
    return vec / np.linalg.norm(vec)


def state_from_bloch(vec) -> PureState:
    """Pure qubit state whose Bloch vector is ``vec`` (fixed global phase)."""
    x, y, z = np.asarray(vec, dtype=float) / np.linalg.norm(vec)
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    # |0> is the +z pole
    return PureState(np.cos(theta / 2) * KET_0 + np.exp(1j * phi) * np.sin(theta / 2) * KET_1)
