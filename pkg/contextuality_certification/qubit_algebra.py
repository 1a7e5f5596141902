"""Dense 2x2 / 4x4 Hermitian operator algebra for qubit pairs.

Operators are plain complex128 ``numpy`` arrays; helpers here validate shapes,
decompose into Pauli components and diagonalize without calling LAPACK.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, InputValidationError

logger = logging.getLogger(__name__)

ALGEBRA_TOL = 1e-9
SYMMETRY_TOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _op in (IDENTITY2, *PAULIS):
    _op.flags.writeable = False


class BlochVec(NamedTuple):
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, values) -> "BlochVec":
        arr = np.asarray(values, dtype=float).reshape(3)
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class EigenPair:
    """Ascending eigenvalues with the matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def max_value(self) -> float:
        return float(self.values[-1])

    @property
    def top_vector(self) -> np.ndarray:
        return self.vectors[:, -1]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


class PovmCheck(NamedTuple):
    valid: bool
    max_violation: float


def frozen(matrix: np.ndarray) -> np.ndarray:
    matrix.flags.writeable = False
    return matrix


def as_cmat(entries, dims=(2, 4)) -> np.ndarray:
    """Copy ``entries`` into a read-only complex matrix of an allowed size."""
    matrix = np.array(entries, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] not in dims:
        raise InputValidationError(f"expected a square matrix of size {dims}, got shape {matrix.shape}")
    return frozen(matrix)


def _scale(matrix: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(matrix))))


def is_hermitian(matrix: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T)) <= tol * _scale(matrix))


def pauli_from_bloch(n: BlochVec, eta: float = 1.0) -> np.ndarray:
    """Return eta * (n . sigma); eta = 1 is a sharp +-1 observable."""
    norm = BlochVec(*n).norm()
    if abs(norm - 1.0) > SYMMETRY_TOL:
        raise InputValidationError(f"axis-unit-norm: axis {tuple(n)} has norm {norm!r}")
    if not 0.0 <= eta <= 1.0:
        raise InputValidationError(f"sharpness eta={eta!r} outside [0, 1]")
    return frozen(eta * (n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z))


def bloch_operator(vector) -> np.ndarray:
    """w . sigma for an arbitrary (not necessarily unit) real 3-vector."""
    w = np.asarray(vector, dtype=float)
    return w[0] * SIGMA_X + w[1] * SIGMA_Y + w[2] * SIGMA_Z


def pauli_components(matrix: np.ndarray) -> tuple[float, BlochVec]:
    """Split a 2x2 operator as c0 * I + w . sigma (real parts only)."""
    if matrix.shape != (2, 2):
        raise InputValidationError(f"Pauli decomposition needs a 2x2 operator, got {matrix.shape}")
    c0 = float(np.trace(matrix).real) / 2.0
    w = [float(np.trace(matrix @ sigma).real) / 2.0 for sigma in PAULIS]
    return c0, BlochVec(*w)


def _qubit_eigen(matrix: np.ndarray) -> EigenPair:
    # closed form: eigenvalues c0 -/+ |w|, eigenvectors the spin states along +-w
    c0, w = pauli_components(matrix)
    radius = w.norm()
    if radius <= SYMMETRY_TOL * _scale(matrix):
        return EigenPair(np.array([c0, c0]), np.eye(2, dtype=complex))
    nx, ny, nz = (component / radius for component in w)
    if nz >= 0.0:
        up = np.array([1.0 + nz, nx + 1j * ny], dtype=complex)
    else:
        up = np.array([nx - 1j * ny, 1.0 - nz], dtype=complex)
    up /= np.linalg.norm(up)
    down = np.array([-np.conj(up[1]), np.conj(up[0])], dtype=complex)
    return EigenPair(np.array([c0 - radius, c0 + radius]), np.column_stack([down, up]))


def _off_diagonal_norm(matrix: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(matrix - np.diag(np.diag(matrix))) ** 2)))


def _jacobi_eigen(matrix: np.ndarray) -> EigenPair:
    """Cyclic complex Jacobi rotations until the off-diagonal part vanishes."""
    a = np.array(matrix, dtype=complex)
    dim = a.shape[0]
    v = np.eye(dim, dtype=complex)
    target = JACOBI_TOL * _scale(matrix)
    sweeps = 0
    while _off_diagonal_norm(a) > target:
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise ConsistencyError(f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                magnitude = abs(a[p, q])
                if magnitude <= target * 1e-3:
                    continue
                phase = a[p, q] / magnitude
                theta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(dim, dtype=complex)
                rot[p, p] = c
                rot[p, q] = s
                rot[q, p] = -s * np.conj(phase)
                rot[q, q] = c * np.conj(phase)
                a = rot.conj().T @ a @ rot
                v = v @ rot
    logger.debug("Jacobi converged after %d sweeps", sweeps)
    values = np.diag(a).real
    order = np.argsort(values, kind="stable")
    return EigenPair(values[order], v[:, order])


def herm_eigen(matrix: np.ndarray) -> EigenPair:
    """Spectral decomposition of a 2x2 or 4x4 Hermitian operator."""
    m = np.asarray(matrix, dtype=complex)
    if m.shape not in ((2, 2), (4, 4)):
        raise InputValidationError(f"herm_eigen supports 2x2 and 4x4 operators, got {m.shape}")
    if not is_hermitian(m):
        raise InputValidationError("operator is not Hermitian within 1e-12")
    m = (m + m.conj().T) / 2.0
    pair = _qubit_eigen(m) if m.shape == (2, 2) else _jacobi_eigen(m)
    return EigenPair(frozen(pair.values), frozen(pair.vectors))


def lambda_max(matrix: np.ndarray) -> float:
    return herm_eigen(matrix).max_value


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.shape(a) != (2, 2) or np.shape(b) != (2, 2):
        raise InputValidationError("tensor expects two 2x2 operators")
    return frozen(np.kron(a, b))


def _split(r: np.ndarray) -> np.ndarray:
    if np.shape(r) != (4, 4):
        raise InputValidationError(f"partial trace expects a 4x4 operator, got {np.shape(r)}")
    return np.asarray(r, dtype=complex).reshape(2, 2, 2, 2)


def partial_trace_A(r: np.ndarray) -> np.ndarray:
    return frozen(np.einsum("ijil->jl", _split(r)))


def partial_trace_B(r: np.ndarray) -> np.ndarray:
    return frozen(np.einsum("ijkj->ik", _split(r)))


def expectation(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.trace(rho @ op).real)


def correlation_tensor(rho: np.ndarray) -> np.ndarray:
    """T[i, j] = Tr[rho sigma_i (x) sigma_j]."""
    return np.array([[expectation(rho, np.kron(si, sj)) for sj in PAULIS] for si in PAULIS])


def pure_density(amplitudes: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if psi.shape != (4,) or norm == 0.0:
        raise InputValidationError("a pure two-qubit state needs 4 amplitudes, not all zero")
    psi = psi / norm
    return frozen(np.outer(psi, psi.conj()))


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(herm_eigen(matrix).values[0])


def is_valid_povm(elems: Sequence[np.ndarray]) -> PovmCheck:
    """PSD elements summing to the identity, both within ALGEBRA_TOL."""
    if not elems:
        raise InputValidationError("a POVM needs at least one element")
    dim = np.shape(elems[0])
    if any(np.shape(e) != dim for e in elems):
        raise InputValidationError("POVM elements have mismatched dimensions")
    negativity = max(0.0, *(-min_eigenvalue(e) for e in elems))
    completeness = float(np.max(np.abs(sum(elems) - np.eye(dim[0]))))
    violation = max(negativity, completeness)
    return PovmCheck(violation <= ALGEBRA_TOL, violation)
