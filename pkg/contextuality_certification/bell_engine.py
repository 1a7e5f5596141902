"""Bell functional evaluation, Bell operators and quantum maxima."""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputValidationError
from .qubit_algebra import PAULIS, BlochVec, correlation_tensor, frozen, herm_eigen
from .scenario_model import Scenario

logger = logging.getLogger(__name__)

SEESAW_TOL = 1e-10
SEESAW_MAX_SWEEPS = 10_000
_DEGENERATE_NORM = 1e-12


# --- Results ---

@dataclass(frozen=True)
class BellValue:
    value: float
    per_term: np.ndarray


@dataclass(frozen=True)
class SeesawResult:
    value: float
    alice_axes: tuple
    bob_axes: tuple
    state: np.ndarray
    iterations: int
    converged: bool
    trace: tuple = ()


# --- Fixed measurements ---

def correlators(s: Scenario) -> np.ndarray:
    """m x n matrix of <A_x (x) B_y>, unsharpness included."""
    return frozen(s.alice_bloch() @ correlation_tensor(s.state) @ s.bob_bloch().T)


def evaluate(s: Scenario) -> BellValue:
    per_term = correlators(s)
    return BellValue(float(np.sum(s.coeffs * per_term)), per_term)


def _operator_from_bloch(coeffs: np.ndarray, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
    # sum_xy C[x, y] (a_x . sigma) (x) (b_y . sigma) = sum_ij M[i, j] sigma_i (x) sigma_j
    weights = alice.T @ coeffs @ bob
    op = np.zeros((4, 4), dtype=complex)
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            op += weights[i, j] * np.kron(si, sj)
    return op


def bell_operator(s: Scenario) -> np.ndarray:
    return frozen(_operator_from_bloch(s.coeffs, s.alice_bloch(), s.bob_bloch()))


def quantum_max_fixed_measurements(s: Scenario) -> float:
    """Largest eigenvalue of the Bell operator: the optimum over all two-qubit states."""
    return herm_eigen(bell_operator(s)).max_value


def optimal_state(s: Scenario) -> np.ndarray:
    top = herm_eigen(bell_operator(s)).top_vector
    return frozen(np.outer(top, top.conj()))


# --- See-saw ---

def _unit_rows(vectors: np.ndarray, previous: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    keep = norms <= _DEGENERATE_NORM
    safe = np.where(keep, 1.0, norms)[:, None]
    return np.where(keep[:, None], previous, vectors / safe)


def _random_axes(rng: np.random.Generator, count: int) -> np.ndarray:
    draws = rng.normal(size=(count, 3))
    return draws / np.linalg.norm(draws, axis=1, keepdims=True)


def _single_seesaw(coeffs: np.ndarray, rng: np.random.Generator, max_sweeps: int, tol: float):
    m, n = coeffs.shape
    alice = _random_axes(rng, m)
    bob = _random_axes(rng, n)
    eig = herm_eigen(_operator_from_bloch(coeffs, alice, bob))
    trace = [eig.max_value]
    top = eig.top_vector
    for sweep in range(1, max_sweeps + 1):
        tensor = correlation_tensor(np.outer(top, top.conj()))
        bob = _unit_rows(coeffs.T @ alice @ tensor, bob)
        alice = _unit_rows(coeffs @ bob @ tensor.T, alice)
        eig = herm_eigen(_operator_from_bloch(coeffs, alice, bob))
        top = eig.top_vector
        trace.append(eig.max_value)
        if trace[-1] - trace[-2] < tol:
            return alice, bob, top, trace, sweep, True
    return alice, bob, top, trace, max_sweeps, False


def seesaw_max(
    coeffs,
    restarts: int = 32,
    seed: int = 0,
    max_sweeps: int = SEESAW_MAX_SWEEPS,
    tol: float = SEESAW_TOL,
) -> SeesawResult:
    """Alternating ascent over Bob's axes, Alice's axes and the shared state.

    Each restart draws its initial axes from ``default_rng((seed, index))`` so
    results do not depend on the order restarts are evaluated in.
    """
    coeffs = np.array(coeffs, dtype=float)
    if coeffs.ndim != 2 or 0 in coeffs.shape or not np.all(np.isfinite(coeffs)):
        raise InputValidationError("seesaw needs a finite, non-empty m x n coefficient matrix")
    if restarts < 1:
        raise InputValidationError(f"restarts must be at least 1, got {restarts}")

    best = None
    for index in range(restarts):
        rng = np.random.default_rng((seed, index))
        alice, bob, top, trace, sweeps, converged = _single_seesaw(coeffs, rng, max_sweeps, tol)
        if not converged:
            logger.warning("See-saw restart %d stopped after %d sweeps without converging", index, sweeps)
        logger.debug("Restart %d reached %.12f after %d sweeps", index, trace[-1], sweeps)
        if best is None or trace[-1] > best.value:
            best = SeesawResult(
                value=float(trace[-1]),
                alice_axes=tuple(BlochVec.from_array(a) for a in alice),
                bob_axes=tuple(BlochVec.from_array(b) for b in bob),
                state=frozen(np.outer(top, top.conj())),
                iterations=sweeps,
                converged=converged,
                trace=tuple(float(v) for v in trace),
            )
    return best
