"""Critical unsharpness thresholds.

Two kinds: ratios of a classical bound to the sharp quantum value (the
smallest eta at which smeared correlators can beat the bound), and
joint-measurability thresholds found by bisection over a parent-POVM search.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .bell_engine import quantum_max_fixed_measurements
from .bounds_engine import BoundCertificate, BoundModel, local_bound, pnc_bound
from .errors import InputValidationError, ModelError, ResourceLimitError
from .qubit_algebra import ALGEBRA_TOL, IDENTITY2, BlochVec, bloch_operator, frozen, is_valid_povm
from .scenario_model import Observable, Scenario, sharpened

logger = logging.getLogger(__name__)

MAX_PARENT_SETTINGS = 4
MIN_PRECISION = 1e-6
ANSATZ_CAVEAT = (
    "threshold from the symmetric parent-POVM ansatz; it matches the known value for trine "
    "and orthogonal axes and is a lower bound for other families"
)


class ThresholdKind(str, Enum):
    NONLOCALITY = "nonlocality"
    PNC_VIOLATION = "pnc_violation"
    JOINT_MEASURABILITY = "joint_measurability"


class ThresholdMethod(str, Enum):
    RATIO = "ratio"
    BISECTION = "bisection"


# --- Parent POVM ---

@dataclass(frozen=True)
class ParentPOVM:
    """Grand POVM G_d = (g_d I + gamma_d . sigma) / 2 over d in {+1, -1}^m.

    Post-processing is deterministic: outcome d answers a = d_x for setting x.
    """

    outcomes: tuple
    weights: np.ndarray
    bloch: np.ndarray
    axes: tuple
    eta: float

    def post_processing(self, a: int, x: int, index: int) -> int:
        return int(self.outcomes[index][x] == a)

    def elements(self) -> list:
        return [frozen((g * IDENTITY2 + bloch_operator(w)) / 2.0) for g, w in zip(self.weights, self.bloch)]

    def marginal(self, a: int, x: int) -> np.ndarray:
        picked = [e for e, d in zip(self.elements(), self.outcomes) if d[x] == a]
        return sum(picked)

    def target(self, a: int, x: int) -> np.ndarray:
        return (IDENTITY2 + a * self.eta * bloch_operator(self.axes[x].as_array())) / 2.0

    def violation(self) -> float:
        """Largest breach of normalization, positivity and marginal constraints."""
        worst = [
            abs(float(self.weights.sum()) - 2.0),
            float(np.max(np.abs(self.bloch.sum(axis=0)))),
            float(np.max(np.linalg.norm(self.bloch, axis=1) - self.weights)),
        ]
        signs = np.array(self.outcomes)
        for x, axis in enumerate(self.axes):
            plus = signs[:, x] == 1
            worst.append(abs(float(self.weights[plus].sum()) - 1.0))
            worst.append(float(np.max(np.abs(self.bloch[plus].sum(axis=0) - self.eta * axis.as_array()))))
        return max(0.0, *worst)

    def reconstruction_error(self) -> float:
        return max(
            float(np.max(np.abs(self.marginal(a, x) - self.target(a, x))))
            for x in range(len(self.axes))
            for a in (1, -1)
        )


@dataclass(frozen=True)
class ParentSearch:
    witness: Optional[ParentPOVM]
    ansatz_applicable: bool
    residual: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.witness is not None


@dataclass(frozen=True)
class ThresholdReport:
    kind: ThresholdKind
    critical_eta: float
    method: ThresholdMethod
    witness: Optional[Union[ParentPOVM, BoundCertificate]] = None
    trace: tuple = ()
    caveat: str = ""


def _axes_of(alice: Sequence) -> tuple:
    axes = tuple(o.axis if isinstance(o, Observable) else BlochVec(*o) for o in alice)
    if not axes:
        raise InputValidationError("joint measurability needs at least one axis")
    for axis in axes:
        Observable(axis)  # raises on a non-unit axis
    if len(axes) > MAX_PARENT_SETTINGS:
        raise ResourceLimitError(f"parent POVM search supports at most {MAX_PARENT_SETTINGS} settings, got {len(axes)}")
    return axes


def _ansatz_scale(signs: np.ndarray, directions: np.ndarray, axis_matrix: np.ndarray, eta: float):
    """Solve the marginal system sum_{d: d_x=+} t * dir_d = eta * axis_x for the scalar t."""
    lhs = np.concatenate([directions[signs[:, x] == 1].sum(axis=0) for x in range(len(axis_matrix))])
    rhs = eta * axis_matrix.reshape(-1)
    if not np.any(lhs):
        return 0.0, float(np.linalg.norm(rhs))
    scale, *_ = np.linalg.lstsq(lhs[:, None], rhs, rcond=None)
    residual = float(np.linalg.norm(lhs * scale[0] - rhs))
    return float(scale[0]), residual


def parent_feasible_at(alice: Sequence, eta: float) -> ParentSearch:
    """Search the symmetric ansatz gamma_d = t * sum_x d_x axis_x for a parent POVM."""
    axes = _axes_of(alice)
    if not 0.0 <= eta <= 1.0:
        raise InputValidationError(f"eta-range: sharpness {eta!r} outside [0, 1]")
    m = len(axes)
    signs = np.array(list(itertools.product((1, -1), repeat=m)), dtype=float)
    axis_matrix = np.array([a.as_array() for a in axes])
    directions = signs @ axis_matrix

    scale, residual = _ansatz_scale(signs, directions, axis_matrix, eta)
    if residual > ALGEBRA_TOL:
        logger.warning("Parent POVM ansatz is inapplicable at eta=%.6g (residual %.3g)", eta, residual)
        return ParentSearch(None, False, residual)
    bloch = scale * directions
    floors = np.linalg.norm(bloch, axis=1)

    # g_d >= |gamma_d|, sum_{d: d_x=+} g_d = 1 for every x, sum_d g_d = 2
    a_eq = np.vstack([(signs == 1).T.astype(float), np.ones(len(signs))])
    b_eq = np.concatenate([np.ones(m), [2.0]])
    result = linprog(
        c=np.zeros(len(signs)),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(floor, None) for floor in floors],
        method="highs",
    )
    if result.status != 0:
        logger.debug("No parent POVM at eta=%.6g: %s", eta, result.message)
        return ParentSearch(None, True, residual)

    parent = ParentPOVM(
        outcomes=tuple(tuple(int(s) for s in row) for row in signs),
        weights=frozen(np.maximum(result.x, floors)),
        bloch=frozen(bloch),
        axes=axes,
        eta=float(eta),
    )
    breach = parent.violation()
    if breach > ALGEBRA_TOL:
        logger.debug("Discarding parent POVM at eta=%.6g with constraint breach %.3g", eta, breach)
        return ParentSearch(None, True, residual)
    return ParentSearch(parent, True, residual)


def is_valid_parent(parent: ParentPOVM) -> bool:
    return is_valid_povm(parent.elements()).valid and parent.reconstruction_error() <= ALGEBRA_TOL


# --- Thresholds ---

def jm_threshold(alice: Sequence, precision: float = 1e-4) -> ThresholdReport:
    """Bisect eta over [0, 1]; the result is feasible and within ``precision`` of the ansatz threshold."""
    if precision < MIN_PRECISION:
        raise InputValidationError(f"precision must be at least {MIN_PRECISION}, got {precision}")
    axes = _axes_of(alice)
    if not parent_feasible_at(axes, min(precision, 1.0)).ansatz_applicable:
        raise ModelError("parent POVM ansatz does not apply to these axes")

    trace = []
    top = parent_feasible_at(axes, 1.0)
    trace.append((1.0, top.feasible))
    lo, hi = 0.0, 1.0
    if top.feasible:
        lo = 1.0
    while hi - lo > precision:
        mid = (lo + hi) / 2.0
        feasible = parent_feasible_at(axes, mid).feasible
        trace.append((mid, feasible))
        logger.debug("Bisection eta=%.8f feasible=%s", mid, feasible)
        if feasible:
            lo = mid
        else:
            hi = mid

    witness = parent_feasible_at(axes, max(0.0, lo - precision)).witness
    return ThresholdReport(
        kind=ThresholdKind.JOINT_MEASURABILITY,
        critical_eta=lo,
        method=ThresholdMethod.BISECTION,
        witness=witness,
        trace=tuple(trace),
        caveat=ANSATZ_CAVEAT,
    )


def critical_eta_from_bounds(s: Scenario, model: Union[BoundModel, str]) -> ThresholdReport:
    """eta below which one-sided smearing cannot exceed the requested classical bound."""
    model = BoundModel(model)
    quantum = quantum_max_fixed_measurements(sharpened(s))
    if quantum <= ALGEBRA_TOL:
        raise ModelError(f"scenario '{s.name}' has no positive sharp quantum value ({quantum!r})")
    certificate = local_bound(s.coeffs) if model is BoundModel.LOCAL else pnc_bound(s.coeffs, s.relations)
    if certificate.bound <= 0.0:
        raise ModelError(f"{model.value} bound of '{s.name}' is not positive")
    ratio = certificate.bound / quantum
    if ratio > 1.0:
        logger.warning("Bound %.6g exceeds the sharp quantum value %.6g; clipping eta to 1", certificate.bound, quantum)
        ratio = 1.0
    kind = ThresholdKind.NONLOCALITY if model is BoundModel.LOCAL else ThresholdKind.PNC_VIOLATION
    return ThresholdReport(kind=kind, critical_eta=ratio, method=ThresholdMethod.RATIO, witness=certificate)
