"""Assemblages, local-hidden-state models and linear steering functionals."""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ConsistencyError, InputValidationError, ResourceLimitError
from .jm_engine import ParentPOVM
from .qubit_algebra import ALGEBRA_TOL, IDENTITY2, correlation_tensor, frozen, min_eigenvalue, partial_trace_A, tensor
from .scenario_model import Observable, Scenario, mixture_sign_patterns, validate_density

logger = logging.getLogger(__name__)

MAX_STEERING_SETTINGS = 16
OUTCOMES = (1, -1)


class Procedure(str, Enum):
    STANDARD = "standard"
    NONTRIVIAL = "nontrivial"


class SteeringForm(str, Enum):
    TRINE = "trine_form"
    LINEAR = "linear_form"


def _outcome_index(a: int) -> int:
    if a not in OUTCOMES:
        raise InputValidationError(f"outcome must be +1 or -1, got {a!r}")
    return OUTCOMES.index(a)


# --- Assemblages ---

@dataclass(frozen=True)
class Assemblage:
    """Unnormalized conditional states sigma_{a|x} steered to Bob.

    ``setting_weights[x]`` is the probability that setting x is performed at
    all: 1 for ordinary measurements, 1/m when the settings are outcomes of
    one joint preparation procedure.
    """

    elements: dict
    setting_weights: tuple

    @property
    def m(self) -> int:
        return len(self.setting_weights)

    def element(self, a: int, x: int) -> np.ndarray:
        return self.elements[(a, x)]

    def reduced_state(self, x: int) -> np.ndarray:
        return sum(self.element(a, x) for a in OUTCOMES) / self.setting_weights[x]

    def violation(self) -> float:
        """Largest breach of positivity, normalization and no-signaling."""
        worst = [max(0.0, -min_eigenvalue(e)) for e in self.elements.values()]
        for x, weight in enumerate(self.setting_weights):
            total = sum(float(np.trace(self.element(a, x)).real) for a in OUTCOMES)
            worst.append(abs(total - weight))
            worst.append(float(np.max(np.abs(self.reduced_state(x) - self.reduced_state(0)))))
        return max(worst)


def assemblage_of(state, alice: Sequence[Observable], procedure: str = Procedure.STANDARD) -> Assemblage:
    """sigma_{a|x} = Tr_A[rho (M_{a|x} (x) I)] for Alice's (possibly unsharp) effects.

    With the ``nontrivial`` procedure the effects are P^a_x / m: every (a, x)
    pair is one outcome of a single 2m-outcome measurement.
    """
    procedure = Procedure(procedure)
    rho = validate_density(state)
    if not alice:
        raise InputValidationError("an assemblage needs at least one setting")
    m = len(alice)
    scale = 1.0 if procedure is Procedure.STANDARD else 1.0 / m
    elements = {}
    for x, obs in enumerate(alice):
        for a in OUTCOMES:
            effect = scale * obs.projector(a)
            elements[(a, x)] = frozen(partial_trace_A(rho @ tensor(effect, IDENTITY2)))
    asm = Assemblage(elements, tuple(scale for _ in alice))
    breach = asm.violation()
    if breach > ALGEBRA_TOL:
        raise ConsistencyError(f"assemblage invariants fail by {breach:.3g}; the input state is not a valid density matrix")
    return asm


# --- LHS models ---

@dataclass(frozen=True)
class LHSModel:
    """Finite local-hidden-state model sigma_{a|x} = sum_l pi_l p(a|x,l) sigma_l.

    ``responses[l, i, x]`` is p(OUTCOMES[i] | x, l).  When ``joint`` is set
    the responses of each hidden state are normalized over all (a, x) pairs
    instead of per setting.
    """

    weights: np.ndarray
    responses: np.ndarray
    hidden_states: np.ndarray
    joint: bool = False
    assignments: tuple = ()

    @property
    def m(self) -> int:
        return self.responses.shape[2]

    def violation(self) -> float:
        worst = [abs(float(self.weights.sum()) - 1.0), max(0.0, -float(self.weights.min()))]
        worst.append(max(0.0, -float(self.responses.min()), float(self.responses.max()) - 1.0))
        totals = self.responses.sum(axis=(1, 2)) if self.joint else self.responses.sum(axis=1)
        worst.append(float(np.max(np.abs(totals - 1.0))))
        for sigma in self.hidden_states:
            worst.append(abs(float(np.trace(sigma).real) - 1.0))
            worst.append(max(0.0, -min_eigenvalue(sigma)))
        return max(worst)

    def reconstruct(self, a: int, x: int) -> np.ndarray:
        mix = self.weights * self.responses[:, _outcome_index(a), x]
        return np.tensordot(mix, self.hidden_states, axes=1)


def verify_lhs(asm: Assemblage, model: LHSModel) -> float:
    """Max-entry distance between the assemblage and the model's reconstruction."""
    if model.m != asm.m or model.responses.shape[1] != len(OUTCOMES):
        raise InputValidationError(
            f"model covers {model.m} settings with {model.responses.shape[1]} outcomes; assemblage has {asm.m} settings"
        )
    if len(model.weights) != len(model.hidden_states) or len(model.weights) != model.responses.shape[0]:
        raise InputValidationError("model weights, responses and hidden states disagree on the number of hidden states")
    return max(
        float(np.max(np.abs(asm.element(a, x) - model.reconstruct(a, x))))
        for x in range(asm.m)
        for a in OUTCOMES
    )


def _normalized(element: np.ndarray) -> np.ndarray:
    weight = float(np.trace(element).real)
    if weight <= ALGEBRA_TOL:
        return IDENTITY2 / 2.0
    return element / weight


def build_uniform_lhs(alice: Sequence[Observable], state) -> Optional[LHSModel]:
    """One hidden state per event (a, x) of the non-trivial preparation, each with weight 1/(2m).

    Returns None when no sign pattern mixes Alice's projectors into I/2.
    """
    patterns = mixture_sign_patterns(alice)
    if not patterns:
        logger.debug("No mixture identity among %d observables; uniform model unavailable", len(alice))
        return None
    asm = assemblage_of(state, alice, Procedure.NONTRIVIAL)
    m = len(alice)
    events = [(a, x) for x in range(m) for a in OUTCOMES]
    responses = np.zeros((len(events), len(OUTCOMES), m))
    hidden = []
    for index, (a, x) in enumerate(events):
        responses[index, _outcome_index(a), x] = 1.0
        hidden.append(_normalized(asm.element(a, x)))
    return LHSModel(
        weights=frozen(np.full(len(events), 1.0 / len(events))),
        responses=frozen(responses),
        hidden_states=frozen(np.array(hidden)),
        joint=True,
        assignments=tuple(events),
    )


def lhs_from_parent(parent: ParentPOVM, state) -> LHSModel:
    """LHS model induced by measuring the parent POVM and post-processing its outcome."""
    rho = validate_density(state)
    weights, hidden = [], []
    for element in parent.elements():
        conditional = partial_trace_A(rho @ tensor(element, IDENTITY2))
        weight = float(np.trace(conditional).real)
        weights.append(max(weight, 0.0))
        hidden.append(_normalized(conditional))
    m = len(parent.axes)
    responses = np.zeros((len(parent.outcomes), len(OUTCOMES), m))
    for index, outcome in enumerate(parent.outcomes):
        for x, a in enumerate(outcome):
            responses[index, _outcome_index(a), x] = 1.0
    return LHSModel(
        weights=frozen(np.array(weights)),
        responses=frozen(responses),
        hidden_states=frozen(np.array(hidden)),
        assignments=tuple(parent.outcomes),
    )


# --- Linear steering functionals ---

def linear_steering_bound(bob: Sequence[Observable]) -> float:
    """max over a in {+-1}^n of lambda_max((1/n) sum_y a_y B_y) for sharp B_y."""
    n = len(bob)
    if n == 0:
        raise InputValidationError("linear steering bound needs at least one observable")
    if n > MAX_STEERING_SETTINGS:
        raise ResourceLimitError(f"sign enumeration supports at most {MAX_STEERING_SETTINGS} observables, got {n}")
    if any(not o.sharp for o in bob):
        raise InputValidationError("linear steering bound is defined for sharp observables")
    axes = np.array([o.axis.as_array() for o in bob])
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    # lambda_max(w . sigma) = |w| for a traceless qubit operator
    return float(np.max(np.linalg.norm(signs @ axes, axis=1)) / n)


def _effective_alice(s: Scenario) -> np.ndarray:
    sharp = np.array([o.axis.as_array() for o in s.alice])
    norms = np.linalg.norm(s.coeffs.T @ sharp, axis=1)
    if np.any(norms <= ALGEBRA_TOL):
        column = int(np.flatnonzero(norms <= ALGEBRA_TOL)[0])
        raise InputValidationError(f"Bell column {column} combines Alice's axes to zero; no effective observable")
    return (s.coeffs.T @ s.alice_bloch()) / norms[:, None]


def steering_value(s: Scenario, form: str) -> float:
    """Left-hand side of the chosen steering functional on the scenario's state."""
    form = SteeringForm(form)
    if form is SteeringForm.TRINE and s.m != s.n:
        raise InputValidationError(f"trine_form pairs settings one to one; scenario is {s.m}x{s.n}")
    paired = np.einsum("yi,ij,yj->y", _effective_alice(s), correlation_tensor(s.state), s.bob_bloch())
    if form is SteeringForm.TRINE:
        return float(paired.sum() / 2.0)
    bound = linear_steering_bound([o.with_eta(1.0) for o in s.bob])
    return float(paired.sum() / (s.n * bound))
