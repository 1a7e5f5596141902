"""Observables, shared states, functional relations and the built-in scenarios."""
import itertools
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import InputValidationError, ResourceLimitError, ScenarioLookupError, ScenarioParseError
from .qubit_algebra import (
    ALGEBRA_TOL,
    IDENTITY2,
    SYMMETRY_TOL,
    BlochVec,
    as_cmat,
    frozen,
    is_hermitian,
    min_eigenvalue,
    pauli_from_bloch,
    pure_density,
)

logger = logging.getLogger(__name__)

MAX_SIGN_PATTERN_SIZE = 16
SIDES = ("alice", "bob")


# --- Domain Types ---

@dataclass(frozen=True)
class Observable:
    """Dichotomic qubit observable eta * (axis . sigma)."""

    axis: BlochVec
    eta: float = 1.0
    label: str = ""

    def __post_init__(self):
        axis = BlochVec(*(float(c) for c in self.axis))
        norm = axis.norm()
        if not math.isfinite(norm) or abs(norm - 1.0) > SYMMETRY_TOL:
            raise InputValidationError(f"axis-unit-norm: axis {tuple(axis)} of '{self.label}' has norm {norm!r}")
        eta = float(self.eta)
        if not 0.0 <= eta <= 1.0:
            raise InputValidationError(f"eta-range: sharpness {eta!r} of '{self.label}' outside [0, 1]")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "eta", eta)

    @property
    def sharp(self) -> bool:
        return self.eta == 1.0

    @property
    def bloch(self) -> np.ndarray:
        """Effective Bloch vector eta * axis."""
        return self.eta * self.axis.as_array()

    def operator(self) -> np.ndarray:
        return pauli_from_bloch(self.axis, self.eta)

    def projector(self, sign: int) -> np.ndarray:
        """Effect (I + sign * eta * axis . sigma) / 2."""
        return frozen((IDENTITY2 + sign * self.operator()) / 2.0)

    def with_eta(self, eta: float) -> "Observable":
        return replace(self, eta=eta)


@dataclass(frozen=True)
class FunctionalRelation:
    """Homogeneous linear relation sum_x coeffs[x] * A_x = 0 on Alice's side."""

    coeffs: tuple

    def __post_init__(self):
        values = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise InputValidationError("relation-finite: relation coefficients must be finite")
        nonzero = np.flatnonzero(np.abs(values) > ALGEBRA_TOL)
        if nonzero.size < 2:
            raise InputValidationError(
                f"relation-support: relation {values.tolist()} needs at least two nonzero coefficients"
            )
        values = values / values[nonzero[0]]
        object.__setattr__(self, "coeffs", tuple(float(v) + 0.0 for v in values))

    def __len__(self):
        return len(self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


@dataclass(frozen=True, eq=False)
class Scenario:
    alice: tuple
    bob: tuple
    state: np.ndarray
    coeffs: np.ndarray
    relations: tuple = field(default_factory=tuple)
    name: str = "custom"

    def __post_init__(self):
        alice = tuple(self.alice)
        bob = tuple(self.bob)
        if not alice or not bob:
            raise InputValidationError("scenario-parties: both parties need at least one observable")
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (len(alice), len(bob)):
            raise InputValidationError(
                f"coeffs-shape: expected a {len(alice)}x{len(bob)} coefficient matrix, got {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InputValidationError("coeffs-finite: Bell coefficients must be finite")
        relations = tuple(r if isinstance(r, FunctionalRelation) else FunctionalRelation(tuple(r)) for r in self.relations)
        for index, relation in enumerate(relations):
            if len(relation) != len(alice):
                raise InputValidationError(
                    f"relation-indices: relation {index} has {len(relation)} coefficients for {len(alice)} observables"
                )
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)
        object.__setattr__(self, "state", validate_density(self.state))
        object.__setattr__(self, "coeffs", frozen(coeffs))
        object.__setattr__(self, "relations", relations)

    @property
    def m(self) -> int:
        return len(self.alice)

    @property
    def n(self) -> int:
        return len(self.bob)

    def alice_bloch(self) -> np.ndarray:
        return np.array([obs.bloch for obs in self.alice])

    def bob_bloch(self) -> np.ndarray:
        return np.array([obs.bloch for obs in self.bob])

    def side(self, side: str) -> tuple:
        if side not in SIDES:
            raise InputValidationError(f"side must be one of {SIDES}, got '{side}'")
        return self.alice if side == "alice" else self.bob

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.name == other.name
            and self.alice == other.alice
            and self.bob == other.bob
            and self.relations == other.relations
            and np.array_equal(self.state, other.state)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None


# --- States ---

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_NAMED_VECTORS = {
    "phi_plus": (_SQRT_HALF, 0.0, 0.0, _SQRT_HALF),
    "phi_minus": (_SQRT_HALF, 0.0, 0.0, -_SQRT_HALF),
    "psi_plus": (0.0, _SQRT_HALF, _SQRT_HALF, 0.0),
    "psi_minus": (0.0, _SQRT_HALF, -_SQRT_HALF, 0.0),
    "product_00": (1.0, 0.0, 0.0, 0.0),
}
STATE_NAMES = tuple(sorted([*_NAMED_VECTORS, "maximally_mixed"]))


def named_state(name: str) -> np.ndarray:
    if name == "maximally_mixed":
        return frozen(np.eye(4, dtype=complex) / 4.0)
    try:
        return pure_density(_NAMED_VECTORS[name])
    except KeyError:
        raise ScenarioLookupError(f"unknown state '{name}'; expected one of {', '.join(STATE_NAMES)}") from None


def validate_density(state) -> np.ndarray:
    """Return ``state`` as a read-only 4x4 density matrix or raise naming the failed invariant."""
    rho = as_cmat(state, dims=(4,))
    if not np.all(np.isfinite(rho)):
        raise InputValidationError("state-finite: state entries must be finite")
    if not is_hermitian(rho, ALGEBRA_TOL):
        raise InputValidationError("state-hermitian: state is not Hermitian")
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > ALGEBRA_TOL:
        raise InputValidationError(f"state-trace: state has trace {trace!r}, expected 1")
    lowest = min_eigenvalue((rho + rho.conj().T) / 2.0)
    if lowest < -ALGEBRA_TOL:
        raise InputValidationError(f"state-psd: state has negative eigenvalue {lowest!r}")
    return rho


# --- Relations and mixture identities ---

def _sharp_axes(obs: Sequence[Observable]) -> np.ndarray:
    unsharp = [o.label or str(i) for i, o in enumerate(obs) if not o.sharp]
    if unsharp:
        raise InputValidationError(f"relations are defined between sharp observables; unsharp: {', '.join(unsharp)}")
    return np.array([o.axis.as_array() for o in obs]).reshape(len(obs), 3)


def check_relation(obs: Sequence[Observable], rel: FunctionalRelation) -> float:
    """Norm of sum_x c_x axis_x; zero iff the operator relation holds."""
    if not isinstance(rel, FunctionalRelation):
        rel = FunctionalRelation(tuple(rel))
    if len(rel) != len(obs):
        raise InputValidationError(f"relation-indices: relation has {len(rel)} coefficients for {len(obs)} observables")
    axes = _sharp_axes(obs)
    return float(np.linalg.norm(rel.as_array() @ axes))


def verify_mixture_identity(obs: Sequence[Observable], signs: Sequence[int]) -> bool:
    """True iff (1/m) sum_x P^{sign_x}_x equals I/2 within ALGEBRA_TOL."""
    _sharp_axes(obs)
    if len(signs) != len(obs) or any(s not in (1, -1) for s in signs):
        raise InputValidationError("signs must be a +-1 vector with one entry per observable")
    mixture = sum(o.projector(s) for o, s in zip(obs, signs)) / len(obs)
    return bool(np.max(np.abs(mixture - IDENTITY2 / 2.0)) <= ALGEBRA_TOL)


def mixture_sign_patterns(obs: Sequence[Observable]) -> list:
    """Every sign vector whose projector mixture is maximally mixed."""
    axes = _sharp_axes(obs)
    if len(obs) > MAX_SIGN_PATTERN_SIZE:
        raise ResourceLimitError(f"sign-pattern search supports at most {MAX_SIGN_PATTERN_SIZE} observables")
    signs = np.array(list(itertools.product((1, -1), repeat=len(obs))))
    residuals = np.linalg.norm(signs @ axes, axis=1) / (2 * len(obs))
    return [tuple(int(s) for s in row) for row in signs[residuals <= ALGEBRA_TOL]]


def relation_from_signs(signs: Sequence[int]) -> FunctionalRelation:
    return FunctionalRelation(tuple(float(s) for s in signs))


def complementary_orthogonality(obs: Sequence[Observable]) -> float:
    """max_x Tr[P^+_x P^-_x]; zero means every outcome pair is perfectly distinguishable."""
    return max(float(np.trace(o.projector(1) @ o.projector(-1)).real) for o in obs)


def smear(s: Scenario, side: str, eta: float) -> Scenario:
    if not 0.0 <= eta <= 1.0:
        raise InputValidationError(f"eta-range: sharpness {eta!r} outside [0, 1]")
    smeared = tuple(o.with_eta(eta) for o in s.side(side))
    return replace(s, **{side: smeared})


def sharpened(s: Scenario) -> Scenario:
    return smear(smear(s, "alice", 1.0), "bob", 1.0)


# --- Built-in Scenarios ---

_SQRT3 = math.sqrt(3.0)

TRINE_AXES = (
    BlochVec(0.0, 0.0, 1.0),
    BlochVec(_SQRT3 / 2.0, 0.0, -0.5),
    BlochVec(-_SQRT3 / 2.0, 0.0, -0.5),
)
SIC_AXES = tuple(BlochVec(x / _SQRT3, y / _SQRT3, z / _SQRT3) for x, y, z in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)))
ORTHOGONAL_AXES = (BlochVec(1.0, 0.0, 0.0), BlochVec(0.0, 1.0, 0.0), BlochVec(0.0, 0.0, 1.0))

DELTA3_COEFFS = ((-1, 1, 1), (1, -1, 1), (1, 1, -1))
B3_COEFFS = ((1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1))


def _negated(axis: BlochVec) -> BlochVec:
    return BlochVec(-axis.x + 0.0, -axis.y + 0.0, -axis.z + 0.0)


def _observables(prefix: str, axes) -> tuple:
    return tuple(Observable(axis, 1.0, f"{prefix}{i + 1}") for i, axis in enumerate(axes))


def _trine_delta3() -> Scenario:
    # (|00> + |11>)/sqrt2 correlates the xz-plane directly, so B_y = -A_y saturates 6
    return Scenario(
        alice=_observables("A", TRINE_AXES),
        bob=_observables("B", (_negated(a) for a in TRINE_AXES)),
        state=named_state("phi_plus"),
        coeffs=np.array(DELTA3_COEFFS, dtype=float),
        relations=(FunctionalRelation((1.0, 1.0, 1.0)),),
        name="trine_delta3",
    )


def _elegant_b3() -> Scenario:
    # <sx (x) sx> = -1 on (|00> - |11>)/sqrt2; the negated x axis on Bob's side absorbs it
    bob_axes = (_negated(ORTHOGONAL_AXES[0]), ORTHOGONAL_AXES[1], ORTHOGONAL_AXES[2])
    return Scenario(
        alice=_observables("A", SIC_AXES),
        bob=_observables("B", bob_axes),
        state=named_state("phi_minus"),
        coeffs=np.array(B3_COEFFS, dtype=float),
        relations=(FunctionalRelation((1.0, -1.0, -1.0, -1.0)),),
        name="elegant_b3",
    )


def _orthogonal_steering() -> Scenario:
    alice_axes = (_negated(ORTHOGONAL_AXES[0]), ORTHOGONAL_AXES[1], ORTHOGONAL_AXES[2])
    return Scenario(
        alice=_observables("A", alice_axes),
        bob=_observables("B", ORTHOGONAL_AXES),
        state=named_state("phi_minus"),
        coeffs=np.eye(3),
        relations=(),
        name="orthogonal_steering",
    )


BUILTIN_SCENARIOS = {
    "trine_delta3": _trine_delta3,
    "elegant_b3": _elegant_b3,
    "orthogonal_steering": _orthogonal_steering,
}


def builtin_scenario(name: str) -> Scenario:
    try:
        factory = BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ScenarioLookupError(
            f"unknown built-in scenario '{name}'; expected one of {', '.join(BUILTIN_SCENARIOS)}"
        ) from None
    return factory()


# --- Scenario Files ---

ComplexEntry = Union[float, tuple[float, float]]


class ObservableSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    axis: tuple[float, float, float]
    eta: float = Field(1.0, ge=0.0, le=1.0)
    label: str = ""

    @field_validator("axis")
    @classmethod
    def _unit_axis(cls, axis):
        norm = math.sqrt(sum(c * c for c in axis))
        if abs(norm - 1.0) > SYMMETRY_TOL:
            raise ValueError(f"axis-unit-norm: axis has norm {norm!r}")
        return axis


class MatrixState(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    matrix: list[list[ComplexEntry]]


class VectorState(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    vector: list[ComplexEntry] = Field(min_length=4, max_length=4)


class ScenarioDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    name: str = "custom"
    alice: list[ObservableSpec] = Field(min_length=1)
    bob: list[ObservableSpec] = Field(min_length=1)
    state: Union[str, MatrixState, VectorState]
    coeffs: list[list[float]]
    relations: list[list[float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shapes(self):
        if len(self.coeffs) != len(self.alice) or any(len(row) != len(self.bob) for row in self.coeffs):
            raise ValueError(f"coeffs-shape: coefficient matrix must be {len(self.alice)}x{len(self.bob)}")
        for index, relation in enumerate(self.relations):
            if len(relation) != len(self.alice):
                raise ValueError(f"relation-indices: relation {index} must have {len(self.alice)} coefficients")
        return self


def _complex(entry: ComplexEntry) -> complex:
    if isinstance(entry, (tuple, list)):
        return complex(entry[0], entry[1])
    return complex(entry)


def _entry_out(value: complex):
    return float(value.real) if value.imag == 0.0 else [float(value.real), float(value.imag)]


def _state_from_document(state) -> np.ndarray:
    if isinstance(state, str):
        return named_state(state)
    if isinstance(state, VectorState):
        return pure_density([_complex(e) for e in state.vector])
    if len(state.matrix) != 4 or any(len(row) != 4 for row in state.matrix):
        shape = [len(row) for row in state.matrix]
        raise ScenarioParseError(f"state-shape: density matrix must be 4x4, got row lengths {shape}", "state.matrix")
    return np.array([[_complex(e) for e in row] for row in state.matrix], dtype=complex)


def _location(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"])


def load_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    try:
        doc = ScenarioDocument.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ScenarioParseError(first["msg"], _location(first)) from exc
    try:
        return Scenario(
            alice=tuple(Observable(BlochVec(*o.axis), o.eta, o.label) for o in doc.alice),
            bob=tuple(Observable(BlochVec(*o.axis), o.eta, o.label) for o in doc.bob),
            state=_state_from_document(doc.state),
            coeffs=np.array(doc.coeffs, dtype=float),
            relations=tuple(FunctionalRelation(tuple(r)) for r in doc.relations),
            name=doc.name,
        )
    except ValueError as exc:
        # np.array on inconsistent matrix rows and invariant failures both land here
        if isinstance(exc, InputValidationError):
            raise
        raise ScenarioParseError(str(exc), "state") from exc


def dump_scenario(s: Scenario) -> str:
    """Serialize to the document ``load_scenario`` reads back exactly."""
    doc = {
        "name": s.name,
        "alice": [{"axis": list(o.axis), "eta": o.eta, "label": o.label} for o in s.alice],
        "bob": [{"axis": list(o.axis), "eta": o.eta, "label": o.label} for o in s.bob],
        "state": {"matrix": [[_entry_out(complex(v)) for v in row] for row in s.state]},
        "coeffs": s.coeffs.tolist(),
        "relations": [list(r.coeffs) for r in s.relations],
    }
    return json.dumps(doc, indent=2)


def read_scenario(source: str) -> Scenario:
    """Resolve a built-in name or a path to a scenario document."""
    if source in BUILTIN_SCENARIOS:
        return builtin_scenario(source)
    try:
        with open(source, encoding="utf-8") as handle:
            text = handle.read()
    except UnicodeDecodeError as exc:
        raise ScenarioParseError(f"scenario file is not valid UTF-8 ({exc.reason})", f"byte {exc.start}") from exc
    except OSError as exc:
        raise ScenarioLookupError(
            f"'{source}' is neither a built-in scenario ({', '.join(BUILTIN_SCENARIOS)}) "
            f"nor a readable file ({exc.strerror or exc})"
        ) from exc
    logger.debug("Loaded scenario document %s (%d bytes)", source, len(text))
    return load_scenario(text)
