"""Local and preparation-noncontextual bounds of correlator Bell functionals.

The local bound enumerates Alice's deterministic sign assignments; Bob's best
response is read off column-wise.  The noncontextual bound replaces Alice's
outcomes by response expectations in [-1, 1] that must satisfy every
functional relation, and maximizes over the vertices of that sliced cube.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InputValidationError, ModelError, ResourceLimitError
from .qubit_algebra import ALGEBRA_TOL
from .scenario_model import FunctionalRelation

logger = logging.getLogger(__name__)

MAX_ENUMERATION_SIZE = 16
VERTEX_DECIMALS = 12
_SINGULAR_COND = 1e12


class BoundModel(str, Enum):
    LOCAL = "local"
    PNC = "pnc"


class Regime(str, Enum):
    NONLOCAL = "nonlocal"
    CONTEXTUAL = "contextual"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class BoundCertificate:
    bound: float
    model: BoundModel
    alice_assignment: tuple
    bob_assignment: tuple
    active_relations: tuple = ()

    def reevaluate(self, coeffs) -> float:
        return float(np.asarray(self.alice_assignment) @ np.asarray(coeffs, dtype=float) @ np.asarray(self.bob_assignment))

    def as_dict(self) -> dict:
        return {
            "bound": self.bound,
            "model": self.model.value,
            "alice_assignment": list(self.alice_assignment),
            "bob_assignment": list(self.bob_assignment),
            "active_relations": list(self.active_relations),
        }


def _coefficient_matrix(coeffs) -> np.ndarray:
    matrix = np.array(coeffs, dtype=float)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise InputValidationError(f"coefficient matrix must be a non-empty m x n array, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InputValidationError("coeffs-finite: Bell coefficients must be finite")
    m, n = matrix.shape
    if m > MAX_ENUMERATION_SIZE or n > MAX_ENUMERATION_SIZE:
        raise ResourceLimitError(f"enumeration supports at most {MAX_ENUMERATION_SIZE} settings per party, got {m}x{n}")
    return matrix


def _relation_matrix(m: int, relations) -> np.ndarray:
    rows = []
    for index, relation in enumerate(relations):
        if not isinstance(relation, FunctionalRelation):
            relation = FunctionalRelation(tuple(relation))
        if len(relation) != m:
            raise InputValidationError(f"relation-indices: relation {index} has {len(relation)} coefficients, expected {m}")
        rows.append(relation.as_array())
    return np.array(rows).reshape(len(rows), m)


def _best_response(points: np.ndarray, matrix: np.ndarray):
    """Maximize sum_y |(v C)_y| over candidate rows v; first maximizer wins."""
    columns = points @ matrix
    values = np.abs(columns).sum(axis=1)
    best = int(np.flatnonzero(values >= values.max() - ALGEBRA_TOL)[0])
    bob = np.where(columns[best] >= 0.0, 1, -1)
    return best, bob


# --- Local bound ---

def local_bound(coeffs) -> BoundCertificate:
    matrix = _coefficient_matrix(coeffs)
    signs = np.array(list(itertools.product((-1, 1), repeat=matrix.shape[0])), dtype=float)
    best, bob = _best_response(signs, matrix)
    alice = tuple(int(a) for a in signs[best])
    value = float(signs[best] @ matrix @ bob)
    logger.debug("Local bound %.12g from %d deterministic strategies", value, len(signs))
    return BoundCertificate(value, BoundModel.LOCAL, alice, tuple(int(b) for b in bob))


# --- Noncontextual bound ---

def _independent_rows(rows: np.ndarray) -> np.ndarray:
    kept = []
    for row in rows:
        candidate = np.array(kept + [row])
        if np.linalg.matrix_rank(candidate) == len(candidate):
            kept.append(row)
    return np.array(kept)


def enumerate_vertices(m: int, relations: Sequence) -> np.ndarray:
    """Vertices of {v in [-1, 1]^m : c . v = 0 for every relation}, one per row.

    A vertex has m - rank coordinates at +-1; the remaining coordinates solve
    the relation system.  Singular sub-systems are skipped.
    """
    if not relations:
        raise InputValidationError("enumerate_vertices needs at least one relation; use local_bound otherwise")
    if m > MAX_ENUMERATION_SIZE:
        raise ResourceLimitError(f"vertex enumeration supports at most {MAX_ENUMERATION_SIZE} coordinates")
    rows = _independent_rows(_relation_matrix(m, relations))
    rank = len(rows)
    if rank > m:
        raise InputValidationError(f"{rank} independent relations cannot slice a {m}-cube")

    found = []
    for free in itertools.combinations(range(m), rank):
        fixed = [i for i in range(m) if i not in free]
        square = rows[:, list(free)]
        if not np.linalg.cond(square) < _SINGULAR_COND:
            logger.debug("Skipping singular sub-system on free coordinates %s", free)
            continue
        patterns = np.array(list(itertools.product((-1.0, 1.0), repeat=len(fixed))), dtype=float)
        solved = np.linalg.solve(square, -rows[:, fixed] @ patterns.T).T
        inside = np.all(np.abs(solved) <= 1.0 + ALGEBRA_TOL, axis=1)
        points = np.zeros((int(inside.sum()), m))
        points[:, fixed] = patterns[inside]
        points[:, list(free)] = np.clip(solved[inside], -1.0, 1.0)
        found.append(points)

    if not found:
        return np.zeros((0, m))
    stacked = np.round(np.vstack(found), VERTEX_DECIMALS) + 0.0
    vertices = np.unique(stacked, axis=0)
    logger.debug("Enumerated %d vertices for m=%d with %d independent relations", len(vertices), m, rank)
    return vertices


def pnc_bound(coeffs, relations: Sequence) -> BoundCertificate:
    matrix = _coefficient_matrix(coeffs)
    vertices = enumerate_vertices(matrix.shape[0], relations)
    if len(vertices) == 0:
        raise ModelError("relation set leaves no point of [-1, 1]^m; the noncontextual polytope is empty")
    best, bob = _best_response(vertices, matrix)
    value = float(vertices[best] @ matrix @ bob)
    return BoundCertificate(
        value,
        BoundModel.PNC,
        tuple(float(v) for v in vertices[best]),
        tuple(int(b) for b in bob),
        tuple(range(len(relations))),
    )


def classify_value(value: float, local: float, pnc: float, tol: float = 1e-6) -> Regime:
    """Place a quantum value relative to the noncontextual and local bounds."""
    if value > local + tol:
        return Regime.NONLOCAL
    if value > pnc + tol:
        return Regime.CONTEXTUAL
    return Regime.CLASSICAL
