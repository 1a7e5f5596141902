"""Independent reference implementations the engines are checked against."""
import itertools

import numpy as np
from scipy.optimize import linprog


def direct_expectation(rho, a, b):
    """Tr[rho (a (x) b)] by explicit index contraction, no Kronecker product."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    total = 0.0 + 0.0j
    for i, j, k, l in itertools.product(range(2), repeat=4):
        total += r[k, l, i, j] * a[i, k] * b[j, l]
    return float(total.real)


def loop_partial_trace_A(r):
    r = np.asarray(r)
    out = np.zeros((2, 2), dtype=complex)
    for j, l in itertools.product(range(2), repeat=2):
        for i in range(2):
            out[j, l] += r[2 * i + j, 2 * i + l]
    return out


def loop_partial_trace_B(r):
    r = np.asarray(r)
    out = np.zeros((2, 2), dtype=complex)
    for i, k in itertools.product(range(2), repeat=2):
        for j in range(2):
            out[i, k] += r[2 * i + j, 2 * k + j]
    return out


def brute_force_local(coeffs):
    c = np.asarray(coeffs, dtype=float)
    m, n = c.shape
    best = -np.inf
    for a in itertools.product((-1, 1), repeat=m):
        for b in itertools.product((-1, 1), repeat=n):
            best = max(best, float(np.asarray(a) @ c @ np.asarray(b)))
    return best


def lp_pnc_bound(coeffs, relations):
    """Max over Bob's signs of an LP over Alice's response expectations."""
    c = np.asarray(coeffs, dtype=float)
    m, n = c.shape
    a_eq = np.array(relations, dtype=float).reshape(-1, m)
    best = -np.inf
    for b in itertools.product((-1, 1), repeat=n):
        objective = c @ np.asarray(b, dtype=float)
        res = linprog(-objective, A_eq=a_eq, b_eq=np.zeros(len(a_eq)), bounds=[(-1, 1)] * m, method="highs")
        best = max(best, -res.fun)
    return best


def grid_pnc_bound(coeffs, relation, points=2001):
    """Search the relation plane inside [-1, 1]^3 along its boundary edges.

    One coordinate sits at +-1, a second runs over a grid, the third is
    solved from the relation.
    """
    c = np.asarray(coeffs, dtype=float)
    rel = np.asarray(relation, dtype=float)
    grid = np.linspace(-1.0, 1.0, points)
    best = -np.inf
    for fixed, sweep, solved in itertools.permutations(range(3)):
        if abs(rel[solved]) < 1e-12:
            continue
        for edge in (-1.0, 1.0):
            v = np.zeros((points, 3))
            v[:, fixed] = edge
            v[:, sweep] = grid
            v[:, solved] = -(rel[fixed] * edge + rel[sweep] * grid) / rel[solved]
            inside = np.all(np.abs(v) <= 1.0 + 1e-12, axis=1)
            if inside.any():
                best = max(best, float(np.abs(v[inside] @ c).sum(axis=1).max()))
    return best


def _signed_sum_norms(axes):
    """|sum_x d_x a_x| for every sign pattern d."""
    axes = np.asarray(axes, dtype=float)
    signs = np.array(list(itertools.product((1, -1), repeat=len(axes))), dtype=float)
    return np.linalg.norm(signs @ axes, axis=1)


def total_floor_threshold(axes):
    """Closed-form ceiling 2^m / sum_d |sum_x d_x a_x| on the parent threshold.

    Every parent weight must cover its Bloch length eta |sum_x d_x a_x| / 2^(m-1)
    and the weights add up to 2.
    """
    norms = _signed_sum_norms(axes)
    return min(1.0, len(norms) / norms.sum())


def uniform_weight_threshold(axes):
    """Closed-form floor: uniform weights 1/2^(m-1) meet every marginal row."""
    return min(1.0, 1.0 / _signed_sum_norms(axes).max())


def random_density(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unit(rng, count):
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))
