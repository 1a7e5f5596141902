"""Randomized checks of the relations between the engines."""
import numpy as np
import pytest

from contextuality_certification.bounds_engine import local_bound, pnc_bound
from contextuality_certification.qubit_algebra import BlochVec
from contextuality_certification.scenario_model import (
    SIC_AXES,
    TRINE_AXES,
    FunctionalRelation,
    Observable,
    check_relation,
    mixture_sign_patterns,
    verify_mixture_identity,
)
from contextuality_certification.steering_engine import assemblage_of
from tests.oracles import grid_pnc_bound, random_density, random_rotation, random_unit


@pytest.mark.parametrize("m", [3, 4])
def test_pnc_bound_never_exceeds_local_bound(m):
    rng = np.random.default_rng(100 + m)
    for _ in range(100):
        coeffs = rng.normal(size=(m, 3))
        relation = rng.normal(size=m)
        assert pnc_bound(coeffs, [relation]).bound <= local_bound(coeffs).bound + 1e-9


def test_pnc_bound_matches_grid_oracle():
    rng = np.random.default_rng(200)
    for _ in range(20):
        coeffs = rng.normal(size=(3, 2))
        relation = rng.normal(size=3)
        assert pnc_bound(coeffs, [relation]).bound == pytest.approx(grid_pnc_bound(coeffs, relation), abs=1e-3)


def test_assemblages_are_no_signaling():
    rng = np.random.default_rng(300)
    for _ in range(100):
        alice = tuple(Observable(BlochVec(*a), float(rng.uniform())) for a in random_unit(rng, 3))
        rho = random_density(rng, rank=int(rng.integers(1, 5)))
        asm = assemblage_of(rho, alice)
        assert asm.violation() <= 1e-9
        for x in range(1, 3):
            np.testing.assert_allclose(asm.reduced_state(x), asm.reduced_state(0), atol=1e-12)


def _flipped_family(rng):
    base = TRINE_AXES if rng.uniform() < 0.5 else SIC_AXES
    signs = (1,) * 3 if base is TRINE_AXES else (1, -1, -1, -1)
    flips = rng.choice((-1, 1), size=len(base))
    axes = (np.asarray(base) @ random_rotation(rng).T) * flips[:, None]
    return axes, tuple(int(s * f) for s, f in zip(signs, flips))


def test_mixture_identity_iff_relation_holds():
    rng = np.random.default_rng(400)
    for trial in range(100):
        if trial % 2 == 0:
            axes, signs = _flipped_family(rng)
            holds = True
        else:
            axes = random_unit(rng, int(rng.integers(3, 5)))
            signs = tuple(int(s) for s in rng.choice((-1, 1), size=len(axes)))
            holds = False
        obs = [Observable(BlochVec(*a)) for a in axes]
        residual = check_relation(obs, FunctionalRelation(tuple(float(s) for s in signs)))
        assert verify_mixture_identity(obs, signs) is holds
        assert (residual <= 1e-9) is holds
        assert (signs in mixture_sign_patterns(obs) or tuple(-s for s in signs) in mixture_sign_patterns(obs)) is holds
