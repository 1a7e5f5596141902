import json
import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from contextuality_certification.bell_engine import quantum_max_fixed_measurements
from contextuality_certification.bounds_engine import local_bound, pnc_bound
from contextuality_certification.errors import (
    InputValidationError,
    ScenarioLookupError,
    ScenarioParseError,
)
from contextuality_certification.qubit_algebra import BlochVec
from contextuality_certification.scenario_model import (
    BUILTIN_SCENARIOS,
    SIC_AXES,
    TRINE_AXES,
    FunctionalRelation,
    Observable,
    Scenario,
    builtin_scenario,
    check_relation,
    complementary_orthogonality,
    dump_scenario,
    load_scenario,
    mixture_sign_patterns,
    named_state,
    read_scenario,
    relation_from_signs,
    smear,
    verify_mixture_identity,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenario_files"


def observables(axes, eta=1.0):
    return [Observable(BlochVec(*a), eta, f"O{i}") for i, a in enumerate(axes)]


Z_TRIPLE = observables([(0, 0, 1)] * 3)


def test_trine_builtin_shape():
    s = builtin_scenario("trine_delta3")
    assert (s.m, s.n) == (3, 3)
    assert s.relations == (FunctionalRelation((1.0, 1.0, 1.0)),)
    assert_allclose(s.coeffs, [[-1, 1, 1], [1, -1, 1], [1, 1, -1]])


def test_elegant_builtin_shape():
    s = builtin_scenario("elegant_b3")
    assert (s.m, s.n) == (4, 3)
    assert s.relations[0].coeffs == (1.0, -1.0, -1.0, -1.0)


def test_orthogonal_builtin_bob_axes():
    s = builtin_scenario("orthogonal_steering")
    assert [o.axis for o in s.bob] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert s.relations == ()


def test_unknown_builtin():
    with pytest.raises(ScenarioLookupError, match="unknown built-in"):
        builtin_scenario("chsh_plus")


@pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
def test_builtin_relations_hold(name):
    s = builtin_scenario(name)
    for relation in s.relations:
        assert check_relation(s.alice, relation) <= 1e-9


def test_check_relation_known_families():
    assert check_relation(observables(TRINE_AXES), FunctionalRelation((1, 1, 1))) <= 1e-9
    assert check_relation(observables(SIC_AXES), FunctionalRelation((1, -1, -1, -1))) <= 1e-9
    assert check_relation(Z_TRIPLE, FunctionalRelation((1, 1, 1))) == pytest.approx(3.0)


def test_check_relation_rejects_unsharp():
    with pytest.raises(InputValidationError, match="sharp"):
        check_relation(observables(TRINE_AXES, eta=0.5), FunctionalRelation((1, 1, 1)))


def test_check_relation_rejects_wrong_length():
    with pytest.raises(InputValidationError):
        check_relation(observables(TRINE_AXES), FunctionalRelation((1, 1)))


def test_relation_normalization():
    assert FunctionalRelation((-2.0, 2.0, 0.0)).coeffs == (1.0, -1.0, 0.0)
    with pytest.raises(InputValidationError, match="relation-support"):
        FunctionalRelation((0.0, 3.0, 0.0))


def test_mixture_identity_known_families():
    assert verify_mixture_identity(observables(TRINE_AXES), (1, 1, 1))
    assert verify_mixture_identity(observables(SIC_AXES), (1, -1, -1, -1))
    assert not verify_mixture_identity(Z_TRIPLE, (1, 1, 1))


def test_mixture_sign_patterns():
    assert mixture_sign_patterns(observables(TRINE_AXES)) == [(1, 1, 1), (-1, -1, -1)]
    assert set(mixture_sign_patterns(observables(SIC_AXES))) == {(1, -1, -1, -1), (-1, 1, 1, 1)}
    assert mixture_sign_patterns(Z_TRIPLE) == []


def test_relation_from_signs():
    assert relation_from_signs((-1, 1, 1, 1)).coeffs == (1.0, -1.0, -1.0, -1.0)


def test_complementary_orthogonality():
    assert complementary_orthogonality(observables(TRINE_AXES)) == pytest.approx(0.0, abs=1e-15)
    assert complementary_orthogonality(observables(TRINE_AXES, eta=0.5)) == pytest.approx(0.375)


def test_smear_identity():
    s = builtin_scenario("trine_delta3")
    assert smear(s, "alice", 1.0) == s


def test_smear_keeps_coefficients_and_other_side():
    s = smear(builtin_scenario("elegant_b3"), "bob", 0.5)
    assert all(o.eta == 0.5 for o in s.bob)
    assert all(o.eta == 1.0 for o in s.alice)
    assert_allclose(s.coeffs, builtin_scenario("elegant_b3").coeffs)


def test_smear_trine_reaches_local_bound():
    s = smear(builtin_scenario("trine_delta3"), "alice", 5 / 6)
    assert quantum_max_fixed_measurements(s) == pytest.approx(5.0, abs=1e-9)


def test_smear_elegant_bob_reaches_pnc_bound():
    s = smear(builtin_scenario("elegant_b3"), "bob", 1 / math.sqrt(3))
    assert quantum_max_fixed_measurements(s) == pytest.approx(4.0, abs=1e-9)


def test_smear_rejects_out_of_range():
    with pytest.raises(InputValidationError):
        smear(builtin_scenario("trine_delta3"), "alice", 1.2)


@pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
def test_dump_load_round_trip(name):
    s = builtin_scenario(name)
    assert load_scenario(dump_scenario(s)) == s


def test_round_trip_keeps_unsharp_and_complex_state():
    psi = np.array([0.6, 0.0, 0.0, 0.8j])
    s = Scenario(
        alice=tuple(observables(TRINE_AXES, eta=0.7)),
        bob=tuple(observables(TRINE_AXES)),
        state=np.outer(psi, psi.conj()),
        coeffs=np.arange(9.0).reshape(3, 3) / 7,
        relations=(FunctionalRelation((1, 1, 1)),),
        name="unsharp",
    )
    assert load_scenario(dump_scenario(s)) == s


def test_load_rejects_non_unit_axis_with_field_path():
    doc = json.loads(dump_scenario(builtin_scenario("trine_delta3")))
    doc["alice"][0]["axis"] = [0.0, 0.0, 1.5]
    with pytest.raises(ScenarioParseError, match="axis-unit-norm") as info:
        load_scenario(json.dumps(doc))
    assert info.value.location == "alice.0.axis"


def test_load_reports_syntax_error_position():
    with pytest.raises(ScenarioParseError) as info:
        load_scenario('{"name": "x",\n  "alice": [}')
    assert info.value.location.startswith("line 2")


def test_load_rejects_unknown_keys():
    doc = json.loads(dump_scenario(builtin_scenario("trine_delta3")))
    doc["charlie"] = []
    with pytest.raises(ScenarioParseError) as info:
        load_scenario(json.dumps(doc))
    assert info.value.location == "charlie"


def test_load_rejects_bad_coefficient_shape():
    doc = json.loads(dump_scenario(builtin_scenario("trine_delta3")))
    doc["coeffs"] = [[1, 1, 1], [1, 1, 1]]
    with pytest.raises(ScenarioParseError, match="coeffs-shape"):
        load_scenario(json.dumps(doc))


def test_load_rejects_unnormalized_state_matrix():
    doc = json.loads(dump_scenario(builtin_scenario("trine_delta3")))
    doc["state"] = {"matrix": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}
    with pytest.raises(InputValidationError, match="state-trace"):
        load_scenario(json.dumps(doc))


def test_load_vector_state_is_normalized():
    doc = json.loads(dump_scenario(builtin_scenario("trine_delta3")))
    doc["state"] = {"vector": [1, 0, 0, 1]}
    assert_allclose(load_scenario(json.dumps(doc)).state, named_state("phi_plus"), atol=1e-15)


def test_unknown_named_state():
    with pytest.raises(ScenarioLookupError, match="unknown state"):
        named_state("ghz")


def test_elegant_file_matches_builtin_bounds():
    from_file = read_scenario(str(SCENARIO_DIR / "elegant_b3.json"))
    builtin = builtin_scenario("elegant_b3")
    assert local_bound(from_file.coeffs).bound == local_bound(builtin.coeffs).bound
    assert pnc_bound(from_file.coeffs, from_file.relations).bound == pytest.approx(4.0, abs=1e-9)
    assert quantum_max_fixed_measurements(from_file) == pytest.approx(4 * math.sqrt(3), abs=1e-9)


def test_read_scenario_missing_file():
    with pytest.raises(ScenarioLookupError):
        read_scenario("no/such/scenario.json")


def test_read_scenario_directory_is_lookup_error(tmp_path):
    with pytest.raises(ScenarioLookupError, match="nor a readable file"):
        read_scenario(str(tmp_path))


def test_read_scenario_rejects_non_utf8_bytes(tmp_path):
    path = tmp_path / "latin1.json"
    path.write_bytes(b'{"name": "caf\xe9"}')
    with pytest.raises(ScenarioParseError) as info:
        read_scenario(str(path))
    assert info.value.location == "byte 13"


def test_load_rejects_wrong_size_state_matrix():
    doc = json.loads(dump_scenario(builtin_scenario("trine_delta3")))
    doc["state"] = {"matrix": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}
    with pytest.raises(ScenarioParseError, match="state-shape") as info:
        load_scenario(json.dumps(doc))
    assert info.value.location == "state.matrix"
