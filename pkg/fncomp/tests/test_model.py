import json
import logging

import numpy as np
import pytest

from .._globals import Role, SOURCE_ROLES
from ..fixtures import ex2_document, fixture_document, load_fixture
from ..model import (
    NormalizationError,
    PartialFunctionError,
    Pmf,
    RoleError,
    SchemaError,
    check_conditional_independence,
    check_partially_invertible,
    conditional_entropy,
    conditional_mutual_information,
    entropy_bits,
    load_problem,
    problem_from_document,
    problem_to_document,
)


H_075 = 0.8112781244591328


def small_doc(**overrides):
    doc = {
        "X": ["a", "b"],
        "Y": ["0", "1"],
        "Z": ["*"],
        "F": ["no", "yes"],
        "p": [
            {"x": "a", "y": "0", "z": "*", "p": 0.25},
            {"x": "a", "y": "1", "z": "*", "p": 0.25},
            {"x": "b", "y": "0", "z": "*", "p": 0.5},
        ],
        "f": [
            {"x": x, "y": y, "z": "*", "v": "yes" if x == "a" else "no"}
            for x in ("a", "b")
            for y in ("0", "1")
        ],
    }
    doc.update(overrides)
    return doc


def test_load_small():
    spec = problem_from_document(small_doc())
    assert spec.alphabet_X == ("a", "b")
    assert spec.z_constant
    assert spec.pmf.shape == (2, 2, 1)
    assert spec.pmf[1, 1, 0] == 0.0
    assert spec.alphabet_F[spec.f[0, 1, 0]] == "yes"
    assert spec.alphabet_F[spec.f[1, 0, 0]] == "no"
    with pytest.raises(ValueError):
        spec.pmf[0, 0, 0] = 1.0


def test_load_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(small_doc()))
    spec = load_problem(path)
    assert spec.alphabet_Y == ("0", "1")
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_problem(path)


@pytest.mark.parametrize(
    "overrides, exc",
    [
        ({"X": []}, SchemaError),
        ({"X": ["a", "a"]}, SchemaError),
        ({"p": [{"x": "c", "y": "0", "z": "*", "p": 1.0}]}, SchemaError),
        ({"p": [{"x": "a", "y": "0", "z": "*", "p": -1.0}]}, SchemaError),
        ({"p": [{"x": "a", "y": "0", "z": "*", "p": 0.5}]}, NormalizationError),
        ({"f": [{"x": "a", "y": "0", "z": "*", "v": "yes"}]}, PartialFunctionError),
    ],
)
def test_load_errors(overrides, exc):
    with pytest.raises(exc):
        problem_from_document(small_doc(**overrides))


def test_prune_zero_marginal(caplog):
    doc = small_doc(Y=["0", "1", "2"])
    doc["f"] = doc["f"] + [
        {"x": x, "y": "2", "z": "*", "v": "no"} for x in ("a", "b")
    ]
    with caplog.at_level(logging.WARNING):
        spec = problem_from_document(doc)
    assert spec.alphabet_Y == ("0", "1")
    assert spec.pruned == (("Y", "2"),)
    assert "Pruning" in caplog.text


def test_document_round_trip():
    spec = load_fixture("ex4")
    again = problem_from_document(problem_to_document(spec))
    assert again.alphabet_X == spec.alphabet_X
    assert np.array_equal(again.pmf, spec.pmf)
    assert np.array_equal(again.f, spec.f)
    assert again.description == spec.description


def test_fixture_names():
    assert load_fixture("ex2").description == load_fixture("ex2:0.75").description
    assert "0.9" in load_fixture("ex2:0.9").description
    with pytest.raises(SchemaError):
        fixture_document("ex9")
    with pytest.raises(SchemaError):
        fixture_document("ex2:abc")
    with pytest.raises(SchemaError):
        ex2_document(1.5)


def test_pmf_checks():
    with pytest.raises(RoleError):
        Pmf((Role.X, Role.X), np.full((2, 2), 0.25))
    with pytest.raises(RoleError):
        Pmf((Role.X,), np.full((2, 2), 0.25))
    with pytest.raises(NormalizationError):
        Pmf((Role.X,), np.array([0.5, 0.6]))
    pmf = Pmf((Role.X, Role.Y), np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert np.allclose(pmf.marginal((Role.Y,)), [0.4, 0.6])
    assert np.allclose(pmf.marginal((Role.Y, Role.X)), pmf.tensor.T)
    with pytest.raises(RoleError):
        pmf.axis(Role.Z)


def test_entropies_ex2(ex2):
    joint = ex2.joint()
    assert joint.roles == SOURCE_ROLES
    assert conditional_entropy(joint, (Role.X,), (Role.Y,)) == pytest.approx(H_075)
    assert conditional_entropy(joint, (Role.X, Role.Y)) == pytest.approx(1.0 + H_075)
    assert conditional_mutual_information(
        joint, (Role.X,), (Role.Y,)
    ) == pytest.approx(1.0 - H_075)
    # Z is constant so conditioning on it changes nothing
    assert conditional_mutual_information(
        joint, (Role.X,), (Role.Y,), (Role.Z,)
    ) == pytest.approx(1.0 - H_075)
    assert entropy_bits(np.array([0.5, 0.5])) == pytest.approx(1.0)


def test_cmi_errors(ex2):
    joint = ex2.joint()
    with pytest.raises(RoleError):
        conditional_mutual_information(joint, (), (Role.Y,))
    with pytest.raises(RoleError):
        conditional_mutual_information(joint, (Role.X,), (Role.X,))
    with pytest.raises(RoleError):
        conditional_mutual_information(joint, (Role.X,), (Role.V,))


def test_cmi_chain_rule(ex3):
    joint = ex3.joint()
    lhs = conditional_mutual_information(joint, (Role.X,), (Role.Y, Role.Z))
    rhs = conditional_mutual_information(
        joint, (Role.X,), (Role.Z,)
    ) + conditional_mutual_information(joint, (Role.X,), (Role.Y,), (Role.Z,))
    assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize(
    "name, expected",
    [("ex1", False), ("ex2:0.75", False), ("ex2:0.5", True), ("ex3", True), ("ex4", False)],
)
def test_conditional_independence(name, expected):
    assert check_conditional_independence(load_fixture(name)) == expected


@pytest.mark.parametrize(
    "name, wrt_x, wrt_y",
    [("ex4", True, False), ("inv", True, True), ("ex1", False, False)],
)
def test_partially_invertible(name, wrt_x, wrt_y):
    spec = load_fixture(name)
    assert check_partially_invertible(spec, Role.X) == wrt_x
    assert check_partially_invertible(spec, Role.Y) == wrt_y
    with pytest.raises(RoleError):
        check_partially_invertible(spec, Role.Z)


def test_swap_and_permute(ex4):
    swapped = ex4.swap_sources()
    assert swapped.alphabet_X == ex4.alphabet_Y
    assert np.array_equal(swapped.pmf, ex4.pmf.transpose(1, 0, 2))
    assert np.array_equal(swapped.swap_sources().f, ex4.f)
    perm = ex4.permuted(Role.X, [2, 0, 1])
    assert perm.alphabet_X == ("2", "0", "1")
    assert perm.pmf[0, 0, 0] == ex4.pmf[2, 0, 0]
