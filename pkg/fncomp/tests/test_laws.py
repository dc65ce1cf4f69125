import numpy as np
import pytest
from pytest import mark

from .. import laws
from .._globals import WITNESS_ROLES, Role
from ..entropy import Channel
from ..fixtures import load_fixture
from ..laws import (
    V_CHAIN,
    W_CHAIN,
    JointWitness,
    WitnessSampler,
    accepts_v_first,
    accepts_w_first,
    chain_values,
    condition_order_check,
    law_suite,
    make_witness,
    random_admissible_witness,
    relabel_invariance_check,
    relabeled_witness,
    support_equivalence_check,
    zero_error_check,
)
from ..model import Pmf, RoleError
from ..sets import MultiFamily
from ..util import SizeError, ValidationError
from .conftest import make_settings


def identity_witness(spec):
    return make_witness(
        spec, Channel.identity(spec.alphabet_X), Channel.identity(spec.alphabet_Y)
    )


def leaky_witness(spec):
    """V = X and W = X, so W carries information Y does not have"""
    eye = np.eye(len(spec.alphabet_X))
    tensor = np.einsum("vx,xyz,wx->vxywz", eye, spec.pmf, eye)
    return JointWitness(Pmf(WITNESS_ROLES, tensor))


def test_witness_checks(ex4):
    witness = identity_witness(ex4)
    assert witness.chains == (V_CHAIN, W_CHAIN)
    assert chain_values(witness.pmf) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert witness.size == 3 * 3 * 3 * 3 * 1
    assert np.allclose(witness.source_pmf(), ex4.pmf)
    with pytest.raises(RoleError):
        JointWitness(Pmf((Role.X, Role.Y, Role.Z), ex4.pmf))
    with pytest.raises(ValidationError):
        JointWitness(witness.pmf, ["V-W"])
    leaky = leaky_witness(ex4)
    assert leaky.holds() == (True, False)
    with pytest.raises(ValidationError):
        JointWitness(leaky.pmf, [W_CHAIN])


def test_zero_error_identity(ex1, ex4):
    for spec in (ex1, ex4):
        assert zero_error_check(identity_witness(spec), spec)


def test_zero_error_fails(ex2):
    # One value for V tells the receiver nothing about X
    merged = Channel.uniform(MultiFamily.from_values(ex2.alphabet_X, [3]))
    witness = make_witness(ex2, merged, Channel.identity(ex2.alphabet_Y))
    assert not zero_error_check(witness, ex2)
    report = support_equivalence_check(witness, ex2)
    assert not report.zero_error
    assert not report.pairwise
    assert report.memberships is False
    assert report.failed_claims == []
    assert report.v_support == ("{0,1}",)


def test_zero_error_needs_chains(ex4, ex2):
    with pytest.raises(ValidationError):
        zero_error_check(leaky_witness(ex4), ex4)
    with pytest.raises(ValidationError):
        zero_error_check(identity_witness(ex2), ex4)


def test_chain_violation_abstains(ex4):
    report = support_equivalence_check(leaky_witness(ex4), ex4)
    assert report.abstained
    assert report.chains == (True, False)
    assert report.claim_a and report.claim_b
    assert report.claim_c is None and report.claim_d is None
    assert report.forward is None and report.backward is None
    assert report.failed_claims == []
    assert report.w_support == ("{0,1,2}", "{0,1,2}", "{0,1,2}")


def test_identity_equivalence(ex4):
    report = support_equivalence_check(identity_witness(ex4), ex4)
    assert not report.abstained
    assert report.zero_error and report.pairwise and report.memberships
    assert report.v_support == ("{0}", "{1}", "{2}")


def test_witness_cap(ex4, monkeypatch):
    monkeypatch.setattr(laws, "WITNESS_CAP", 10)
    with pytest.raises(SizeError):
        support_equivalence_check(identity_witness(ex4), ex4)


@pytest.mark.parametrize("fixture_name", ["ex1", "ex4"])
def test_random_witnesses(fixture_name, request):
    spec = request.getfixturevalue(fixture_name)
    sampler = WitnessSampler(spec)
    for seed in range(10):
        rng = np.random.default_rng(seed)
        witness, chan_v, chan_w = random_admissible_witness(spec, rng, sampler=sampler)
        assert witness.holds() == (True, True)
        assert zero_error_check(witness, spec)
        report = support_equivalence_check(witness, spec)
        assert report.memberships
        assert sorted(report.v_support) == sorted(chan_v.membership.to_strings())
        assert relabel_invariance_check(spec, chan_w).passed


def test_relabeled_witness(ex1):
    rng = np.random.default_rng(7)
    witness, chan_v, chan_w = random_admissible_witness(ex1, rng)
    relabeled, s_v, s_w = relabeled_witness(witness)
    assert relabeled.holds() == (True, True)
    assert relabeled.pmf.tensor.shape[0] == len(s_v.entries)
    assert relabeled.pmf.tensor.shape[3] == len(s_w.entries)
    assert np.allclose(relabeled.source_pmf(), ex1.pmf)
    assert zero_error_check(relabeled, ex1)


def test_v_equals_x(ex4):
    ident = Channel.identity(ex4.alphabet_X).membership
    labels = ex4.alphabet_Y
    assert accepts_v_first(ex4, ident, MultiFamily.from_values(labels, [2, 5]))
    assert not accepts_v_first(ex4, ident, MultiFamily.from_values(labels, [3, 4]))
    assert accepts_w_first(ex4, ident, MultiFamily.from_values(labels, [2, 5]))
    # G_{X|Y,Z} is complete, so V can not merge symbols
    merged = MultiFamily.from_values(ex4.alphabet_X, [1, 6])
    assert not accepts_v_first(ex4, merged, MultiFamily.from_values(labels, [1, 2, 4]))
    assert not accepts_w_first(ex4, merged, MultiFamily.from_values(labels, [1, 2, 4]))


def test_condition_order_ex4(ex4):
    report = condition_order_check(ex4)
    assert report.equivalent
    assert report.n_v_first == report.n_w_first == 5


def test_condition_order_ex1(ex1):
    report = condition_order_check(ex1)
    assert report.equivalent
    assert report.mismatches == ()
    assert report.n_v_first > 1


def test_law_suite_small(ex4):
    report = law_suite(ex4, n_seeds=8, seed=3, settings=make_settings())
    assert report.passed
    assert report.n_seeds == 8
    assert report.seed == 3
    assert report.name == ex4.description
    assert report.failures == ()


@mark.slow
@pytest.mark.parametrize("name", ["ex1", "ex2:0.75", "ex4", "inv"])
def test_law_suite_full(name):
    report = law_suite(load_fixture(name), settings=make_settings(threads=0), name=name)
    assert report.passed
    assert report.name == name
