import json

import numpy as np
import pytest
from attrs import evolve
from pytest import mark

from .._globals import Role
from ..entropy import Channel, NonConvergence, RateTriple
from ..fixtures import fixture_document, load_fixture
from ..model import RoleError, problem_from_document
from ..regions import (
    BOUND,
    RATE_REGION,
    HypothesisError,
    RateRegion,
    RegionEntry,
    direction_fan,
    independent_sources_region,
    inner_bound_region,
    inner_candidates,
    korner_marton_region,
    mode_inclusion_check,
    outer_bound_region,
    partially_invertible_region,
    region_compare,
    slepian_wolf_region,
    sum_rate_check,
    sweep_region,
)
from ..sets import MultiFamily
from ..util import BudgetExceeded, ValidationError, dump_json
from .conftest import FAST_LAMBDAS, make_settings


H_075 = 0.8112781244591328


def triple_region(*triples, name="test"):
    return RateRegion(name, BOUND, [RegionEntry(RateTriple(*t)) for t in triples])


def test_slepian_wolf_and_korner_marton(ex2):
    sw = slepian_wolf_region(ex2)
    assert sw.kind == RATE_REGION
    (tri,) = sw.triples
    assert (tri.a, tri.b, tri.s) == pytest.approx((H_075, H_075, 1.0 + H_075))
    km = korner_marton_region(ex2)
    (tri,) = km.triples
    assert (tri.a, tri.b, tri.s) == pytest.approx((H_075, H_075, 2.0 * H_075))
    res = region_compare(sw, km)
    assert res.a_in_b
    assert not res.b_in_a
    assert not res.equal
    # The sum rate constraints differ by I(X;Y), seen along the diagonal
    assert res.max_gap == pytest.approx((1.0 - H_075) / np.sqrt(2.0), abs=1e-9)
    assert res.witness == pytest.approx((np.sqrt(0.5), np.sqrt(0.5)))
    assert res.b_outside_a == pytest.approx(res.max_gap)
    assert res.a_outside_b == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", ["ex1", "ex3", "ex4"])
def test_korner_marton_hypotheses(name):
    with pytest.raises(HypothesisError):
        korner_marton_region(load_fixture(name))


def test_korner_marton_asymmetric():
    doc = fixture_document("ex2")
    for entry in doc["p"]:
        if entry["x"] == entry["y"]:
            entry["p"] = 0.5 if entry["x"] == 0 else 0.25
    with pytest.raises(HypothesisError):
        korner_marton_region(problem_from_document(doc))


def test_region_basics():
    with pytest.raises(ValidationError):
        RateRegion("empty", BOUND, [])
    region = triple_region((0.0, 1.0, 1.0), (1.0, 0.0, 1.0))
    assert region.contains(0.5, 1.0)
    assert region.contains(1.0, 0.0)
    assert not region.contains(0.5, 0.5)
    assert region.support(1.0, 1.0) == 1.0
    assert region.polyline() == [(0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]
    region = triple_region((0.5, 0.75, 2.0))
    assert region.polyline() == [(0.5, 1.5), (1.25, 0.75)]
    # Unnormalized triples are read with s raised to a + b
    region = triple_region((0.5, 0.75, 0.25))
    assert region.triples == [RateTriple(0.5, 0.75, 1.25)]
    assert region.polyline() == [(0.5, 0.75)]


def test_polyline_prunes_straight_runs():
    # Two triples on the same sum rate line, the middle corners are collinear
    region = triple_region((0.0, 1.0, 2.0), (1.0, 0.0, 2.0))
    assert region.polyline() == [(0.0, 2.0), (2.0, 0.0)]


def test_csv_rows():
    region = RateRegion(
        "inner:maximal",
        BOUND,
        [
            RegionEntry(RateTriple(0.5, 0.75, 2.0), 0, 0.5),
            RegionEntry(RateTriple(0.5, 0.75, 2.0), 0, 2.0),
        ],
        meta={"mode": "maximal"},
    )
    assert region.csv_rows() == [
        (0.5, 0.5, 1.5, "maximal", 0),
        (2.0, 1.25, 0.75, "maximal", 0),
    ]
    region = triple_region((0.5, 0.75, 2.0), name="outer")
    assert region.csv_rows() == [
        ("", 0.5, 1.5, "outer", -1),
        ("", 1.25, 0.75, "outer", -1),
    ]


def test_region_json(ex2):
    region = inner_bound_region(ex2, lambdas=(0.5, 2.0), settings=make_settings(restarts=2))
    data = json.loads(dump_json(region))
    assert data["polyline"] == [list(pt) for pt in region.polyline()]
    assert data["kind"] == BOUND
    again = RateRegion.from_json_dict(data)
    assert again == region
    assert again.meta["mode"] == "maximal"
    with pytest.raises(ValidationError):
        RateRegion.from_json_dict({"name": "bad"})


def test_region_swap():
    region = RateRegion(
        "r", BOUND, [RegionEntry(RateTriple(0.25, 0.5, 1.0), 3, 4.0, True, [[1.0]], [[0.5], [0.5]])]
    )
    swapped = region.swapped()
    (entry,) = swapped.entries
    assert entry.triple == RateTriple(0.5, 0.25, 1.0)
    assert entry.lam == 0.25
    assert entry.v_channel == ((0.5,), (0.5,))
    assert entry.w_channel == ((1.0,),)
    assert swapped.swapped() == region


def test_direction_fan():
    fan = direction_fan(181)
    assert fan.shape == (181, 2)
    assert fan[0] == pytest.approx((1.0, 0.0))
    assert fan[-1] == pytest.approx((0.0, 1.0))
    assert np.allclose(np.linalg.norm(fan, axis=1), 1.0)
    with pytest.raises(ValidationError):
        direction_fan(1)


def test_compare_equal():
    region = triple_region((0.5, 0.75, 2.0))
    res = region_compare(region, triple_region((0.5, 0.75, 2.0 + 1e-4)))
    assert res.equal
    assert res.max_gap > 0.0
    res = region_compare(region, triple_region((0.5, 0.75, 2.0 + 1e-4)), tol=1e-6)
    assert not res.a_in_b
    assert res.b_in_a


def test_inner_candidates(ex1, ex2, ex4):
    cands = inner_candidates(ex1)
    assert [v.to_strings() for v, _ in cands] == [
        ["{1,2}", "{3,4}"],
        ["{1,2}", "{2,3}", "{3,4}"],
    ]
    assert cands[0][1].to_strings() == ["{1}", "{4}", "{2,3}"]
    assert len(inner_candidates(ex2)) == 1
    assert len(inner_candidates(ex4, "multiset", settings=make_settings())) == 5
    cands = inner_candidates(ex4, "multiset", settings=make_settings(dominated_pruning=True))
    ((v_memb, w_memb),) = cands
    assert v_memb.describe() == "{0} {1} {2}x2"
    assert w_memb.describe() == "{1} {0,2}x3"
    with pytest.raises(ValidationError):
        inner_candidates(ex1, "cliques")


def test_inner_bound_slepian_wolf(ex2, fast_settings):
    # Both graphs are complete, so the only messages are the sources themselves
    region = inner_bound_region(ex2, lambdas=FAST_LAMBDAS, settings=fast_settings)
    assert region.name == "inner:maximal"
    assert region.kind == BOUND
    assert len(region.entries) == len(FAST_LAMBDAS)
    assert region.meta["lambdas"] == list(FAST_LAMBDAS)
    assert region.meta["restarts"] == 4
    assert region.meta["n_unconverged"] == 0
    assert region.candidates[0].v_membership == ("{0}", "{1}")
    res = region_compare(region, slepian_wolf_region(ex2), tol=1e-6)
    assert res.equal


def test_inner_bound_ex1(ex1, fast_settings):
    region = inner_bound_region(ex1, lambdas=FAST_LAMBDAS, settings=fast_settings)
    outer = outer_bound_region(ex1, fast_settings)
    assert region_compare(region, outer).a_in_b
    assert {e.candidate_id for e in region.entries} == {0, 1}
    for entry in region.entries:
        assert entry.v_channel is not None
        mat_w = np.array(entry.w_channel)
        assert np.allclose(mat_w.sum(axis=0), 1.0)


def test_sweep_checks(ex2):
    cands = inner_candidates(ex2)
    settings = make_settings()
    tight = evolve(settings, regions=evolve(settings.regions, task_budget=3))
    with pytest.raises(BudgetExceeded):
        sweep_region(ex2, cands, "tight", BOUND, FAST_LAMBDAS, tight)
    with pytest.raises(ValidationError):
        sweep_region(ex2, cands, "bad", BOUND, [], settings)
    with pytest.raises(ValidationError):
        sweep_region(ex2, cands, "bad", BOUND, [0.0, 1.0], settings)


def test_sweep_strict(ex1):
    settings = make_settings(restarts=1, max_iter=2)
    strict = evolve(settings, solver=evolve(settings.solver, strict=True))
    region = sweep_region(ex1, inner_candidates(ex1)[1:], "loose", BOUND, [1.0], settings)
    assert region.meta["n_unconverged"] == 1
    assert not region.entries[0].converged
    with pytest.raises(NonConvergence):
        sweep_region(ex1, inner_candidates(ex1)[1:], "strict", BOUND, [1.0], strict)


def test_independent_sources(ex2, ex3, fast_settings):
    with pytest.raises(HypothesisError):
        independent_sources_region(ex2, fast_settings)
    region = independent_sources_region(load_fixture("ex2:0.5"), fast_settings)
    assert region.kind == RATE_REGION
    (tri,) = region.triples
    assert (tri.a, tri.b, tri.s) == pytest.approx((1.0, 1.0, 2.0))
    region = independent_sources_region(ex3, fast_settings)
    (tri,) = region.triples
    log2_3 = float(np.log2(3.0))
    assert (tri.a, tri.b, tri.s) == pytest.approx((log2_3, log2_3, 2 * log2_3), abs=1e-6)


def test_outer_bound(ex2, fast_settings):
    region = outer_bound_region(ex2, fast_settings)
    assert region.kind == BOUND
    assert region.meta["converged"]
    assert region.meta["restarts"] == fast_settings.solver.restarts
    (tri,) = region.triples
    # Every graph is complete or a parity split, so the outer bound is Korner-Marton
    assert (tri.a, tri.b, tri.s) == pytest.approx((H_075, H_075, 2 * H_075), abs=1e-6)
    assert region_compare(region, korner_marton_region(ex2), tol=1e-6).equal


def test_partially_invertible_slepian_wolf(inv, fast_settings):
    sw = slepian_wolf_region(inv)
    for wrt in (Role.X, Role.Y):
        region = partially_invertible_region(
            inv, wrt, lambdas=FAST_LAMBDAS, settings=fast_settings
        )
        assert region.kind == RATE_REGION
        assert region.meta["wrt"] == wrt.name
        assert region_compare(region, sw, tol=1e-6).equal


def test_partially_invertible_hypotheses(ex1, ex4, fast_settings):
    with pytest.raises(HypothesisError):
        partially_invertible_region(ex1, Role.X, settings=fast_settings)
    with pytest.raises(HypothesisError):
        partially_invertible_region(ex4, Role.Y, settings=fast_settings)
    with pytest.raises(RoleError):
        partially_invertible_region(ex4, Role.Z, settings=fast_settings)


def test_sum_rate_check(ex1):
    rng = np.random.default_rng(3)
    chan_v = Channel.random(MultiFamily.from_values(ex1.alphabet_X, [1, 3, 12]), rng)
    chan_w = Channel.random(MultiFamily.from_values(ex1.alphabet_Y, [1, 2, 4, 8, 6]), rng)
    res = sum_rate_check(ex1, chan_v, chan_w)
    assert res.passed
    assert res.sum_rate == pytest.approx(res.chain_sum, abs=1e-9)
    assert res.sum_rate == pytest.approx(res.joint_information, abs=1e-9)


@mark.slow
def test_independent_matches_outer(ex3):
    settings = make_settings()
    res = region_compare(
        independent_sources_region(ex3, settings), outer_bound_region(ex3, settings)
    )
    assert res.equal


@mark.slow
def test_ex4_partial_matches_multiset_inner(ex4):
    settings = make_settings(restarts=8, lambda_count=64)
    exact = partially_invertible_region(ex4, Role.X, settings=settings)
    inner = inner_bound_region(ex4, "multiset", settings=settings)
    res = region_compare(exact, inner, tol=1e-3)
    assert res.equal
    # The exact region never reaches beyond the outer bound
    assert region_compare(exact, outer_bound_region(ex4, settings)).a_in_b


@mark.slow
@pytest.mark.parametrize(
    "small_mode,large_mode",
    [("maximal", "multiset"), ("maximal", "all"), ("all", "multiset")],
)
def test_ex4_inclusion_is_strict(ex4, small_mode, large_mode):
    settings = make_settings(restarts=8, lambda_count=64)
    check = mode_inclusion_check(ex4, small_mode, large_mode, settings=settings)
    assert check.comparison.a_in_b
    assert check.strict
    assert check.confirmed_gap is not None and check.confirmed_gap > 1e-3
