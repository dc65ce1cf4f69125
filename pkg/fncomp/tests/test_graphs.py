import numpy as np
import pytest

from .._globals import Role
from ..entropy import Channel
from ..fixtures import load_fixture
from ..graphs import (
    CharGraph,
    InconsistentFTilde,
    MembershipViolation,
    build_char_graph,
    build_generalized_graph,
    build_joint_char_graph,
    lemma1_hypotheses,
    verify_lemma1_conclusion,
)
from ..model import RoleError
from ..sets import MultiFamily
from ..util import SizeError, bits_from


def named_edges(g):
    return {(g.labels[a], g.labels[b]) for a, b in g.edges()}


def test_char_graph_checks():
    with pytest.raises(ValueError):
        CharGraph(["a", "b"], [0b10, 0])
    with pytest.raises(ValueError):
        CharGraph(["a", "b"], [0b01, 0])
    with pytest.raises(ValueError):
        CharGraph(["a"], [0, 0])
    g = CharGraph.from_edges(["a", "b", "c"], [(0, 1), (2, 2)])
    assert g.edges() == [(0, 1)]
    assert g.is_independent(bits_from([0, 2]))
    assert not g.is_independent(bits_from([0, 1]))
    assert not g.is_complete()


def test_ex1_graphs(ex1):
    g_x = build_char_graph(ex1, Role.X, (Role.Y, Role.Z))
    assert g_x.provenance == "G_{X|Y,Z}"
    assert named_edges(g_x) == {("1", "3"), ("1", "4"), ("2", "4")}
    # Z is constant, so conditioning on it changes nothing
    assert build_char_graph(ex1, Role.X, (Role.Y,)).edges() == g_x.edges()
    g_y = build_char_graph(ex1, Role.Y, (Role.Z, Role.X))
    assert g_y.provenance == "G_{Y|X,Z}"
    assert named_edges(g_y) == {("1", "3"), ("1", "4"), ("2", "4")}
    # With nothing known about Y every pair of X symbols gives both values somewhere
    assert build_char_graph(ex1, Role.X, ()).is_complete()


def test_ex4_graphs(ex4):
    g_y = build_char_graph(ex4, Role.Y, (Role.X, Role.Z))
    assert named_edges(g_y) == {("0", "1"), ("1", "2")}
    assert build_char_graph(ex4, Role.X, (Role.Y, Role.Z)).is_complete()


def test_joint_graph(ex2):
    g = build_joint_char_graph(ex2)
    assert g.provenance == "G_{X,Y|Z}"
    assert g.labels == ("(0,0)", "(0,1)", "(1,0)", "(1,1)")
    # Two classes of equal parity, every cross pair is an edge
    assert named_edges(g) == {
        ("(0,0)", "(0,1)"),
        ("(0,0)", "(1,0)"),
        ("(0,1)", "(1,1)"),
        ("(1,0)", "(1,1)"),
    }


def test_graph_errors(ex1):
    with pytest.raises(RoleError):
        build_char_graph(ex1, Role.V, (Role.Y,))
    with pytest.raises(RoleError):
        build_char_graph(ex1, Role.X, (Role.X,))
    with pytest.raises(RoleError):
        build_char_graph(ex1, Role.X, (Role.Y, Role.Y))
    with pytest.raises(RoleError):
        build_char_graph(ex1, Role.X, (Role.W,))
    with pytest.raises(SizeError):
        build_char_graph(ex1, Role.X, (Role.Y,), vertex_cap=3)
    with pytest.raises(SizeError):
        build_joint_char_graph(ex1, vertex_cap=15)


def test_generalized_graph(ex1):
    labels = ex1.alphabet_X
    membership = MultiFamily.from_values(labels, [bits_from([0, 1]), bits_from([2, 3])])
    g_v = build_generalized_graph(ex1, membership)
    assert g_v.provenance == "G_{Y|V,Z}"
    assert named_edges(g_v) == {
        ("1", "2"), ("1", "3"), ("1", "4"), ("2", "4"), ("3", "4")
    }
    # Singletons reproduce the ordinary conditional graph
    singletons = MultiFamily.from_values(labels, [1, 2, 4, 8])
    assert build_generalized_graph(ex1, singletons).edges() == build_char_graph(
        ex1, Role.Y, (Role.X, Role.Z)
    ).edges()
    # Messages about Y build a graph on X
    g_w = build_generalized_graph(ex1, membership, source=Role.Y)
    assert g_w.provenance == "G_{X|W,Z}"
    assert g_w.labels == ex1.alphabet_X


def test_generalized_graph_errors(ex1, ex4):
    labels = ex1.alphabet_X
    with pytest.raises(MembershipViolation):
        build_generalized_graph(ex1, MultiFamily.from_values(labels, [bits_from([0, 1])]))
    with pytest.raises(MembershipViolation):
        build_generalized_graph(ex1, MultiFamily.from_values(["a", "b", "c", "d"], [15]))
    # {1,3} is an edge of G_{X|Y,Z}: at y = 2 the function tells the symbols apart
    with pytest.raises(InconsistentFTilde):
        build_generalized_graph(
            ex1, MultiFamily.from_values(labels, [bits_from([0, 2]), 2, 8])
        )
    with pytest.raises(RoleError):
        build_generalized_graph(
            ex1, MultiFamily.from_values(labels, [1, 2, 4, 8]), source=Role.Z
        )
    chan = Channel.identity(ex4.alphabet_X)
    with pytest.raises(MembershipViolation):
        build_generalized_graph(ex4, MultiFamily.from_values(ex4.alphabet_X, [7]), chan)
    g = build_generalized_graph(ex4, chan.membership, chan)
    assert named_edges(g) == {("0", "1"), ("1", "2")}


@pytest.mark.parametrize(
    "name, expected",
    [
        ("ex1", (False, False, False)),
        ("ex2:0.75", (True, True, False)),
        ("ex3", (False, False, True)),
        ("ex4", (True, True, False)),
    ],
)
def test_reduction_hypotheses(name, expected):
    hyp = lemma1_hypotheses(load_fixture(name))
    assert (hyp.full_support, hyp.complete_graph, hyp.cond_independent) == expected
    assert hyp.any() == any(expected)


def test_reduction_ex1(ex1):
    report = verify_lemma1_conclusion(ex1)
    assert not report.hypotheses.any()
    assert not report.all_equal
    assert report.consistent
    assert report.missing_edges == ()
    entry = report.find(["{3,4}", "{1,2}"])
    assert entry is not None
    assert not entry.equal
    assert entry.extra_edges == (("1", "2"), ("3", "4"))
    singletons = report.find(["{1}", "{2}", "{3}", "{4}"])
    assert singletons.equal


@pytest.mark.parametrize("fixture_name", ["ex2", "ex3", "ex4"])
def test_reduction_holds(fixture_name, request):
    spec = request.getfixturevalue(fixture_name)
    report = verify_lemma1_conclusion(spec)
    assert report.hypotheses.any()
    assert report.all_equal
    assert report.consistent
    assert len(report.entries) > 0


def test_graph_exports(ex4):
    g = build_char_graph(ex4, Role.Y, (Role.X, Role.Z))
    assert g.to_json_dict() == {
        "vertices": ["0", "1", "2"],
        "edges": [["0", "1"], ["1", "2"]],
        "provenance": "G_{Y|X,Z}",
    }
    nx_g = g.to_networkx()
    assert sorted(nx_g.nodes) == ["0", "1", "2"]
    assert nx_g.has_edge("1", "0")
    assert not nx_g.has_edge("0", "2")
    assert nx_g.graph["provenance"] == "G_{Y|X,Z}"
    assert np.array_equal(
        np.array(g.adj), np.array([bits_from([1]), bits_from([0, 2]), bits_from([1])])
    )


def unordered_edges(g):
    return {frozenset((g.labels[a], g.labels[b])) for a, b in g.edges()}


def membership_by_label(spec, groups):
    labels = spec.alphabet_X
    return MultiFamily.from_values(
        labels, [bits_from([labels.index(s) for s in group]) for group in groups]
    )


@pytest.mark.parametrize("fixture_name", ["ex1", "ex2", "ex3", "ex4"])
def test_graphs_follow_relabeling(fixture_name, request):
    spec = request.getfixturevalue(fixture_name)
    for role in (Role.X, Role.Y):
        order = list(reversed(range(len(spec.alphabet(role)))))
        perm = spec.permuted(role, order)
        for target, given in ((Role.X, (Role.Y, Role.Z)), (Role.Y, (Role.X, Role.Z))):
            assert unordered_edges(build_char_graph(perm, target, given)) == (
                unordered_edges(build_char_graph(spec, target, given))
            )
        assert unordered_edges(build_joint_char_graph(perm)) == unordered_edges(
            build_joint_char_graph(spec)
        )


def test_generalized_graph_follows_relabeling(ex1):
    groups = [("1", "2"), ("3", "4")]
    expected = unordered_edges(
        build_generalized_graph(ex1, membership_by_label(ex1, groups))
    )
    for role in (Role.X, Role.Y):
        perm = ex1.permuted(role, [2, 0, 3, 1])
        g = build_generalized_graph(perm, membership_by_label(perm, groups))
        assert unordered_edges(g) == expected
