"""Conditional and generalized conditional characteristic graphs

Two symbols of a source must be told apart by the receiver whenever some outcome of the
receiver's other knowledge is jointly possible with both of them and the function value
differs. The graphs here record exactly those pairs as edges.
"""
import logging
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import networkx as nx
from attrs import frozen, field

from ._globals import Role, SOURCE_ROLES
from .model import ProblemSpec, RoleError, check_conditional_independence
from .sets import (
    MultiFamily,
    covering_subfamilies,
    full_mask,
    independent_sets,
)
from .util import SizeError, ValidationError, format_subset, iter_bits

if TYPE_CHECKING:
    from .entropy import Channel


log = logging.getLogger(__name__)


class InconsistentFTilde(ValidationError):
    """A message value covers symbols with different function values"""


class MembershipViolation(ValidationError):
    """A membership family does not cover its source or disagrees with its channel"""


@frozen
class CharGraph:
    """Undirected graph on an alphabet with bit-vector adjacency rows"""

    labels: Tuple[str, ...] = field(converter=tuple)

    adj: Tuple[int, ...] = field(converter=tuple)
    """Row `i` has bit `j` set iff vertices `i` and `j` are adjacent"""

    provenance: str = ""
    """Which source and conditioning produced the graph, e.g. 'G_{X|Y,Z}'"""

    def __attrs_post_init__(self) -> None:
        if len(self.adj) != len(self.labels):
            raise ValueError("Need one adjacency row per vertex")
        for i, row in enumerate(self.adj):
            if row >> len(self.labels):
                raise ValueError(f"Row {i} references unknown vertices")
            if row >> i & 1:
                raise ValueError(f"Vertex {i} has a self loop")
            for j in iter_bits(row):
                if not self.adj[j] >> i & 1:
                    raise ValueError(f"Edge ({i},{j}) is not symmetric")

    @classmethod
    def from_edges(
        cls,
        labels: Sequence[str],
        edges: Iterable[Tuple[int, int]],
        provenance: str = "",
    ) -> "CharGraph":
        adj = [0] * len(labels)
        for a, b in edges:
            if a != b:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
        return cls(labels, adj, provenance)

    @property
    def n(self) -> int:
        return len(self.labels)

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.adj[a] >> b & 1)

    def edges(self) -> List[Tuple[int, int]]:
        """Edges as (low, high) vertex index pairs, sorted"""
        return [(i, j) for i, row in enumerate(self.adj) for j in iter_bits(row) if j > i]

    def is_independent(self, bits: int) -> bool:
        return all(not (self.adj[v] & bits) for v in iter_bits(bits))

    def is_complete(self) -> bool:
        return all(row == full_mask(self.n) & ~(1 << i) for i, row in enumerate(self.adj))

    def edge_difference(self, other: "CharGraph") -> List[Tuple[int, int]]:
        """Edges of this graph that are missing from `other`"""
        return [e for e in self.edges() if not other.has_edge(*e)]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "vertices": list(self.labels),
            "edges": [[self.labels[a], self.labels[b]] for a, b in self.edges()],
            "provenance": self.provenance,
        }

    def to_networkx(self) -> nx.Graph:
        res = nx.Graph(provenance=self.provenance)
        res.add_nodes_from(self.labels)
        res.add_edges_from((self.labels[a], self.labels[b]) for a, b in self.edges())
        return res


def _check_vertices(n: int, vertex_cap: int) -> None:
    if n > vertex_cap:
        raise SizeError(f"Graph would have {n} vertices, the cap is {vertex_cap}")


def _graph_from_tables(
    pmf: np.ndarray,
    f_table: np.ndarray,
    labels: Sequence[str],
    provenance: str,
) -> CharGraph:
    """Build a graph from tables indexed (target, given, other)

    Vertices `a` and `b` are adjacent iff for some `given` value both have positive
    mass and the function values they can produce are not one and the same value.
    """
    n_target, n_given = pmf.shape[:2]
    adj = [0] * n_target
    for g_idx in range(n_given):
        produced = []
        for t_idx in range(n_target):
            support = pmf[t_idx, g_idx] > 0.0
            if support.any():
                produced.append((t_idx, set(f_table[t_idx, g_idx][support].tolist())))
        for i, (a, vals_a) in enumerate(produced):
            for b, vals_b in produced[i + 1 :]:
                if len(vals_a | vals_b) > 1:
                    adj[a] |= 1 << b
                    adj[b] |= 1 << a
    return CharGraph(labels, adj, provenance)


def _provenance(target: str, given: Sequence[Role]) -> str:
    if not given:
        return f"G_{{{target}}}"
    return f"G_{{{target}|{','.join(r.name for r in given)}}}"


def build_char_graph(
    spec: ProblemSpec, target: Role, given: Iterable[Role], vertex_cap: int = 64
) -> CharGraph:
    """Conditional characteristic graph of `target` given the roles in `given`

    Conditioning on several roles means conditioning on their tuple. Roles in neither
    `target` nor `given` are unknown to the receiver, so their outcomes are pooled.
    """
    given = tuple(given)
    if target not in SOURCE_ROLES:
        raise RoleError(f"Graphs are built on X, Y or Z, not {target.name}")
    if target in given or len(set(given)) != len(given):
        raise RoleError(f"Invalid conditioning roles {given} for target {target.name}")
    for role in given:
        if role not in SOURCE_ROLES:
            raise RoleError(f"Can not condition on {role.name}")
    given = tuple(r for r in SOURCE_ROLES if r in given)
    other = tuple(r for r in SOURCE_ROLES if r != target and r not in given)
    order = [SOURCE_ROLES.index(r) for r in (target,) + given + other]
    labels = spec.alphabet(target)
    _check_vertices(len(labels), vertex_cap)
    shape = (len(labels), -1, int(np.prod([len(spec.alphabet(r)) for r in other])))
    pmf = np.transpose(spec.pmf, order).reshape(shape)
    f_table = np.transpose(spec.f, order).reshape(shape)
    return _graph_from_tables(pmf, f_table, labels, _provenance(target.name, given))


def build_joint_char_graph(spec: ProblemSpec, vertex_cap: int = 64) -> CharGraph:
    """Characteristic graph of the pair (X,Y) given Z, on the product alphabet"""
    n_x, n_y, n_z = spec.pmf.shape
    _check_vertices(n_x * n_y, vertex_cap)
    labels = [f"({x},{y})" for x in spec.alphabet_X for y in spec.alphabet_Y]
    shape = (n_x * n_y, n_z, 1)
    return _graph_from_tables(
        spec.pmf.reshape(shape), spec.f.reshape(shape), labels, "G_{X,Y|Z}"
    )


def _check_membership(
    spec: ProblemSpec, membership: MultiFamily, source: Role
) -> None:
    src_labels = spec.alphabet(source)
    if membership.labels != src_labels:
        raise MembershipViolation(
            f"Membership is over {membership.labels}, expected {src_labels}"
        )
    if not membership.covers(full_mask(len(src_labels))):
        raise MembershipViolation(
            f"Membership {membership.describe()} does not cover {source.name}"
        )


def build_generalized_graph(
    spec: ProblemSpec,
    membership: MultiFamily,
    channel: Optional["Channel"] = None,
    source: Role = Role.X,
    vertex_cap: int = 64,
) -> CharGraph:
    """Graph of the other source when the receiver knows a message about `source`

    The message takes values in the subsets of `membership`, and a value counts as
    possible for a symbol whenever the symbol is in its subset (the channel's mask),
    regardless of the numeric channel entries.
    """
    if source not in (Role.X, Role.Y):
        raise RoleError(f"Messages are sent about X or Y, not {source.name}")
    _check_membership(spec, membership, source)
    if channel is not None and channel.membership != membership:
        raise MembershipViolation("Channel membership differs from the given membership")
    if source == Role.Y:
        spec = spec.swap_sources()
    msg, target = ("V", "Y") if source == Role.X else ("W", "X")
    labels = spec.alphabet_Y
    _check_vertices(len(labels), vertex_cap)
    n_y, n_z = len(spec.alphabet_Y), len(spec.alphabet_Z)
    subsets = membership.subsets
    # f_tilde[v, y, z] is the function value a message value fixes, -1 off support
    f_tilde = np.full((len(subsets), n_y, n_z), -1, dtype=np.int64)
    for s_idx, bits in enumerate(subsets):
        x_idxs = list(iter_bits(bits))
        for y_idx in range(n_y):
            for z_idx in range(n_z):
                support = spec.pmf[x_idxs, y_idx, z_idx] > 0.0
                vals = set(spec.f[x_idxs, y_idx, z_idx][support].tolist())
                if len(vals) > 1:
                    raise InconsistentFTilde(
                        f"{format_subset(bits, membership.labels)} mixes function "
                        f"values at {target}={labels[y_idx]}, "
                        f"Z={spec.alphabet_Z[z_idx]}"
                    )
                if vals:
                    f_tilde[s_idx, y_idx, z_idx] = vals.pop()
    # Reuse the table builder with the (message, Z) pair as the given outcome
    pmf = (f_tilde >= 0).astype(float).transpose(1, 0, 2).reshape(n_y, -1, 1)
    f_table = f_tilde.transpose(1, 0, 2).reshape(n_y, -1, 1)
    return _graph_from_tables(pmf, f_table, labels, f"G_{{{target}|{msg},Z}}")


@frozen
class ReductionHypotheses:
    full_support: bool
    """Every (x,y,z) has positive probability"""

    complete_graph: bool
    """G_{X|Y,Z} is complete, so its independent sets are singletons"""

    cond_independent: bool
    """X and Y are independent given Z"""

    def any(self) -> bool:
        return self.full_support or self.complete_graph or self.cond_independent


def lemma1_hypotheses(spec: ProblemSpec, vertex_cap: int = 64) -> ReductionHypotheses:
    """Evaluate the three sufficient conditions for G_{Y|V,Z} = G_{Y|X,Z}"""
    g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), vertex_cap)
    return ReductionHypotheses(
        full_support=bool(np.all(spec.pmf > 0.0)),
        complete_graph=g_x.is_complete(),
        cond_independent=check_conditional_independence(spec),
    )


@frozen
class ReductionEntry:
    membership: Tuple[str, ...] = field(converter=tuple)

    equal: bool

    extra_edges: Tuple[Tuple[str, str], ...] = field(converter=tuple)
    """Edges of G_{Y|V,Z} that G_{Y|X,Z} lacks"""


@frozen
class ReductionReport:
    hypotheses: ReductionHypotheses

    entries: Tuple[ReductionEntry, ...] = field(converter=tuple)

    missing_edges: Tuple[Tuple[str, str], ...] = field(converter=tuple)
    """Edges of G_{Y|X,Z} absent from some G_{Y|V,Z}, which should never happen"""

    @property
    def all_equal(self) -> bool:
        return all(e.equal for e in self.entries)

    @property
    def consistent(self) -> bool:
        """False if a hypothesis holds but some membership changed the graph"""
        return not self.missing_edges and (self.all_equal or not self.hypotheses.any())

    def find(self, membership: Sequence[str]) -> Optional[ReductionEntry]:
        target = sorted(membership)
        for entry in self.entries:
            if sorted(entry.membership) == target:
                return entry
        return None


def verify_lemma1_conclusion(
    spec: ProblemSpec, budget: int = 100000, vertex_cap: int = 64
) -> ReductionReport:
    """Compare G_{Y|V,Z} against G_{Y|X,Z} for every admissible V membership

    The generalized graph only depends on which distinct subsets V may take, so each
    covering sub-family of the independent sets of G_{X|Y,Z} is checked once.
    """
    hypotheses = lemma1_hypotheses(spec, vertex_cap)
    g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), vertex_cap)
    base = build_char_graph(spec, Role.Y, (Role.X, Role.Z), vertex_cap)
    family = independent_sets(g_x, vertex_cap, budget)
    entries = []
    missing = set()
    for sub in covering_subfamilies(family, full_mask(g_x.n), budget):
        membership = MultiFamily.from_family(sub)
        g_v = build_generalized_graph(spec, membership, vertex_cap=vertex_cap)
        extra = g_v.edge_difference(base)
        missing.update(base.edge_difference(g_v))
        entries.append(
            ReductionEntry(
                sub.to_strings(),
                not extra,
                [(base.labels[a], base.labels[b]) for a, b in extra],
            )
        )
    report = ReductionReport(
        hypotheses,
        entries,
        [(base.labels[a], base.labels[b]) for a, b in sorted(missing)],
    )
    log.info(
        "Checked %d V memberships, all equal: %s", len(entries), report.all_equal
    )
    if not report.consistent:
        log.error("Generalized graph check contradicts the reduction hypotheses")
    return report
