"""Independent-set families, bounded multisets of them, and support sets

Vertex subsets are plain ints used as bit-vectors over a graph's vertex order.
Families are kept in canonical order: by size, then by bit pattern.
"""
from __future__ import annotations
import logging
from itertools import combinations, combinations_with_replacement
from typing import (
    TYPE_CHECKING,
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np
from attrs import frozen, field
from scipy.special import comb

from ._globals import Role
from .model import Pmf
from .util import (
    BudgetExceeded,
    SizeError,
    ValidationError,
    bits_from,
    format_subset,
    iter_bits,
    popcount,
    subset_key,
)

if TYPE_CHECKING:
    from .graphs import CharGraph


log = logging.getLogger(__name__)


def full_mask(n: int) -> int:
    return (1 << n) - 1


@frozen
class SetFamily:
    """Ordered family of distinct vertex subsets"""

    labels: Tuple[str, ...] = field(converter=tuple)
    """Vertex labels the subset bits refer to"""

    members: Tuple[int, ...] = field(converter=tuple)

    source: str = ""
    """Provenance of the graph the family was enumerated from"""

    def __attrs_post_init__(self) -> None:
        if list(self.members) != sorted(set(self.members), key=subset_key):
            raise ValueError("Family members must be distinct and canonically sorted")
        if any(m <= 0 or m >> len(self.labels) for m in self.members):
            raise ValueError("Family members must be nonempty subsets of the labels")

    @classmethod
    def from_subsets(
        cls, labels: Sequence[str], subsets: Iterable[int], source: str = ""
    ) -> "SetFamily":
        return cls(labels, sorted(set(subsets), key=subset_key), source)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def union(self) -> int:
        res = 0
        for m in self.members:
            res |= m
        return res

    def to_strings(self) -> List[str]:
        return [format_subset(m, self.labels) for m in self.members]

    def undominated(self) -> "SetFamily":
        """Drop members strictly contained in another member"""
        keep = [
            m
            for m in self.members
            if not any(m != o and m & o == m for o in self.members)
        ]
        return SetFamily(self.labels, keep, self.source)


MultiKey = Tuple[Tuple[int, int, int], ...]


@frozen
class MultiFamily:
    """Multiset of vertex subsets, stored as (subset, multiplicity) pairs"""

    labels: Tuple[str, ...] = field(converter=tuple)

    entries: Tuple[Tuple[int, int], ...] = field(converter=tuple)

    def __attrs_post_init__(self) -> None:
        subsets = [s for s, _ in self.entries]
        if subsets != sorted(set(subsets), key=subset_key):
            raise ValueError("Multiset entries must be distinct and canonically sorted")
        if any(mult < 1 for _, mult in self.entries):
            raise ValueError("Multiplicities must be positive")
        if any(s <= 0 or s >> len(self.labels) for s in subsets):
            raise ValueError("Multiset entries must be nonempty subsets of the labels")

    @classmethod
    def from_values(cls, labels: Sequence[str], values: Iterable[int]) -> "MultiFamily":
        counts: Dict[int, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        return cls(labels, sorted(counts.items(), key=lambda e: subset_key(e[0])))

    @classmethod
    def from_family(cls, family: SetFamily) -> "MultiFamily":
        """One copy of every member of `family`"""
        return cls(family.labels, [(m, 1) for m in family.members])

    @property
    def total_cardinality(self) -> int:
        return sum(mult for _, mult in self.entries)

    @property
    def subsets(self) -> Tuple[int, ...]:
        """The distinct subsets, in canonical order"""
        return tuple(s for s, _ in self.entries)

    def values(self) -> Tuple[int, ...]:
        """One subset per message value, copies adjacent, in canonical order"""
        return tuple(s for s, mult in self.entries for _ in range(mult))

    def union(self) -> int:
        res = 0
        for s, _ in self.entries:
            res |= s
        return res

    def covers(self, cover: int) -> bool:
        return self.union() & cover == cover

    def mask(self) -> np.ndarray:
        """Boolean membership matrix, one row per value and one column per label"""
        vals = self.values()
        res = np.zeros((len(vals), len(self.labels)), dtype=bool)
        for v_idx, bits in enumerate(vals):
            for x_idx in iter_bits(bits):
                res[v_idx, x_idx] = True
        return res

    def key(self) -> MultiKey:
        return tuple((popcount(s), s, mult) for s, mult in self.entries)

    def to_strings(self) -> List[str]:
        """Subsets as strings, repeated per multiplicity"""
        return [format_subset(s, self.labels) for s in self.values()]

    def describe(self) -> str:
        parts = []
        for s, mult in self.entries:
            sub_str = format_subset(s, self.labels)
            parts.append(sub_str if mult == 1 else f"{sub_str}x{mult}")
        return " ".join(parts)


@frozen
class SupportSet:
    """Relabeling of message values as (index, support subset) pairs"""

    labels: Tuple[str, ...] = field(converter=tuple)
    """Labels of the source the supports are subsets of"""

    entries: Tuple[Tuple[int, int], ...] = field(converter=tuple)
    """(value index, subset bits) for every value with positive probability"""

    dropped: Tuple[int, ...] = field(default=(), converter=tuple)
    """Value indices with zero probability, which have an empty support"""

    def to_multifamily(self) -> MultiFamily:
        return MultiFamily.from_values(self.labels, [s for _, s in self.entries])

    def to_strings(self) -> List[str]:
        return [format_subset(s, self.labels) for _, s in self.entries]


def _check_cap(G: "CharGraph", vertex_cap: int) -> None:
    if G.n > vertex_cap:
        raise SizeError(f"Graph has {G.n} vertices, the cap is {vertex_cap}")


def independent_sets(
    G: "CharGraph", vertex_cap: int = 64, budget: Optional[int] = None
) -> SetFamily:
    """All nonempty independent sets of `G`, by backtracking on bit-vectors"""
    _check_cap(G, vertex_cap)
    found: List[int] = []
    # Each stack item is a set plus the later vertices that could still join it
    stack: List[Tuple[int, int]] = [(0, full_mask(G.n))]
    while stack:
        current, candidates = stack.pop()
        for v in iter_bits(candidates):
            new = current | (1 << v)
            found.append(new)
            if budget is not None and len(found) > budget:
                raise BudgetExceeded(f"More than {budget} independent sets")
            rest = candidates & ~full_mask(v + 1) & ~G.adj[v]
            if rest:
                stack.append((new, rest))
    return SetFamily.from_subsets(G.labels, found, G.provenance)


def maximal_independent_sets(G: "CharGraph", vertex_cap: int = 64) -> SetFamily:
    """Maximal independent sets as maximal cliques of the complement graph

    Uses Bron-Kerbosch with pivoting on bit-vectors.
    """
    _check_cap(G, vertex_cap)
    full = full_mask(G.n)
    comp = [full & ~G.adj[v] & ~(1 << v) for v in range(G.n)]
    found: List[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            found.append(r)
            return
        pivot = max(iter_bits(p | x), key=lambda u: popcount(p & comp[u]))
        for v in iter_bits(p & ~comp[pivot]):
            expand(r | (1 << v), p & comp[v], x & comp[v])
            p &= ~(1 << v)
            x |= 1 << v

    if G.n:
        expand(0, full, 0)
    return SetFamily.from_subsets(G.labels, found, G.provenance)


def multiset_count(n_members: int, total: int) -> int:
    """Number of multisets of `total` elements from `n_members` kinds"""
    return int(comb(n_members + total - 1, total, exact=True))


def multisets(
    family: SetFamily,
    total_cardinality: int,
    cover: Optional[int] = None,
    reduce: bool = True,
    dominated: bool = False,
    budget: Optional[int] = None,
) -> Iterator[MultiFamily]:
    """Generate multisets of `family` with exactly `total_cardinality` elements

    With `cover` given, only multisets whose union contains `cover` are produced.
    With `reduce` on, copies of a singleton subset are merged (a loss-free change for
    any channel) and the freed count is padded with copies of the largest element
    present, which receive zero probability. Setting `dominated` additionally drops
    members strictly contained in another member.
    """
    if total_cardinality < 1:
        raise ValidationError("Multisets need a total cardinality of at least one")
    labels = family.labels
    if not reduce:
        n_out = 0
        for combo in combinations_with_replacement(family.members, total_cardinality):
            mf = MultiFamily.from_values(labels, combo)
            if cover is not None and not mf.covers(cover):
                continue
            n_out += 1
            if budget is not None and n_out > budget:
                raise BudgetExceeded(f"More than {budget} multisets")
            yield mf
        return

    if dominated:
        family = family.undominated()
    singles = [m for m in family.members if popcount(m) == 1]
    others = [m for m in family.members if popcount(m) > 1]
    seen: Set[MultiKey] = set()
    found: List[MultiFamily] = []
    for n_single in range(min(len(singles), total_cardinality) + 1):
        for single_part in combinations(singles, n_single):
            for n_other in range(total_cardinality - n_single + 1):
                if n_single + n_other == 0:
                    continue
                for other_part in combinations_with_replacement(others, n_other):
                    values = single_part + other_part
                    union = 0
                    for val in values:
                        union |= val
                    if cover is not None and union & cover != cover:
                        continue
                    largest = max(values, key=subset_key)
                    values += (largest,) * (total_cardinality - len(values))
                    mf = MultiFamily.from_values(labels, values)
                    key = mf.key()
                    if key in seen:
                        continue
                    seen.add(key)
                    found.append(mf)
                    if budget is not None and len(found) > budget:
                        raise BudgetExceeded(f"More than {budget} multisets")
    found.sort(key=lambda mf: mf.key())
    log.debug("Enumerated %d reduced multisets of size %d", len(found), total_cardinality)
    yield from found


def covering_subfamilies(
    family: SetFamily, cover: int, budget: Optional[int] = None
) -> Iterator[SetFamily]:
    """Generate every sub-family (one copy per member) whose union contains `cover`"""
    n_out = 0
    for size in range(1, len(family) + 1):
        for combo in combinations(family.members, size):
            union = 0
            for m in combo:
                union |= m
            if union & cover != cover:
                continue
            n_out += 1
            if budget is not None and n_out > budget:
                raise BudgetExceeded(f"More than {budget} covering sub-families")
            yield SetFamily(family.labels, combo, family.source)


def support_set(
    joint: Pmf,
    labels: Optional[Sequence[str]] = None,
    msg_role: Role = Role.V,
    src_role: Role = Role.X,
) -> SupportSet:
    """Relabel the values of `msg_role` by their supports in `src_role`"""
    mat = joint.marginal((msg_role, src_role))
    if labels is None:
        labels = [str(i) for i in range(mat.shape[1])]
    entries = []
    dropped = []
    for v_idx, row in enumerate(mat):
        bits = bits_from(np.flatnonzero(row > 0.0))
        if bits:
            entries.append((v_idx, bits))
        else:
            dropped.append(v_idx)
    if dropped:
        log.debug("Dropping zero-probability %s values: %s", msg_role.name, dropped)
    return SupportSet(labels, entries, dropped)
