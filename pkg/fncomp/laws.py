"""Brute-force checks of the zero-error and support-set equivalences

These work on full joint pmfs over (V, X, Y, W, Z) and evaluate both sides of each
equivalence independently, so a disagreement points at a bug in the graph, set or
entropy code rather than in the checker.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from attrs import field, frozen

from ._globals import WITNESS_ROLES, Role
from .conf import Settings
from .entropy import Channel, ScalarizedObjective, joint_pmf
from .graphs import (
    InconsistentFTilde,
    MembershipViolation,
    build_char_graph,
    build_generalized_graph,
)
from .model import (
    LN2,
    SUM_TOL,
    Pmf,
    ProblemSpec,
    RoleError,
    conditional_mutual_information,
    entropy_bits,
)
from .sets import (
    MultiFamily,
    SetFamily,
    SupportSet,
    covering_subfamilies,
    full_mask,
    independent_sets,
    support_set,
)
from .util import BudgetExceeded, SizeError, ValidationError, run_tasks, subset_key


log = logging.getLogger(__name__)


class EquivalenceViolation(ValidationError):
    """The two sides of an equivalence disagree"""


CHAIN_TOL = 1e-12


ZERO_TOL = 1e-12


WITNESS_CAP = 10**6


V_CHAIN = "V-X-(Y,W,Z)"


W_CHAIN = "(V,X,Z)-Y-W"


def chain_values(pmf: Pmf) -> Tuple[float, float]:
    """(I(V;Y,W,Z|X), I(V,X,Z;W|Y)) in bits"""
    return (
        conditional_mutual_information(pmf, (Role.V,), (Role.Y, Role.W, Role.Z), (Role.X,)),
        conditional_mutual_information(pmf, (Role.V, Role.X, Role.Z), (Role.W,), (Role.Y,)),
    )


@frozen
class JointWitness:
    """Joint pmf over (V, X, Y, W, Z) with the Markov chains it claims to satisfy"""

    pmf: Pmf

    chains: Tuple[str, ...] = field(default=(), converter=tuple)
    """Subset of V_CHAIN and W_CHAIN, each verified on construction"""

    def __attrs_post_init__(self) -> None:
        if self.pmf.roles != WITNESS_ROLES:
            raise RoleError(f"Witness axes must be {WITNESS_ROLES}, got {self.pmf.roles}")
        unknown = set(self.chains) - {V_CHAIN, W_CHAIN}
        if unknown:
            raise ValidationError(f"Unknown Markov chains: {sorted(unknown)}")
        for name, val in zip((V_CHAIN, W_CHAIN), chain_values(self.pmf)):
            if name in self.chains and val > CHAIN_TOL:
                raise ValidationError(f"Witness claims {name} but the CMI is {val:.3g}")

    @property
    def size(self) -> int:
        return int(self.pmf.tensor.size)

    def holds(self) -> Tuple[bool, bool]:
        """Whether each chain holds numerically, claimed or not"""
        v_val, w_val = chain_values(self.pmf)
        return v_val <= CHAIN_TOL, w_val <= CHAIN_TOL

    def source_pmf(self) -> np.ndarray:
        return self.pmf.marginal((Role.X, Role.Y, Role.Z))


def make_witness(spec: ProblemSpec, chan_v: Channel, chan_w: Channel) -> JointWitness:
    """Witness from the factorization p(x,y,z) p(v|x) p(w|y)"""
    return JointWitness(joint_pmf(spec, chan_v, chan_w), (V_CHAIN, W_CHAIN))


def _check_source(witness: JointWitness, spec: ProblemSpec) -> None:
    src = witness.source_pmf()
    if src.shape != spec.pmf.shape or np.max(np.abs(src - spec.pmf)) > SUM_TOL:
        raise ValidationError("Witness source marginal differs from the problem pmf")


class WitnessSampler:
    """Draws random channel pairs satisfying the inner bound membership conditions

    V takes a random covering sub-family of the independent sets of G_{X|Y,Z} and
    W a random covering sub-family of those of G_{Y|V,Z}, each subset repeated one or
    two times.
    """

    def __init__(self, spec: ProblemSpec, vertex_cap: int = 64, budget: int = 100000):
        self.spec = spec
        self._cap = vertex_cap
        self._budget = budget
        g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), vertex_cap)
        self.v_choices: List[SetFamily] = list(
            covering_subfamilies(
                independent_sets(g_x, vertex_cap, budget), full_mask(g_x.n), budget
            )
        )
        self._w_choices: Dict[int, List[SetFamily]] = {}

    def w_choices(self, v_idx: int) -> List[SetFamily]:
        if v_idx not in self._w_choices:
            membership = MultiFamily.from_family(self.v_choices[v_idx])
            g_v = build_generalized_graph(self.spec, membership, vertex_cap=self._cap)
            self._w_choices[v_idx] = list(
                covering_subfamilies(
                    independent_sets(g_v, self._cap, self._budget),
                    full_mask(g_v.n),
                    self._budget,
                )
            )
        return self._w_choices[v_idx]

    @staticmethod
    def _repeat(family: SetFamily, rng: np.random.Generator) -> MultiFamily:
        mults = rng.integers(1, 3, size=len(family))
        return MultiFamily(
            family.labels, [(s, int(m)) for s, m in zip(family.members, mults)]
        )

    def draw(
        self, rng: np.random.Generator, floor: float = 1e-3
    ) -> Tuple[Channel, Channel]:
        v_idx = int(rng.integers(len(self.v_choices)))
        w_family = self.w_choices(v_idx)
        w_idx = int(rng.integers(len(w_family)))
        v_memb = self._repeat(self.v_choices[v_idx], rng)
        w_memb = self._repeat(w_family[w_idx], rng)
        return Channel.random(v_memb, rng, floor), Channel.random(w_memb, rng, floor)


def random_admissible_witness(
    spec: ProblemSpec,
    rng: np.random.Generator,
    floor: float = 1e-3,
    sampler: Optional[WitnessSampler] = None,
) -> Tuple[JointWitness, Channel, Channel]:
    sampler = WitnessSampler(spec) if sampler is None else sampler
    chan_v, chan_w = sampler.draw(rng, floor)
    return make_witness(spec, chan_v, chan_w), chan_v, chan_w


def _f_entropy(witness: JointWitness, spec: ProblemSpec) -> float:
    """H(f(X,Y,Z)|V,W,Z) in bits"""
    one_hot = np.eye(len(spec.alphabet_F))[spec.f]
    p_vwzf = np.einsum("vxywz,xyzk->vwzk", witness.pmf.tensor, one_hot)
    return max(entropy_bits(p_vwzf) - entropy_bits(p_vwzf.sum(axis=3)), 0.0)


def _supports(witness: JointWitness) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean (v, x) and (w, y) support matrices"""
    return (
        witness.pmf.marginal((Role.V, Role.X)) > 0.0,
        witness.pmf.marginal((Role.W, Role.Y)) > 0.0,
    )


def pairwise_condition(witness: JointWitness, spec: ProblemSpec) -> bool:
    """f(x1,y1,z) = f(x2,y2,z) whenever x1, x2 share a V support, y1, y2 share a W
    support, and both (x1,y1,z) and (x2,y2,z) have positive probability
    """
    supp_v, supp_w = _supports(witness)
    positive = witness.source_pmf() > 0.0
    for v_row in supp_v:
        xs = np.flatnonzero(v_row)
        if not len(xs):
            continue
        for w_row in supp_w:
            ys = np.flatnonzero(w_row)
            if not len(ys):
                continue
            block = positive[np.ix_(xs, ys)]
            vals = spec.f[np.ix_(xs, ys)]
            for z_idx in range(block.shape[2]):
                if np.unique(vals[:, :, z_idx][block[:, :, z_idx]]).size > 1:
                    return False
    return True


def zero_error_check(witness: JointWitness, spec: ProblemSpec) -> bool:
    """Decide whether (V, W, Z) determines f, evaluated two independent ways

    Raises `EquivalenceViolation` if H(f|V,W,Z) = 0 and the pairwise support
    condition disagree.
    """
    _check_source(witness, spec)
    if witness.holds() != (True, True):
        raise ValidationError("The zero-error check needs a witness satisfying both chains")
    h_f = _f_entropy(witness, spec)
    by_entropy = h_f <= ZERO_TOL
    by_pairs = pairwise_condition(witness, spec)
    if by_entropy != by_pairs:
        raise EquivalenceViolation(
            f"H(f|V,W,Z) = {h_f:.3g} but the pairwise condition gives {by_pairs}"
        )
    return by_entropy


def relabeled_witness(witness: JointWitness) -> Tuple[JointWitness, SupportSet, SupportSet]:
    """Witness with V and W replaced by their support-set relabelings

    Zero-probability values are dropped and the rest ordered by support subset.
    """
    s_v = support_set(witness.pmf, msg_role=Role.V, src_role=Role.X)
    s_w = support_set(witness.pmf, msg_role=Role.W, src_role=Role.Y)

    def order(sset: SupportSet) -> List[int]:
        return [i for i, _ in sorted(sset.entries, key=lambda e: (subset_key(e[1]), e[0]))]

    tensor = witness.pmf.tensor[order(s_v)][:, :, :, order(s_w)]
    return JointWitness(Pmf(WITNESS_ROLES, tensor)), s_v, s_w


def _memberships(witness: JointWitness, spec: ProblemSpec, vertex_cap: int) -> bool:
    """S_X(V) values independent in G_{X|Y,Z} and S_Y(W) values in G_{Y|V,Z}"""
    s_v = support_set(witness.pmf, spec.alphabet_X, Role.V, Role.X)
    s_w = support_set(witness.pmf, spec.alphabet_Y, Role.W, Role.Y)
    g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), vertex_cap)
    if not all(g_x.is_independent(bits) for _, bits in s_v.entries):
        return False
    try:
        g_v = build_generalized_graph(spec, s_v.to_multifamily(), vertex_cap=vertex_cap)
    except (InconsistentFTilde, MembershipViolation):
        return False
    return all(g_v.is_independent(bits) for _, bits in s_w.entries)


@frozen
class EquivalenceReport:
    """Sub-claims of the support-set equivalence for one witness

    Claims that need both Markov chains are None when a chain fails, and the check
    is then marked as abstained.
    """

    chains: Tuple[bool, bool]

    claim_a: bool
    """X lies in S_X(V) and Y in S_Y(W) with probability one"""

    claim_b: bool
    """Chains hold for (V, W) iff they hold for the relabeled pair"""

    claim_c: Optional[bool]
    """Zero-error iff the pairwise support condition"""

    claim_d: Optional[bool]
    """Independent-set memberships iff the pairwise support condition"""

    zero_error: bool

    pairwise: bool

    memberships: Optional[bool]

    forward: Optional[bool]
    """Zero-error and chains imply memberships"""

    backward: Optional[bool]
    """Memberships and chains imply zero-error"""

    v_support: Tuple[str, ...] = field(converter=tuple)

    w_support: Tuple[str, ...] = field(converter=tuple)

    @property
    def abstained(self) -> bool:
        return not all(self.chains)

    @property
    def failed_claims(self) -> List[str]:
        res = []
        for name in ("a", "b", "c", "d", "forward", "backward"):
            attr = name if name in ("forward", "backward") else f"claim_{name}"
            if getattr(self, attr) is False:
                res.append(name)
        return res


def support_equivalence_check(
    witness: JointWitness, spec: ProblemSpec, vertex_cap: int = 64
) -> EquivalenceReport:
    """Check both directions of: zero-error and chains iff memberships and chains"""
    if witness.size > WITNESS_CAP:
        raise SizeError(f"Witness has {witness.size} entries, the cap is {WITNESS_CAP}")
    _check_source(witness, spec)
    chains = witness.holds()
    s_v = support_set(witness.pmf, spec.alphabet_X, Role.V, Role.X)
    s_w = support_set(witness.pmf, spec.alphabet_Y, Role.W, Role.Y)

    p_vx = witness.pmf.marginal((Role.V, Role.X))
    p_wy = witness.pmf.marginal((Role.W, Role.Y))
    in_v = np.zeros_like(p_vx, dtype=bool)
    for v_idx, bits in s_v.entries:
        in_v[v_idx] = [(bits >> i) & 1 for i in range(p_vx.shape[1])]
    in_w = np.zeros_like(p_wy, dtype=bool)
    for w_idx, bits in s_w.entries:
        in_w[w_idx] = [(bits >> i) & 1 for i in range(p_wy.shape[1])]
    claim_a = bool(p_vx[~in_v].sum() <= ZERO_TOL and p_wy[~in_w].sum() <= ZERO_TOL)

    relabeled, _, _ = relabeled_witness(witness)
    claim_b = relabeled.holds() == chains

    h_f = _f_entropy(witness, spec)
    zero_error = h_f <= ZERO_TOL
    pairwise = pairwise_condition(witness, spec)
    claim_c: Optional[bool] = None
    claim_d: Optional[bool] = None
    memberships: Optional[bool] = None
    forward: Optional[bool] = None
    backward: Optional[bool] = None
    if all(chains):
        memberships = _memberships(witness, spec, vertex_cap)
        claim_c = zero_error == pairwise
        claim_d = memberships == pairwise
        forward = memberships or not zero_error
        backward = zero_error or not memberships
    else:
        log.debug("Witness violates a Markov chain (%s), equivalence abstains", chains)
    report = EquivalenceReport(
        chains,
        claim_a,
        claim_b,
        claim_c,
        claim_d,
        zero_error,
        pairwise,
        memberships,
        forward,
        backward,
        s_v.to_strings(),
        s_w.to_strings(),
    )
    if report.failed_claims:
        raise EquivalenceViolation(
            f"Support-set equivalence fails claims {report.failed_claims} for "
            f"S_X(V) = {list(report.v_support)}, S_Y(W) = {list(report.w_support)}"
        )
    return report


def accepts_v_first(spec: ProblemSpec, v_memb: MultiFamily, w_memb: MultiFamily,
                    vertex_cap: int = 64) -> bool:
    """V in M(Gamma(G_{X|Y,Z})) and W in M(Gamma(G_{Y|V,Z}))"""
    g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), vertex_cap)
    if not all(g_x.is_independent(s) for s in v_memb.subsets):
        return False
    g_v = build_generalized_graph(spec, v_memb, vertex_cap=vertex_cap)
    return all(g_v.is_independent(s) for s in w_memb.subsets)


def accepts_w_first(spec: ProblemSpec, v_memb: MultiFamily, w_memb: MultiFamily,
                    vertex_cap: int = 64) -> bool:
    """W in M(Gamma(G_{Y|X,Z})) and V in M(Gamma(G_{X|W,Z}))"""
    g_y = build_char_graph(spec, Role.Y, (Role.X, Role.Z), vertex_cap)
    if not all(g_y.is_independent(s) for s in w_memb.subsets):
        return False
    g_w = build_generalized_graph(spec, w_memb, source=Role.Y, vertex_cap=vertex_cap)
    return all(g_w.is_independent(s) for s in v_memb.subsets)


def _pairs(spec: ProblemSpec, first: Role, vertex_cap: int, budget: int
           ) -> List[Tuple[MultiFamily, MultiFamily]]:
    """Covering (V, W) membership pairs accepted when `first` is chosen first"""
    other = Role.Y if first == Role.X else Role.X
    given = (other, Role.Z)
    g_first = build_char_graph(spec, first, given, vertex_cap)
    res = []
    for sub in covering_subfamilies(
        independent_sets(g_first, vertex_cap, budget), full_mask(g_first.n), budget
    ):
        memb = MultiFamily.from_family(sub)
        g_second = build_generalized_graph(spec, memb, source=first, vertex_cap=vertex_cap)
        for sub2 in covering_subfamilies(
            independent_sets(g_second, vertex_cap, budget), full_mask(g_second.n), budget
        ):
            memb2 = MultiFamily.from_family(sub2)
            res.append((memb, memb2) if first == Role.X else (memb2, memb))
            if len(res) > budget:
                raise BudgetExceeded(f"More than {budget} membership pairs")
    return res


@frozen
class ConditionOrderReport:
    n_v_first: int

    n_w_first: int

    mismatches: Tuple[Tuple[str, str, str], ...] = field(converter=tuple)
    """(order that accepted, V membership, W membership) rejected by the other order"""

    @property
    def equivalent(self) -> bool:
        return not self.mismatches and self.n_v_first == self.n_w_first


def condition_order_check(
    spec: ProblemSpec, vertex_cap: int = 64, budget: int = 100000
) -> ConditionOrderReport:
    """Enumerate (V, W) pairs in both membership orders and cross-validate them

    Multiplicities do not change which pairs are accepted, so every pair of
    covering sub-families is checked once.
    """
    v_first = _pairs(spec, Role.X, vertex_cap, budget)
    w_first = _pairs(spec, Role.Y, vertex_cap, budget)
    mismatches = []
    for v_memb, w_memb in v_first:
        if not accepts_w_first(spec, v_memb, w_memb, vertex_cap):
            mismatches.append(("V-first", v_memb.describe(), w_memb.describe()))
    for v_memb, w_memb in w_first:
        if not accepts_v_first(spec, v_memb, w_memb, vertex_cap):
            mismatches.append(("W-first", v_memb.describe(), w_memb.describe()))
    log.info(
        "Condition orders accept %d and %d membership pairs", len(v_first), len(w_first)
    )
    return ConditionOrderReport(len(v_first), len(w_first), mismatches)


@frozen
class RelabelCheck:
    original: Tuple[float, float, float]

    relabeled: Tuple[float, float, float]

    max_diff: float

    @property
    def passed(self) -> bool:
        return self.max_diff <= CHAIN_TOL


def relabel_invariance_check(spec: ProblemSpec, chan_w: Channel) -> RelabelCheck:
    """Compare the V = X rate triple for W and for its support-set relabeling"""
    objective = ScalarizedObjective(spec.pmf)
    eye = np.eye(len(spec.alphabet_X))
    p_wy = chan_w.matrix * spec.pmf.sum(axis=(0, 2))[np.newaxis, :]
    entries = [
        (w_idx, chan_w.membership.values()[w_idx])
        for w_idx in range(p_wy.shape[0])
        if p_wy[w_idx].sum() > 0.0
    ]
    order = [w for w, _ in sorted(entries, key=lambda e: (subset_key(e[1]), e[0]))]
    a_0, b_0, s_0 = objective.triple_nats(eye, chan_w.matrix)
    a_1, b_1, s_1 = objective.triple_nats(eye, chan_w.matrix[order])
    diff = max(abs(a_0 - a_1), abs(b_0 - b_1), abs(s_0 - s_1)) / LN2
    return RelabelCheck(
        (a_0 / LN2, b_0 / LN2, s_0 / LN2), (a_1 / LN2, b_1 / LN2, s_1 / LN2), diff
    )


@frozen
class SeedResult:
    seed: int

    zero_error: bool

    equivalence: bool

    relabel: bool

    message: str = ""


@frozen
class LawSuiteReport:
    name: str

    n_seeds: int

    seed: int

    condition_order: ConditionOrderReport

    failures: Tuple[SeedResult, ...] = field(converter=tuple)

    @property
    def passed(self) -> bool:
        return not self.failures and self.condition_order.equivalent


def _seed_result(
    spec: ProblemSpec, sampler: WitnessSampler, seed: int, r_idx: int, vertex_cap: int
) -> SeedResult:
    rng = np.random.default_rng([seed, r_idx])
    witness, _, chan_w = random_admissible_witness(spec, rng, sampler=sampler)
    zero_error = equivalence = relabel = False
    message = ""
    try:
        zero_error = zero_error_check(witness, spec)
        report = support_equivalence_check(witness, spec, vertex_cap)
        equivalence = bool(report.memberships) and bool(report.zero_error)
        relabel = relabel_invariance_check(spec, chan_w).passed
    except EquivalenceViolation as e:
        message = str(e)
    return SeedResult(r_idx, zero_error, equivalence, relabel, message)


def law_suite(
    spec: ProblemSpec,
    n_seeds: int = 200,
    seed: int = 0,
    settings: Optional[Settings] = None,
    name: str = "",
) -> LawSuiteReport:
    """Run seeded random admissible witnesses through the checkers

    Every admissible witness must be zero-error with matching memberships, and the
    condition-order enumeration must agree.
    """
    settings = Settings() if settings is None else settings
    cap = settings.graphs.vertex_cap
    budget = settings.sets.enumeration_budget
    sampler = WitnessSampler(spec, cap, budget)
    # Fill the W cache up front so worker threads only read it
    for v_idx in range(len(sampler.v_choices)):
        sampler.w_choices(v_idx)
    results = run_tasks(
        lambda r: _seed_result(spec, sampler, seed, r, cap),
        list(range(n_seeds)),
        settings.solver.threads,
    )
    failures = [
        r for r in results if not (r.zero_error and r.equivalence and r.relabel)
    ]
    for res in failures[:5]:
        log.warning("Law check failed for seed %d: %s", res.seed, res.message or res)
    order = condition_order_check(spec, cap, budget)
    report = LawSuiteReport(name or spec.description, n_seeds, seed, order, failures)
    log.info(
        "Law suite '%s': %d of %d seeds failed, condition orders equivalent: %s",
        report.name, len(failures), n_seeds, order.equivalent,
    )
    return report

