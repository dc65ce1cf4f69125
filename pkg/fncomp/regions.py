"""Rate region assembly, reference regions and support-function comparison

A region is stored as a union of constraint triples. The lower boundary of the union
and its support function are derived from the triples, so regions computed here and
regions loaded back from JSON dumps compare the same way.
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from attrs import evolve, field, frozen

from ._globals import Role
from .conf import Settings
from .entropy import (
    Channel,
    NonConvergence,
    RateTriple,
    ScalarizedObjective,
    block_descent,
    conditional_graph_entropy,
    joint_pmf,
    rate_triple,
)
from .graphs import build_char_graph, build_generalized_graph
from .model import (
    ProblemSpec,
    RoleError,
    check_conditional_independence,
    check_partially_invertible,
    conditional_entropy,
    conditional_mutual_information,
    entropy_bits,
)
from .report import ProgressHookBase, SweepReport
from .sets import (
    MultiFamily,
    covering_subfamilies,
    full_mask,
    independent_sets,
    maximal_independent_sets,
    multisets,
)
from .util import (
    BudgetExceeded,
    CustomJsonSerializable,
    ValidationError,
    json_serializer,
    run_tasks,
)


log = logging.getLogger(__name__)


class HypothesisError(ValidationError):
    """A region was requested for a problem that violates its hypotheses"""


INNER_MODES = ("maximal", "all", "multiset")


BOUND = "bound"


RATE_REGION = "rate region"


@frozen
class Candidate:
    """The V and W memberships a sweep optimized over"""

    candidate_id: int

    v_membership: Tuple[str, ...] = field(converter=tuple)

    w_membership: Tuple[str, ...] = field(converter=tuple)


def _matrix_tuple(mat: Optional[Any]) -> Optional[Tuple[Tuple[float, ...], ...]]:
    if mat is None:
        return None
    return tuple(tuple(float(v) for v in row) for row in np.asarray(mat))


@frozen
class RegionEntry:
    """One constraint triple of a region, with the sweep point that produced it"""

    triple: RateTriple

    candidate_id: int = -1

    lam: Optional[float] = None
    """Sweep direction (1, lam) the triple was optimized for"""

    converged: bool = True

    v_channel: Optional[Tuple[Tuple[float, ...], ...]] = field(
        default=None, converter=_matrix_tuple
    )

    w_channel: Optional[Tuple[Tuple[float, ...], ...]] = field(
        default=None, converter=_matrix_tuple
    )

    def active_corner(self) -> Tuple[float, float]:
        """Corner minimizing R_X + lam*R_Y"""
        low, high = self.triple.corners()
        if self.lam is None or self.lam <= 1.0:
            return low
        return high

    def swapped(self) -> "RegionEntry":
        return RegionEntry(
            self.triple.swapped(),
            self.candidate_id,
            None if self.lam is None else 1.0 / self.lam,
            self.converged,
            self.w_channel,
            self.v_channel,
        )


@frozen
class RateRegion(CustomJsonSerializable):
    """Union of the regions {R_X >= a, R_Y >= b, R_X + R_Y >= s} of its entries"""

    name: str

    kind: str
    """Either 'bound' or 'rate region'"""

    entries: Tuple[RegionEntry, ...] = field(converter=tuple)

    candidates: Tuple[Candidate, ...] = field(default=(), converter=tuple)

    meta: Dict[str, Any] = field(factory=dict, eq=False)

    def __attrs_post_init__(self) -> None:
        if not self.entries:
            raise ValidationError(f"Region '{self.name}' has no constraint triples")

    @property
    def triples(self) -> List[RateTriple]:
        return [e.triple.normalized() for e in self.entries]

    def support(self, c_x: float, c_y: float) -> float:
        """Minimum of c_x*R_X + c_y*R_Y over the region"""
        return min(t.support(c_x, c_y) for t in self.triples)

    def contains(self, r_x: float, r_y: float, tol: float = 1e-9) -> bool:
        return any(
            r_x >= t.a - tol and r_y >= t.b - tol and r_x + r_y >= t.s - tol
            for t in self.triples
        )

    def polyline(self) -> List[Tuple[float, float]]:
        """Lower boundary of the union as (R_X, R_Y) points, R_Y nonincreasing

        The boundary continues vertically above the first point and horizontally
        to the right of the last one.
        """
        tris = self.triples
        xs = set()
        for t in tris:
            xs.update((t.a, t.s - t.b))
            xs.update(t.s - o.b for o in tris if t.a <= t.s - o.b <= t.s - t.b)
        points: List[Tuple[float, float]] = []

        def lower(r_x: float, strict: bool) -> float:
            res = np.inf
            for t in tris:
                if r_x < t.a or (strict and r_x == t.a):
                    continue
                res = min(res, max(t.b, t.s - r_x))
            return res

        for r_x in sorted(xs):
            left = lower(r_x, strict=True)
            here = lower(r_x, strict=False)
            if np.isfinite(left) and left > here:
                points.append((r_x, left))
            if not points or points[-1] != (r_x, here):
                points.append((r_x, here))
        # Drop interior points of straight runs
        res: List[Tuple[float, float]] = []
        for pt in points:
            if len(res) >= 2:
                (x0, y0), (x1, y1) = res[-2], res[-1]
                if abs((x1 - x0) * (pt[1] - y0) - (pt[0] - x0) * (y1 - y0)) < 1e-15:
                    res[-1] = pt
                    continue
            res.append(pt)
        return res

    def csv_rows(self) -> List[Tuple[Any, ...]]:
        """Rows of (lambda, R_X, R_Y, mode, candidate_id), one per sweep point

        Entries without a sweep direction contribute both corners.
        """
        mode = str(self.meta.get("mode", self.name))
        rows: List[Tuple[Any, ...]] = []
        for entry in self.entries:
            if entry.lam is None:
                for r_x, r_y in entry.triple.corners():
                    rows.append(("", r_x, r_y, mode, entry.candidate_id))
            else:
                r_x, r_y = entry.active_corner()
                rows.append((entry.lam, r_x, r_y, mode, entry.candidate_id))
        return rows

    def swapped(self) -> "RateRegion":
        """The region with the roles of the two sources exchanged"""
        return evolve(
            self,
            entries=[e.swapped() for e in self.entries],
            candidates=[
                Candidate(c.candidate_id, c.w_membership, c.v_membership)
                for c in self.candidates
            ],
        )

    def to_json_dict(self) -> Dict[str, Any]:
        res = json_serializer.unstructure_attrs_asdict(self)
        res["polyline"] = [list(pt) for pt in self.polyline()]
        return res

    @classmethod
    def from_json_dict(cls, json_dict: Dict[str, Any]) -> "RateRegion":
        json_dict = {k: v for k, v in json_dict.items() if k != "polyline"}
        try:
            return json_serializer.structure_attrs_fromdict(json_dict, cls)
        except Exception as e:
            raise ValidationError(f"Invalid region dump: {e}")


def _triple_region(
    name: str, kind: str, triple: RateTriple, meta: Optional[Dict[str, Any]] = None
) -> RateRegion:
    return RateRegion(name, kind, [RegionEntry(triple.normalized())], meta=meta or {})


def _lambdas(lambdas: Optional[Sequence[float]], settings: Settings) -> Tuple[float, ...]:
    if lambdas is None:
        return settings.regions.lambda_grid()
    res = tuple(sorted(set(float(l) for l in lambdas)))
    if not res or res[0] <= 0.0:
        raise ValidationError("Sweep directions need a nonempty set of lambdas > 0")
    return res


CandidatePair = Tuple[MultiFamily, MultiFamily]


def inner_candidates(
    spec: ProblemSpec,
    mode: str = "maximal",
    kv: Optional[int] = None,
    kw: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[CandidatePair]:
    """Enumerate the (V, W) memberships the inner bound is optimized over

    In the 'maximal' and 'all' modes V ranges over the covering sub-families of the
    (maximal) independent sets of G_{X|Y,Z} and W takes the whole family for the
    graph G_{Y|V,Z} that V induces. In 'multiset' mode both range over covering
    multisets with total counts kv and kw.
    """
    settings = Settings() if settings is None else settings
    if mode not in INNER_MODES:
        raise ValidationError(f"Unknown inner bound mode '{mode}'")
    cap = settings.graphs.vertex_cap
    budget = settings.sets.enumeration_budget
    g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), cap)
    cover_x = full_mask(len(spec.alphabet_X))
    cover_y = full_mask(len(spec.alphabet_Y))
    res: List[CandidatePair] = []
    if mode == "multiset":
        kv = len(spec.alphabet_X) + 1 if kv is None else kv
        kw = len(spec.alphabet_Y) + 1 if kw is None else kw
        dominated = settings.sets.dominated_pruning
        v_cands = multisets(
            independent_sets(g_x, cap, budget), kv, cover_x, dominated=dominated,
            budget=budget,
        )
        for v_memb in v_cands:
            g_v = build_generalized_graph(spec, v_memb, vertex_cap=cap)
            for w_memb in multisets(
                independent_sets(g_v, cap, budget), kw, cover_y, dominated=dominated,
                budget=budget,
            ):
                res.append((v_memb, w_memb))
                if len(res) > budget:
                    raise BudgetExceeded(f"More than {budget} inner bound candidates")
    else:
        if mode == "maximal":
            v_family = maximal_independent_sets(g_x, cap)
        else:
            v_family = independent_sets(g_x, cap, budget)
        for sub in covering_subfamilies(v_family, cover_x, budget):
            v_memb = MultiFamily.from_family(sub)
            g_v = build_generalized_graph(spec, v_memb, vertex_cap=cap)
            if mode == "maximal":
                w_family = maximal_independent_sets(g_v, cap)
            else:
                w_family = independent_sets(g_v, cap, budget)
            res.append((v_memb, MultiFamily.from_family(w_family)))
    log.info("Enumerated %d (V, W) candidates in %s mode", len(res), mode)
    return res


def sweep_region(
    spec: ProblemSpec,
    candidates: Sequence[CandidatePair],
    name: str,
    kind: str,
    lambdas: Optional[Sequence[float]] = None,
    settings: Optional[Settings] = None,
    optimize_v: bool = True,
    prog_hook: Optional[ProgressHookBase[Any]] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> RateRegion:
    """Solve the scalarized problem for every candidate, lambda and restart

    For each (candidate, lambda) the best restart (lowest value, then lowest
    restart index) contributes one triple.
    """
    settings = Settings() if settings is None else settings
    solver = settings.solver
    lams = _lambdas(lambdas, settings)
    restarts = max(1, solver.restarts)
    n_tasks = len(candidates) * len(lams) * restarts
    if n_tasks > settings.regions.task_budget:
        raise BudgetExceeded(
            f"Sweep needs {n_tasks} solves, the budget is {settings.regions.task_budget}"
        )
    log.debug("Sweep '%s' runs %d solves", name, n_tasks)
    objectives = [ScalarizedObjective(spec.pmf, lam) for lam in lams]
    tasks = [
        (c_idx, l_idx, r_idx)
        for c_idx in range(len(candidates))
        for l_idx in range(len(lams))
        for r_idx in range(restarts)
    ]
    report = SweepReport(name, prog_hook=prog_hook, n_expected=n_tasks)

    def run(task: Tuple[int, int, int]) -> Tuple[Tuple[int, int, int], Any]:
        c_idx, l_idx, r_idx = task
        v_memb, w_memb = candidates[c_idx]
        rng = np.random.default_rng([solver.seed, r_idx])
        if optimize_v:
            start_v = Channel.random(v_memb, rng, solver.init_floor).matrix
        else:
            start_v = Channel.uniform(v_memb).matrix
        start_w = Channel.random(w_memb, rng, solver.init_floor).matrix
        return task, block_descent(objectives[l_idx], start_v, start_w, solver, optimize_v)

    def on_done(res: Tuple[Tuple[int, int, int], Any]) -> None:
        task, solve = res
        report.add(
            report.n_input, solve.converged, "candidate %d lambda %d restart %d" % task
        )

    results = run_tasks(run, tasks, solver.threads, on_done)
    report.done = True
    report.log_issues()

    best: Dict[Tuple[int, int], Any] = {}
    for (c_idx, l_idx, _), solve in results:
        key = (c_idx, l_idx)
        if key not in best or solve.value < best[key].value:
            best[key] = solve
    entries = []
    for (c_idx, l_idx), solve in sorted(best.items()):
        entries.append(
            RegionEntry(
                solve.triple.normalized(),
                c_idx,
                lams[l_idx],
                solve.converged,
                solve.mat_v,
                solve.mat_w,
            )
        )
    if solver.strict and not all(e.converged for e in entries):
        raise NonConvergence(f"Sweep '{name}' has unconverged optima")
    region_meta = {
        "lambdas": list(lams),
        "restarts": restarts,
        "seed": solver.seed,
        "n_unconverged": report.n_warnings,
    }
    region_meta.update(meta or {})
    return RateRegion(
        name,
        kind,
        entries,
        [
            Candidate(idx, v.to_strings(), w.to_strings())
            for idx, (v, w) in enumerate(candidates)
        ],
        region_meta,
    )


def inner_bound_region(
    spec: ProblemSpec,
    mode: str = "maximal",
    lambdas: Optional[Sequence[float]] = None,
    settings: Optional[Settings] = None,
    kv: Optional[int] = None,
    kw: Optional[int] = None,
    prog_hook: Optional[ProgressHookBase[Any]] = None,
) -> RateRegion:
    """Achievable region from independent-set memberships for V and W"""
    candidates = inner_candidates(spec, mode, kv, kw, settings)
    meta: Dict[str, Any] = {"mode": mode}
    if mode == "multiset":
        meta["kv"] = len(spec.alphabet_X) + 1 if kv is None else kv
        meta["kw"] = len(spec.alphabet_Y) + 1 if kw is None else kw
    return sweep_region(
        spec,
        candidates,
        f"inner:{mode}",
        BOUND,
        lambdas,
        settings,
        prog_hook=prog_hook,
        meta=meta,
    )


def outer_bound_region(
    spec: ProblemSpec, settings: Optional[Settings] = None
) -> RateRegion:
    """Graph entropy bounds on R_X, R_Y and the sum rate

    Each entropy is solved with the configured number of restarts.
    """
    settings = Settings() if settings is None else settings
    n = settings.solver.restarts
    h_x = conditional_graph_entropy(spec, Role.X, (Role.Y, Role.Z), "maximal", settings, n)
    h_y = conditional_graph_entropy(spec, Role.Y, (Role.X, Role.Z), "maximal", settings, n)
    h_xy = conditional_graph_entropy(spec, (Role.X, Role.Y), (Role.Z,), "maximal", settings, n)
    return _triple_region(
        "outer",
        BOUND,
        RateTriple(h_x.value, h_y.value, h_xy.value),
        {
            "mode": "outer",
            "restarts": n,
            "converged": h_x.converged and h_y.converged and h_xy.converged,
        },
    )


def independent_sources_region(
    spec: ProblemSpec, settings: Optional[Settings] = None
) -> RateRegion:
    """Exact region when X and Y are independent given Z (no sum constraint)"""
    if not check_conditional_independence(spec):
        raise HypothesisError("X and Y are not independent given Z")
    settings = Settings() if settings is None else settings
    n = settings.solver.restarts
    h_x = conditional_graph_entropy(spec, Role.X, (Role.Y, Role.Z), "maximal", settings, n)
    h_y = conditional_graph_entropy(spec, Role.Y, (Role.X, Role.Z), "maximal", settings, n)
    return _triple_region(
        "independent",
        RATE_REGION,
        RateTriple(h_x.value, h_y.value, h_x.value + h_y.value),
        {"mode": "independent"},
    )


def partially_invertible_region(
    spec: ProblemSpec,
    wrt: Role = Role.X,
    k: Optional[int] = None,
    lambdas: Optional[Sequence[float]] = None,
    settings: Optional[Settings] = None,
    prog_hook: Optional[ProgressHookBase[Any]] = None,
) -> RateRegion:
    """Exact region when `wrt` is determined by (f, Z)

    The determined source is sent with V = itself, and the other source's message W
    ranges over covering multisets of size `k` (default: alphabet size plus one).
    """
    if wrt not in (Role.X, Role.Y):
        raise RoleError(f"Partial invertibility is defined for X or Y, not {wrt.name}")
    if not check_partially_invertible(spec, wrt):
        raise HypothesisError(f"f is not partially invertible with respect to {wrt.name}")
    if wrt == Role.Y:
        region = partially_invertible_region(
            spec.swap_sources(), Role.X, k, lambdas, settings, prog_hook
        )
        meta = dict(region.meta)
        meta["wrt"] = "Y"
        return evolve(region.swapped(), meta=meta)
    settings = Settings() if settings is None else settings
    cap = settings.graphs.vertex_cap
    budget = settings.sets.enumeration_budget
    k = len(spec.alphabet_Y) + 1 if k is None else k
    v_memb = Channel.identity(spec.alphabet_X).membership
    g_y = build_char_graph(spec, Role.Y, (Role.X, Role.Z), cap)
    candidates = [
        (v_memb, w_memb)
        for w_memb in multisets(
            independent_sets(g_y, cap, budget),
            k,
            full_mask(g_y.n),
            dominated=settings.sets.dominated_pruning,
            budget=budget,
        )
    ]
    log.info("Enumerated %d W candidates of size %d", len(candidates), k)
    return sweep_region(
        spec,
        candidates,
        "partially-invertible",
        RATE_REGION,
        lambdas,
        settings,
        optimize_v=False,
        prog_hook=prog_hook,
        meta={"mode": "partially-invertible", "wrt": "X", "k": k},
    )


def slepian_wolf_region(spec: ProblemSpec) -> RateRegion:
    """Region for recovering both sources losslessly, with Z at the receiver"""
    joint = spec.joint()
    return _triple_region(
        "slepian-wolf",
        RATE_REGION,
        RateTriple(
            conditional_entropy(joint, (Role.X,), (Role.Y, Role.Z)),
            conditional_entropy(joint, (Role.Y,), (Role.X, Role.Z)),
            conditional_entropy(joint, (Role.X, Role.Y), (Role.Z,)),
        ),
        {"mode": "slepian-wolf"},
    )


KM_TOL = 1e-12


def korner_marton_region(spec: ProblemSpec) -> RateRegion:
    """Region for the modulo-2 sum of doubly symmetric binary sources"""
    if not spec.z_constant:
        raise HypothesisError("Korner-Marton needs a constant Z")
    if len(spec.alphabet_X) != 2 or len(spec.alphabet_Y) != 2:
        raise HypothesisError("Korner-Marton needs binary X and Y")
    f_tab = spec.f[:, :, 0]
    if not (f_tab[0, 0] == f_tab[1, 1] and f_tab[0, 1] == f_tab[1, 0]
            and f_tab[0, 0] != f_tab[0, 1]):
        raise HypothesisError("Korner-Marton needs f to be the modulo-2 sum")
    p_tab = spec.pmf[:, :, 0]
    if abs(p_tab[0, 0] - p_tab[1, 1]) > KM_TOL or abs(p_tab[0, 1] - p_tab[1, 0]) > KM_TOL:
        raise HypothesisError("Korner-Marton needs a symmetric source pmf")
    h_sum = entropy_bits(np.array([p_tab[0, 0] + p_tab[1, 1], p_tab[0, 1] + p_tab[1, 0]]))
    return _triple_region(
        "korner-marton",
        RATE_REGION,
        RateTriple(h_sum, h_sum, 2.0 * h_sum),
        {"mode": "korner-marton"},
    )


@frozen
class CompareResult:
    a_in_b: bool

    b_in_a: bool

    a_outside_b: float
    """Largest amount by which A reaches below B's support function"""

    b_outside_a: float

    max_gap: float
    """Largest absolute support function difference over the fan"""

    witness: Tuple[float, float]
    """Direction (c_x, c_y) where `max_gap` is attained"""

    @property
    def equal(self) -> bool:
        return self.a_in_b and self.b_in_a


def direction_fan(directions: int = 181) -> np.ndarray:
    """Unit directions (cos t, sin t) for t evenly spaced in [0, pi/2]"""
    if directions < 2:
        raise ValidationError("Need at least two comparison directions")
    angles = np.linspace(0.0, np.pi / 2, directions)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def region_compare(
    region_a: RateRegion,
    region_b: RateRegion,
    directions: int = 181,
    tol: float = 1e-3,
) -> CompareResult:
    """Compare two regions through their support functions on a direction fan

    A is contained in B (within `tol`) iff its support function is nowhere more than
    `tol` below B's.
    """
    fan = direction_fan(directions)
    h_a = np.array([region_a.support(c_x, c_y) for c_x, c_y in fan])
    h_b = np.array([region_b.support(c_x, c_y) for c_x, c_y in fan])
    diff = h_a - h_b
    a_outside = max(0.0, float(np.max(-diff)))
    b_outside = max(0.0, float(np.max(diff)))
    w_idx = int(np.argmax(np.abs(diff)))
    return CompareResult(
        a_in_b=a_outside <= tol,
        b_in_a=b_outside <= tol,
        a_outside_b=a_outside,
        b_outside_a=b_outside,
        max_gap=float(np.abs(diff[w_idx])),
        witness=(float(fan[w_idx, 0]), float(fan[w_idx, 1])),
    )


@frozen
class InclusionCheck:
    small_mode: str

    large_mode: str

    comparison: CompareResult

    strict: bool
    """The larger mode's region reaches beyond the smaller one, after confirmation"""

    confirmed_gap: Optional[float] = None
    """Gap measured again with doubled restarts, if it was large enough to check"""


def mode_inclusion_check(
    spec: ProblemSpec,
    small_mode: str,
    large_mode: str,
    lambdas: Optional[Sequence[float]] = None,
    settings: Optional[Settings] = None,
    kv: Optional[int] = None,
    kw: Optional[int] = None,
) -> InclusionCheck:
    """Check R(small_mode) against R(large_mode) and confirm a strict inclusion

    A gap above `strict_gap` is re-measured with the restarts doubled, and the
    inclusion is only reported strict if the gap persists.
    """
    settings = Settings() if settings is None else settings
    reg = settings.regions

    def measure(conf: Settings) -> CompareResult:
        small = inner_bound_region(spec, small_mode, lambdas, conf, kv, kw)
        large = inner_bound_region(spec, large_mode, lambdas, conf, kv, kw)
        return region_compare(small, large, reg.directions, reg.strict_gap)

    res = measure(settings)
    if res.b_outside_a <= reg.strict_gap:
        return InclusionCheck(small_mode, large_mode, res, False)
    confirm = measure(settings.with_restarts(2 * max(1, settings.solver.restarts)))
    strict = confirm.b_outside_a > reg.strict_gap
    if strict:
        log.info(
            "R(%s) is strictly inside R(%s), gap %.4g at direction %s",
            small_mode, large_mode, confirm.b_outside_a, confirm.witness,
        )
    return InclusionCheck(small_mode, large_mode, res, strict, confirm.b_outside_a)


@frozen
class SumRateCheck:
    sum_rate: float
    """s from the rate triple"""

    chain_sum: float
    """I(V;X|Z) + I(Y;W|V,Z) evaluated on the joint pmf"""

    joint_information: float
    """I(V,W;X,Y|Z)"""

    passed: bool


def sum_rate_check(
    spec: ProblemSpec,
    chan_v: Channel,
    chan_w: Channel,
    tol: float = 1e-9,
    vertex_cap: int = 64,
) -> SumRateCheck:
    """Check that the sum rate equals its chain rule forms for admissible channels"""
    triple = rate_triple(spec, chan_v, chan_w, vertex_cap)
    joint = joint_pmf(spec, chan_v, chan_w)
    chain = conditional_mutual_information(
        joint, (Role.V,), (Role.X,), (Role.Z,)
    ) + conditional_mutual_information(joint, (Role.Y,), (Role.W,), (Role.V, Role.Z))
    both = conditional_mutual_information(
        joint, (Role.V, Role.W), (Role.X, Role.Y), (Role.Z,)
    )
    passed = abs(triple.s - chain) <= tol and abs(triple.s - both) <= tol
    return SumRateCheck(triple.s, chain, both, passed)


REGION_BUILDERS: Dict[str, Callable[..., RateRegion]] = {
    "outer": outer_bound_region,
    "independent": independent_sources_region,
    "slepian-wolf": slepian_wolf_region,
    "korner-marton": korner_marton_region,
}
"""Regions that need nothing beyond the problem (and settings for graph entropies)"""
