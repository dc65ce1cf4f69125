"""Conditional graph entropy, rate triples and a brute-force grid oracle

Channels p(v|x) are stored as matrices with one column per source symbol, so every
column lies on a probability simplex restricted to the channel's membership mask.
Objectives are evaluated in nats internally and reported in bits.

Minimization uses exponentiated gradient (mirror descent with the entropy mirror map)
on each column, with a backtracking line search. The two-channel objectives used for
rate regions alternate between the V and W blocks.
"""
import logging
from itertools import combinations, islice, product
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from attrs import frozen, field
from scipy.special import entr, xlogy

from ._globals import Role, WITNESS_ROLES
from .conf import Settings, SolverSettings
from .graphs import CharGraph, build_char_graph, build_generalized_graph, build_joint_char_graph
from .model import LN2, Pmf, ProblemSpec, RoleError
from .sets import (
    MultiFamily,
    full_mask,
    independent_sets,
    maximal_independent_sets,
    multisets,
)
from .util import (
    CustomJsonSerializable,
    ResourceError,
    SizeError,
    ValidationError,
    format_subset,
    run_tasks,
)


log = logging.getLogger(__name__)


class MaskError(ValidationError):
    """A channel puts mass outside its membership, or a membership is not admissible"""


class NonConvergence(ResourceError):
    """A solve hit the iteration cap (only raised with strict solver settings)"""


COLUMN_TOL = 1e-12
"""Allowed deviation of a channel column sum from one"""


MIN_STEP = 1e-12


MAX_STEP = 1e6


TargetType = Union[Role, Tuple[Role, Role]]


def _log(arr: np.ndarray) -> np.ndarray:
    """Natural log with log(0) replaced by 0, for use next to zero weights"""
    return np.log(np.where(arr > 0.0, arr, 1.0))


def _readonly(arr: Any) -> np.ndarray:
    res = np.array(arr, dtype=float)
    res.setflags(write=False)
    return res


@frozen
class Channel(CustomJsonSerializable):
    """Conditional pmf p(v|x) whose values are the subsets of `membership`"""

    membership: MultiFamily

    matrix: np.ndarray = field(converter=_readonly, eq=False)
    """Shape (values, symbols), each column sums to one"""

    def __attrs_post_init__(self) -> None:
        mask = self.membership.mask()
        if self.matrix.shape != mask.shape:
            raise MaskError(
                f"Channel matrix has shape {self.matrix.shape}, expected {mask.shape}"
            )
        if not mask.any(axis=0).all():
            raise MaskError(f"Membership {self.membership.describe()} does not cover")
        if np.any(self.matrix < 0.0) or np.any(self.matrix[~mask] != 0.0):
            raise MaskError("Channel puts mass outside its membership mask")
        sums = self.matrix.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > COLUMN_TOL:
            raise MaskError(f"Channel columns sum to {sums.tolist()}")

    @property
    def mask(self) -> np.ndarray:
        return self.membership.mask()

    @classmethod
    def uniform(cls, membership: MultiFamily) -> "Channel":
        mask = membership.mask().astype(float)
        return cls(membership, mask / mask.sum(axis=0, keepdims=True))

    @classmethod
    def random(
        cls, membership: MultiFamily, rng: np.random.Generator, floor: float = 1e-6
    ) -> "Channel":
        """Dirichlet(1) draw on each column's allowed values, floored and renormalized"""
        mask = membership.mask()
        res = np.zeros(mask.shape)
        for x_idx in range(mask.shape[1]):
            rows = np.flatnonzero(mask[:, x_idx])
            col = np.maximum(rng.dirichlet(np.ones(len(rows))), floor)
            res[rows, x_idx] = col / col.sum()
        return cls(membership, res)

    @classmethod
    def identity(cls, labels: Sequence[str]) -> "Channel":
        """The channel V = X, with one singleton value per symbol"""
        membership = MultiFamily(labels, [(1 << i, 1) for i in range(len(labels))])
        return cls(membership, np.eye(len(labels)))

    @classmethod
    def from_json_dict(cls, json_dict: Dict[str, Any]) -> "Channel":
        labels = json_dict["labels"]
        index = {l: i for i, l in enumerate(labels)}
        values = []
        for val in json_dict["values"]:
            bits = 0
            for l in val:
                bits |= 1 << index[l]
            values.append(bits)
        membership = MultiFamily.from_values(labels, values)
        if list(membership.values()) != values:
            raise MaskError("Channel values must be listed in canonical order")
        return cls(membership, json_dict["matrix"])

    def to_json_dict(self) -> Dict[str, Any]:
        labels = self.membership.labels
        return {
            "labels": list(labels),
            "values": [[labels[i] for i in range(len(labels)) if s >> i & 1]
                       for s in self.membership.values()],
            "matrix": self.matrix.tolist(),
        }


@frozen
class SolveReport(CustomJsonSerializable):
    """Outcome of minimizing an information objective"""

    value: float
    """Best objective value found, in bits"""

    channels: Tuple[Channel, ...] = field(converter=tuple)
    """The minimizing channel(s)"""

    iterations: int

    converged: bool

    restarts: int = 1

    restart_spread: float = 0.0
    """Largest minus smallest restart value, in bits"""

    candidate: str = ""
    """Membership the optimum was found on"""

    n_candidates: int = 1

    @classmethod
    def from_json_dict(cls, json_dict: Dict[str, Any]) -> "SolveReport":
        json_dict = dict(json_dict)
        json_dict["channels"] = [Channel.from_json_dict(c) for c in json_dict["channels"]]
        return cls(**json_dict)

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "channels": [c.to_json_dict() for c in self.channels],
            "iterations": self.iterations,
            "converged": self.converged,
            "restarts": self.restarts,
            "restart_spread": self.restart_spread,
            "candidate": self.candidate,
            "n_candidates": self.n_candidates,
        }


class EntropyObjective:
    """I(V;T|G) for a channel p(v|t), where V - T - G

    Built from the table p(t,g), where `t` indexes the target alphabet and `g`
    the (flattened) outcomes of the conditioning roles.
    """

    def __init__(self, p_tg: np.ndarray):
        self.p_tg = np.asarray(p_tg, dtype=float)
        self.p_t = self.p_tg.sum(axis=1)
        self.h_g = float(entr(self.p_tg.sum(axis=0)).sum())

    @classmethod
    def from_spec(
        cls, spec: ProblemSpec, target: TargetType, given: Sequence[Role]
    ) -> "EntropyObjective":
        target_roles = _target_roles(target)
        given = tuple(given)
        joint = spec.joint()
        n_t = int(np.prod([len(spec.alphabet(r)) for r in target_roles]))
        return cls(joint.marginal(target_roles + given).reshape(n_t, -1))

    @property
    def weights(self) -> np.ndarray:
        return self.p_t

    def value(self, mat: np.ndarray) -> float:
        t_vg = mat @ self.p_tg
        cond = float((entr(mat) * self.p_t).sum())
        return float(entr(t_vg).sum()) - self.h_g - cond

    def gradient(self, mat: np.ndarray) -> np.ndarray:
        t_vg = mat @ self.p_tg
        return (-_log(t_vg) - 1.0) @ self.p_tg.T + self.p_t * (_log(mat) + 1.0)

    def batch_value(self, mats: np.ndarray) -> np.ndarray:
        t_vg = np.einsum("nvt,tg->nvg", mats, self.p_tg)
        cond = (entr(mats) * self.p_t).sum(axis=(1, 2))
        return entr(t_vg).sum(axis=(1, 2)) - self.h_g - cond

    def grid_gap(self, n_values: int, delta: float) -> float:
        """Bound (bits) on the objective change over an L1 move of `delta` per column"""
        n_t, n_g = self.p_tg.shape
        return _continuity(delta, n_values * n_g) + _continuity(delta, n_values * n_t)


def corner_weights(lam: float) -> Tuple[float, float, float]:
    """Weights (c_a, c_b, c_s) such that c_a*a + c_b*b + c_s*s = min of R_X + lam*R_Y

    The minimum over a triple's region sits at the corner (a, s-a) for lam <= 1 and
    at (s-b, b) for lam >= 1.
    """
    if lam <= 0.0:
        raise ValidationError(f"Sweep directions need lambda > 0, got {lam}")
    if lam <= 1.0:
        return (1.0 - lam, 0.0, lam)
    return (0.0, lam - 1.0, 1.0)


class ScalarizedObjective:
    """Weighted sum of the (a, b, s) rate triple for channels p(v|x) and p(w|y)

    With T = p(v,w,z), the triple (in nats) is
      a = H(T) - H(T_wz) - H(V|X)
      b = H(T) - H(T_vz) - H(W|Y)
      s = H(T) - H(Z) - H(V|X) - H(W|Y)
    """

    def __init__(self, pmf: np.ndarray, lam: float = 1.0):
        self.pmf = np.asarray(pmf, dtype=float)
        self.lam = lam
        self.c_a, self.c_b, self.c_s = corner_weights(lam)
        self.p_x = self.pmf.sum(axis=(1, 2))
        self.p_y = self.pmf.sum(axis=(0, 2))
        self.h_z = float(entr(self.pmf.sum(axis=(0, 1))).sum())

    def _t(self, mat_v: np.ndarray, mat_w: np.ndarray) -> np.ndarray:
        return np.einsum("vx,wy,xyz->vwz", mat_v, mat_w, self.pmf)

    def triple_nats(self, mat_v: np.ndarray, mat_w: np.ndarray) -> Tuple[float, float, float]:
        t = self._t(mat_v, mat_w)
        h_t = float(entr(t).sum())
        h_wz = float(entr(t.sum(axis=0)).sum())
        h_vz = float(entr(t.sum(axis=1)).sum())
        h_v_x = float((entr(mat_v) * self.p_x).sum())
        h_w_y = float((entr(mat_w) * self.p_y).sum())
        return (
            h_t - h_wz - h_v_x,
            h_t - h_vz - h_w_y,
            h_t - self.h_z - h_v_x - h_w_y,
        )

    def value(self, mat_v: np.ndarray, mat_w: np.ndarray) -> float:
        a, b, s = self.triple_nats(mat_v, mat_w)
        return self.c_a * a + self.c_b * b + self.c_s * s

    def _grad_t(self, t: np.ndarray) -> np.ndarray:
        c_t = self.c_a + self.c_b + self.c_s
        res = c_t * (-_log(t) - 1.0)
        if self.c_a:
            res -= self.c_a * (-_log(t.sum(axis=0, keepdims=True)) - 1.0)
        if self.c_b:
            res -= self.c_b * (-_log(t.sum(axis=1, keepdims=True)) - 1.0)
        return res

    def grad_v(self, mat_v: np.ndarray, mat_w: np.ndarray) -> np.ndarray:
        g_t = self._grad_t(self._t(mat_v, mat_w))
        res = np.einsum("vwz,wy,xyz->vx", g_t, mat_w, self.pmf)
        return res + (self.c_a + self.c_s) * self.p_x * (_log(mat_v) + 1.0)

    def grad_w(self, mat_v: np.ndarray, mat_w: np.ndarray) -> np.ndarray:
        g_t = self._grad_t(self._t(mat_v, mat_w))
        res = np.einsum("vwz,vx,xyz->wy", g_t, mat_v, self.pmf)
        return res + (self.c_b + self.c_s) * self.p_y * (_log(mat_w) + 1.0)

    def batch_value(self, mats_v: np.ndarray, mats_w: np.ndarray) -> np.ndarray:
        t = np.einsum("nvx,nwy,xyz->nvwz", mats_v, mats_w, self.pmf)
        h_t = entr(t).sum(axis=(1, 2, 3))
        h_wz = entr(t.sum(axis=1)).sum(axis=(1, 2))
        h_vz = entr(t.sum(axis=2)).sum(axis=(1, 2))
        h_v_x = (entr(mats_v) * self.p_x).sum(axis=(1, 2))
        h_w_y = (entr(mats_w) * self.p_y).sum(axis=(1, 2))
        a = h_t - h_wz - h_v_x
        b = h_t - h_vz - h_w_y
        s = h_t - self.h_z - h_v_x - h_w_y
        return self.c_a * a + self.c_b * b + self.c_s * s

    def grid_gap(self, n_v: int, n_w: int, delta_v: float, delta_w: float) -> float:
        n_x, n_y, n_z = self.pmf.shape
        terms = (
            (self.c_a + self.c_b + self.c_s, delta_v + delta_w, n_v * n_w * n_z),
            (self.c_a, delta_w, n_w * n_z),
            (self.c_b, delta_v, n_v * n_z),
            (self.c_a + self.c_s, delta_v, n_v * n_x),
            (self.c_b + self.c_s, delta_w, n_w * n_y),
        )
        return sum(c * _continuity(d, n) for c, d, n in terms if c)


def _continuity(delta: float, dim: int) -> float:
    """Entropy continuity bound (bits) for pmfs on `dim` points at L1 distance `delta`"""
    if dim < 2 or delta <= 0.0:
        return 0.0
    half = min(delta / 2.0, 1.0 - 1.0 / dim)
    h_half = float(entr(min(half, 0.5)) + entr(1.0 - min(half, 0.5))) / LN2
    return min(float(np.log2(dim)), half * float(np.log2(dim - 1)) + h_half)


def exp_gradient(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    weights: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 100000,
) -> Tuple[np.ndarray, float, int, bool]:
    """Minimize `fun` over column-stochastic matrices with the zero pattern of `start`

    Column gradients are divided by the column `weights` (the source pmf), and columns
    with zero weight are left as they are. A step is accepted once the objective lies
    below the weighted-KL majorant; the step grows after each accepted update. If no
    step is accepted the solve stops, and it only counts as converged when the last
    accepted update was already within `tol`.

    Returns (matrix, value, iterations, converged).
    """
    mat = np.array(start, dtype=float)
    active = weights > 0.0
    scale = np.where(active, weights, 1.0)
    support = mat > 0.0
    val = fun(mat)
    step = 1.0
    change = np.inf
    for it in range(1, max_iter + 1):
        g = grad(mat)
        log_mat = _log(mat)
        while True:
            logits = np.where(support, log_mat - step * g / scale, -np.inf)
            logits -= logits.max(axis=0, keepdims=True)
            new = np.exp(logits)
            new /= new.sum(axis=0, keepdims=True)
            new[:, ~active] = mat[:, ~active]
            new_val = fun(new)
            kl = float(
                (weights * (xlogy(new, new) - xlogy(new, np.where(support, mat, 1.0)))
                 .sum(axis=0)).sum()
            )
            bound = val + float((g * (new - mat)).sum()) + kl / step
            if new_val <= bound + 1e-14 * max(1.0, abs(val)):
                break
            step /= 2.0
            if step < MIN_STEP:
                log.debug(
                    "Step size fell below %g at iteration %d, last change %.3g",
                    MIN_STEP, it, change,
                )
                return mat, val, it, abs(change) <= tol * max(1.0, abs(val))
        change = val - new_val
        mat, val = new, new_val
        support = mat > 0.0
        step = min(step * 1.5, MAX_STEP)
        if abs(change) <= tol * max(1.0, abs(val)):
            return mat, val, it, True
    return mat, val, max_iter, False


def _check_strict(converged: bool, solver: SolverSettings, what: str) -> None:
    if not converged:
        if solver.strict:
            raise NonConvergence(f"{what} did not converge in {solver.max_iter} iterations")
        log.warning("%s did not converge in %d iterations", what, solver.max_iter)


def _target_roles(target: TargetType) -> Tuple[Role, ...]:
    if isinstance(target, Role):
        return (target,)
    roles = tuple(target)
    if roles != (Role.X, Role.Y):
        raise RoleError(f"Joint targets must be (X, Y), got {roles}")
    return roles


def target_graph(
    spec: ProblemSpec, target: TargetType, given: Sequence[Role], vertex_cap: int = 64
) -> CharGraph:
    """The characteristic graph whose independent sets a target's messages range over"""
    given = tuple(given)
    if isinstance(target, Role):
        return build_char_graph(spec, target, given, vertex_cap)
    _target_roles(target)
    if given != (Role.Z,):
        raise RoleError("The joint target (X, Y) is only defined given Z")
    return build_joint_char_graph(spec, vertex_cap)


def parse_family_mode(mode: str) -> Tuple[str, Optional[int]]:
    """Split 'maximal', 'all', 'multiset' or 'multiset:K' into (mode, K)"""
    base, _, param = mode.partition(":")
    if base in ("maximal", "all") and not param:
        return base, None
    if base == "multiset":
        if not param:
            return base, None
        try:
            k_val = int(param)
        except ValueError:
            k_val = 0
        if k_val >= 1:
            return base, k_val
    raise ValidationError(f"Invalid family mode '{mode}'")


def entropy_candidates(
    graph: CharGraph, mode: str, settings: Optional[Settings] = None
) -> List[MultiFamily]:
    """The memberships a graph entropy minimization ranges over for `mode`"""
    settings = Settings() if settings is None else settings
    base, k_val = parse_family_mode(mode)
    cap = settings.graphs.vertex_cap
    budget = settings.sets.enumeration_budget
    if base == "maximal":
        return [MultiFamily.from_family(maximal_independent_sets(graph, cap))]
    family = independent_sets(graph, cap, budget)
    if base == "all":
        return [MultiFamily.from_family(family)]
    k_val = graph.n + 1 if k_val is None else k_val
    return list(
        multisets(
            family,
            k_val,
            cover=full_mask(graph.n),
            dominated=settings.sets.dominated_pruning,
            budget=budget,
        )
    )


def minimize_entropy(
    objective: EntropyObjective,
    membership: MultiFamily,
    solver: Optional[SolverSettings] = None,
    restarts: int = 1,
) -> SolveReport:
    """Minimize the convex objective over channels on `membership`

    The first start is the uniform channel, further restarts draw random channels
    seeded by the restart index.
    """
    solver = SolverSettings() if solver is None else solver
    best: Optional[Tuple[float, np.ndarray, int, bool]] = None
    values = []
    total_iter = 0
    for r_idx in range(max(1, restarts)):
        if r_idx == 0:
            start = Channel.uniform(membership)
        else:
            rng = np.random.default_rng([solver.seed, r_idx])
            start = Channel.random(membership, rng, solver.init_floor)
        mat, val, n_iter, conv = exp_gradient(
            objective.value,
            objective.gradient,
            start.matrix,
            objective.weights,
            solver.tol,
            solver.max_iter,
        )
        total_iter += n_iter
        values.append(val)
        if best is None or val < best[0]:
            best = (val, mat, n_iter, conv)
    assert best is not None
    val, mat, _, conv = best
    _check_strict(conv, solver, f"Entropy solve on {membership.describe()}")
    return SolveReport(
        value=max(val, 0.0) / LN2,
        channels=(Channel(membership, mat),),
        iterations=total_iter,
        converged=conv,
        restarts=max(1, restarts),
        restart_spread=(max(values) - min(values)) / LN2,
        candidate=membership.describe(),
    )


def information_minimum(
    spec: ProblemSpec,
    membership: MultiFamily,
    target: TargetType = Role.X,
    given: Sequence[Role] = (Role.Y, Role.Z),
    solver: Optional[SolverSettings] = None,
    restarts: int = 1,
) -> SolveReport:
    """Minimize I(V;target|given) over channels whose values are `membership`

    The membership does not have to come from a characteristic graph.
    """
    objective = EntropyObjective.from_spec(spec, target, given)
    if membership.mask().shape[1] != objective.p_tg.shape[0]:
        raise MaskError("Membership labels do not match the target alphabet")
    return minimize_entropy(objective, membership, solver, restarts)


def conditional_graph_entropy(
    spec: ProblemSpec,
    target: TargetType,
    given: Sequence[Role],
    family_mode: str = "maximal",
    settings: Optional[Settings] = None,
    restarts: int = 1,
) -> SolveReport:
    """Minimize I(V;target|given) with V ranging over the family selected by `family_mode`

    In 'maximal' mode this is the conditional graph entropy. The 'all' and 'multiset:K'
    modes range over larger families and reach the same minimum.
    """
    settings = Settings() if settings is None else settings
    given = tuple(given)
    graph = target_graph(spec, target, given, settings.graphs.vertex_cap)
    objective = EntropyObjective.from_spec(spec, target, given)
    candidates = entropy_candidates(graph, family_mode, settings)
    log.info(
        "Minimizing over %d %s candidate(s) for %s", len(candidates), family_mode,
        graph.provenance,
    )
    reports = run_tasks(
        lambda m: minimize_entropy(objective, m, settings.solver, restarts),
        candidates,
        settings.solver.threads,
    )
    best_idx = min(range(len(reports)), key=lambda i: (reports[i].value, i))
    best = reports[best_idx]
    return SolveReport(
        value=best.value,
        channels=best.channels,
        iterations=sum(r.iterations for r in reports),
        converged=best.converged,
        restarts=best.restarts,
        restart_spread=best.restart_spread,
        candidate=best.candidate,
        n_candidates=len(reports),
    )


@frozen
class RateTriple:
    """Constraints R_X >= a, R_Y >= b, R_X + R_Y >= s (bits)"""

    a: float = field(converter=float)

    b: float = field(converter=float)

    s: float = field(converter=float)

    def normalized(self) -> "RateTriple":
        """Same region, with the sum constraint no weaker than a + b"""
        return RateTriple(self.a, self.b, max(self.s, self.a + self.b))

    def corners(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        tri = self.normalized()
        return ((tri.a, tri.s - tri.a), (tri.s - tri.b, tri.b))

    def support(self, c_x: float, c_y: float) -> float:
        """Minimum of c_x*R_X + c_y*R_Y over the triple's region"""
        return min(c_x * r_x + c_y * r_y for r_x, r_y in self.corners())

    def swapped(self) -> "RateTriple":
        return RateTriple(self.b, self.a, self.s)


def joint_pmf(spec: ProblemSpec, chan_v: Channel, chan_w: Channel) -> Pmf:
    """p(v,x,y,w,z) = p(x,y,z) p(v|x) p(w|y)"""
    tensor = np.einsum("vx,xyz,wy->vxywz", chan_v.matrix, spec.pmf, chan_w.matrix)
    return Pmf(WITNESS_ROLES, tensor)


def check_admissible(
    spec: ProblemSpec, chan_v: Channel, chan_w: Channel, vertex_cap: int = 64
) -> CharGraph:
    """Check V against G_{X|Y,Z} and W against G_{Y|V,Z}, returning the latter"""
    if chan_v.membership.labels != spec.alphabet_X:
        raise MaskError("The V channel is not over the X alphabet")
    if chan_w.membership.labels != spec.alphabet_Y:
        raise MaskError("The W channel is not over the Y alphabet")
    g_x = build_char_graph(spec, Role.X, (Role.Y, Role.Z), vertex_cap)
    for bits in chan_v.membership.subsets:
        if not g_x.is_independent(bits):
            raise MaskError(
                f"V value {format_subset(bits, g_x.labels)} is not independent in "
                f"{g_x.provenance}"
            )
    g_v = build_generalized_graph(spec, chan_v.membership, chan_v, vertex_cap=vertex_cap)
    for bits in chan_w.membership.subsets:
        if not g_v.is_independent(bits):
            raise MaskError(
                f"W value {format_subset(bits, g_v.labels)} is not independent in "
                f"{g_v.provenance}"
            )
    return g_v


def rate_triple(
    spec: ProblemSpec, chan_v: Channel, chan_w: Channel, vertex_cap: int = 64
) -> RateTriple:
    """(I(V;X|W,Z), I(Y;W|V,Z), I(V;X|Z) + I(Y;W|V,Z)) in bits for admissible channels"""
    check_admissible(spec, chan_v, chan_w, vertex_cap)
    obj = ScalarizedObjective(spec.pmf)
    a, b, s = obj.triple_nats(chan_v.matrix, chan_w.matrix)
    return RateTriple(max(a, 0.0) / LN2, max(b, 0.0) / LN2, max(s, 0.0) / LN2)


@frozen
class BlockSolve:
    """Result of one block-coordinate descent run on a scalarized objective"""

    mat_v: np.ndarray = field(eq=False)

    mat_w: np.ndarray = field(eq=False)

    value: float
    """Objective value in bits"""

    triple: RateTriple

    iterations: int

    converged: bool


def block_descent(
    objective: ScalarizedObjective,
    start_v: np.ndarray,
    start_w: np.ndarray,
    solver: Optional[SolverSettings] = None,
    optimize_v: bool = True,
) -> BlockSolve:
    """Alternate exponentiated-gradient runs on the V and W channels

    Each block runs for at most `block_iter` iterations per round, and rounds stop
    once a full round changes the objective by less than the tolerance. With
    `optimize_v` off, only the W channel is optimized.
    """
    solver = SolverSettings() if solver is None else solver
    mat_v, mat_w = np.array(start_v), np.array(start_w)

    def solve_w(max_iter: int) -> Tuple[np.ndarray, float, int, bool]:
        return exp_gradient(
            lambda m: objective.value(mat_v, m),
            lambda m: objective.grad_w(mat_v, m),
            mat_w,
            objective.p_y,
            solver.tol,
            max_iter,
        )

    if not optimize_v:
        mat_w, val, total, conv = solve_w(solver.max_iter)
    else:
        val = objective.value(mat_v, mat_w)
        total = 0
        conv = False
        while total < solver.max_iter:
            budget = max(1, min(solver.block_iter, solver.max_iter - total))
            mat_v, _, n_v, _ = exp_gradient(
                lambda m: objective.value(m, mat_w),
                lambda m: objective.grad_v(m, mat_w),
                mat_v,
                objective.p_x,
                solver.tol,
                budget,
            )
            total += n_v
            budget = max(1, min(solver.block_iter, solver.max_iter - total))
            mat_w, new_val, n_w, _ = solve_w(budget)
            total += n_w
            change = val - new_val
            val = new_val
            if abs(change) <= solver.tol * max(1.0, abs(val)):
                conv = True
                break
    a, b, s = objective.triple_nats(mat_v, mat_w)
    triple = RateTriple(max(a, 0.0) / LN2, max(b, 0.0) / LN2, max(s, 0.0) / LN2)
    return BlockSolve(mat_v, mat_w, val / LN2, triple, total, conv)


@frozen
class OracleResult:
    value: float
    """Smallest objective value on the grid, in bits"""

    gap: float
    """Bound on how far the grid minimum can sit above the true minimum, in bits"""

    argmin: Tuple[Channel, ...] = field(converter=tuple)

    n_points: int


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in multiples of 1/resolution"""
    points = []
    for bars in combinations(range(resolution + k - 1), k - 1):
        parts = []
        prev = -1
        for bar in bars:
            parts.append(bar - prev - 1)
            prev = bar
        parts.append(resolution + k - 2 - prev)
        points.append(parts)
    return np.array(points, dtype=float) / resolution


class _ChannelGrid:
    """Product of per-column simplex grids for a membership"""

    def __init__(self, membership: MultiFamily, resolution: int):
        self.membership = membership
        mask = membership.mask()
        self.shape = mask.shape
        self.columns = []
        for x_idx in range(mask.shape[1]):
            rows = np.flatnonzero(mask[:, x_idx])
            self.columns.append((rows, simplex_grid(len(rows), resolution)))
        self.n_points = int(np.prod([len(grid) for _, grid in self.columns]))
        k_max = max(len(rows) for rows, _ in self.columns)
        self.delta = 0.0 if k_max == 1 else min(2.0, k_max / resolution)

    def batches(self, batch_size: int = 4096) -> Iterator[np.ndarray]:
        combos = product(*[range(len(grid)) for _, grid in self.columns])
        while True:
            chunk = list(islice(combos, batch_size))
            if not chunk:
                return
            idx = np.array(chunk, dtype=np.int64)
            res = np.zeros((len(chunk),) + self.shape)
            for x_idx, (rows, grid) in enumerate(self.columns):
                res[:, rows, x_idx] = grid[idx[:, x_idx]]
            yield res


def grid_oracle(
    objective: Union[EntropyObjective, ScalarizedObjective],
    memberships: Sequence[MultiFamily],
    resolution: int = 20,
    max_points: int = 10000000,
) -> OracleResult:
    """Exhaustively evaluate an objective over uniform simplex grids of channels

    Entropy objectives take one membership (for V), scalarized objectives two (V, W).
    """
    if resolution < 1:
        raise ValidationError("Grid resolution must be at least one")
    grids = [_ChannelGrid(m, resolution) for m in memberships]
    expected = 1 if isinstance(objective, EntropyObjective) else 2
    if len(grids) != expected:
        raise ValidationError(f"Objective needs {expected} membership(s)")
    n_points = int(np.prod([g.n_points for g in grids]))
    if n_points > max_points:
        raise SizeError(f"Oracle grid has {n_points} points, the cap is {max_points}")
    best_val = np.inf
    best: Tuple[np.ndarray, ...] = ()
    if isinstance(objective, EntropyObjective):
        (grid_v,) = grids
        for batch in grid_v.batches():
            vals = objective.batch_value(batch)
            idx = int(np.argmin(vals))
            if vals[idx] < best_val:
                best_val, best = float(vals[idx]), (batch[idx],)
        gap = objective.grid_gap(grid_v.shape[0], grid_v.delta)
    else:
        grid_v, grid_w = grids
        for batch_v in grid_v.batches(256):
            for mat_v in batch_v:
                for batch_w in grid_w.batches():
                    mats_v = np.broadcast_to(mat_v, (len(batch_w),) + mat_v.shape)
                    vals = objective.batch_value(mats_v, batch_w)
                    idx = int(np.argmin(vals))
                    if vals[idx] < best_val:
                        best_val, best = float(vals[idx]), (mat_v, batch_w[idx])
        gap = objective.grid_gap(
            grid_v.shape[0], grid_w.shape[0], grid_v.delta, grid_w.delta
        )
    return OracleResult(
        value=best_val / LN2,
        gap=gap,
        argmin=[Channel(m, mat) for m, mat in zip(memberships, best)],
        n_points=n_points,
    )
