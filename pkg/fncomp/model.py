"""Problem ingestion, pmf algebra and structural predicates on (p, f)

A problem is a joint pmf p(x,y,z) over three finite alphabets plus a total function
f: X x Y x Z -> F. Everything else in the package is computed from a `ProblemSpec`.
"""
from __future__ import annotations
import json, logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from attrs import frozen, field
from scipy.special import entr

from ._globals import Role, SOURCE_ROLES
from .util import ValidationError, PathInputType


log = logging.getLogger(__name__)


class SchemaError(ValidationError):
    """A problem document is missing a field or references an unknown symbol"""


class NormalizationError(ValidationError):
    """Probabilities do not sum to one"""


class PartialFunctionError(ValidationError):
    """The function table does not cover every (x,y,z) triple"""


class RoleError(ValidationError):
    """Variable roles overlap or are missing from a joint pmf"""


SUM_TOL = 1e-9
"""Allowed deviation of a pmf's total mass from one"""


INDEPENDENCE_TOL = 1e-12


LN2 = float(np.log(2.0))


def entropy_bits(probs: np.ndarray) -> float:
    """Shannon entropy in bits of a (possibly multi-dimensional) pmf array"""
    return float(entr(probs).sum()) / LN2


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@frozen
class Pmf:
    """Dense joint pmf with one labeled axis per variable role"""

    roles: Tuple[Role, ...] = field(converter=tuple)
    """The role each axis of `tensor` represents"""

    tensor: np.ndarray = field(converter=_readonly, eq=False)

    def __attrs_post_init__(self) -> None:
        if len(set(self.roles)) != len(self.roles):
            raise RoleError(f"Duplicate roles in pmf: {self.roles}")
        if self.tensor.ndim != len(self.roles):
            raise RoleError(
                f"Pmf has {self.tensor.ndim} axes but {len(self.roles)} roles"
            )
        if np.any(self.tensor < 0.0):
            raise NormalizationError("Pmf has negative entries")
        total = float(self.tensor.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise NormalizationError(f"Pmf sums to {total}")

    def axis(self, role: Role) -> int:
        try:
            return self.roles.index(role)
        except ValueError:
            raise RoleError(f"Role {role.name} not in pmf with roles {self.roles}")

    def marginal(self, roles: Iterable[Role]) -> np.ndarray:
        """Marginal tensor with axes in the order given by `roles`"""
        roles = tuple(roles)
        axes = [self.axis(r) for r in roles]
        if len(set(axes)) != len(axes):
            raise RoleError(f"Duplicate roles requested: {roles}")
        drop = tuple(i for i in range(self.tensor.ndim) if i not in axes)
        res = self.tensor.sum(axis=drop) if drop else self.tensor
        kept = [i for i in range(self.tensor.ndim) if i in axes]
        return np.transpose(res, [kept.index(a) for a in axes])

    def entropy(self, roles: Iterable[Role]) -> float:
        """Joint entropy in bits of the given roles"""
        roles = tuple(roles)
        if not roles:
            return 0.0
        return entropy_bits(self.marginal(roles))


def _flat_marginal(joint: Pmf, roles: Sequence[Role]) -> np.ndarray:
    """Marginal over `roles` flattened to a vector"""
    if not roles:
        return np.ones(1)
    return joint.marginal(roles).reshape(-1)


def conditional_mutual_information(
    joint: Pmf,
    a_roles: Iterable[Role],
    b_roles: Iterable[Role],
    c_roles: Iterable[Role] = (),
) -> float:
    """Compute I(A;B|C) in bits by direct summation over the support"""
    a_roles, b_roles, c_roles = tuple(a_roles), tuple(b_roles), tuple(c_roles)
    if not a_roles or not b_roles:
        raise RoleError("Both sides of a mutual information need at least one role")
    all_roles = a_roles + b_roles + c_roles
    if len(set(all_roles)) != len(all_roles):
        raise RoleError(f"Overlapping role sets: {a_roles}, {b_roles}, {c_roles}")
    for role in all_roles:
        joint.axis(role)
    n_a = int(np.prod([joint.tensor.shape[joint.axis(r)] for r in a_roles]))
    n_b = int(np.prod([joint.tensor.shape[joint.axis(r)] for r in b_roles]))
    p_abc = _flat_marginal(joint, all_roles).reshape(n_a, n_b, -1)
    p_ac = p_abc.sum(axis=1, keepdims=True)
    p_bc = p_abc.sum(axis=0, keepdims=True)
    p_c = p_abc.sum(axis=(0, 1), keepdims=True)
    support = p_abc > 0.0
    num = (p_abc * p_c)[support]
    den = np.broadcast_to(p_ac * p_bc, p_abc.shape)[support]
    res = float(np.sum(p_abc[support] * np.log2(num / den)))
    return max(res, 0.0)


def conditional_entropy(
    joint: Pmf, a_roles: Iterable[Role], c_roles: Iterable[Role] = ()
) -> float:
    """Compute H(A|C) in bits"""
    a_roles, c_roles = tuple(a_roles), tuple(c_roles)
    return max(joint.entropy(a_roles + c_roles) - joint.entropy(c_roles), 0.0)


@frozen
class ProblemSpec:
    """A distributed function computation problem

    The pmf is stored as a dense tensor indexed (x, y, z) and the function as a
    tensor of the same shape holding indices into `alphabet_F`.
    """

    alphabet_X: Tuple[str, ...] = field(converter=tuple)

    alphabet_Y: Tuple[str, ...] = field(converter=tuple)

    alphabet_Z: Tuple[str, ...] = field(converter=tuple)

    alphabet_F: Tuple[str, ...] = field(converter=tuple)

    pmf: np.ndarray = field(converter=_readonly, eq=False)
    """Joint probabilities p(x,y,z)"""

    f: np.ndarray = field(converter=_readonly, eq=False)
    """Function values as indices into `alphabet_F`"""

    description: str = ""

    pruned: Tuple[Tuple[str, str], ...] = field(default=(), converter=tuple)
    """(role name, label) of each zero-marginal symbol removed at load time"""

    def __attrs_post_init__(self) -> None:
        shape = (len(self.alphabet_X), len(self.alphabet_Y), len(self.alphabet_Z))
        if 0 in shape or not self.alphabet_F:
            raise SchemaError("Alphabets can not be empty")
        if self.pmf.shape != shape or self.f.shape != shape:
            raise SchemaError(f"Tables must have shape {shape}")
        Pmf(SOURCE_ROLES, self.pmf)

    def alphabet(self, role: Role) -> Tuple[str, ...]:
        if role == Role.X:
            return self.alphabet_X
        elif role == Role.Y:
            return self.alphabet_Y
        elif role == Role.Z:
            return self.alphabet_Z
        raise RoleError(f"Problems have no {role.name} alphabet")

    def joint(self) -> Pmf:
        """The source pmf with roles (X, Y, Z)"""
        return Pmf(SOURCE_ROLES, self.pmf)

    @property
    def z_constant(self) -> bool:
        return len(self.alphabet_Z) == 1

    def swap_sources(self) -> "ProblemSpec":
        """The same problem with the roles of X and Y exchanged"""
        return ProblemSpec(
            self.alphabet_Y,
            self.alphabet_X,
            self.alphabet_Z,
            self.alphabet_F,
            np.transpose(self.pmf, (1, 0, 2)),
            np.transpose(self.f, (1, 0, 2)),
            self.description,
            self.pruned,
        )

    def permuted(self, role: Role, order: Sequence[int]) -> "ProblemSpec":
        """Relabel by reordering the alphabet of `role`"""
        axis = SOURCE_ROLES.index(role)
        alphabets = [list(self.alphabet(r)) for r in SOURCE_ROLES]
        alphabets[axis] = [alphabets[axis][i] for i in order]
        return ProblemSpec(
            alphabets[0],
            alphabets[1],
            alphabets[2],
            self.alphabet_F,
            np.take(self.pmf, order, axis=axis),
            np.take(self.f, order, axis=axis),
            self.description,
            self.pruned,
        )


def _labels(doc: Mapping[str, Any], key: str) -> Tuple[str, ...]:
    if key not in doc:
        raise SchemaError(f"Problem document is missing '{key}'")
    raw = doc[key]
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"'{key}' must be a non-empty list of symbols")
    res = tuple(str(v) for v in raw)
    if len(set(res)) != len(res):
        raise SchemaError(f"'{key}' contains duplicate symbols")
    return res


def _lookup(index: Dict[str, int], entry: Mapping[str, Any], key: str, name: str) -> int:
    if key not in entry:
        raise SchemaError(f"Entry {dict(entry)} in '{name}' is missing '{key}'")
    label = str(entry[key])
    if label not in index:
        raise SchemaError(f"Unknown symbol '{label}' for '{key}' in '{name}'")
    return index[label]


def problem_from_document(
    doc: Mapping[str, Any], description: Optional[str] = None
) -> ProblemSpec:
    """Validate a parsed problem document and build the `ProblemSpec`

    Symbols with zero marginal probability are pruned with a warning.
    """
    labels = {role: _labels(doc, role.name) for role in SOURCE_ROLES}
    f_labels = _labels(doc, "F")
    indices = {role: {l: i for i, l in enumerate(labels[role])} for role in labels}
    f_index = {l: i for i, l in enumerate(f_labels)}
    shape = tuple(len(labels[r]) for r in SOURCE_ROLES)
    for key in ("p", "f"):
        if not isinstance(doc.get(key), list):
            raise SchemaError(f"Problem document needs a list '{key}'")

    pmf = np.zeros(shape)
    seen = set()
    for entry in doc["p"]:
        if not isinstance(entry, Mapping):
            raise SchemaError(f"Invalid 'p' entry: {entry}")
        idx = tuple(
            _lookup(indices[r], entry, r.name.lower(), "p") for r in SOURCE_ROLES
        )
        if idx in seen:
            raise SchemaError(f"Duplicate 'p' entry for {idx}")
        seen.add(idx)
        try:
            prob = float(entry["p"])
        except (KeyError, TypeError, ValueError):
            raise SchemaError(f"Entry {dict(entry)} in 'p' needs a numeric 'p'")
        if not np.isfinite(prob) or prob < 0.0:
            raise SchemaError(f"Invalid probability {prob} in 'p'")
        pmf[idx] = prob
    total = float(pmf.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise NormalizationError(f"Probabilities sum to {total}, not 1")

    f_table = np.full(shape, -1, dtype=np.int64)
    for entry in doc["f"]:
        if not isinstance(entry, Mapping):
            raise SchemaError(f"Invalid 'f' entry: {entry}")
        idx = tuple(
            _lookup(indices[r], entry, r.name.lower(), "f") for r in SOURCE_ROLES
        )
        if f_table[idx] != -1:
            raise SchemaError(f"Duplicate 'f' entry for {idx}")
        f_table[idx] = _lookup(f_index, entry, "v", "f")
    missing = np.argwhere(f_table < 0)
    if len(missing):
        first = tuple(labels[r][i] for r, i in zip(SOURCE_ROLES, missing[0]))
        raise PartialFunctionError(
            f"f is undefined on {len(missing)} triples, first is {first}"
        )

    pruned: List[Tuple[str, str]] = []
    for axis, role in enumerate(SOURCE_ROLES):
        other = tuple(a for a in range(3) if a != axis)
        keep = np.flatnonzero(pmf.sum(axis=other) > 0.0)
        if len(keep) == shape[axis]:
            continue
        dropped = [labels[role][i] for i in range(shape[axis]) if i not in keep]
        log.warning("Pruning zero-probability %s symbols: %s", role.name, dropped)
        pruned.extend((role.name, l) for l in dropped)
        labels[role] = tuple(labels[role][i] for i in keep)
        pmf = np.take(pmf, keep, axis=axis)
        f_table = np.take(f_table, keep, axis=axis)

    if description is None:
        description = str(doc.get("description", ""))
    return ProblemSpec(
        labels[Role.X],
        labels[Role.Y],
        labels[Role.Z],
        f_labels,
        pmf,
        f_table,
        description,
        pruned,
    )


def load_problem(document: Union[Mapping[str, Any], PathInputType]) -> ProblemSpec:
    """Load a problem from a parsed document or a path to a JSON file"""
    if isinstance(document, Mapping):
        return problem_from_document(document)
    path = Path(document)
    try:
        with path.open("r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Problem file {path} is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise SchemaError(f"Problem file {path} must hold a JSON object")
    return problem_from_document(doc)


def problem_to_document(spec: ProblemSpec) -> Dict[str, Any]:
    """Convert a spec back into the problem-file schema

    Only positive probabilities are listed, the function table is listed in full.
    """
    p_entries = []
    f_entries = []
    for x_idx, x in enumerate(spec.alphabet_X):
        for y_idx, y in enumerate(spec.alphabet_Y):
            for z_idx, z in enumerate(spec.alphabet_Z):
                prob = float(spec.pmf[x_idx, y_idx, z_idx])
                if prob > 0.0:
                    p_entries.append({"x": x, "y": y, "z": z, "p": prob})
                f_val = spec.alphabet_F[spec.f[x_idx, y_idx, z_idx]]
                f_entries.append({"x": x, "y": y, "z": z, "v": f_val})
    res: Dict[str, Any] = {
        "X": list(spec.alphabet_X),
        "Y": list(spec.alphabet_Y),
        "Z": list(spec.alphabet_Z),
        "F": list(spec.alphabet_F),
        "p": p_entries,
        "f": f_entries,
    }
    if spec.description:
        res["description"] = spec.description
    return res


def check_conditional_independence(spec: ProblemSpec) -> bool:
    """True iff X and Y are independent given Z"""
    p_z = spec.pmf.sum(axis=(0, 1))
    for z_idx in np.flatnonzero(p_z > 0.0):
        p_xy = spec.pmf[:, :, z_idx] / p_z[z_idx]
        prod = np.outer(p_xy.sum(axis=1), p_xy.sum(axis=0))
        if np.max(np.abs(p_xy - prod)) > INDEPENDENCE_TOL:
            return False
    return True


def check_partially_invertible(spec: ProblemSpec, wrt: Role) -> bool:
    """True iff the `wrt` source is determined by (f, Z) on the support"""
    if wrt == Role.Y:
        return check_partially_invertible(spec.swap_sources(), Role.X)
    if wrt != Role.X:
        raise RoleError(f"Partial invertibility is defined for X or Y, not {wrt.name}")
    for z_idx in range(len(spec.alphabet_Z)):
        owner: Dict[int, int] = {}
        for x_idx, y_idx in np.argwhere(spec.pmf[:, :, z_idx] > 0.0):
            f_val = int(spec.f[x_idx, y_idx, z_idx])
            prev = owner.setdefault(f_val, int(x_idx))
            if prev != x_idx:
                return False
    return True
