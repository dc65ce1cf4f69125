"""Bundled problem documents for the worked examples

Each fixture is generated as a problem-file document from exact tables, so it can be
written out with `fncomp fixture NAME` and loaded like any other problem file.
"""
from __future__ import annotations
from fractions import Fraction
from typing import Any, Callable, Dict, List

from .model import ProblemSpec, SchemaError, problem_from_document


EX4_MATRIX = (
    (0.21, 0.03, 0.12),
    (0.06, 0.15, 0.16),
    (0.03, 0.12, 0.12),
)
"""p(x,y) for the partially invertible example, rows indexed by x"""


def _document(
    xs: List[Any],
    ys: List[Any],
    zs: List[Any],
    prob: Callable[[Any, Any, Any], float],
    func: Callable[[Any, Any, Any], Any],
    description: str,
) -> Dict[str, Any]:
    p_entries = []
    f_entries = []
    f_vals: List[str] = []
    for x in xs:
        for y in ys:
            for z in zs:
                p_val = prob(x, y, z)
                if p_val > 0.0:
                    p_entries.append({"x": x, "y": y, "z": z, "p": p_val})
                v = str(func(x, y, z))
                if v not in f_vals:
                    f_vals.append(v)
                f_entries.append({"x": x, "y": y, "z": z, "v": v})
    return {
        "description": description,
        "X": xs,
        "Y": ys,
        "Z": zs,
        "F": sorted(f_vals),
        "p": p_entries,
        "f": f_entries,
    }


def ex1_document() -> Dict[str, Any]:
    """Order comparison with uniform off-diagonal sources on {1,2,3,4}"""
    vals = [1, 2, 3, 4]
    return _document(
        vals,
        vals,
        ["*"],
        lambda x, y, z: 1.0 / 12 if x != y else 0.0,
        lambda x, y, z: 1 if x > y else 0,
        "ex1: X,Y uniform over distinct pairs of {1,2,3,4}, f = [x > y]",
    )


def ex2_document(p: float) -> Dict[str, Any]:
    """Modulo-2 sum of symmetric binary sources, p(x=y) = p"""
    if not 0.0 <= p <= 1.0:
        raise SchemaError(f"ex2 needs a parameter in [0, 1], got {p}")
    return _document(
        [0, 1],
        [0, 1],
        ["*"],
        lambda x, y, z: p / 2 if x == y else (1.0 - p) / 2,
        lambda x, y, z: (x + y) % 2,
        f"ex2:{p}: binary X,Y with p(x,y) = {p}/2 on the diagonal, f = x + y mod 2",
    )


def ex3_document() -> Dict[str, Any]:
    """Equality test of two noisy copies of a side information symbol"""
    cell = float(Fraction(1, 27))

    def prob(x: int, y: int, z: int) -> float:
        return cell if (x - z) in (-1, 0, 1) and (y - z) in (0, 1, 2) else 0.0

    return _document(
        [0, 1, 2, 3, 4],
        [1, 2, 3, 4, 5],
        [1, 2, 3],
        prob,
        lambda x, y, z: 1 if x == y else 0,
        "ex3: X = Z + U, Y = Z + V, U ~ {-1,0,1}, V ~ {0,1,2}, f = [x == y]; "
        "Z is assumed uniform on {1,2,3}",
    )


def ex4_document() -> Dict[str, Any]:
    """f = (-1)^y * x, partially invertible with respect to X"""
    vals = [0, 1, 2]
    return _document(
        vals,
        vals,
        ["*"],
        lambda x, y, z: EX4_MATRIX[x][y],
        lambda x, y, z: (-1) ** y * x,
        "ex4: f = (-1)^y * x on {0,1,2}^2 with the tabulated p(x,y)",
    )


def inv_document() -> Dict[str, Any]:
    """Invertible function on the ex4 source, so the region is Slepian-Wolf"""
    vals = [0, 1, 2]
    return _document(
        vals,
        vals,
        ["*"],
        lambda x, y, z: EX4_MATRIX[x][y],
        lambda x, y, z: f"{x}{y}",
        "inv: f = (x, y) on the ex4 source",
    )


_fixtures: Dict[str, Callable[[], Dict[str, Any]]] = {
    "ex1": ex1_document,
    "ex3": ex3_document,
    "ex4": ex4_document,
    "inv": inv_document,
}


FIXTURE_NAMES = ("ex1", "ex2:p", "ex3", "ex4", "inv")


def fixture_document(name: str) -> Dict[str, Any]:
    """Problem document for a fixture name such as 'ex3' or 'ex2:0.75'"""
    base, _, param = name.partition(":")
    if base == "ex2":
        try:
            p = float(param) if param else 0.75
        except ValueError:
            raise SchemaError(f"Invalid ex2 parameter: {param}")
        return ex2_document(p)
    if base not in _fixtures or param:
        raise SchemaError(
            f"Unknown fixture '{name}', expected one of {', '.join(FIXTURE_NAMES)}"
        )
    return _fixtures[base]()


def load_fixture(name: str) -> ProblemSpec:
    return problem_from_document(fixture_document(name))
