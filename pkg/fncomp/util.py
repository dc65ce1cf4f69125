"""Various utility functions"""
from __future__ import annotations
import os, json, logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import (
    Any,
    Callable,
    Dict,
    Generic,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Type,
    TypeVar,
    Union,
)
from typing_extensions import Protocol

import numpy as np
from cattrs.preconf.json import make_converter as make_json_converter


log = logging.getLogger(__name__)


class FncompError(Exception):
    """Base class for all errors raised by this package"""


class ValidationError(FncompError):
    """Base class for errors caused by invalid problems, hypotheses, or inputs"""


class ResourceError(FncompError):
    """Base class for errors caused by exceeding a configured size or budget"""


class SizeError(ResourceError):
    """An alphabet, graph, or grid exceeds the configured cap"""


class BudgetExceeded(ResourceError):
    """An enumeration or task sweep would exceed the configured budget"""


json_serializer = make_json_converter()
"""JSON (de)serializer

Handles most classes automatically, otherwise classes should inherit
`CustomJsonSerializable` and provide the two required methods, which can in turn use
this on sub objects.
"""


class CustomJsonSerializable(Protocol):
    """Base class for objects that need custom JSON (de)serialization"""

    @classmethod
    def from_json_dict(cls, json_dict: Dict[str, Any]) -> "CustomJsonSerializable":
        raise NotImplementedError

    def to_json_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


json_serializer.register_structure_hook(
    CustomJsonSerializable, lambda v, t: t.from_json_dict(v)  # type: ignore
)
json_serializer.register_unstructure_hook(
    CustomJsonSerializable, lambda i: i.to_json_dict()
)


def _flexible_enum_struct(data: Any, cls: Type[Enum]) -> Enum:
    """More flexible Enum structuring hook allows names as well as values"""
    for e in cls:
        if data == e.value:
            return e
    if isinstance(data, str):
        for e in cls:
            if data.upper() == e.name:
                return e
    raise ValueError(f"Unable to convert '{data}' to {cls.__name__}")


json_serializer.register_structure_hook(Enum, _flexible_enum_struct)
json_serializer.register_unstructure_hook(Enum, lambda v: v.name)
json_serializer.register_unstructure_hook(np.ndarray, lambda a: a.tolist())
json_serializer.register_unstructure_hook(np.floating, float)
json_serializer.register_unstructure_hook(np.integer, int)


def dump_json(data: Any) -> str:
    """Deterministic JSON text for reports (sorted keys, no timestamps)"""
    return json.dumps(json_serializer.unstructure(data), indent=2, sort_keys=True)


TC_Type = TypeVar("TC_Type", covariant=True)


class TomlConfigurable(Generic[TC_Type], Protocol):
    """Protocol for objects that are configurable through TOML"""

    @classmethod
    def from_toml_dict(cls, toml_dict: Dict[str, Any]) -> TC_Type:
        return cls(**toml_dict)  # type: ignore

    @classmethod
    def from_toml_val(cls, val: Dict[str, Any]) -> TC_Type:
        return cls.from_toml_dict(val)


PathInputType = Union[str, "os.PathLike[str]"]


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def iter_bits(bits: int) -> Iterator[int]:
    """Generate the indices of set bits, lowest first"""
    idx = 0
    while bits:
        if bits & 1:
            yield idx
        bits >>= 1
        idx += 1


def bits_from(indices: Iterable[int]) -> int:
    res = 0
    for idx in indices:
        res |= 1 << idx
    return res


def subset_key(bits: int) -> Any:
    """Canonical sort key for vertex subsets: size first, then bit pattern"""
    return (popcount(bits), bits)


def format_subset(bits: int, labels: Sequence[str]) -> str:
    """Render a subset as '{a,b}' using vertex labels in alphabet order"""
    return "{" + ",".join(labels[i] for i in iter_bits(bits)) + "}"


THREADS_ENV = "FNCOMP_THREADS"


def thread_count(requested: int = 0) -> int:
    """Number of worker threads, capped by the FNCOMP_THREADS env var

    A `requested` value of zero or less means the CPU count.
    """
    n_threads = requested if requested > 0 else (os.cpu_count() or 1)
    env_val = os.environ.get(THREADS_ENV)
    if env_val:
        try:
            cap = int(env_val)
        except ValueError:
            log.warning("Ignoring invalid %s value: %s", THREADS_ENV, env_val)
        else:
            if cap > 0:
                n_threads = min(n_threads, cap)
    return max(1, n_threads)


T_in = TypeVar("T_in")
T_out = TypeVar("T_out")


def run_tasks(
    func: Callable[[T_in], T_out],
    tasks: Sequence[T_in],
    n_threads: int = 0,
    on_done: Optional[Callable[[T_out], None]] = None,
) -> List[T_out]:
    """Evaluate independent tasks on a thread pool, results in task order

    The optional `on_done` callback is invoked in the calling thread as results
    are collected (in task order), which is where progress reporting hooks in.
    """
    n_threads = thread_count(n_threads)
    results: List[T_out] = []
    if n_threads == 1 or len(tasks) < 2:
        for task in tasks:
            res = func(task)
            if on_done is not None:
                on_done(res)
            results.append(res)
        return results
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        for res in pool.map(func, tasks):
            if on_done is not None:
                on_done(res)
            results.append(res)
    return results
