from pathlib import Path
from typing import Callable, Optional

import pytest
from pytest import fixture, mark

from ..conf import (
    FncompConfig,
    GraphSettings,
    OracleSettings,
    RegionSettings,
    SetSettings,
    Settings,
    SolverSettings,
)
from ..fixtures import load_fixture
from ..model import ProblemSpec


optional_markers = {
    "slow": {
        "help": "Run slow tests",
        "marker-descr": "Mark a test as being slow",
        "skip-reason": "Test only runs with the --{} option.",
    },
}


def pytest_addoption(parser):
    for marker, info in optional_markers.items():
        parser.addoption(
            "--{}".format(marker), action="store_true", default=False, help=info["help"]
        )


def pytest_configure(config):
    for marker, info in optional_markers.items():
        config.addinivalue_line(
            "markers", "{}: {}".format(marker, info["marker-descr"])
        )


def pytest_collection_modifyitems(config, items):
    for marker, info in optional_markers.items():
        if not config.getoption("--{}".format(marker)):
            skip_test = mark.skip(reason=info["skip-reason"].format(marker))
            for item in items:
                if marker in item.keywords:
                    item.add_marker(skip_test)


FAST_LAMBDAS = (0.25, 0.5, 1.0, 2.0, 4.0)
"""Small sweep used by region tests that do not need the full grid"""


def make_settings(
    restarts: int = 4,
    tol: float = 1e-10,
    max_iter: int = 20000,
    dominated_pruning: bool = False,
    threads: int = 1,
    lambda_count: int = 9,
) -> Settings:
    return Settings(
        graphs=GraphSettings(),
        sets=SetSettings(dominated_pruning=dominated_pruning),
        solver=SolverSettings(
            tol=tol, max_iter=max_iter, restarts=restarts, threads=threads
        ),
        regions=RegionSettings(lambda_count=lambda_count),
        oracle=OracleSettings(),
    )


@fixture
def fast_settings() -> Settings:
    return make_settings()


@fixture(scope="session")
def ex1() -> ProblemSpec:
    return load_fixture("ex1")


@fixture(scope="session")
def ex2() -> ProblemSpec:
    return load_fixture("ex2:0.75")


@fixture(scope="session")
def ex3() -> ProblemSpec:
    return load_fixture("ex3")


@fixture(scope="session")
def ex4() -> ProblemSpec:
    return load_fixture("ex4")


@fixture(scope="session")
def inv() -> ProblemSpec:
    return load_fixture("inv")


@fixture
def make_fncomp_config(tmp_path: Path) -> Callable[[Optional[str]], FncompConfig]:
    """Factory for configs backed by a temporary TOML file"""

    def _make(contents: Optional[str] = None) -> FncompConfig:
        path = tmp_path / "fncomp_conf.toml"
        if contents is not None:
            path.write_text(contents)
        return FncompConfig(path)

    return _make


@fixture
def make_config_file(tmp_path: Path) -> Callable[[str], str]:
    def _make(contents: str = "") -> str:
        path = tmp_path / "cli_conf.toml"
        path.write_text(contents)
        return str(path)

    return _make
