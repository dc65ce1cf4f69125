# Config parsing
import os
from pathlib import Path
import logging
from typing import Any, Dict, MutableMapping, Tuple

import numpy as np
import toml
import click
from attrs import frozen, field, evolve

from .util import TomlConfigurable, PathInputType, ValidationError


log = logging.getLogger(__name__)


class InvalidConfigError(ValidationError):
    """Raised if invalid configuration is detected"""


_default_conf = """
########################################################
## Basic Configuration
########################################################

## Every setting below shows its built-in default. Uncomment and
## edit to override. Command line flags take precedence.

#[graphs]
#
#  # Largest vertex count allowed for any graph, product graphs
#  # included
#  vertex_cap = 64

#[solver]
#
#  # Relative objective change that counts as converged
#  tol = 1e-9
#
#  # Hard cap on exponentiated-gradient iterations per solve
#  max_iter = 100000
#
#  # Iterations spent on one block before switching blocks in
#  # the scalarized (two channel) problems
#  block_iter = 200
#
#  # Smallest entry of a freshly initialized channel row
#  init_floor = 1e-6
#
#  # Random restarts for the non-convex scalarized problems
#  restarts = 32
#
#  # Restart r draws its initial channels from seed (seed, r)
#  seed = 0
#
#  # Raise instead of flagging when a solve does not converge
#  strict = false
#
#  # Worker threads, 0 means the CPU count (FNCOMP_THREADS caps it)
#  threads = 0


##############################################################
## Advanced Configuration
##############################################################

#[sets]
#
#  # Replace subsets that are strictly contained in another family
#  # member by the larger one. Not provably loss-free in general.
#  dominated_pruning = false
#
#  # Most candidates any single enumeration may produce
#  enumeration_budget = 100000

#[regions]
#
#  # The default sweep uses lambda_count log-spaced values in
#  # [lambda_min, lambda_max], plus lambda = 1
#  lambda_min = 0.03125
#  lambda_max = 32.0
#  lambda_count = 64
#
#  # Support function gap that counts as a strict inclusion
#  strict_gap = 1e-3
#
#  # Number of directions in the comparison fan
#  directions = 181
#
#  # Most (candidate, lambda, restart) solves a sweep may run
#  task_budget = 2000000

#[oracle]
#
#  # Most channel grid points the brute-force oracle may visit
#  max_points = 10000000
"""


CONF_PATH = os.environ.get(
    "FNCOMP_CONFIG_PATH",
    os.path.join(click.get_app_dir("fncomp"), "fncomp_conf.toml"),
)


@frozen
class GraphSettings(TomlConfigurable["GraphSettings"]):
    vertex_cap: int = field(default=64, converter=int)
    """Largest vertex count allowed for any graph"""


@frozen
class SetSettings(TomlConfigurable["SetSettings"]):
    dominated_pruning: bool = False
    """Drop family members strictly contained in another member"""

    enumeration_budget: int = field(default=100000, converter=int)
    """Most candidates a single enumeration may produce"""


@frozen
class SolverSettings(TomlConfigurable["SolverSettings"]):
    tol: float = field(default=1e-9, converter=float)
    """Relative objective change that counts as converged"""

    max_iter: int = field(default=100000, converter=int)
    """Cap on total exponentiated-gradient iterations per solve"""

    block_iter: int = field(default=200, converter=int)
    """Iterations per block before alternating in block-coordinate descent"""

    init_floor: float = field(default=1e-6, converter=float)
    """Smallest initial channel entry before renormalization"""

    restarts: int = field(default=32, converter=int)
    """Restarts for the non-convex scalarized problems"""

    seed: int = field(default=0, converter=int)
    """Base seed, restart `r` uses the seed sequence (seed, r)"""

    strict: bool = False
    """Raise `NonConvergence` instead of flagging the result"""

    threads: int = field(default=0, converter=int)
    """Worker threads, zero or less means the CPU count"""

    def with_restarts(self, restarts: int) -> "SolverSettings":
        return evolve(self, restarts=restarts)


def log_spaced_lambdas(lam_min: float, lam_max: float, count: int) -> Tuple[float, ...]:
    """Sorted sweep of `count` log-spaced directions plus lambda = 1"""
    if lam_min <= 0.0 or lam_max < lam_min:
        raise InvalidConfigError(f"Invalid lambda range: [{lam_min}, {lam_max}]")
    vals = set(float(v) for v in np.geomspace(lam_min, lam_max, count))
    vals.add(1.0)
    return tuple(sorted(vals))


@frozen
class RegionSettings(TomlConfigurable["RegionSettings"]):
    lambda_min: float = field(default=1.0 / 32, converter=float)

    lambda_max: float = field(default=32.0, converter=float)

    lambda_count: int = field(default=64, converter=int)

    strict_gap: float = field(default=1e-3, converter=float)
    """Support function gap that counts as a strict inclusion"""

    directions: int = field(default=181, converter=int)
    """Size of the direction fan used when comparing regions"""

    task_budget: int = field(default=2000000, converter=int)
    """Most (candidate, lambda, restart) solves a single sweep may run"""

    def lambda_grid(self) -> Tuple[float, ...]:
        return log_spaced_lambdas(self.lambda_min, self.lambda_max, self.lambda_count)


@frozen
class OracleSettings(TomlConfigurable["OracleSettings"]):
    max_points: int = field(default=10000000, converter=int)
    """Most channel grid points the brute-force oracle may visit"""


@frozen
class Settings:
    """Every config section, as passed down to library calls"""

    graphs: GraphSettings = field(factory=GraphSettings)

    sets: SetSettings = field(factory=SetSettings)

    solver: SolverSettings = field(factory=SolverSettings)

    regions: RegionSettings = field(factory=RegionSettings)

    oracle: OracleSettings = field(factory=OracleSettings)

    def with_restarts(self, restarts: int) -> "Settings":
        return evolve(self, solver=self.solver.with_restarts(restarts))


_sections: Dict[str, Any] = {
    "graphs": GraphSettings,
    "sets": SetSettings,
    "solver": SolverSettings,
    "regions": RegionSettings,
    "oracle": OracleSettings,
}
"""Map TOML section names to the settings classes they configure"""


class FncompConfig:
    """Capture config and support mixing with external (eg. CLI) options

    A missing config file just means every section takes its defaults.
    """

    def __init__(
        self, config_path: PathInputType = CONF_PATH, create_if_missing: bool = False
    ):
        self._config_path = Path(config_path)
        if not self._config_path.exists():
            if create_if_missing:
                config_dir = self._config_path.parent
                config_dir.mkdir(parents=True, exist_ok=True)
                with self._config_path.open("w") as f:
                    f.write(_default_conf)
            conf_str = _default_conf
        else:
            with self._config_path.open("r") as f:
                conf_str = f.read()
        try:
            self._raw_conf: MutableMapping[str, Any] = toml.loads(conf_str)
        except toml.TomlDecodeError as e:
            raise InvalidConfigError(f"Error parsing {self._config_path}: {e}")
        unknown = set(self._raw_conf) - set(_sections)
        if unknown:
            raise InvalidConfigError(f"Unknown config sections: {sorted(unknown)}")
        self._settings: Dict[str, Any] = {}
        for name, settings_cls in _sections.items():
            raw_section = self._raw_conf.get(name, {})
            try:
                self._settings[name] = settings_cls.from_toml_dict(raw_section)
            except (TypeError, ValueError) as e:
                raise InvalidConfigError(f"Error parsing '{name}' section: {e}")
            log.debug("Config section %s: %s", name, self._settings[name])

    @property
    def config_path(self) -> Path:
        return self._config_path

    @property
    def graphs(self) -> GraphSettings:
        return self._settings["graphs"]  # type: ignore

    @property
    def sets(self) -> SetSettings:
        return self._settings["sets"]  # type: ignore

    @property
    def solver(self) -> SolverSettings:
        return self._settings["solver"]  # type: ignore

    @property
    def regions(self) -> RegionSettings:
        return self._settings["regions"]  # type: ignore

    @property
    def oracle(self) -> OracleSettings:
        return self._settings["oracle"]  # type: ignore

    def override(self, section: str, **kwargs: Any) -> None:
        """Replace settings in `section` with any non-None `kwargs`"""
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        if not kwargs:
            return
        try:
            self._settings[section] = evolve(self._settings[section], **kwargs)
        except (TypeError, ValueError) as e:
            raise InvalidConfigError(f"Invalid override for '{section}': {e}")

    @property
    def settings(self) -> Settings:
        return Settings(**self._settings)
