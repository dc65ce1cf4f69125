"""Command line interface"""
import csv
import functools
import io
import json
import logging
import os
import signal
import sys
from contextlib import ExitStack
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, cast

import click
from attrs import field, frozen
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress

from ._globals import Role
from .conf import CONF_PATH, FncompConfig, InvalidConfigError, Settings, _default_conf
from .entropy import (
    EntropyObjective,
    conditional_graph_entropy,
    grid_oracle,
    target_graph,
)
from .fixtures import FIXTURE_NAMES, fixture_document, load_fixture
from .graphs import (
    build_char_graph,
    build_joint_char_graph,
    lemma1_hypotheses,
    verify_lemma1_conclusion,
)
from .info import VERSION
from .laws import law_suite
from .model import (
    ProblemSpec,
    check_conditional_independence,
    check_partially_invertible,
    load_problem,
    problem_to_document,
)
from .regions import (
    RateRegion,
    independent_sources_region,
    inner_bound_region,
    korner_marton_region,
    outer_bound_region,
    partially_invertible_region,
    region_compare,
    slepian_wolf_region,
)
from .report import ProgressHookBase, RichProgressHook
from .sets import full_mask, independent_sets, maximal_independent_sets, multisets
from .util import FncompError, ResourceError, ValidationError, dump_json


log = logging.getLogger("fncomp.cli")


# Make sure we get SIGINT regardless of parent process mask
signal.signal(signal.SIGINT, signal.default_int_handler)


def cli_error(msg: str, exit_code: int = 1) -> None:
    """Print msg to stderr and exit with non-zero exit code"""
    click.secho(msg, err=True, fg="red")
    sys.exit(exit_code)


F = TypeVar("F", bound=Callable[..., Any])


def reports_errors(func: F) -> F:
    """Map package errors to exit codes: 1 for invalid input, 2 for exhausted budgets"""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            cli_error(f"{e.__class__.__name__}: {e}", 1)
        except ResourceError as e:
            cli_error(f"{e.__class__.__name__}: {e}", 2)
        except FncompError as e:
            cli_error(f"{e.__class__.__name__}: {e}", 1)

    return cast(F, wrapper)


@frozen
class RunConfig:
    """Everything needed to reproduce a run, embedded in its report"""

    command: str

    problem: str
    """Problem file path, or 'fixture:NAME'"""

    mode: str = ""

    lambdas: Optional[Tuple[float, ...]] = field(
        default=None, converter=lambda v: None if v is None else tuple(v)
    )
    """Explicit sweep directions, None for the configured grid"""

    restarts: Optional[int] = None

    seed: Optional[int] = None

    vertex_cap: Optional[int] = None

    out_format: str = "json"

    settings: Settings = field(factory=Settings)
    """Effective settings after applying the config file and overrides"""


@click.group()
@click.option(
    "--config",
    type=click.Path(dir_okay=False, readable=True, resolve_path=True),
    envvar="FNCOMP_CONFIG_PATH",
    default=CONF_PATH,
    help="Path to TOML config file",
)
@click.option(
    "--log-path",
    type=click.Path(dir_okay=False, readable=True, writable=True, resolve_path=True),
    envvar="FNCOMP_LOG_PATH",
    help="Save logging output to this file",
)
@click.option(
    "--file-log-level",
    type=click.Choice(["DEBUG", "INFO", "WARN", "ERROR"], case_sensitive=False),
    default="INFO",
    help="Log level to use when logging to a file",
)
@click.option(
    "--verbose", "-v", is_flag=True, default=False, help="Print INFO log messages"
)
@click.option("--debug", is_flag=True, default=False, help="Print DEBUG log messages")
@click.option(
    "--quiet", is_flag=True, default=False, help="Hide WARNING and below log messages"
)
@click.pass_context
def cli(
    ctx: click.Context,
    config: str,
    log_path: Optional[str],
    file_log_level: str,
    verbose: bool,
    debug: bool,
    quiet: bool,
) -> None:
    """Rate regions for distributed computation of a function of two sources"""
    if quiet:
        if verbose or debug:
            cli_error("Can't mix --quiet with --verbose/--debug")

    # Create Rich Console outputing to stderr for logging / progress bars
    rich_con = Console(stderr=True)

    # Setup logging
    LOG_FORMAT = "%(asctime)s %(levelname)s %(threadName)s %(name)s %(message)s"
    def_formatter = logging.Formatter(LOG_FORMAT)
    root_logger = logging.getLogger("")
    root_logger.setLevel(logging.DEBUG)
    stream_formatter = logging.Formatter("%(threadName)s %(name)s %(message)s")
    stream_handler = RichHandler(console=rich_con, enable_link_path=False)
    stream_handler.setFormatter(stream_formatter)
    if debug:
        stream_handler.setLevel(logging.DEBUG)
    elif verbose:
        stream_handler.setLevel(logging.INFO)
    elif quiet:
        stream_handler.setLevel(logging.ERROR)
    else:
        stream_handler.setLevel(logging.WARN)
    root_logger.addHandler(stream_handler)
    if log_path is not None:
        file_handler = logging.FileHandler(log_path)
        file_handler.setFormatter(def_formatter)
        file_handler.setLevel(getattr(logging, file_log_level.upper()))
        root_logger.addHandler(file_handler)

    # Create global param dict for subcommands to use
    ctx.obj = {}
    ctx.obj["config_path"] = config
    try:
        ctx.obj["config"] = FncompConfig(config)
    except InvalidConfigError as e:
        cli_error(str(e))
    ctx.obj["rich_con"] = rich_con


def problem_options(func: F) -> F:
    """Add the --problem / --fixture pair every analysis command takes"""
    func = click.option(
        "--fixture",
        help=f"Use a bundled problem ({', '.join(FIXTURE_NAMES)})",
    )(func)
    func = click.option(
        "--problem",
        "-p",
        type=click.Path(exists=True, dir_okay=False, readable=True),
        help="Path to a JSON problem document",
    )(func)
    return func


def output_options(func: F) -> F:
    func = click.option(
        "--out-format",
        type=click.Choice(["json", "csv"], case_sensitive=False),
        default="json",
        help="Output format, csv is only available for regions",
    )(func)
    func = click.option(
        "--out",
        "-o",
        type=click.Path(dir_okay=False, writable=True),
        help="Write the report here instead of stdout",
    )(func)
    return func


def solve_options(func: F) -> F:
    """Solver overrides for commands that run restarts"""
    func = click.option("--seed", type=int, help="Seed for random restarts")(func)
    func = click.option("--restarts", type=int, help="Random restarts per solve")(func)
    func = click.option("--vertex-cap", type=int, help="Largest graph allowed")(func)
    return func


def sweep_options(func: F) -> F:
    """Solver overrides shared by commands that run sweeps"""
    func = click.option("--no-progress", is_flag=True, help="Don't display progress bars")(
        func
    )
    func = click.option(
        "--lambdas", help="Comma separated sweep directions, overrides the config grid"
    )(func)
    return solve_options(func)


def _load(problem: Optional[str], fixture: Optional[str]) -> Tuple[ProblemSpec, str]:
    if (problem is None) == (fixture is None):
        raise click.UsageError("Give exactly one of --problem or --fixture")
    if fixture is not None:
        return load_fixture(fixture), f"fixture:{fixture}"
    assert problem is not None
    return load_problem(problem), problem


def _parse_roles(val: str) -> Tuple[Role, ...]:
    res = []
    for part in val.replace(",", " ").split():
        try:
            res.append(Role[part.strip().upper()])
        except KeyError:
            raise click.BadParameter(f"Unknown role '{part}'")
    return tuple(res)


def _parse_target(val: str) -> Any:
    roles = _parse_roles(val) if "," in val else _parse_roles(" ".join(val))
    if len(roles) == 1:
        return roles[0]
    return roles


def _parse_lambdas(val: Optional[str]) -> Optional[Tuple[float, ...]]:
    if val is None:
        return None
    try:
        return tuple(float(v) for v in val.split(",") if v.strip())
    except ValueError:
        raise click.BadParameter(f"Invalid lambda list '{val}'")


def _settings(
    params: Dict[str, Any],
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    vertex_cap: Optional[int] = None,
) -> Settings:
    config: FncompConfig = params["config"]
    config.override("solver", restarts=restarts, seed=seed)
    config.override("graphs", vertex_cap=vertex_cap)
    return config.settings


def _emit(
    data: Any,
    out: Optional[str],
    out_format: str = "json",
    region: Optional[RateRegion] = None,
) -> None:
    if out_format.lower() == "csv":
        if region is None:
            raise click.UsageError("CSV output is only available for regions")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "R_X", "R_Y", "mode", "candidate_id"])
        writer.writerows(region.csv_rows())
        text = buf.getvalue()
    else:
        text = dump_json(data) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _report(run_conf: RunConfig, result: Any) -> Dict[str, Any]:
    return {"config": run_conf, "result": result}


@click.command()
@click.pass_obj
def version(params: Dict[str, Any]) -> None:
    """Print the version and exit"""
    click.echo(VERSION)


@click.command()
@click.pass_obj
@click.option("--show", is_flag=True, help="Just print the current config contents")
@click.option(
    "--show-default", is_flag=True, help="Just print the default config contents"
)
@click.option("--path", is_flag=True, help="Just print the current config path")
def conf(params: Dict[str, Any], show: bool, show_default: bool, path: bool) -> None:
    """Open the config file with your $EDITOR"""
    config_path = params["config_path"]
    if path:
        click.echo(config_path)
    if show:
        if os.path.exists(config_path):
            with open(config_path, "r") as f:
                click.echo(f.read())
        else:
            click.echo(_default_conf)
    if show_default:
        click.echo(_default_conf)
    if path or show or show_default:
        return
    FncompConfig(config_path, create_if_missing=True)
    err = False
    while True:
        click.edit(filename=config_path)
        try:
            FncompConfig(config_path)
        except InvalidConfigError as e:
            err = True
            click.echo("The config file contains an error: %s" % e)
            click.echo("The editor will be reopened so you can correct the error")
            click.pause()
        else:
            if err:
                click.echo("Config file is now valid")
            break


@click.command()
@click.pass_obj
@click.argument("name")
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True))
@reports_errors
def fixture(params: Dict[str, Any], name: str, out: Optional[str]) -> None:
    """Write the problem document of a bundled fixture"""
    _emit(fixture_document(name), out)


@click.command()
@click.pass_obj
@problem_options
@click.option(
    "--normalize", is_flag=True, help="Print the normalized problem document instead"
)
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True))
@reports_errors
def validate(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    normalize: bool,
    out: Optional[str],
) -> None:
    """Validate a problem document and summarize its structure"""
    spec, source = _load(problem, fixture)
    if normalize:
        _emit(problem_to_document(spec), out)
        return
    cap = params["config"].graphs.vertex_cap
    summary = {
        "problem": source,
        "alphabets": {
            r.name: list(spec.alphabet(r)) for r in (Role.X, Role.Y, Role.Z)
        },
        "function_values": list(spec.alphabet_F),
        "pruned": [list(p) for p in spec.pruned],
        "cond_independent": check_conditional_independence(spec),
        "partially_invertible": {
            r.name: check_partially_invertible(spec, r) for r in (Role.X, Role.Y)
        },
        "reduction_hypotheses": lemma1_hypotheses(spec, cap),
    }
    _emit(summary, out)


@click.command()
@click.pass_obj
@problem_options
@click.option("--target", default="X", help="Target role: X, Y or XY")
@click.option("--given", default="Y,Z", help="Comma separated conditioning roles")
@click.option(
    "--reduction",
    is_flag=True,
    help="Compare G_{Y|V,Z} with G_{Y|X,Z} for every admissible V membership",
)
@click.option("--vertex-cap", type=int, help="Largest graph allowed")
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True))
@reports_errors
def graph(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    target: str,
    given: str,
    reduction: bool,
    vertex_cap: Optional[int],
    out: Optional[str],
) -> None:
    """Print a characteristic graph"""
    spec, source = _load(problem, fixture)
    settings = _settings(params, vertex_cap=vertex_cap)
    cap = settings.graphs.vertex_cap
    run_conf = RunConfig("graph", source, vertex_cap=vertex_cap, settings=settings)
    if reduction:
        report = verify_lemma1_conclusion(spec, settings.sets.enumeration_budget, cap)
        _emit(_report(run_conf, report), out)
        return
    target_val = _parse_target(target)
    if isinstance(target_val, Role):
        res = build_char_graph(spec, target_val, _parse_roles(given), cap)
    else:
        res = build_joint_char_graph(spec, cap)
    _emit(_report(run_conf, res.to_json_dict()), out)


@click.command()
@click.pass_obj
@problem_options
@click.option("--target", default="X", help="Target role: X, Y or XY")
@click.option("--given", default="Y,Z", help="Comma separated conditioning roles")
@click.option("--maximal", "family", flag_value="maximal", default=True)
@click.option("--all", "family", flag_value="all")
@click.option(
    "--multisets", type=int, help="List covering multisets with this total cardinality"
)
@click.option(
    "--dominated/--no-dominated",
    default=None,
    help="Prune multisets using dominated subsets",
)
@click.option("--vertex-cap", type=int, help="Largest graph allowed")
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True))
@reports_errors
def sets(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    target: str,
    given: str,
    family: str,
    multisets: Optional[int],
    dominated: Optional[bool],
    vertex_cap: Optional[int],
    out: Optional[str],
) -> None:
    """List independent sets, maximal independent sets or covering multisets"""
    spec, source = _load(problem, fixture)
    params["config"].override("sets", dominated_pruning=dominated)
    settings = _settings(params, vertex_cap=vertex_cap)
    cap = settings.graphs.vertex_cap
    budget = settings.sets.enumeration_budget
    g = target_graph(spec, _parse_target(target), _parse_roles(given), cap)
    mode = family if multisets is None else f"multiset:{multisets}"
    result: Dict[str, Any] = {"graph": g.provenance}
    if multisets is not None:
        result["multisets"] = [
            m.to_strings()
            for m in _enumerate_multisets(g, multisets, settings)
        ]
    elif family == "maximal":
        result["family"] = maximal_independent_sets(g, cap).to_strings()
    else:
        result["family"] = independent_sets(g, cap, budget).to_strings()
    run_conf = RunConfig("sets", source, mode, vertex_cap=vertex_cap, settings=settings)
    _emit(_report(run_conf, result), out)


def _enumerate_multisets(g: Any, total: int, settings: Settings) -> List[Any]:
    cap = settings.graphs.vertex_cap
    budget = settings.sets.enumeration_budget
    return list(
        multisets(
            independent_sets(g, cap, budget),
            total,
            full_mask(g.n),
            dominated=settings.sets.dominated_pruning,
            budget=budget,
        )
    )


@click.command()
@click.pass_obj
@problem_options
@click.option("--target", default="X", help="Target role: X, Y or XY")
@click.option("--given", default="Y,Z", help="Comma separated conditioning roles")
@click.option(
    "--family",
    default="maximal",
    help="Family mode: maximal, all, multiset or multiset:K",
)
@click.option(
    "--oracle",
    type=int,
    help="Also run the grid oracle at this resolution on the optimal membership",
)
@click.option("--seed", type=int, help="Seed for random restarts")
@click.option("--restarts", type=int, help="Random restarts per candidate")
@click.option("--vertex-cap", type=int, help="Largest graph allowed")
@output_options
@reports_errors
def entropy(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    target: str,
    given: str,
    family: str,
    oracle: Optional[int],
    vertex_cap: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    out: Optional[str],
    out_format: str,
) -> None:
    """Compute a conditional graph entropy, in bits"""
    spec, source = _load(problem, fixture)
    settings = _settings(params, restarts, seed, vertex_cap)
    target_val = _parse_target(target)
    given_roles = _parse_roles(given)
    res = conditional_graph_entropy(
        spec,
        target_val,
        given_roles,
        family,
        settings,
        restarts=settings.solver.restarts if restarts is not None else 1,
    )
    result: Dict[str, Any] = {"solve": res}
    if oracle is not None:
        objective = EntropyObjective.from_spec(spec, target_val, given_roles)
        orc = grid_oracle(
            objective, [res.channels[0].membership], oracle, settings.oracle.max_points
        )
        result["oracle"] = {"value": orc.value, "gap": orc.gap, "n_points": orc.n_points}
    run_conf = RunConfig(
        "entropy",
        source,
        family,
        None,
        restarts,
        seed,
        vertex_cap,
        out_format,
        settings,
    )
    _emit(_report(run_conf, result), out, out_format)


def _progress(
    params: Dict[str, Any], no_progress: bool, estack: ExitStack
) -> Optional[ProgressHookBase[Any]]:
    if no_progress or not sys.stderr.isatty():
        return None
    return RichProgressHook(
        estack.enter_context(Progress(console=params["rich_con"], transient=True))
    )


REGION_SELECTORS = ("inner", "outer", "independent", "partial", "sw", "km")


def _build_region(
    spec: ProblemSpec,
    selector: str,
    settings: Settings,
    lambdas: Optional[Sequence[float]],
    prog_hook: Optional[ProgressHookBase[Any]] = None,
    kv: Optional[int] = None,
    kw: Optional[int] = None,
) -> RateRegion:
    """Evaluate a selector such as 'inner:multiset', 'partial:Y' or 'km'"""
    base, _, param = selector.partition(":")
    if base == "inner":
        return inner_bound_region(
            spec, param or "maximal", lambdas, settings, kv, kw, prog_hook
        )
    if base == "partial":
        if param.upper() not in ("", "X", "Y"):
            raise click.BadParameter(f"Selector 'partial' takes X or Y, not '{param}'")
        wrt = Role[param.upper()] if param else Role.X
        return partially_invertible_region(spec, wrt, kv, lambdas, settings, prog_hook)
    if param:
        raise click.BadParameter(f"Selector '{base}' takes no parameter")
    if base == "outer":
        return outer_bound_region(spec, settings)
    if base == "independent":
        return independent_sources_region(spec, settings)
    if base == "sw":
        return slepian_wolf_region(spec)
    if base == "km":
        return korner_marton_region(spec)
    raise click.BadParameter(
        f"Unknown region '{selector}', expected one of {', '.join(REGION_SELECTORS)}"
    )


def _run_region(
    params: Dict[str, Any],
    command: str,
    selector: str,
    problem: Optional[str],
    fixture: Optional[str],
    vertex_cap: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    lambdas: Optional[str],
    no_progress: bool,
    out: Optional[str],
    out_format: str,
    kv: Optional[int] = None,
    kw: Optional[int] = None,
) -> None:
    spec, source = _load(problem, fixture)
    settings = _settings(params, restarts, seed, vertex_cap)
    lams = _parse_lambdas(lambdas)
    with ExitStack() as estack:
        prog_hook = _progress(params, no_progress, estack)
        region = _build_region(spec, selector, settings, lams, prog_hook, kv, kw)
    run_conf = RunConfig(
        command, source, selector, lams, restarts, seed, vertex_cap, out_format, settings
    )
    _emit(_report(run_conf, region), out, out_format, region)


@click.command()
@click.pass_obj
@problem_options
@click.option(
    "--mode",
    type=click.Choice(["maximal", "all", "multiset"]),
    default="maximal",
    help="Family the V and W memberships range over",
)
@click.option("--kv", type=int, help="Total cardinality of V multisets")
@click.option("--kw", type=int, help="Total cardinality of W multisets")
@sweep_options
@output_options
@reports_errors
def inner(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    mode: str,
    kv: Optional[int],
    kw: Optional[int],
    vertex_cap: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    lambdas: Optional[str],
    no_progress: bool,
    out: Optional[str],
    out_format: str,
) -> None:
    """Compute the achievable (inner bound) region"""
    _run_region(
        params, "inner", f"inner:{mode}", problem, fixture, vertex_cap, restarts,
        seed, lambdas, no_progress, out, out_format, kv, kw,
    )


@click.command()
@click.pass_obj
@problem_options
@solve_options
@output_options
@reports_errors
def outer(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    vertex_cap: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    out: Optional[str],
    out_format: str,
) -> None:
    """Compute the graph entropy outer bound"""
    _run_region(
        params, "outer", "outer", problem, fixture, vertex_cap, restarts, seed,
        None, True, out, out_format,
    )


@click.command()
@click.pass_obj
@problem_options
@click.option("--inner", "selector", flag_value="inner", help="Inner bound")
@click.option("--outer", "selector", flag_value="outer", help="Outer bound")
@click.option(
    "--independent",
    "selector",
    flag_value="independent",
    help="Exact region for conditionally independent sources",
)
@click.option(
    "--partial",
    "selector",
    flag_value="partial",
    help="Exact region for a partially invertible function",
)
@click.option("--sw", "selector", flag_value="sw", help="Slepian-Wolf region")
@click.option("--km", "selector", flag_value="km", help="Korner-Marton region")
@click.option(
    "--mode",
    type=click.Choice(["maximal", "all", "multiset"]),
    default="maximal",
    help="Family mode for --inner",
)
@click.option(
    "--wrt",
    type=click.Choice(["X", "Y"], case_sensitive=False),
    default="X",
    help="Source the function is invertible with respect to, for --partial",
)
@click.option("--k", "k_val", type=int, help="Multiset cardinality for --partial")
@sweep_options
@output_options
@reports_errors
def region(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    selector: Optional[str],
    mode: str,
    wrt: str,
    k_val: Optional[int],
    vertex_cap: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    lambdas: Optional[str],
    no_progress: bool,
    out: Optional[str],
    out_format: str,
) -> None:
    """Compute one of the rate regions"""
    if selector is None:
        raise click.UsageError(
            "Select a region with one of --inner/--outer/--independent/--partial/--sw/--km"
        )
    if selector == "inner":
        selector = f"inner:{mode}"
    elif selector == "partial":
        selector = f"partial:{wrt.upper()}"
    _run_region(
        params, "region", selector, problem, fixture, vertex_cap, restarts, seed,
        lambdas, no_progress, out, out_format, k_val,
    )


def _load_region(
    arg: str,
    spec: Optional[ProblemSpec],
    settings: Settings,
    lambdas: Optional[Sequence[float]],
    prog_hook: Optional[ProgressHookBase[Any]] = None,
) -> RateRegion:
    if os.path.isfile(arg):
        with open(arg, "r", encoding="utf-8") as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise ValidationError(f"Region dump {arg} is not valid JSON: {e}")
        if isinstance(doc, dict) and "result" in doc:
            doc = doc["result"]
        return RateRegion.from_json_dict(doc)
    if spec is None:
        raise click.UsageError(f"'{arg}' is not a file, selectors need a problem")
    return _build_region(spec, arg, settings, lambdas, prog_hook)


@click.command()
@click.pass_obj
@click.argument("left")
@click.argument("right")
@problem_options
@click.option("--directions", type=int, help="Number of directions in the fan")
@click.option("--tol", type=float, help="Containment tolerance")
@sweep_options
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True))
@reports_errors
def compare(
    params: Dict[str, Any],
    left: str,
    right: str,
    problem: Optional[str],
    fixture: Optional[str],
    directions: Optional[int],
    tol: Optional[float],
    vertex_cap: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    lambdas: Optional[str],
    no_progress: bool,
    out: Optional[str],
) -> None:
    """Compare two regions, each a JSON dump or a selector like 'inner:all'"""
    spec: Optional[ProblemSpec] = None
    source = ""
    if problem is not None or fixture is not None:
        spec, source = _load(problem, fixture)
    params["config"].override("regions", directions=directions, strict_gap=tol)
    settings = _settings(params, restarts, seed, vertex_cap)
    lams = _parse_lambdas(lambdas)
    with ExitStack() as estack:
        prog_hook = _progress(params, no_progress, estack)
        region_a = _load_region(left, spec, settings, lams, prog_hook)
        region_b = _load_region(right, spec, settings, lams, prog_hook)
    res = region_compare(
        region_a, region_b, settings.regions.directions, settings.regions.strict_gap
    )
    run_conf = RunConfig(
        "compare", source, f"{left} vs {right}", lams, restarts, seed, vertex_cap,
        "json", settings,
    )
    _emit(_report(run_conf, res), out)


@click.command()
@click.pass_obj
@problem_options
@click.option("--seeds", type=int, default=200, help="Number of random witnesses")
@click.option("--seed", type=int, default=0, help="Base seed for the witnesses")
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True))
@reports_errors
def laws(
    params: Dict[str, Any],
    problem: Optional[str],
    fixture: Optional[str],
    seeds: int,
    seed: int,
    out: Optional[str],
) -> None:
    """Check the zero-error equivalences on seeded random witnesses"""
    spec, source = _load(problem, fixture)
    settings = params["config"].settings
    report = law_suite(spec, seeds, seed, settings, fixture or source)
    run_conf = RunConfig("laws", source, seed=seed, settings=settings)
    _emit(_report(run_conf, {"passed": report.passed, "suite": report}), out)
    if not report.passed:
        cli_error("Law suite failed", 1)


# Add our subcommands ot the CLI
cli.add_command(version)
cli.add_command(conf)
cli.add_command(fixture)
cli.add_command(validate)
cli.add_command(graph)
cli.add_command(sets)
cli.add_command(entropy)
cli.add_command(inner)
cli.add_command(outer)
cli.add_command(region)
cli.add_command(compare)
cli.add_command(laws)


# Entry point
if __name__ == "__main__":
    cli()
