"""Progress hooks and the convergence report for solver sweeps

A region sweep runs a batch of independent (candidate, lambda, restart) solves. A solve
that hits the iteration cap does not invalidate the sweep, so the report only counts
those and summarizes them once the sweep is done.
"""
import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Generic, List, Optional, Tuple, TypeVar

import rich.progress


log = logging.getLogger(__name__)


@dataclass
class SweepTask:
    description: str

    total: Optional[int]

    start_time: datetime

    min_seconds: float

    n_unconverged: int = 0

    visible: bool = field(default=False, repr=False)


T = TypeVar("T", bound=SweepTask)


class ProgressHookBase(Generic[T]):
    """Receives progress updates from a `SweepReport`"""

    def_min_seconds: float = 2.0

    def create_task(
        self, description: str, total: Optional[int] = None, **kwargs: Any
    ) -> T:
        raise NotImplementedError

    def advance(self, task: T, amount: float = 1.0) -> None:
        raise NotImplementedError

    def end(self, task: T) -> None:
        raise NotImplementedError


@dataclass
class RichSweepTask(SweepTask):

    task_id: Optional[rich.progress.TaskID] = field(default=None, repr=False)


class RichProgressHook(ProgressHookBase[RichSweepTask]):
    """Console progress bars from the `rich` package

    A bar only appears once its sweep has run for `min_seconds`, and its label
    tracks the number of unconverged solves.
    """

    def __init__(self, progress: rich.progress.Progress):
        self._progress = progress

    def create_task(
        self, description: str, total: Optional[int] = None, **kwargs: Any
    ) -> RichSweepTask:
        kwargs.setdefault("min_seconds", self.def_min_seconds)
        return RichSweepTask(description, total, datetime.now(), **kwargs)

    def _label(self, task: RichSweepTask) -> str:
        if task.n_unconverged:
            return f"{task.description} ({task.n_unconverged} unconverged)"
        return task.description

    def advance(self, task: RichSweepTask, amount: float = 1.0) -> None:
        if not task.visible:
            elapsed = (datetime.now() - task.start_time).total_seconds()
            if elapsed < task.min_seconds:
                return
            task.visible = True
        if task.task_id is None:
            task.task_id = self._progress.add_task(self._label(task), total=task.total)
        self._progress.update(
            task.task_id, advance=amount, description=self._label(task)
        )

    def end(self, task: RichSweepTask) -> None:
        if task.task_id is None:
            return
        self._progress.update(task.task_id, visible=False)
        self._progress.stop_task(task.task_id)
        task.task_id = None


class SweepReport:
    """Counts the solves of a sweep and remembers the ones that did not converge"""

    def __init__(
        self,
        description: Optional[str] = None,
        meta_data: Optional[Dict[str, Any]] = None,
        prog_hook: Optional[ProgressHookBase[Any]] = None,
        n_expected: Optional[int] = None,
    ):
        self.description = "sweep" if description is None else description
        self.meta_data = {} if meta_data is None else meta_data
        self.n_expected = n_expected
        self.unconverged: List[Tuple[int, str]] = []
        self._prog_hook = prog_hook
        self._task: Optional[SweepTask] = None
        self._n_input = 0
        self._done = False

    @property
    def n_input(self) -> int:
        return self._n_input

    @property
    def n_warnings(self) -> int:
        return len(self.unconverged)

    @property
    def has_errors(self) -> bool:
        # Unconverged solves still produce a usable point
        return False

    @property
    def has_warnings(self) -> bool:
        return bool(self.unconverged)

    @property
    def all_success(self) -> bool:
        return not self.unconverged

    def add(self, task_idx: int, converged: bool, label: str = "") -> None:
        """Record one finished solve"""
        self._n_input += 1
        if not converged:
            self.unconverged.append((task_idx, label))
        if self._prog_hook is None:
            return
        if self._task is None:
            self._task = self._prog_hook.create_task(
                self.description, total=self.n_expected
            )
        self._task.n_unconverged = len(self.unconverged)
        self._prog_hook.advance(self._task)

    @property
    def done(self) -> bool:
        return self._done

    @done.setter
    def done(self, val: bool) -> None:
        if not val:
            raise ValueError("Setting `done` to False is not allowed")
        if self._done:
            raise ValueError("Report was already marked done")
        self._done = True
        if self._prog_hook is not None and self._task is not None:
            self._prog_hook.end(self._task)

    def log_issues(self) -> None:
        if not self.unconverged:
            return
        log.warning(
            "%s: %d of %d solves hit the iteration cap before converging",
            self.description,
            len(self.unconverged),
            self._n_input,
        )
        for task_idx, label in self.unconverged[:5]:
            log.debug("  unconverged task %d %s", task_idx, label)

    def __str__(self) -> str:
        lines = [f"{self.description}:"]
        for k, v in self.meta_data.items():
            lines.append(f"  * {k}: {v}")
        lines.append(f"  * status: {'COMPLETED' if self._done else 'PENDING'}")
        lines.append(f"  * n_input: {self._n_input}")
        if self.unconverged:
            lines.append(f"  * n_warnings: {self.n_warnings}")
        return "\n".join(lines)
