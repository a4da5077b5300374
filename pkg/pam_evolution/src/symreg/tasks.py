"""
Nguyen symbolic-regression benchmark tasks.
"""
import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np

from ..config.settings import TaskName
from ..exceptions import TaskError

NUM_SAMPLE_POINTS = 20

TargetFn = Callable[[np.ndarray], np.ndarray]


def _nguyen2(p: np.ndarray) -> np.ndarray:
    x = p[..., 0]
    return x ** 4 + x ** 3 + x ** 2 + x


def _nguyen3(p: np.ndarray) -> np.ndarray:
    x = p[..., 0]
    return x ** 5 + x ** 4 + x ** 3 + x ** 2 + x


def _nguyen5(p: np.ndarray) -> np.ndarray:
    x = p[..., 0]
    return np.sin(x ** 2) * np.cos(x) - 1.0


def _nguyen7(p: np.ndarray) -> np.ndarray:
    x = p[..., 0]
    return np.log(x + 1.0) + np.log(x ** 2 + 1.0)


def _nguyen12(p: np.ndarray) -> np.ndarray:
    x, y = p[..., 0], p[..., 1]
    return x ** 4 - x ** 3 + y ** 2 / 2.0 - y


@dataclass(frozen=True)
class _TaskDefinition:
    target: TargetFn
    num_inputs: int
    low: float
    high: float


_DEFINITIONS: Dict[TaskName, _TaskDefinition] = {
    TaskName.NGUYEN2: _TaskDefinition(_nguyen2, 1, -1.0, 1.0),
    TaskName.NGUYEN3: _TaskDefinition(_nguyen3, 1, -1.0, 1.0),
    TaskName.NGUYEN5: _TaskDefinition(_nguyen5, 1, -1.0, 1.0),
    TaskName.NGUYEN7: _TaskDefinition(_nguyen7, 1, 0.0, 2.0),
    TaskName.NGUYEN12: _TaskDefinition(_nguyen12, 2, 0.0, 1.0),
}


@dataclass(frozen=True, eq=False)
class SymRegTask:
    """
    A benchmark task with frozen sample points.

    Attributes:
        name: Task identifier
        target: Ground-truth function over an (n, num_inputs) array
        sample_points: (20, num_inputs) read-only array
        targets: Target values at the sample points
        num_inputs: 1 or 2
        domain: (low, high) bounds shared by every input
        seed: Experiment seed the points were drawn with
    """
    name: TaskName
    target: TargetFn
    sample_points: np.ndarray
    targets: np.ndarray
    num_inputs: int
    domain: Tuple[float, float]
    seed: int = 0
    _columns: Tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def columns(self) -> Tuple[np.ndarray, ...]:
        """Sample points split per input variable."""
        return self._columns


def _sample_stream(name: TaskName, seed: int) -> np.random.Generator:
    name_key = [ord(c) for c in name.value]
    return np.random.default_rng(np.random.SeedSequence([seed, *name_key]))


def make_task(name: Union[str, TaskName], seed: int = 0) -> SymRegTask:
    """
    Build a task with sample points drawn once for (name, seed).

    Raises:
        TaskError: If the task name is unknown
    """
    try:
        task_name = TaskName(name)
    except ValueError:
        valid = ", ".join(t.value for t in TaskName)
        raise TaskError(f"Unknown task {name!r}; expected one of: {valid}")

    definition = _DEFINITIONS[task_name]
    rng = _sample_stream(task_name, seed)
    points = rng.uniform(definition.low, definition.high, size=(NUM_SAMPLE_POINTS, definition.num_inputs))
    points.setflags(write=False)
    targets = definition.target(points).astype(np.float64)
    targets.setflags(write=False)
    columns = tuple(np.ascontiguousarray(points[:, i]) for i in range(definition.num_inputs))
    return SymRegTask(
        name=task_name,
        target=definition.target,
        sample_points=points,
        targets=targets,
        num_inputs=definition.num_inputs,
        domain=(definition.low, definition.high),
        seed=seed,
        _columns=columns,
    )


def target_value(task: SymRegTask, point: Sequence[float]) -> float:
    """
    Closed-form target at one point.

    Raises:
        TaskError: If the point arity does not match the task
    """
    if len(point) != task.num_inputs:
        raise TaskError(
            f"{task.name.value} takes {task.num_inputs} inputs, got {len(point)}", {"point": list(point)}
        )
    return float(task.target(np.asarray(point, dtype=np.float64)))


def sample_points_csv(task: SymRegTask) -> str:
    """Audit dump of the frozen sample points: ``point_index,x[,y],target``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["point_index", *("x", "y")[: task.num_inputs], "target"])
    for i, (point, value) in enumerate(zip(task.sample_points, task.targets)):
        writer.writerow([i, *(repr(float(v)) for v in point), repr(float(value))])
    return buffer.getvalue()
