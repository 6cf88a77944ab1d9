"""Greedy forward selection of sensors under a cardinality bound."""

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .model import SensorSet, StackedModel, symmetrize
from .objective import GAIN_SLACK, spd_trace_inverse


@dataclass(frozen=True)
class GreedyStep:
    """One iteration: the sensor chosen, its gain, and the score after."""

    chosen: int
    gain: float
    f_after: float
    j_after: float


@dataclass(frozen=True)
class SelectionResult:
    steps: tuple[GreedyStep, ...]
    selected: SensorSet
    s: int


def greedy_select(stacked: StackedModel, s: int) -> SelectionResult:
    """Select s sensors, maximizing the marginal score gain at each step.

    Runs exactly s iterations with no early stopping and no stale-gain reuse;
    the objective is not submodular, so every candidate is re-evaluated each
    round.  Ties on the gain, compared in exact float order, go to the
    smallest sensor index.
    """
    p = stacked.system.p
    if not isinstance(s, (int, np.integer)) or isinstance(s, bool):
        raise ValueError(f"cardinality bound s must be an integer, got {s!r}")
    if not 1 <= s <= p:
        raise ValueError(f"cardinality bound s={s} outside 1..{p}")

    chosen: list[int] = []
    running_info = np.zeros_like(stacked.L)
    f_current = 0.0
    steps: list[GreedyStep] = []

    for _ in range(s):
        best_index = -1
        best_gain = -np.inf
        best_j = 0.0
        for w in range(1, p + 1):
            if w in chosen:
                continue
            m = symmetrize(stacked.L + running_info + stacked.U_per_sensor[w - 1])
            j_w = spd_trace_inverse(m)
            gain = (stacked.j_empty - j_w) - f_current
            if gain > best_gain:
                best_index, best_gain, best_j = w, gain, j_w
        if best_gain < -GAIN_SLACK:
            raise ConsistencyError(
                f"best marginal gain {best_gain:.6e} fell below -{GAIN_SLACK:g}; "
                f"the objective must be nondecreasing"
            )
        best_gain = max(best_gain, 0.0)
        chosen.append(best_index)
        running_info += stacked.U_per_sensor[best_index - 1]
        f_current = stacked.j_empty - best_j
        steps.append(
            GreedyStep(chosen=best_index, gain=best_gain, f_after=f_current, j_after=best_j)
        )

    return SelectionResult(
        steps=tuple(steps), selected=SensorSet(tuple(sorted(chosen))), s=s
    )
