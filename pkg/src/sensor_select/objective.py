"""Smoothing-error objective and the normalized set score.

The estimation error of the optimal smoother restricted to a sensor subset S
is the trace of the inverse of the posterior information matrix L + U_S.  The
score f(S) subtracts that from the no-sensor error so that f is normalized,
nondecreasing, and f(empty) = 0 exactly.
"""

from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy import linalg

from .errors import ConsistencyError, NumericalError
from .model import SensorSet, StackedModel, symmetrize

GAIN_SLACK = 1e-9


@dataclass(frozen=True)
class ScoreValue:
    """Error j = tr[(L + U_S)^-1] and score f = j_empty - j for one subset."""

    j: float
    f: float


def spd_trace_inverse(m: np.ndarray) -> float:
    """Trace of the inverse of a symmetric positive definite matrix.

    Uses a Cholesky solve against the identity; the explicit inverse is formed
    only as solver output, never via a general-purpose inversion routine.
    """
    try:
        c, low = linalg.cho_factor(m, lower=True, check_finite=False)
    except LinAlgError as exc:
        lam = float(np.linalg.eigvalsh(m)[0])
        raise NumericalError(
            f"posterior information matrix is numerically indefinite "
            f"(minimum eigenvalue {lam:.3e}): {exc}"
        ) from exc
    inv = linalg.cho_solve((c, low), np.eye(m.shape[0]), check_finite=False)
    return float(np.trace(inv))


def info_sum(stacked: StackedModel, subset: SensorSet) -> np.ndarray:
    """Sum of per-sensor information matrices over the subset."""
    subset.validate_for(stacked.system.p)
    total = np.zeros_like(stacked.L)
    for i in subset:
        total += stacked.U_per_sensor[i - 1]
    return total


def mse(stacked: StackedModel, subset: SensorSet) -> ScoreValue:
    """Smoother error and normalized score for one sensor subset.

    The empty subset returns j_empty exactly, never through a factorization,
    so f(empty) is exactly zero.
    """
    subset.validate_for(stacked.system.p)
    if len(subset) == 0:
        return ScoreValue(j=stacked.j_empty, f=0.0)
    m = symmetrize(stacked.L + info_sum(stacked, subset))
    j = spd_trace_inverse(m)
    return ScoreValue(j=j, f=stacked.j_empty - j)


def marginal_gain(stacked: StackedModel, subset: SensorSet, extra: SensorSet) -> float:
    """Score increase from adding extra to subset, clamped at zero.

    Values in [-1e-9, 0) are rounded up to 0; anything below that band means
    the monotone objective decreased and is reported as a consistency failure.
    """
    union = subset.union(extra)
    if union == subset:
        return 0.0
    rho = mse(stacked, union).f - mse(stacked, subset).f
    if rho < -GAIN_SLACK:
        raise ConsistencyError(
            f"marginal gain {rho:.6e} fell below -{GAIN_SLACK:g}; "
            f"the objective must be nondecreasing"
        )
    return max(rho, 0.0)
