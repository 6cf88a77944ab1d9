"""Ground-truth references: exhaustive optima, exact ratio constants, the
optimal smoother, and a Monte Carlo estimate of the smoothing error.

Everything here is deliberately independent of the greedy path so it can
serve as an oracle for it.  Enumerations are hard-capped; callers asking for
more work than the cap allows get a BudgetError, not a silent truncation.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numpy.linalg import LinAlgError
from scipy import linalg

from .errors import BudgetError, NumericalError
from .model import SensorSet, StackedModel, SystemModel, build_phi, propagated_rows, symmetrize
from .objective import mse, spd_trace_inverse

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 2_000_000
RATIO_MAX_SENSORS = 8
MC_MIN_TRIALS = 100
MC_CHUNK = 16384


def brute_force_optimum(stacked: StackedModel, s: int) -> tuple[SensorSet, float]:
    """Best score over all subsets of size at most s, by full enumeration.

    Ties go to the lexicographically smallest index tuple.  Raises
    BudgetError when the number of subsets exceeds the enumeration cap.
    """
    p = stacked.system.p
    if not 0 <= s <= p:
        raise ValueError(f"cardinality bound s={s} outside 0..{p}")
    total = sum(math.comb(p, k) for k in range(s + 1))
    if total > ENUMERATION_BUDGET:
        raise BudgetError(
            f"enumerating {total} subsets exceeds the cap of {ENUMERATION_BUDGET}"
        )
    best_f = 0.0
    best_set = SensorSet()
    for k in range(1, s + 1):
        for combo in combinations(range(1, p + 1), k):
            f = mse(stacked, SensorSet(combo)).f
            if f > best_f:
                best_f, best_set = f, SensorSet(combo)
    return best_set, best_f


def _score_table(stacked: StackedModel) -> np.ndarray:
    """f over every subset of sensors, indexed by bitmask (bit i-1 = sensor i)."""
    p = stacked.system.p
    table = np.empty(1 << p)
    table[0] = 0.0
    for mask in range(1, 1 << p):
        U = np.zeros_like(stacked.L)
        m = mask
        while m:
            low = m & -m
            U += stacked.U_per_sensor[low.bit_length() - 1]
            m ^= low
        table[mask] = stacked.j_empty - spd_trace_inverse(symmetrize(stacked.L + U))
    return table


def _mask_to_set(mask: int) -> SensorSet:
    return SensorSet(tuple(i + 1 for i in range(mask.bit_length()) if (mask >> i) & 1))


def _submasks(mask: int) -> np.ndarray:
    subs = []
    sub = mask
    while True:
        subs.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return np.array(subs, dtype=np.int64)


@dataclass(frozen=True)
class ExactRatios:
    """Exhaustively computed submodularity ratio, curvature, and the
    subset-monotone gain ratio, with the subsets achieving each extremum."""

    gamma_exact: float
    alpha_exact: float
    beta_exact: float
    witnesses: dict


def exact_ratios(stacked: StackedModel) -> ExactRatios:
    """Exact ratio constants by enumeration over all 2^p subsets.

    Ratios whose denominator gain is below eps = 1e-12 * (1 + j_empty) are
    skipped as numerically void.  gamma and beta are capped at 1 and default
    to 1 when every pair is void; alpha defaults to 0.
    """
    p = stacked.system.p
    if p > RATIO_MAX_SENSORS:
        raise BudgetError(
            f"exact ratio enumeration supports p <= {RATIO_MAX_SENSORS}, got {p}"
        )
    table = _score_table(stacked)
    eps = 1e-12 * (1.0 + stacked.j_empty)
    nmask = 1 << p
    masks = np.arange(nmask, dtype=np.int64)
    singles = (1 << np.arange(p, dtype=np.int64))
    # strip-highest-bit recurrence; reproduces a left-to-right ascending sum
    # bit for bit, keeping the enumeration independent of vectorization order
    high = [0] * nmask
    rest = [0] * nmask
    for m in range(1, nmask):
        h = m.bit_length() - 1
        high[m] = h
        rest[m] = m ^ (1 << h)

    gamma_best = None
    gamma_wit = None
    for smask in map(int, masks):
        single_gains = table[smask | singles] - table[smask]
        sum_over_members = np.empty(nmask)
        sum_over_members[0] = 0.0
        for m in range(1, nmask):
            sum_over_members[m] = sum_over_members[rest[m]] + single_gains[high[m]]
        set_gain = table[smask | masks] - table[smask]
        valid = set_gain > eps
        if valid.any():
            ratio = sum_over_members[valid] / set_gain[valid]
            k = int(np.argmin(ratio))
            if gamma_best is None or ratio[k] < gamma_best:
                gamma_best = float(ratio[k])
                gamma_wit = (_mask_to_set(int(masks[valid][k])), _mask_to_set(smask))
    gamma = 1.0 if gamma_best is None else min(gamma_best, 1.0)

    alpha_best = None
    alpha_wit = None
    omega_without = [masks[(masks >> j) & 1 == 0] for j in range(p)]
    for smask in map(int, masks):
        members = smask
        while members:
            low = members & -members
            j = low.bit_length() - 1
            members ^= low
            drop = smask ^ int(singles[j])
            denom = table[smask] - table[drop]
            if denom > eps:
                om = omega_without[j]
                numer = table[smask | om] - table[drop | om]
                ratio = numer / denom
                k = int(np.argmin(ratio))
                if alpha_best is None or ratio[k] < alpha_best:
                    alpha_best = float(ratio[k])
                    alpha_wit = (_mask_to_set(int(om[k])), _mask_to_set(smask), j + 1)
    alpha = 0.0 if alpha_best is None else 1.0 - alpha_best

    beta_best = None
    beta_wit = None
    for s2 in map(int, masks):
        subs = _submasks(s2)
        for w in range(p):
            if (s2 >> w) & 1:
                continue
            single = int(singles[w])
            denom = table[s2 | single] - table[s2]
            if denom > eps:
                numer = table[subs | single] - table[subs]
                ratio = numer / denom
                k = int(np.argmin(ratio))
                if beta_best is None or ratio[k] < beta_best:
                    beta_best = float(ratio[k])
                    beta_wit = (_mask_to_set(int(subs[k])), _mask_to_set(s2), w + 1)
    beta = 1.0 if beta_best is None else min(beta_best, 1.0)

    return ExactRatios(
        gamma_exact=gamma,
        alpha_exact=alpha,
        beta_exact=beta,
        witnesses={"gamma": gamma_wit, "alpha": alpha_wit, "beta": beta_wit},
    )


def selection_matrices(model: SystemModel, subset: SensorSet) -> tuple[np.ndarray, np.ndarray]:
    """Stacked observation map G and selected noise variances for a subset.

    G stacks, for each horizon step k, the propagated rows of the selected
    sensors in increasing index order; the returned variance vector matches
    that row order.
    """
    subset.validate_for(model.p)
    phi = build_phi(model.A, model.ell)
    sel = list(subset)
    rows_per_sensor = {i: propagated_rows(model, phi, i) for i in sel}
    dim = model.n * model.ell
    G = np.empty((len(sel) * model.ell, dim))
    for k in range(model.ell):
        for r, i in enumerate(sel):
            G[k * len(sel) + r] = rows_per_sensor[i][k]
    v = np.tile(model.v_diag[[i - 1 for i in sel]], model.ell)
    return G, v


@dataclass(frozen=True)
class SmoothingSample:
    """One simulated draw and its smoothed reconstruction."""

    z_bar: np.ndarray
    y_bar: np.ndarray
    v_bar: np.ndarray
    z_tilde: np.ndarray


class _SmootherPieces:
    """Factored innovation covariance and gain for a fixed (model, subset)."""

    def __init__(self, model: SystemModel, subset: SensorSet):
        if len(subset) == 0:
            raise ValueError("smoothing requires at least one selected sensor")
        subset.validate_for(model.p)
        self.model = model
        self.G, self.v = selection_matrices(model, subset)
        n, ell = model.n, model.ell
        dim = n * ell
        Z = np.zeros((dim, dim))
        Z[:n, :n] = symmetrize(model.X0)
        for b in range(1, ell):
            Z[b * n:(b + 1) * n, b * n:(b + 1) * n] = symmetrize(model.W)
        self.Z = Z
        innovation = symmetrize(self.G @ Z @ self.G.T) + np.diag(self.v)
        try:
            self.innovation_cho = linalg.cho_factor(innovation, lower=True, check_finite=False)
        except LinAlgError as exc:
            raise NumericalError(
                f"innovation covariance failed Cholesky factorization: {exc}"
            ) from exc
        # gain K = Z G^T (V + G Z G^T)^-1, assembled through the factor
        self.K = linalg.cho_solve(self.innovation_cho, self.G @ Z, check_finite=False).T

    def chol_Z(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.Z)
        except LinAlgError as exc:
            raise NumericalError(f"stacked covariance is not positive definite: {exc}") from exc


def smoother_estimate(model: SystemModel, subset: SensorSet, y_bar: np.ndarray) -> np.ndarray:
    """Optimal smoothed estimate of the stacked vector from stacked outputs."""
    pieces = _SmootherPieces(model, subset)
    y = np.asarray(y_bar, dtype=float)
    expected = len(subset) * model.ell
    if y.shape != (expected,):
        raise ValueError(f"y_bar must have shape ({expected},), got {y.shape}")
    return pieces.K @ y


def error_covariance(model: SystemModel, subset: SensorSet) -> np.ndarray:
    """Posterior covariance of the stacked vector given the selected outputs."""
    pieces = _SmootherPieces(model, subset)
    Z = pieces.Z
    return symmetrize(Z - pieces.K @ pieces.G @ Z)


def state_trajectory(model: SystemModel, z_bar: np.ndarray) -> np.ndarray:
    """States x_0..x_{ell-1} reconstructed from the stacked vector, (ell, n)."""
    z = np.asarray(z_bar, dtype=float)
    dim = model.n * model.ell
    if z.shape != (dim,):
        raise ValueError(f"z_bar must have shape ({dim},), got {z.shape}")
    phi = build_phi(model.A, model.ell)
    return (phi @ z).reshape(model.ell, model.n)


def simulate_sample(model: SystemModel, subset: SensorSet, seed: int) -> SmoothingSample:
    """Draw one stacked sample, its outputs, and the smoothed reconstruction.

    The output identity y_bar = G z_bar + v_bar holds exactly (it is how
    y_bar is computed).
    """
    pieces = _SmootherPieces(model, subset)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    chol = pieces.chol_Z()
    z = chol @ rng.standard_normal(chol.shape[0])
    v = np.sqrt(pieces.v) * rng.standard_normal(pieces.v.shape[0])
    y = pieces.G @ z + v
    return SmoothingSample(z_bar=z, y_bar=y, v_bar=v, z_tilde=pieces.K @ y)


def monte_carlo_mse(
    model: SystemModel, subset: SensorSet, trials: int, seed: int
) -> tuple[float, float]:
    """Empirical smoothing error over independent trials, with standard error.

    Draws z from N(0, Z) and the measurement noise from its diagonal law,
    smooths, and averages the squared stacked-vector error, whose expectation
    is the trace objective.  The generator is Philox (counter based) and the
    draws are chunked with a fixed chunk size, so a fixed seed reproduces the
    mean bit for bit regardless of platform threading.

    Returns (mean, standard error of the mean).
    """
    if trials < MC_MIN_TRIALS:
        raise ValueError(f"trials must be at least {MC_MIN_TRIALS}, got {trials}")
    pieces = _SmootherPieces(model, subset)
    chol = pieces.chol_Z()
    noise_scale = np.sqrt(pieces.v)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))

    errors = np.empty(trials)
    done = 0
    while done < trials:
        count = min(MC_CHUNK, trials - done)
        z = chol @ rng.standard_normal((chol.shape[0], count))
        v = noise_scale[:, None] * rng.standard_normal((noise_scale.shape[0], count))
        y = pieces.G @ z + v
        diff = z - pieces.K @ y
        errors[done:done + count] = np.einsum("ij,ij->j", diff, diff)
        done += count

    mean = float(errors.mean())
    std_err = float(errors.std(ddof=1) / math.sqrt(trials))
    return mean, std_err
