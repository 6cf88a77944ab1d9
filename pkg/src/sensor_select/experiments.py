"""Random stable ensembles and the noise-ratio sweep over guarantee bounds.

The sweep reproduces the bound-comparison figure: draw random stable systems
with identity observation and scalar covariances, and trace the three
guarantee coefficients as the prior-to-measurement variance ratio moves
across a dB grid.  All randomness derives from one 64-bit seed through
named spawn keys, so results are reproducible trial by trial.
"""

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._files import atomic_write_text
from ._version import __version__
from .bounds import BoundsReport, report_from_isotropic_spectra
from .errors import ModelFormatError, NumericalError
from .model import build_phi, symmetrize

logger = logging.getLogger(__name__)

RECIPE_NAME = "iid_normal_spectral_rescale"
MAX_REDRAWS = 10
CSV_HEADER = (
    "ratio_db", "ours_mean", "ours_std", "chamon_mean", "chamon_std",
    "summers_mean", "summers_std",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep parameters; defaults give the desk-scale reproduction."""

    n: int = 20
    ell: int = 10
    trials: int = 200
    ratio_db_grid: tuple[float, ...] = tuple(float(d) for d in range(-30, 11))
    sigma_v_sq: float = 1.0
    spectral_radius: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.ell < 1:
            raise ModelFormatError(f"n and ell must be >= 1, got n={self.n}, ell={self.ell}")
        if self.trials < 1:
            raise ModelFormatError(f"trials must be >= 1, got {self.trials}")
        grid = tuple(float(d) for d in self.ratio_db_grid)
        if not grid:
            raise ModelFormatError("ratio_db_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ModelFormatError("ratio_db_grid must be strictly increasing")
        if not all(np.isfinite(grid)):
            raise ModelFormatError("ratio_db_grid must be finite")
        object.__setattr__(self, "ratio_db_grid", grid)
        if not self.sigma_v_sq > 0.0:
            raise ModelFormatError(f"sigma_v_sq must be positive, got {self.sigma_v_sq}")
        if not 0.0 < self.spectral_radius < 1.0:
            raise ModelFormatError(
                f"spectral_radius must lie in (0, 1), got {self.spectral_radius}"
            )
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ModelFormatError(f"seed must fit in 64 bits, got {self.seed}")


@dataclass(frozen=True)
class SweepRecord:
    """Aggregated coefficients at one grid point."""

    ratio_db: float
    ours_mean: float
    ours_std: float
    chamon_mean: float
    chamon_std: float
    summers_mean: float
    summers_std: float


def paper_scale_config(seed: int = 0) -> ExperimentConfig:
    """Larger reproduction: n=50 with fewer trials."""
    return ExperimentConfig(n=50, trials=100, seed=seed)


def random_stable_system(n: int, spectral_radius: float, seed) -> np.ndarray:
    """Dense random matrix rescaled to the requested spectral radius.

    Entries are iid standard normal; the draw is rejected and redone (with a
    distinct child seed) in the measure-zero event of an exactly nilpotent
    draw, at most MAX_REDRAWS times.
    """
    if n < 1:
        raise ModelFormatError(f"n must be >= 1, got {n}")
    if not 0.0 < spectral_radius < 1.0:
        raise ModelFormatError(f"spectral_radius must lie in (0, 1), got {spectral_radius}")
    base = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    for attempt in range(MAX_REDRAWS):
        child = np.random.SeedSequence(
            entropy=base.entropy, spawn_key=tuple(base.spawn_key) + (attempt,)
        )
        rng = np.random.Generator(np.random.Philox(child))
        A = rng.standard_normal((n, n))
        rho = float(np.max(np.abs(np.linalg.eigvals(A))))
        if rho > 0.0:
            return A * (spectral_radius / rho)
        logger.warning("draw %d was nilpotent (spectral radius 0); redrawing", attempt)
    raise NumericalError(f"all {MAX_REDRAWS} draws had spectral radius 0")


def isotropic_spectra(A: np.ndarray, ell: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Noise-free spectra reused across the ratio grid for one system.

    Returns the top eigenvalue of Phi^T Phi together with per-sensor traces
    and minimum eigenvalues of the unscaled information matrices B_w^T B_w.
    The nonzero spectrum of B_w^T B_w equals that of the small Gram
    B_w B_w^T, and for n > 1 the tall shape forces lambda_min = 0 exactly.
    """
    n = A.shape[0]
    phi = build_phi(A, ell)
    lam_phi = float(np.linalg.eigvalsh(symmetrize(phi.T @ phi))[-1])
    traces = np.empty(n)
    lam_mins = np.empty(n)
    for w in range(n):
        rows = phi[w::n, :]  # sensor w+1 propagated through the horizon
        traces[w] = float(np.sum(rows * rows))
        if rows.shape[0] < rows.shape[1]:
            lam_mins[w] = 0.0
        else:
            gram = symmetrize(rows @ rows.T)
            lam_mins[w] = max(float(np.linalg.eigvalsh(gram)[0]), 0.0)
    return lam_phi, traces, lam_mins


def _trial_spectra(config: ExperimentConfig, trial: int):
    child = np.random.SeedSequence(entropy=int(config.seed), spawn_key=(trial,))
    A = random_stable_system(config.n, config.spectral_radius, child)
    return isotropic_spectra(A, config.ell)


def bounds_at_ratio(config: ExperimentConfig, spectra, ratio_db: float) -> BoundsReport:
    sigma_z_sq = config.sigma_v_sq * 10.0 ** (ratio_db / 10.0)
    lam_phi, traces, lam_mins = spectra
    return report_from_isotropic_spectra(
        sigma_z_sq, config.sigma_v_sq, lam_phi, traces, lam_mins
    )


def run_sweep(config: ExperimentConfig, threads: int = 1) -> list[SweepRecord]:
    """Aggregate the three guarantee coefficients over the ratio grid.

    Per-trial spectra are computed once (optionally in a thread pool; results
    are slotted by trial index, so the schedule cannot affect the output) and
    the grid is then evaluated in fixed trial order with population standard
    deviations.
    """
    trials = config.trials
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            spectra = list(pool.map(lambda t: _trial_spectra(config, t), range(trials)))
    else:
        spectra = [_trial_spectra(config, t) for t in range(trials)]

    records = []
    ours = np.empty(trials)
    chamon = np.empty(trials)
    summers = np.empty(trials)
    for ratio_db in config.ratio_db_grid:
        for t in range(trials):
            report = bounds_at_ratio(config, spectra[t], ratio_db)
            ours[t] = report.coeff_ours
            chamon[t] = report.coeff_chamon
            summers[t] = report.coeff_summers
        if float(ours.mean()) < float(summers.mean()):
            logger.warning(
                "mean summers coefficient %.6g exceeds ours %.6g at %g dB",
                float(summers.mean()), float(ours.mean()), ratio_db,
            )
        records.append(SweepRecord(
            ratio_db=float(ratio_db),
            ours_mean=float(ours.mean()),
            ours_std=float(ours.std(ddof=0)),
            chamon_mean=float(chamon.mean()),
            chamon_std=float(chamon.std(ddof=0)),
            summers_mean=float(summers.mean()),
            summers_std=float(summers.std(ddof=0)),
        ))
    return records


def _format_field(x: float) -> str:
    return "%.17g" % x


def write_sweep_csv(records: list[SweepRecord], path: str) -> None:
    """Write records with full-precision fields, LF endings, atomically."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([
            _format_field(r.ratio_db),
            _format_field(r.ours_mean), _format_field(r.ours_std),
            _format_field(r.chamon_mean), _format_field(r.chamon_std),
            _format_field(r.summers_mean), _format_field(r.summers_std),
        ])
    atomic_write_text(path, buf.getvalue())


def read_sweep_csv(path: str) -> list[SweepRecord]:
    """Parse a sweep CSV, validating the header and every field."""
    try:
        with open(path, "r", newline="") as handle:
            reader = csv.reader(handle)
            rows = list(reader)
    except OSError as exc:
        raise ModelFormatError(f"cannot read sweep file {path}: {exc}") from exc
    if not rows:
        raise ModelFormatError(f"{path}: empty file, expected a header row")
    if tuple(rows[0]) != CSV_HEADER:
        raise ModelFormatError(
            f"{path}: bad header {rows[0]!r}, expected {','.join(CSV_HEADER)}"
        )
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise ModelFormatError(
                f"{path}: line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}"
            )
        try:
            values = [float(x) for x in row]
        except ValueError as exc:
            raise ModelFormatError(f"{path}: line {lineno}: {exc}") from exc
        records.append(SweepRecord(*values))
    return records


def write_sweep_metadata(config: ExperimentConfig, csv_path: str) -> str:
    """Write the JSON sidecar next to a sweep CSV; returns the sidecar path."""
    meta = {
        "config": {
            "n": config.n,
            "ell": config.ell,
            "trials": config.trials,
            "ratio_db_grid": list(config.ratio_db_grid),
            "sigma_v_sq": config.sigma_v_sq,
            "spectral_radius": config.spectral_radius,
            "seed": int(config.seed),
        },
        "seed": int(config.seed),
        "recipe": RECIPE_NAME,
        "rng": "philox4x64",
        "version": __version__,
    }
    sidecar = csv_path + ".meta.json"
    atomic_write_text(sidecar, json.dumps(meta, indent=2) + "\n")
    return sidecar


def load_config(path: str) -> ExperimentConfig:
    """Read an ExperimentConfig from JSON, with field-level errors."""
    try:
        with open(path, "r") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ModelFormatError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ModelFormatError(f"{path}: top level must be a JSON object")
    allowed = {
        "n", "ell", "trials", "ratio_db_grid", "sigma_v_sq", "spectral_radius", "seed",
    }
    extra = set(raw) - allowed
    if extra:
        raise ModelFormatError(f"{path}: unknown keys: {', '.join(sorted(extra))}")
    if "ratio_db_grid" in raw:
        if not isinstance(raw["ratio_db_grid"], list):
            raise ModelFormatError(f"{path}: ratio_db_grid must be a JSON array")
        raw = dict(raw, ratio_db_grid=tuple(raw["ratio_db_grid"]))
    try:
        return ExperimentConfig(**raw)
    except (ModelFormatError, TypeError) as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
