"""Problem instances and their stacked finite-horizon form.

A problem instance is a discrete-time plant x_{k+1} = A x_k + w_k observed
through p scalar sensors y_k = C x_k + v_k over a horizon of ell steps.  All
computations downstream work on the stacked vector z = (x_0, w_0, ..., w_{ell-2})
whose covariance Z is block diagonal, and on per-sensor information matrices
assembled from propagated observation rows.  The Kronecker-structured operators
are never materialized; only their dense products are.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy import linalg

from ._files import atomic_write_text
from .errors import ModelFormatError, NumericalError

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-10
STACK_CHECK_RTOL = 1e-8
PSD_EIG_SLACK = 1e-10


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average away floating-point asymmetry before factorizations."""
    return 0.5 * (m + m.T)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


def _check_symmetric(m: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    skew = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if skew > SYMMETRY_RTOL * scale:
        raise ModelFormatError(
            f"{name} must be symmetric: max asymmetry {skew:.3e} exceeds "
            f"tolerance {SYMMETRY_RTOL:g} at scale {scale:.3e}"
        )


def _check_positive_definite(m: np.ndarray, name: str) -> None:
    eigs = np.linalg.eigvalsh(symmetrize(m))
    if float(eigs[0]) <= 0.0:
        raise ModelFormatError(
            f"{name} must be positive definite: minimum eigenvalue {float(eigs[0]):.6e}"
        )


@dataclass(frozen=True)
class SystemModel:
    """Plant matrices, noise covariances, and dimensions for one instance.

    Attributes
    ----------
    n : int
        State dimension.
    p : int
        Number of candidate scalar sensors (rows of C).
    ell : int
        Smoothing horizon length, at least 1.
    A : (n, n) ndarray
        State transition matrix.
    C : (p, n) ndarray
        Observation matrix; row i-1 is sensor i.
    X0 : (n, n) ndarray
        Initial state covariance, symmetric positive definite.
    W : (n, n) ndarray
        Process noise covariance, symmetric positive definite.
    v_diag : (p,) ndarray
        Per-sensor measurement noise variances, all strictly positive.
    """

    n: int
    p: int
    ell: int
    A: np.ndarray
    C: np.ndarray
    X0: np.ndarray
    W: np.ndarray
    v_diag: np.ndarray

    def __post_init__(self):
        for name in ("n", "p", "ell"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ModelFormatError(f"{name} must be an integer, got {value!r}")
            if int(value) < 1:
                raise ModelFormatError(f"{name} must be >= 1, got {int(value)}")
            object.__setattr__(self, name, int(value))
        for name in ("A", "C", "X0", "W", "v_diag"):
            try:
                arr = _freeze(getattr(self, name))
            except (TypeError, ValueError) as exc:
                raise ModelFormatError(f"{name} is not a numeric array: {exc}") from exc
            if not np.all(np.isfinite(arr)):
                raise ModelFormatError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, arr)
        n, p = self.n, self.p
        if self.A.shape != (n, n):
            raise ModelFormatError(f"A must have shape ({n}, {n}), got {self.A.shape}")
        if self.C.shape != (p, n):
            raise ModelFormatError(f"C must have shape ({p}, {n}), got {self.C.shape}")
        for name in ("X0", "W"):
            m = getattr(self, name)
            if m.shape != (n, n):
                raise ModelFormatError(f"{name} must have shape ({n}, {n}), got {m.shape}")
            _check_symmetric(m, name)
            _check_positive_definite(m, name)
        if self.v_diag.shape != (p,):
            raise ModelFormatError(f"v_diag must have shape ({p},), got {self.v_diag.shape}")
        for k in range(p):
            if not self.v_diag[k] > 0.0:
                raise ModelFormatError(f"v_diag[{k}] must be positive, got {self.v_diag[k]!r}")


@dataclass(frozen=True)
class SensorSet:
    """Immutable set of 1-based sensor indices, stored strictly increasing."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        try:
            idx = tuple(int(i) for i in self.indices)
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"sensor indices must be integers: {exc}") from exc
        if any(i < 1 for i in idx):
            raise ModelFormatError(f"sensor indices are 1-based, got {min(idx)}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ModelFormatError(f"sensor indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, *indices: int) -> "SensorSet":
        """Build from any iterable order, deduplicating."""
        return cls(tuple(sorted({int(i) for i in indices})))

    def validate_for(self, p: int) -> None:
        if self.indices and self.indices[-1] > p:
            raise ModelFormatError(
                f"sensor index {self.indices[-1]} out of range for p={p}"
            )

    def union(self, other: "SensorSet") -> "SensorSet":
        return SensorSet.of(*self.indices, *other.indices)

    def without(self, index: int) -> "SensorSet":
        return SensorSet(tuple(i for i in self.indices if i != index))

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in self.indices

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class StackedModel:
    """Stacked-horizon matrices derived from a SystemModel.

    phi is the block lower-triangular propagation map (block (i, j) equals
    A^(i-j) for i >= j), Z the block-diagonal covariance of the stacked vector,
    L its inverse, U_per_sensor the per-sensor information matrices, and
    j_empty the trace of Z (the estimation error with no sensors selected).
    """

    system: SystemModel
    phi: np.ndarray
    Z: np.ndarray
    L: np.ndarray
    U_per_sensor: tuple[np.ndarray, ...]
    j_empty: float


def build_phi(A: np.ndarray, ell: int) -> np.ndarray:
    """Stacked propagation matrix of shape (n*ell, n*ell)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ModelFormatError(f"A must be square, got shape {A.shape}")
    if ell < 1:
        raise ModelFormatError(f"ell must be >= 1, got {ell}")
    powers = [np.eye(n)]
    for _ in range(ell - 1):
        powers.append(A @ powers[-1])
    phi = np.zeros((n * ell, n * ell))
    for i in range(ell):
        for j in range(i + 1):
            phi[i * n:(i + 1) * n, j * n:(j + 1) * n] = powers[i - j]
    return phi


def propagated_rows(model: SystemModel, phi: np.ndarray, i: int) -> np.ndarray:
    """Rows of sensor i propagated through the horizon, shape (ell, n*ell).

    Row k is c_i A^(k-j) laid out over the stacked coordinates, i.e. row i-1 of
    C applied to block row k of phi.
    """
    if not 1 <= i <= model.p:
        raise ModelFormatError(f"sensor index {i} out of range for p={model.p}")
    blocks = phi.reshape(model.ell, model.n, model.n * model.ell)
    return np.tensordot(model.C[i - 1], blocks, axes=(0, 1))


def sensor_info_matrix(model: SystemModel, phi: np.ndarray, i: int) -> np.ndarray:
    """Information contribution of sensor i over the horizon.

    Equals the Gram matrix of the propagated rows scaled by the inverse noise
    variance.  Symmetric positive semidefinite by construction.
    """
    rows = propagated_rows(model, phi, i)
    return symmetrize(rows.T @ rows / model.v_diag[i - 1])


def _spd_inverse(m: np.ndarray, name: str) -> np.ndarray:
    try:
        c, low = linalg.cho_factor(symmetrize(m), lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NumericalError(
            f"covariance block {name} is not numerically positive definite: {exc}"
        ) from exc
    return symmetrize(linalg.cho_solve((c, low), np.eye(m.shape[0]), check_finite=False))


def build_stacked(model: SystemModel) -> StackedModel:
    """Assemble phi, Z, L, the per-sensor information matrices, and j_empty."""
    n, ell, p = model.n, model.ell, model.p
    dim = n * ell
    phi = build_phi(model.A, ell)

    Z = np.zeros((dim, dim))
    Z[:n, :n] = symmetrize(model.X0)
    W_sym = symmetrize(model.W)
    for b in range(1, ell):
        Z[b * n:(b + 1) * n, b * n:(b + 1) * n] = W_sym

    L = np.zeros((dim, dim))
    X0_inv = _spd_inverse(model.X0, "X0")
    L[:n, :n] = X0_inv
    if ell > 1:
        W_inv = _spd_inverse(model.W, "W")
        for b in range(1, ell):
            L[b * n:(b + 1) * n, b * n:(b + 1) * n] = W_inv

    # block-wise check is equivalent to L Z = I for block-diagonal factors
    for mat, inv, name in ((model.X0, X0_inv, "X0"),) + (
        ((model.W, W_inv, "W"),) if ell > 1 else ()
    ):
        err = float(np.max(np.abs(inv @ mat - np.eye(n))))
        if err > STACK_CHECK_RTOL:
            raise NumericalError(
                f"inverse of {name} failed the identity check: residual {err:.3e} "
                f"exceeds {STACK_CHECK_RTOL:g} (ill-conditioned covariance)"
            )

    infos = []
    for i in range(1, p + 1):
        U = sensor_info_matrix(model, phi, i)
        eigs = np.linalg.eigvalsh(U)
        floor = -PSD_EIG_SLACK * (1.0 + float(np.max(np.abs(eigs))))
        if float(eigs[0]) < floor:
            raise NumericalError(
                f"information matrix of sensor {i} lost positive semidefiniteness: "
                f"minimum eigenvalue {float(eigs[0]):.3e}"
            )
        infos.append(_freeze(U))

    j_empty = float(np.trace(model.X0) + (ell - 1) * np.trace(model.W))
    return StackedModel(
        system=model,
        phi=_freeze(phi),
        Z=_freeze(Z),
        L=_freeze(L),
        U_per_sensor=tuple(infos),
        j_empty=j_empty,
    )


_MODEL_KEYS = ("n", "p", "ell", "A", "C", "X0", "W", "v_diag")


def load_model(path: str) -> SystemModel:
    """Read a model from a JSON file, validating structure and values."""
    try:
        with open(path, "r") as handle:
            text = handle.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ModelFormatError(f"{path}: top level must be a JSON object")
    missing = [k for k in _MODEL_KEYS if k not in raw]
    if missing:
        raise ModelFormatError(f"{path}: missing required keys: {', '.join(missing)}")
    extra = [k for k in raw if k not in _MODEL_KEYS]
    if extra:
        raise ModelFormatError(f"{path}: unknown keys: {', '.join(sorted(extra))}")
    for name in ("n", "p", "ell"):
        if not isinstance(raw[name], int) or isinstance(raw[name], bool):
            raise ModelFormatError(f"{path}: {name} must be a JSON integer, got {raw[name]!r}")
    try:
        return SystemModel(
            n=raw["n"], p=raw["p"], ell=raw["ell"],
            A=raw["A"], C=raw["C"], X0=raw["X0"], W=raw["W"],
            v_diag=raw["v_diag"],
        )
    except ModelFormatError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc


def save_model(model: SystemModel, path: str) -> None:
    """Write a model as JSON; floats round-trip bit-exactly via repr."""
    payload = {
        "n": model.n,
        "p": model.p,
        "ell": model.ell,
        "A": model.A.tolist(),
        "C": model.C.tolist(),
        "X0": model.X0.tolist(),
        "W": model.W.tolist(),
        "v_diag": model.v_diag.tolist(),
    }
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
