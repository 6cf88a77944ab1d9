"""Shared fixtures: tiny closed-form models and a deterministic instance stream."""

import numpy as np
import pytest

from sensor_select import SensorSet, SystemModel, build_stacked


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=key))
    )


@pytest.fixture
def scalar_unit():
    """n=1, p=1, ell=1, everything unit: J({1}) = 1/2."""
    model = SystemModel(
        n=1, p=1, ell=1,
        A=[[0.0]], C=[[1.0]], X0=[[1.0]], W=[[1.0]], v_diag=[1.0],
    )
    return model, build_stacked(model)


@pytest.fixture
def scalar_two():
    """n=1, p=2, ell=1, two identical unit sensors: L=[1], U1=U2=[1]."""
    model = SystemModel(
        n=1, p=2, ell=1,
        A=[[0.0]], C=[[1.0], [1.0]], X0=[[1.0]], W=[[1.0]], v_diag=[1.0, 1.0],
    )
    return model, build_stacked(model)


def random_model(seed: int, n: int = None, ell: int = None, p: int = None,
                 zero_row: int = None) -> SystemModel:
    """Deterministic random instance; dims drawn from the seed when not given."""
    rng = _rng(seed, 0)
    if n is None:
        n = int(rng.integers(1, 4))
    if ell is None:
        ell = int(rng.integers(1, 4))
    if p is None:
        p = int(rng.integers(4, 9))
    A = rng.standard_normal((n, n))
    rho = float(np.max(np.abs(np.linalg.eigvals(A))))
    if rho > 0.0:
        A = A * (float(rng.uniform(0.3, 0.95)) / rho)
    C = rng.standard_normal((p, n))
    if zero_row is not None:
        C[zero_row - 1] = 0.0
    M = rng.standard_normal((n, n))
    X0 = M @ M.T + (0.3 + float(rng.uniform(0.0, 0.7))) * np.eye(n)
    M = rng.standard_normal((n, n))
    W = M @ M.T + (0.3 + float(rng.uniform(0.0, 0.7))) * np.eye(n)
    v = rng.uniform(0.5, 2.0, size=p)
    return SystemModel(n=n, p=p, ell=ell, A=A, C=C, X0=X0, W=W, v_diag=v)


def random_subset(seed: int, p: int, nonempty: bool = False) -> SensorSet:
    rng = _rng(seed, 1)
    while True:
        mask = rng.random(p) < 0.5
        if mask.any() or not nonempty:
            return SensorSet(tuple(i + 1 for i in range(p) if mask[i]))


@pytest.fixture
def make_random():
    return random_model
