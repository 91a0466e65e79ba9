"""Shared fixtures: a small dense test system with three parameters and
the circuit benchmark at low polynomial degree."""

import numpy as np
import pytest

import sgmor as sg
from sgmor.galerkin import ParametricSystem


def make_desk_parametric() -> ParametricSystem:
    """Dense 4-state system, affine in three parameters on [-1, 1]^3.

    Stable over the whole parameter box (diagonally dominant drift with
    small couplings); E depends on the third parameter only.
    """
    n = 4
    A0 = np.array([
        [-2.0, 1.0, 0.0, 0.0],
        [-1.0, -3.0, 0.5, 0.0],
        [0.0, -0.5, -1.5, 1.0],
        [0.2, 0.0, -1.0, -2.5],
    ])
    A1 = np.diag([-1.0, -0.5, -0.8, -0.3])
    A2 = np.array([
        [0.0, 0.3, 0.0, 0.0],
        [0.3, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.4],
        [0.0, 0.0, 0.4, 0.0],
    ])
    A3 = np.array([
        [0.0, 0.0, 0.2, 0.0],
        [0.0, 0.0, 0.0, 0.2],
        [0.2, 0.0, 0.0, 0.0],
        [0.0, 0.2, 0.0, 0.0],
    ])
    B0 = np.array([[1.0], [0.5], [0.0], [0.0]])
    C0 = np.array([[0.0, 0.0, 1.0, 0.5]])
    return ParametricSystem(
        n=n,
        q=3,
        E0=np.eye(n),
        A0=A0,
        B0=B0,
        C0=C0,
        E_terms=[None, None, 0.05 * np.eye(n)],
        A_terms=[A1, A2, A3],
    )


DESK_BOUNDS = [(-1.0, 1.0)] * 3


def band_limited_input(seed: int, tau: float = 3.0):
    """Random decaying sum of sines with u(0) = 0 (not L2-normalized)."""
    r = np.random.default_rng(seed)
    freqs = r.uniform(0.3, 3.0, 5)
    amps = r.normal(size=5)

    def u(t):
        acc = np.zeros_like(t)
        for a, w in zip(amps, freqs):
            acc += a * np.sin(w * t)
        return acc * np.exp(-t / tau)

    return u


@pytest.fixture(scope="session")
def desk_psys():
    return make_desk_parametric()


@pytest.fixture(scope="session")
def desk_spec():
    return sg.BasisSpec.uniform(DESK_BOUNDS, sg.build_index_set(3, 2))


@pytest.fixture(scope="session")
def desk_galerkin(desk_psys, desk_spec):
    return sg.assemble(desk_psys, desk_spec)


@pytest.fixture(scope="session")
def desk_norms(desk_galerkin):
    grid = sg.FrequencyGrid.default()
    samples = sg.sample_transfer(desk_galerkin.system, grid)
    return samples, grid, sg.hardy_norms(samples, grid)


@pytest.fixture(scope="session")
def bench_psys():
    return sg.mna_assemble(sg.lowpass_benchmark())


@pytest.fixture(scope="session")
def bench_galerkin_d1(bench_psys):
    spec = sg.BasisSpec.uniform(bench_psys.parameter_bounds, sg.build_index_set(21, 1))
    return sg.assemble(bench_psys, spec)
