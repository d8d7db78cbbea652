import numpy as np
import pytest

from hkel.diagnostics import besov_sup, loglog_slope
from hkel.elastic import InitialData, make_shear_data
from hkel.picard import (
    PicardState,
    SolverConfig,
    det_deviation_sup,
    free_wave_state,
    picard_map,
    picard_solve,
    trace_constraint_residual,
)
from hkel.spectral import Grid
from hkel.waves import box_trajectory, time_derivative


def small_config(**overrides):
    base = dict(
        dimension=2,
        grid_size=16,
        epsilon=1e-2,
        t_end=0.5,
        dt=1 / 32,
        picard_tol=1e-10,
        picard_max_iter=20,
        seed=0,
    )
    base.update(overrides)
    return SolverConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=-0.1)
    with pytest.raises(ValueError):
        SolverConfig(t_end=0.013, dt=0.01)
    with pytest.raises(ValueError):
        SolverConfig(picard_tol=0.0)


def test_zero_data_converges_immediately(grid2):
    cfg = small_config(grid_size=32, epsilon=0.0)
    data = InitialData(np.zeros((2,) + grid2.shape), np.zeros((2,) + grid2.shape))
    result = picard_solve(grid2, data, cfg)
    assert result.converged and result.iterations == 1
    assert np.abs(result.state.G).max() == 0.0


def test_map_of_zero_state_is_free_wave(grid2):
    cfg = small_config(grid_size=32)
    data = make_shear_data(grid2, 1e-2, seed=1, band=2)
    tg = cfg.time_grid()
    free = free_wave_state(grid2, tg, data)
    zero = PicardState(
        tg, np.zeros_like(free.G), np.zeros_like(free.G), np.zeros_like(free.G)
    )
    out = picard_map(grid2, zero, free)
    assert np.array_equal(out.G, free.G)
    assert np.abs(out.H).max() == 0.0


def test_free_seed_square_amplitude_scaling(grid2):
    # with zero data, only the quadratic and cubic terms of the map survive
    cfg = small_config(grid_size=32)
    tg = cfg.time_grid()
    zero_data = InitialData(np.zeros((2,) + grid2.shape), np.zeros((2,) + grid2.shape))
    free_zero = free_wave_state(grid2, tg, zero_data)
    norms = {}
    for eps in (1e-3, 1e-2):
        seed_state = free_wave_state(grid2, tg, make_shear_data(grid2, eps, seed=2, band=2))
        out = picard_map(grid2, seed_state, free_zero)
        norms[eps] = besov_sup(grid2, out.G, 1.0)
    slope = loglog_slope(list(norms), list(norms.values()))
    assert abs(slope - 2.0) <= 0.2


def test_free_wave_state_solves_wave_equation(grid2):
    data = make_shear_data(grid2, 1e-2, seed=3, band=2)
    errs = []
    for steps in (16, 32):
        cfg = small_config(grid_size=32, dt=0.5 / steps)
        tg = cfg.time_grid()
        free = free_wave_state(grid2, tg, data)
        assert np.abs(free.H).max() == 0.0
        box = box_trajectory(grid2, tg, free.G)[1:-1]
        errs.append(float(np.abs(box).max()))
        dG_fd = time_derivative(tg, free.G)
        assert np.abs(dG_fd - free.dG).max() <= 10 * tg.dt**2 * np.abs(free.dG).max() * 40
    assert np.log2(errs[0] / errs[1]) >= 1.8


def test_tracked_box_matches_finite_differences():
    grid = Grid(2, 16)
    data = make_shear_data(grid, 1e-2, seed=4, band=1)
    errs = []
    for steps in (16, 32):
        cfg = small_config(dt=0.5 / steps)
        result = picard_solve(grid, data, cfg)
        state = result.state
        box = box_trajectory(grid, state.tg, state.G)[1:-1]
        errs.append(float(np.abs(box - state.H[1:-1]).max()))
    assert np.log2(errs[0] / errs[1]) >= 1.7


def test_picard_converges_and_satisfies_constraint():
    grid = Grid(2, 16)
    data = make_shear_data(grid, 1e-2, seed=5, band=1)
    cfg = small_config()
    result = picard_solve(grid, data, cfg)
    assert result.converged
    assert all(r < 0.5 for r in result.ratios)
    assert det_deviation_sup(grid, result.state.G) <= 10 * cfg.picard_tol
    worst = max(
        trace_constraint_residual(grid, result.state.G[m])
        for m in range(result.state.tg.nsamples)
    )
    assert worst <= 10 * cfg.picard_tol


def test_det_deviation_decreases_along_iterates():
    grid = Grid(2, 16)
    data = make_shear_data(grid, 1e-2, seed=6, band=1)
    cfg = small_config()
    tg = cfg.time_grid()
    free = free_wave_state(grid, tg, data)
    state = free.copy()
    devs = []
    for _ in range(4):
        state = picard_map(grid, state, free)
        devs.append(det_deviation_sup(grid, state.G))
    assert all(devs[i + 1] <= devs[i] * (1 + 1e-9) for i in range(1, len(devs) - 1))
    assert devs[-1] <= 10 * cfg.picard_tol


def test_picard_deterministic():
    grid = Grid(2, 16)
    data = make_shear_data(grid, 1e-2, seed=7, band=1)
    cfg = small_config()
    a = picard_solve(grid, data, cfg)
    b = picard_solve(grid, data, cfg)
    assert np.array_equal(a.state.G, b.state.G)
    assert a.ratios == b.ratios


def test_picard_rejects_incompatible_data(grid2):
    x = grid2.coords
    f = np.stack([0.3 * np.sin(x[0]), np.zeros(grid2.shape)])
    data = InitialData(f, np.zeros_like(f))
    with pytest.raises(ValueError, match="compatibility"):
        picard_solve(grid2, data, small_config(grid_size=32))


def test_picard_non_convergence_reported():
    grid = Grid(2, 16)
    data = make_shear_data(grid, 1e-2, seed=8, band=1)
    cfg = small_config(picard_max_iter=1, picard_tol=1e-14)
    result = picard_solve(grid, data, cfg)
    assert not result.converged
    assert result.iterations == 1


def test_picard_n3_smoke(grid3):
    data = make_shear_data(grid3, 5e-3, seed=9, band=1)
    cfg = SolverConfig(
        dimension=3,
        grid_size=16,
        epsilon=5e-3,
        t_end=0.25,
        dt=1 / 32,
        picard_tol=1e-9,
    )
    result = picard_solve(grid3, data, cfg)
    assert result.converged
    assert det_deviation_sup(grid3, result.state.G) <= 10 * cfg.picard_tol


def test_pressure_residual_small_at_fixed_point():
    from hkel.elastic import recover_pressure, vector_from_gradient

    grid = Grid(2, 16)
    data = make_shear_data(grid, 1e-2, seed=13, band=1)
    result = picard_solve(grid, data, small_config())
    state = result.state
    worst = 0.0
    for m in range(2, state.tg.nsamples - 2, 4):  # away from one-sided stencils
        boxY = vector_from_gradient(grid, state.H[m])
        _, res = recover_pressure(grid, state.G[m], boxY)
        worst = max(worst, res)
    assert worst <= 1e-6
