import numpy as np
import pytest

from hkel.diagnostics import energy
from hkel.spectral import random_mean_free
from hkel.waves import (
    TimeGrid,
    box_fd,
    box_trajectory,
    duhamel,
    duhamel_trajectory,
    free_wave,
    free_wave_deriv,
    time_derivative,
)


def free_trajectory(grid, tg, f, g):
    u = np.empty((tg.nsamples,) + grid.shape)
    for m, t in enumerate(tg.times):
        u[m] = free_wave(grid, f, g, t)
    return u


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.1, 3)


def test_free_wave_at_zero(grid2, rng):
    f = rng.standard_normal(grid2.shape)
    g = random_mean_free(grid2, rng)
    assert np.abs(free_wave(grid2, f, g, 0.0) - f).max() <= 1e-14 * np.abs(f).max()


def test_free_wave_cosine_closed_form(grid2):
    x = grid2.coords
    f = np.cos(2 * x[0])
    out = free_wave(grid2, f, np.zeros(grid2.shape), np.pi / 2)
    assert np.abs(out + f).max() <= 1e-10


def test_free_wave_sine_closed_form(grid2):
    x = grid2.coords
    g = np.cos(x[1])
    out = free_wave(grid2, np.zeros(grid2.shape), g, np.pi)
    assert np.abs(out).max() <= 1e-10


def test_free_wave_rejects_mean_velocity(grid2):
    with pytest.raises(ValueError, match="mean-free"):
        free_wave(grid2, np.zeros(grid2.shape), np.ones(grid2.shape), 1.0)


def test_free_wave_constant_f_propagates(grid2):
    f = 3.0 * np.ones(grid2.shape)
    out = free_wave(grid2, f, np.zeros(grid2.shape), 2.0)
    assert np.abs(out - 3.0).max() <= 1e-13


def test_propagator_group_law(grid2, rng):
    f = random_mean_free(grid2, rng, band=6)
    g = random_mean_free(grid2, rng, band=6)
    t1, t2 = 0.7, 1.9
    direct = free_wave(grid2, f, g, t1 + t2)
    f_mid = free_wave(grid2, f, g, t1)
    g_mid = free_wave_deriv(grid2, f, g, t1)
    stepped = free_wave(grid2, f_mid, g_mid, t2)
    assert np.abs(direct - stepped).max() <= 1e-11 * np.abs(f).max()


def test_free_wave_energy_constant(grid2, rng):
    f = random_mean_free(grid2, rng, band=6)
    g = random_mean_free(grid2, rng, band=6)
    values = []
    for t in (0.0, 0.5, 1.3, 4.0):
        u = free_wave(grid2, f, g, t)
        du = free_wave_deriv(grid2, f, g, t)
        values.append(energy(grid2, du, grid2.gradient(u)))
    values = np.array(values)
    assert np.abs(values - values[0]).max() <= 1e-12 * values[0]


# -- duhamel --------------------------------------------------------------------


def test_duhamel_zero_forcing(grid2):
    tg = TimeGrid(0.1, 10)
    F = np.zeros((tg.nsamples,) + grid2.shape)
    assert np.abs(duhamel(grid2, tg, F, 10)).max() == 0.0
    assert np.abs(duhamel_trajectory(grid2, tg, F)).max() == 0.0


def closed_form_error(grid, steps):
    # F(s, x) = cos(x1): boxinv F(t) = (1 - cos t) cos(x1)
    x = grid.coords
    g = np.cos(x[0])
    tg = TimeGrid(np.pi / steps, steps)
    F = np.broadcast_to(g, (tg.nsamples,) + grid.shape)
    got = duhamel(grid, tg, F, steps)
    return float(np.abs(got - 2.0 * g).max())


def test_duhamel_closed_form_and_order(grid2):
    e1 = closed_form_error(grid2, 64)
    e2 = closed_form_error(grid2, 128)
    assert e1 <= 1e-2
    order = np.log2(e1 / e2)
    assert abs(order - 2.0) <= 0.1


def test_duhamel_trajectory_matches_single_time(grid2, rng):
    tg = TimeGrid(0.05, 20)
    F = np.empty((tg.nsamples,) + grid2.shape)
    for m in range(tg.nsamples):
        F[m] = random_mean_free(grid2, rng, band=6)
    traj = duhamel_trajectory(grid2, tg, F)
    for m in (0, 1, 7, 20):
        single = duhamel(grid2, tg, F, m)
        assert np.abs(traj[m] - single).max() <= 1e-12 * max(np.abs(single).max(), 1e-30)


def test_duhamel_derivative_kernel_order(grid2):
    x = grid2.coords
    g = np.cos(x[0])
    errs = []
    for steps in (64, 128):
        tg = TimeGrid(np.pi / steps, steps)
        F = np.broadcast_to(g, (tg.nsamples,) + grid2.shape)
        _, dtraj = duhamel_trajectory(grid2, tg, F, derivative=True)
        # d/dt (1 - cos t) cos(x) = sin(t) cos(x); at t = pi/2 this is cos(x)
        m = steps // 2
        errs.append(float(np.abs(dtraj[m] - np.sin(tg.times[m]) * g).max()))
    assert abs(np.log2(errs[0] / errs[1]) - 2.0) <= 0.15


def test_duhamel_rejects_off_grid_time(grid2):
    tg = TimeGrid(0.1, 10)
    F = np.zeros((tg.nsamples,) + grid2.shape)
    with pytest.raises(ValueError):
        duhamel(grid2, tg, F, 11)


# -- finite-difference box ---------------------------------------------------------


def test_box_fd_quadratic_exact(grid2):
    tg = TimeGrid(0.2, 10)
    u = np.empty((tg.nsamples,) + grid2.shape)
    for m, t in enumerate(tg.times):
        u[m] = 0.5 * t**2
    for m in (1, 5, 9):
        assert np.abs(box_fd(grid2, tg, u, m) - 1.0).max() <= 1e-12


def test_box_fd_boundary_rejected(grid2):
    tg = TimeGrid(0.1, 8)
    u = np.zeros((tg.nsamples,) + grid2.shape)
    with pytest.raises(ValueError):
        box_fd(grid2, tg, u, 0)
    with pytest.raises(ValueError):
        box_fd(grid2, tg, u, 8)


def test_box_fd_linear(grid2, rng):
    tg = TimeGrid(0.1, 8)
    shape = (tg.nsamples,) + grid2.shape
    u = rng.standard_normal(shape)
    v = rng.standard_normal(shape)
    lhs = box_fd(grid2, tg, 2.0 * u + 3.0 * v, 4)
    rhs = 2.0 * box_fd(grid2, tg, u, 4) + 3.0 * box_fd(grid2, tg, v, 4)
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(np.abs(lhs).max(), 1.0)


def test_box_fd_annihilates_free_waves_at_second_order(grid2, rng):
    f = random_mean_free(grid2, rng, band=4)
    g = random_mean_free(grid2, rng, band=4)
    errs = []
    for steps in (32, 64):
        tg = TimeGrid(1.0 / steps, steps)
        u = free_trajectory(grid2, tg, f, g)
        errs.append(float(np.abs(box_fd(grid2, tg, u, steps // 2)).max()))
    order = np.log2(errs[0] / errs[1])
    assert order >= 1.9


def test_box_fd_recovers_duhamel_forcing(grid2, rng):
    # box of a Duhamel trajectory reproduces the forcing to O(dt^2)
    F_poly = random_mean_free(grid2, rng, band=4)
    errs = []
    for steps in (32, 64):
        tg = TimeGrid(1.0 / steps, steps)
        envelope = np.cos(tg.times).reshape(-1, 1, 1)
        F = envelope * F_poly
        traj = duhamel_trajectory(grid2, tg, F)
        m = steps // 2
        got = box_fd(grid2, tg, traj, m)
        errs.append(float(np.abs(got - F[m]).max()))
    order = np.log2(errs[0] / errs[1])
    assert order >= 1.9


def test_time_derivative_stencils(grid2):
    tg = TimeGrid(0.1, 10)
    u = np.empty((tg.nsamples, 1, 1))
    u[:, 0, 0] = tg.times**2
    got = time_derivative(tg, u)[:, 0, 0]
    assert np.abs(got - 2 * tg.times).max() <= 1e-12


def test_box_trajectory_endpoints_second_order(grid2, rng):
    f = random_mean_free(grid2, rng, band=3)
    g = random_mean_free(grid2, rng, band=3)
    errs = []
    for steps in (32, 64):
        tg = TimeGrid(1.0 / steps, steps)
        u = free_trajectory(grid2, tg, f, g)
        b = box_trajectory(grid2, tg, u)
        errs.append(float(max(np.abs(b[0]).max(), np.abs(b[-1]).max())))
    assert np.log2(errs[0] / errs[1]) >= 1.7


def test_duhamel_zero_mode_kernel(grid2):
    # spatially constant forcing: the zero-mode kernel (t - s) integrates
    # F = c to c t^2 / 2
    tg = TimeGrid(1 / 64, 64)
    F = np.full((tg.nsamples,) + grid2.shape, 3.0)
    got = duhamel(grid2, tg, F, 64)
    expected = 3.0 * tg.horizon**2 / 2.0
    assert np.abs(got - expected).max() <= 1e-10
    traj = duhamel_trajectory(grid2, tg, F)
    assert np.abs(traj[64] - expected).max() <= 1e-10
