"""Command-line harness: simulate, sweep, check-data, selftest."""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, format_config, parse_config
from .diagnostics import (
    VARIATION_MAX_SAMPLES,
    DiagnosticsReport,
    SweepRow,
    besov_norm,
    besov_sup,
    data_norm,
    energy,
    s_surrogate,
    solution_norm,
    sweep_report,
)
from .direct import run_direct
from .elastic import (
    InitialData,
    compatibility_residuals,
    det_pointwise,
    make_shear_data,
    recover_pressure,
    vector_from_gradient,
    velocity_residual_transposed,
)
from .picard import COMPATIBILITY_TOL, free_wave_state, picard_solve
from .selftest import run_selftest
from .snapshots import read_snapshot, write_snapshot
from .waves import box_trajectory
from .spectral import Grid

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class SimArtifacts:
    """In-memory products of one simulation, reused by sweep analytics."""

    def __init__(self, grid, data, tg, G, dG, report):
        self.grid = grid
        self.data = data
        self.tg = tg
        self.G = G
        self.dG = dG
        self.report = report


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hkel",
        description="Pseudo-spectral incompressible Hookean elastodynamics toolkit",
    )
    parser.add_argument("--version", action="version", version=f"hkel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, needs_cfg in (
        ("simulate", True),
        ("sweep", True),
        ("check-data", True),
        ("selftest", False),
    ):
        p = sub.add_parser(name)
        if needs_cfg:
            p.add_argument("config", help="path to a key = value configuration file")
            p.add_argument("--output", help="override output_dir from the config")
        if name == "sweep":
            p.add_argument(
                "--epsilons",
                help="comma-separated amplitudes (overrides sweep_epsilons)",
            )
    args = parser.parse_args(argv)

    if args.command == "selftest":
        return EXIT_OK if run_selftest() else EXIT_ERROR

    try:
        cfg = parse_config(Path(args.config).read_text())
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.output:
        cfg.output_dir = args.output

    try:
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "check-data":
            return cmd_check_data(cfg)
        if args.command == "sweep":
            epsilons = cfg.sweep_epsilons
            if getattr(args, "epsilons", None):
                epsilons = tuple(float(x) for x in args.epsilons.split(",") if x.strip())
            return cmd_sweep(cfg, epsilons)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    raise AssertionError(f"unhandled command {args.command}")


# -- data loading -----------------------------------------------------------


def load_initial_data(grid, cfg, epsilon=None):
    eps = cfg.epsilon if epsilon is None else epsilon
    if cfg.init == "shear_composition":
        return make_shear_data(grid, eps, seed=cfg.seed)
    path = cfg.init[len("file:") :]
    n, size, _, comps = read_snapshot(path)
    if n != grid.n or size != grid.size:
        raise ConfigError(
            f"snapshot {path} is {n}d N={size}, config wants {grid.n}d N={grid.size}"
        )
    if comps.shape[0] != 2 * grid.n:
        raise ConfigError(
            f"snapshot {path} must stack f and g ({2 * grid.n} components), "
            f"found {comps.shape[0]}"
        )
    return InitialData(comps[: grid.n], comps[grid.n :])


# -- simulate ----------------------------------------------------------------


def cmd_simulate(cfg, epsilon=None, subdir=None):
    code, _ = run_one(cfg, epsilon, subdir)
    return code


def run_one(cfg, epsilon=None, subdir=None):
    """Run one simulation; returns (exit code, artifacts or None)."""
    outdir = Path(cfg.output_dir) if subdir is None else Path(cfg.output_dir) / subdir
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(format_config(cfg))

    grid = Grid(cfg.dimension, cfg.grid_n)
    data = load_initial_data(grid, cfg, epsilon)
    r1, r2 = compatibility_residuals(grid, data)
    if max(r1, r2) > COMPATIBILITY_TOL:
        print(f"error: incompatible initial data: residuals ({r1:.2e}, {r2:.2e})",
              file=sys.stderr)
        return EXIT_ERROR, None

    started = time.perf_counter()
    report = DiagnosticsReport()
    solver_cfg = cfg.solver_config(epsilon)
    tg = solver_cfg.time_grid()
    if cfg.solver == "picard":
        result = picard_solve(grid, data, solver_cfg, check_compatibility=False)
        G_ts, dG_ts = result.state.G, result.state.dG
        boxY_ts = [vector_from_gradient(grid, Hm) for Hm in result.state.H]
        report.ratios = list(result.ratios)
        report.converged = result.converged
        report.iterations = result.iterations
    else:
        try:
            run = run_direct(grid, data, solver_cfg)
        except RuntimeError as exc:
            print(f"not converged: {exc}", file=sys.stderr)
            return EXIT_NOT_CONVERGED, None
        G_ts = run.G
        dG_ts = np.stack([grid.jacobian(v) for v in run.velocity])
        boxY_ts = box_trajectory(grid, tg, run.Y)
        velocities = run.velocity
        report.iterations = int(np.max(run.pressure_iterations))

    s = grid.n / 2.0
    eye = np.eye(grid.n).reshape((grid.n, grid.n) + (1,) * grid.n)
    for m in range(0, tg.nsamples, cfg.diagnostics_every):
        Gm = G_ts[m]
        if cfg.solver == "picard":
            vel = vector_from_gradient(grid, dG_ts[m])
        else:
            vel = velocities[m]
        _, curl_res = recover_pressure(grid, Gm, boxY_ts[m])
        report.add_row(
            tg.times[m],
            besov_norm(grid, Gm, s),
            besov_norm(grid, dG_ts[m], s - 1.0),
            energy(grid, vel, Gm),
            float(np.abs(det_pointwise(eye + Gm) - 1.0).max()),
            curl_res,
        )
    total, variation = s_surrogate(grid, tg, G_ts, dG_ts)
    report.s_surrogate = total
    report.s_variation_part = variation
    report.variation_stride = max(1, -(-tg.nsamples // VARIATION_MAX_SAMPLES))
    report.wall_clock = time.perf_counter() - started

    write_csv(outdir / "diagnostics.csv", DiagnosticsReport.CSV_COLUMNS, report.row_arrays())
    if cfg.snapshot_every > 0:
        for m in range(0, tg.nsamples, cfg.snapshot_every):
            write_snapshot(
                outdir / f"snapshot_{m:06d}.hkel",
                grid.n,
                grid.size,
                tg.times[m],
                G_ts[m].reshape((-1,) + grid.shape),
            )
    write_run_summary(outdir / "report.txt", cfg, report, r1, r2)
    artifacts = SimArtifacts(grid, data, tg, G_ts, dG_ts, report)
    if not report.converged:
        print(f"not converged after {report.iterations} iterations; "
              f"ratios: {', '.join(f'{r:.3f}' for r in report.ratios)}", file=sys.stderr)
        return EXIT_NOT_CONVERGED, artifacts
    return EXIT_OK, artifacts


def write_csv(path, columns, arrays):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(f"{x:.16e}" for x in row) + "\n")


def write_run_summary(path, cfg, report, r1, r2):
    lines = [
        f"hkel {__version__}",
        f"solver = {cfg.solver}",
        f"converged = {report.converged}",
        f"iterations = {report.iterations}",
        f"compatibility_residuals = {r1:.16e} {r2:.16e}",
        f"picard_ratios = {' '.join(f'{r:.16e}' for r in report.ratios)}",
        f"s_surrogate = {report.s_surrogate:.16e}",
        f"s_variation_part = {report.s_variation_part:.16e}",
        f"variation_stride = {report.variation_stride}",
        f"rng = philox (counter-based), seed = {cfg.seed}",
        f"wall_clock_s = {report.wall_clock:.3f}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


# -- sweep ---------------------------------------------------------------------


SWEEP_COLUMNS = (
    "epsilon",
    "data_norm",
    "solution_norm",
    "ratio",
    "first_picard_ratio",
    "iterations",
    "converged",
    "free_deviation",
    "monotone",
)


def cmd_sweep(cfg, epsilons):
    if len(epsilons) < 3:
        raise ConfigError("sweep needs at least 3 amplitudes (key sweep_epsilons or --epsilons)")
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = Grid(cfg.dimension, cfg.grid_n)
    rows = []
    all_ok = True
    for eps in epsilons:
        code, art = run_one(cfg, epsilon=eps, subdir=f"eps_{eps:g}")
        if code == EXIT_ERROR:
            return EXIT_ERROR
        all_ok = all_ok and code == EXIT_OK
        rows.append(_sweep_row(grid, eps, art))
    rows = sweep_report(rows)
    with open(outdir / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                f"{r.epsilon:.16e},{r.data_norm:.16e},{r.solution_norm:.16e},"
                f"{r.ratio:.16e},{r.first_picard_ratio:.16e},{r.iterations},"
                f"{int(r.converged)},{r.free_deviation:.16e},{int(r.monotone)}\n"
            )
    return EXIT_OK if all_ok else EXIT_NOT_CONVERGED


def _sweep_row(grid, eps, art):
    """Sweep analytics from one run's artifacts."""
    free = free_wave_state(grid, art.tg, art.data)
    dn = data_norm(grid, art.data)
    sn = solution_norm(grid, art.G, art.dG)
    return SweepRow(
        epsilon=eps,
        data_norm=dn,
        solution_norm=sn,
        ratio=sn / dn if dn > 0 else 0.0,
        first_picard_ratio=art.report.ratios[0] if art.report.ratios else 0.0,
        iterations=art.report.iterations,
        converged=art.report.converged,
        free_deviation=besov_sup(grid, art.G - free.G, grid.n / 2.0),
    )


# -- check-data ------------------------------------------------------------------


def cmd_check_data(cfg):
    grid = Grid(cfg.dimension, cfg.grid_n)
    data = load_initial_data(grid, cfg)
    r1, r2 = compatibility_residuals(grid, data)
    r2t = velocity_residual_transposed(grid, data)
    print(f"det(I + grad f) - 1            : {r1:.6e}")
    print(f"velocity residual              : {r2:.6e}")
    print(f"velocity residual (transposed) : {r2t:.6e}")
    ok = max(r1, r2) <= COMPATIBILITY_TOL
    print(f"compatible within {COMPATIBILITY_TOL:g}: {'yes' if ok else 'no'}")
    return EXIT_OK if ok else EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
