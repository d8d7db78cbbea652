"""Flat key-value run configuration with strict validation.

The format is one ``key = value`` pair per line, ``#`` comments, no
sections.  Unknown keys are rejected by name: the parameter space is small
enough that silent typo-driven misconfiguration is the bigger hazard.
"""

from dataclasses import dataclass, fields

from .picard import SolverConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dimension: int = 2
    grid_n: int = 64
    epsilon: float = 1e-2
    t_end: float = 5.0
    dt: float = 0.01
    solver: str = "picard"
    picard_tol: float = 1e-9
    picard_max_iter: int = 20
    pressure_tol: float = 1e-10
    pressure_max_iter: int = 400
    seed: int = 0
    init: str = "shear_composition"
    output_dir: str = "out"
    snapshot_every: int = 0
    diagnostics_every: int = 1
    sweep_epsilons: tuple = ()

    def solver_config(self, epsilon=None):
        return SolverConfig(
            dimension=self.dimension,
            grid_size=self.grid_n,
            epsilon=self.epsilon if epsilon is None else epsilon,
            t_end=self.t_end,
            dt=self.dt,
            picard_tol=self.picard_tol,
            picard_max_iter=self.picard_max_iter,
            pressure_tol=self.pressure_tol,
            pressure_max_iter=self.pressure_max_iter,
            seed=self.seed,
        )


_REQUIRED = ("dimension", "grid_n", "epsilon", "t_end", "dt")

_PARSERS = {
    "dimension": int,
    "grid_n": int,
    "epsilon": float,
    "t_end": float,
    "dt": float,
    "solver": str,
    "picard_tol": float,
    "picard_max_iter": int,
    "pressure_tol": float,
    "pressure_max_iter": int,
    "seed": int,
    "init": str,
    "output_dir": str,
    "snapshot_every": int,
    "diagnostics_every": int,
    "sweep_epsilons": lambda v: tuple(float(x) for x in v.split(",") if x.strip()),
}


def parse_config(text):
    """Parse and fully validate configuration text into a RunConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {value!r}") from exc
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key '{key}'")
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.dimension not in (2, 3):
        raise ConfigError("dimension must be 2 or 3")
    if cfg.grid_n < 8 or cfg.grid_n & (cfg.grid_n - 1) != 0:
        raise ConfigError("grid_n must be a power of two >= 8")
    if cfg.epsilon < 0:
        raise ConfigError("epsilon must be nonnegative")
    if cfg.dt <= 0:
        raise ConfigError("dt must be positive")
    if cfg.t_end <= 0:
        raise ConfigError("t_end must be positive")
    steps = round(cfg.t_end / cfg.dt)
    if steps < 4 or abs(steps * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ConfigError("t_end must be a multiple (>= 4 steps) of dt")
    if cfg.solver not in ("picard", "direct"):
        raise ConfigError("solver must be 'picard' or 'direct'")
    if cfg.picard_tol <= 0:
        raise ConfigError("picard_tol must be positive")
    if cfg.pressure_tol <= 0:
        raise ConfigError("pressure_tol must be positive")
    if cfg.picard_max_iter < 1:
        raise ConfigError("picard_max_iter must be at least 1")
    if cfg.pressure_max_iter < 1:
        raise ConfigError("pressure_max_iter must be at least 1")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if not (cfg.init == "shear_composition" or cfg.init.startswith("file:")):
        raise ConfigError("init must be 'shear_composition' or 'file:<snapshot path>'")
    if cfg.snapshot_every < 0:
        raise ConfigError("snapshot_every must be nonnegative")
    if cfg.diagnostics_every < 1:
        raise ConfigError("diagnostics_every must be at least 1")


def format_config(cfg):
    """Render a RunConfig back into parseable text (provenance echo)."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "sweep_epsilons":
            value = ",".join(repr(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
