"""key=value configuration files.

Blank lines and ``#`` comments are ignored. Unknown keys are rejected so
typos surface as errors instead of silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class Config:
    problem_name: str = "transport"
    grid_n: int = 32
    grid_length: float = 2.0
    anchor_m: float = -0.1
    riccati_rtol: float = 1e-10
    riccati_atol: float = 1e-12
    riccati_t_end: float = 0.5
    riccati_ceiling: float = 1e6
    pinv_rel_tol: float = 1e-10
    recipe_t: float = 0.4
    recipe_kappa: int = 8
    recipe_mode: str = "linear"
    recipe_mtilde_eps: tuple[float, ...] = (0.05, 0.2, 1.0)
    recipe_mtilde_random: int = 0
    recipe_mtilde_files: tuple[str, ...] = ()
    solve_mode: str = "seed"
    solve_mtilde_eps: float = 0.2
    verify_t: float = 0.3
    verify_pairs: int = 20
    verify_trials: int = 100
    verify_amplitude: float = 0.5
    verify_pieces: int = 20
    bench_t: float = 0.4
    bench_n: int = 16
    bench_mtilde_eps: float = 0.2
    bench_kappas: tuple[int, ...] = (2, 4, 8, 16)
    bench_direct_rtols: tuple[float, ...] = (1e-3, 1e-5, 1e-7, 1e-9)
    bench_reference_rtol: float = 1e-12
    custom: dict = field(default_factory=dict)


_KEYS = {
    "problem.name": ("problem_name", str),
    "grid.n": ("grid_n", int),
    "grid.length": ("grid_length", float),
    "anchor.m": ("anchor_m", float),
    "riccati.rtol": ("riccati_rtol", float),
    "riccati.atol": ("riccati_atol", float),
    "riccati.t_end": ("riccati_t_end", float),
    "riccati.ceiling": ("riccati_ceiling", float),
    "pinv.rel_tol": ("pinv_rel_tol", float),
    "recipe.t": ("recipe_t", float),
    "recipe.kappa": ("recipe_kappa", int),
    "recipe.mode": ("recipe_mode", str),
    "recipe.mtilde_eps": ("recipe_mtilde_eps", "floats"),
    "recipe.mtilde_random": ("recipe_mtilde_random", int),
    "recipe.mtilde_files": ("recipe_mtilde_files", "paths"),
    "solve.mode": ("solve_mode", str),
    "solve.mtilde_eps": ("solve_mtilde_eps", float),
    "verify.t": ("verify_t", float),
    "verify.pairs": ("verify_pairs", int),
    "verify.trials": ("verify_trials", int),
    "verify.amplitude": ("verify_amplitude", float),
    "verify.pieces": ("verify_pieces", int),
    "bench.t": ("bench_t", float),
    "bench.n": ("bench_n", int),
    "bench.mtilde_eps": ("bench_mtilde_eps", float),
    "bench.kappas": ("bench_kappas", "ints"),
    "bench.direct_rtols": ("bench_direct_rtols", "floats"),
    "bench.reference_rtol": ("bench_reference_rtol", float),
}
_CUSTOM_KEYS = ("A", "sigma", "C", "M")


def _convert(key: str, raw: str, kind, base: Path):
    try:
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if kind == "paths":
            return tuple(str(base / v.strip()) for v in raw.split(",") if v.strip())
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def validate(cfg: Config) -> Config:
    if cfg.problem_name not in ("transport", "custom"):
        raise ConfigError(f"problem.name: must be 'transport' or 'custom', got {cfg.problem_name!r}")
    if cfg.grid_n < 4:
        raise ConfigError("grid.n: must be >= 4")
    if cfg.grid_length <= 0:
        raise ConfigError("grid.length: must be positive")
    if cfg.anchor_m >= 0:
        raise ConfigError(f"anchor.m: must be negative, got {cfg.anchor_m}")
    for name in ("riccati_rtol", "riccati_atol", "pinv_rel_tol", "riccati_ceiling"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name.replace('_', '.', 1)}: must be positive")
    if cfg.riccati_t_end <= 0:
        raise ConfigError("riccati.t_end: must be positive")
    if cfg.recipe_t < 0:
        raise ConfigError("recipe.t: must be non-negative")
    if cfg.recipe_kappa < 1:
        raise ConfigError("recipe.kappa: must be >= 1")
    if cfg.recipe_mode not in ("linear", "doubling"):
        raise ConfigError(f"recipe.mode: must be 'linear' or 'doubling', got {cfg.recipe_mode!r}")
    if cfg.recipe_mode == "doubling" and cfg.recipe_kappa & (cfg.recipe_kappa - 1):
        raise ConfigError(f"recipe.kappa: doubling mode needs a power of two, got {cfg.recipe_kappa}")
    if any(e <= 0 for e in cfg.recipe_mtilde_eps):
        raise ConfigError("recipe.mtilde_eps: entries must be positive")
    if cfg.solve_mode not in ("seed", "direct"):
        raise ConfigError(f"solve.mode: must be 'seed' or 'direct', got {cfg.solve_mode!r}")
    if cfg.problem_name == "custom":
        missing = [k for k in _CUSTOM_KEYS if k not in cfg.custom]
        if missing:
            raise ConfigError(f"custom.{missing[0]}: required when problem.name=custom")
    return cfg


def parse_config(text: str, base: Path = Path(".")) -> Config:
    values: dict = {}
    custom: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key.startswith("custom."):
            name = key[len("custom."):]
            if name not in _CUSTOM_KEYS:
                raise ConfigError(f"{key}: unknown custom matrix (expected one of {_CUSTOM_KEYS})")
            custom[name] = str(base / raw)
            continue
        if key not in _KEYS:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        attr, kind = _KEYS[key]
        values[attr] = _convert(key, raw, kind, base)
    return validate(Config(**values, custom=custom))


def load_config(path: str | Path | None = None, **overrides) -> Config:
    if path is None:
        cfg = Config()
    else:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"--config: {exc}") from None
        cfg = parse_config(text, base=path.parent)
    if overrides:
        known = {f.name for f in fields(Config)}
        bad = set(overrides) - known
        if bad:
            raise ConfigError(f"unknown override(s): {sorted(bad)}")
        cfg = replace(cfg, **overrides)
    return validate(cfg)
