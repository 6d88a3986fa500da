"""Flat key=value experiment configuration with CLI overrides.

The file format is one ``key = value`` pair per line ('#' comments and blank
lines ignored); the same keys are accepted from repeatable ``--set key=value``
flags, which win over the file.  Unknown keys are rejected outright so a typo
cannot silently fall back to a default.
"""

import math
from dataclasses import dataclass, fields, replace

from . import DEFAULT_SEED
from . import domain_map as dm
from . import lattice
from .errors import ConfigError

PI = math.pi


def _parse_floats(text):
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v != "")


def _parse_ints(text):
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v != "")


@dataclass(frozen=True)
class ExperimentConfig:
    map_family: str = "identity"
    map_a: float = 1.0
    map_b: float = 1.0
    map_eps: float = 0.0
    map_cx: float = PI / 2.0
    map_cy: float = PI / 2.0
    map_width: float = 0.8
    M: int = 16
    n_1d: int = 40
    F_kind: str = "ball"
    F_N: int = 4
    F_count: int = 6
    F_modes: str = ""
    p_list: tuple = (2.0,)
    sweep: tuple = ()
    seed: int = DEFAULT_SEED
    restarts: int = 8
    iters: int = 60
    nodes: int = 64
    nodes_list: tuple = (32, 64)
    N_max: int = 40
    N_list: tuple = (4, 8, 16)
    sample_density: int = 400
    metrics_density: int = 128
    k_eigen: int = 20
    out: str = ""


# key -> (dataclass field, parser)
CONFIG_KEYS = {
    "map.family": ("map_family", str),
    "map.a": ("map_a", float),
    "map.b": ("map_b", float),
    "map.eps": ("map_eps", float),
    "map.cx": ("map_cx", float),
    "map.cy": ("map_cy", float),
    "map.width": ("map_width", float),
    "M": ("M", int),
    "n_1d": ("n_1d", int),
    "F.kind": ("F_kind", str),
    "F.N": ("F_N", int),
    "F.count": ("F_count", int),
    "F.modes": ("F_modes", str),
    "p_list": ("p_list", _parse_floats),
    "sweep": ("sweep", _parse_floats),
    "seed": ("seed", int),
    "restarts": ("restarts", int),
    "iters": ("iters", int),
    "nodes": ("nodes", int),
    "nodes_list": ("nodes_list", _parse_ints),
    "N_max": ("N_max", int),
    "N_list": ("N_list", _parse_ints),
    "sample_density": ("sample_density", int),
    "metrics_density": ("metrics_density", int),
    "k_eigen": ("k_eigen", int),
    "out": ("out", str),
}

_FAMILIES = ("identity", "affine", "conformal_quadratic", "bump")


def parse_config_file(path):
    """Read key=value pairs from a file; raise ConfigError on malformed lines."""
    pairs = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, value = line.split("=", 1)
            pairs[key.strip()] = value.strip()
    return pairs


def build_config(file_pairs=None, overrides=None) -> ExperimentConfig:
    """Merge defaults, file pairs, and --set overrides into a validated config."""
    cfg = ExperimentConfig()
    for source in (file_pairs or {}, overrides or {}):
        for key, value in source.items():
            if key not in CONFIG_KEYS:
                known = ", ".join(sorted(CONFIG_KEYS))
                raise ConfigError(f"unknown config key {key!r} (known keys: {known})")
            attr, parser = CONFIG_KEYS[key]
            try:
                cfg = replace(cfg, **{attr: parser(value)})
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    if cfg.map_family not in _FAMILIES:
        raise ConfigError(
            f"map.family must be one of {_FAMILIES}, got {cfg.map_family!r}"
        )
    if cfg.M < 2:
        raise ConfigError("M must be >= 2")
    if cfg.n_1d < 4:
        raise ConfigError("n_1d must be >= 4")
    if cfg.F_kind not in ("square", "ball", "lowest", "list"):
        raise ConfigError(f"F.kind must be square|ball|lowest|list, got {cfg.F_kind!r}")
    for p in cfg.p_list:
        if not (1.0 < p < math.inf):
            raise ConfigError(f"p values must lie in (1, inf), got {p}")
    if cfg.restarts < 1 or cfg.iters < 1:
        raise ConfigError("restarts and iters must be positive")
    if cfg.nodes < 4 or any(n < 4 for n in cfg.nodes_list):
        raise ConfigError("contour node counts must be >= 4")
    if cfg.N_max < 1 or cfg.N_max > 60:
        raise ConfigError("N_max must lie in [1, 60]")


def resolve_index_set(cfg: ExperimentConfig) -> lattice.IndexSet:
    """Build the index set F the config describes."""
    if cfg.F_kind == "square":
        return lattice.cutoff_square(cfg.F_N)
    if cfg.F_kind == "ball":
        return lattice.cutoff_ball(cfg.F_N)
    if cfg.F_kind == "lowest":
        return lattice.lowest_modes(cfg.F_count)
    if not cfg.F_modes:
        raise ConfigError("F.kind = list requires F.modes, e.g. '1:1,1:2,2:1'")
    modes = []
    for token in cfg.F_modes.replace(";", ",").split(","):
        if not token:
            continue
        try:
            m, n = token.split(":")
            modes.append(lattice.LatticeMode(int(m), int(n)))
        except ValueError as exc:
            raise ConfigError(f"bad F.modes token {token!r}") from exc
    return lattice.IndexSet(tuple(modes), label="custom")


def resolve_map(cfg: ExperimentConfig, deviation=None):
    """Instantiate the configured map family.

    ``deviation`` rescales the family's distance from the identity: for bump
    and conformal families it is the absolute displacement amplitude, for
    the affine family it multiplies (a - 1, b - 1).  None keeps the
    configured parameters.
    """
    family = cfg.map_family
    try:
        if family == "identity":
            return dm.family_identity()
        if family == "affine":
            t = 1.0 if deviation is None else deviation
            return dm.family_affine(
                1.0 + t * (cfg.map_a - 1.0), 1.0 + t * (cfg.map_b - 1.0)
            )
        if family == "conformal_quadratic":
            eps = cfg.map_eps if deviation is None else deviation
            return dm.family_conformal_quadratic(eps)
        eps = cfg.map_eps if deviation is None else deviation
        return dm.family_bump(eps, center=(cfg.map_cx, cfg.map_cy), width=cfg.map_width)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_values(cfg: ExperimentConfig):
    """The deviation sweep; defaults depend on the family."""
    if cfg.sweep:
        return cfg.sweep
    if cfg.map_family in ("bump", "conformal_quadratic"):
        return (cfg.map_eps,)
    return (1.0,)


def config_echo(cfg: ExperimentConfig):
    """key = value lines describing the configuration, for CSV headers."""
    lines = []
    for key, (attr, _) in CONFIG_KEYS.items():
        value = getattr(cfg, attr)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return lines
