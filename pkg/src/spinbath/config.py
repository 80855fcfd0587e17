"""Declarative experiment configuration (TOML) with strict validation.

Schema, with defaults::

    model = "heisenberg"        # heisenberg | ising | fully_connected
    picture = "effh"            # effh | polaron | rc_bench
    sizes = [4]                 # chain lengths N
    temperatures = [1.0]
    observables = ["S_x", "S_y", "S_z"]   # also corr_x, corr_y, corr_z
    output = "sweep.csv"        # file name (corr-map: file stem) under --out
    threads = 1

    [chain]
    delta = 0.1                 # scalar, or one value per site
    jx = 1.0
    jy = 0.0
    jz = 0.0
    j = 0.0                     # fully_connected only: x-x coupling is j * delta / 8

    [bath]
    scheme = "global"           # global | local | half | pairwise; corr-map accepts a list
    spectral = "brownian"       # brownian (grid = lam) | super_ohmic (grid = alpha)
    omega0 = 10.0               # brownian
    gamma = 0.01                # brownian
    omega_c = 0.5               # super_ohmic
    weights = [1.0, ...]        # optional per-bath multiplier of the grid value

    [grid]
    values = [...]              # or start / stop / count (count defaults to 61)

    [rc]
    levels = 8
    check_convergence = true    # compare against levels + 2

    [numerics]
    quad_rtol = 1e-9
"""
from __future__ import annotations

import copy
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .models import SchemeKind, n_baths
from .spinops import MAX_SITES, DomainError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODELS = ("heisenberg", "ising", "fully_connected")
PICTURES = ("effh", "polaron", "rc_bench")
SPECTRALS = ("brownian", "super_ohmic")
OBSERVABLES = ("S_x", "S_y", "S_z", "corr_x", "corr_y", "corr_z")
DEFAULT_GRID_COUNT = 61

# rc_bench limits per scheme: (max N, max M)
RC_BENCH_LIMITS = {"global": (8, 16), "half": (6, 8)}

DEFAULTS: dict[str, Any] = {
    "model": "heisenberg",
    "picture": "effh",
    "sizes": [4],
    "temperatures": [1.0],
    "observables": ["S_x", "S_y", "S_z"],
    "output": "sweep.csv",
    "threads": 1,
    "chain": {"delta": 0.1, "jx": 1.0, "jy": 0.0, "jz": 0.0, "j": 0.0},
    "bath": {
        "scheme": "global",
        "spectral": "brownian",
        "omega0": 10.0,
        "gamma": 0.01,
        "omega_c": 0.5,
        "weights": None,
    },
    "grid": {"values": None, "start": 0.0, "stop": None, "count": DEFAULT_GRID_COUNT},
    "rc": {"levels": 8, "check_convergence": True},
    "numerics": {"quad_rtol": 1e-9},
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted key path, ``line`` the source line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.field = field
        self.line = line


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    picture: str
    schemes: tuple[str, ...]
    sizes: tuple[int, ...]
    temperatures: tuple[float, ...]
    observables: tuple[str, ...]
    grid: tuple[float, ...]
    output: str
    threads: int
    chain: dict
    bath: dict
    rc: dict
    numerics: dict
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def scheme(self) -> str:
        if len(self.schemes) != 1:
            raise ConfigError("this command needs a single bath scheme", "bath.scheme")
        return self.schemes[0]

    def replace(self, **changes) -> "ExperimentConfig":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(changes)
        return ExperimentConfig(**d)


# ---------------------------------------------------------------------------


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _number(v, path: str, positive=False, nonneg=False) -> float:
    if not _is_number(v):
        raise ConfigError(f"{path} must be a finite number, got {v!r}", path)
    if positive and not v > 0:
        raise ConfigError(f"{path} must be > 0, got {v}", path)
    if nonneg and v < 0:
        raise ConfigError(f"{path} must be >= 0, got {v}", path)
    return float(v)


def _int(v, path: str, minimum: int) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{path} must be an integer, got {v!r}", path)
    if v < minimum:
        raise ConfigError(f"{path} must be >= {minimum}, got {v}", path)
    return v


def _list(v, path: str) -> list:
    if not isinstance(v, list):
        raise ConfigError(f"{path} must be a list, got {v!r}", path)
    if not v:
        raise ConfigError(f"{path} must not be empty", path)
    return v


def _choice(v, path: str, options) -> str:
    if v not in options:
        raise ConfigError(f"{path} must be one of {', '.join(options)}; got {v!r}", path)
    return v


def _merge(data: dict, defaults: dict, prefix: str = "") -> dict:
    """Overlay ``data`` on ``defaults`` rejecting unknown keys."""
    out = copy.deepcopy(defaults)
    for key, val in data.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            raise ConfigError(f"unknown key {path!r}", path)
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{path} must be a table", path)
            out[key] = _merge(val, defaults[key], f"{path}.")
        else:
            out[key] = val
    return out


def expand_grid(grid: dict) -> tuple[float, ...]:
    values = grid.get("values")
    if values is not None:
        if any(grid.get(k) != DEFAULTS["grid"][k] for k in ("stop", "count")):
            raise ConfigError("give grid.values or grid.start/stop/count, not both", "grid")
        vals = [_number(v, "grid.values", nonneg=True) for v in _list(values, "grid.values")]
        return tuple(vals)
    if grid.get("stop") is None:
        raise ConfigError("grid needs either values or stop (with optional start, count)", "grid.stop")
    start = _number(grid["start"], "grid.start", nonneg=True)
    stop = _number(grid["stop"], "grid.stop", nonneg=True)
    count = _int(grid["count"], "grid.count", 1)
    return tuple(float(v) for v in np.linspace(start, stop, count))


def validate(data: dict) -> ExperimentConfig:
    """Validate a parsed mapping and return the populated configuration."""
    d = _merge(data, DEFAULTS)
    model = _choice(d["model"], "model", MODELS)
    picture = _choice(d["picture"], "picture", PICTURES)
    sizes = tuple(_int(v, "sizes", 1) for v in _list(d["sizes"], "sizes"))
    for n in sizes:
        if n > MAX_SITES:
            raise ConfigError(f"sizes contains N={n} above the cap of {MAX_SITES}", "sizes")
    temps = tuple(_number(v, "temperatures", positive=True) for v in _list(d["temperatures"], "temperatures"))
    obs = tuple(_choice(v, "observables", OBSERVABLES) for v in _list(d["observables"], "observables"))
    if len(set(obs)) != len(obs):
        raise ConfigError("observables contains duplicates", "observables")
    if not isinstance(d["output"], str) or not d["output"]:
        raise ConfigError("output must be a non-empty file name", "output")
    threads = _int(d["threads"], "threads", 1)

    chain = d["chain"]
    for k in ("jx", "jy", "jz", "j"):
        chain[k] = _number(chain[k], f"chain.{k}")
    if isinstance(chain["delta"], list):
        chain["delta"] = [_number(v, "chain.delta") for v in _list(chain["delta"], "chain.delta")]
        bad = [n for n in sizes if n != len(chain["delta"])]
        if bad:
            raise ConfigError(
                f"chain.delta has {len(chain['delta'])} entries but sizes include N={bad[0]}", "chain.delta"
            )
    else:
        chain["delta"] = _number(chain["delta"], "chain.delta")
    if model == "ising" and (chain["jy"] or chain["jz"]):
        raise ConfigError("ising model requires chain.jy = chain.jz = 0", "chain.jy")
    if model == "fully_connected" and isinstance(chain["delta"], list):
        raise ConfigError("fully_connected model takes a scalar delta", "chain.delta")

    bath = d["bath"]
    raw_schemes = bath["scheme"]
    scheme_list = raw_schemes if isinstance(raw_schemes, list) else [raw_schemes]
    schemes = tuple(
        _choice(s, "bath.scheme", [k.value for k in SchemeKind]) for s in _list(scheme_list, "bath.scheme")
    )
    spectral = _choice(bath["spectral"], "bath.spectral", SPECTRALS)
    bath["omega0"] = _number(bath["omega0"], "bath.omega0", positive=True)
    bath["gamma"] = _number(bath["gamma"], "bath.gamma", positive=True)
    bath["omega_c"] = _number(bath["omega_c"], "bath.omega_c", positive=True)
    if bath["weights"] is not None:
        bath["weights"] = [_number(v, "bath.weights", nonneg=True) for v in _list(bath["weights"], "bath.weights")]
    for scheme in schemes:
        for n in sizes:
            try:
                nb = n_baths(scheme, n)
            except DomainError as exc:
                raise ConfigError(f"sizes: {exc}", "sizes") from None
            if bath["weights"] is not None and len(bath["weights"]) != nb:
                raise ConfigError(
                    f"bath.weights has {len(bath['weights'])} entries, {scheme} scheme on N={n} needs {nb}",
                    "bath.weights",
                )
    if model == "fully_connected" and schemes != ("global",):
        raise ConfigError("fully_connected model supports only the global scheme", "bath.scheme")
    if picture == "polaron" and spectral != "super_ohmic":
        raise ConfigError("picture = polaron requires bath.spectral = super_ohmic", "bath.spectral")

    grid = expand_grid(d["grid"])

    rc = d["rc"]
    rc["levels"] = _int(rc["levels"], "rc.levels", 1)
    if not isinstance(rc["check_convergence"], bool):
        raise ConfigError("rc.check_convergence must be true or false", "rc.check_convergence")
    if picture == "rc_bench":
        for scheme in schemes:
            if scheme not in RC_BENCH_LIMITS:
                raise ConfigError(
                    f"rc_bench supports schemes {sorted(RC_BENCH_LIMITS)}, got {scheme!r}", "bath.scheme"
                )
            max_n, max_m = RC_BENCH_LIMITS[scheme]
            if max(sizes) > max_n:
                raise ConfigError(f"rc_bench with {scheme} scheme supports N <= {max_n}", "sizes")
            if rc["levels"] > max_m:
                raise ConfigError(f"rc_bench with {scheme} scheme supports levels <= {max_m}", "rc.levels")

    num = d["numerics"]
    num["quad_rtol"] = _number(num["quad_rtol"], "numerics.quad_rtol", positive=True)

    return ExperimentConfig(
        model, picture, schemes, sizes, temps, obs, grid, d["output"], threads,
        chain, bath, rc, num, raw=d,
    )


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        raise ConfigError(f"malformed config: {exc}", None, line) from None
    return validate(data)


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", None)
    cfg = loads(path.read_text())
    return cfg


# ---------------------------------------------------------------------------
# dump


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")


def dump_config(cfg: ExperimentConfig) -> str:
    """TOML text of the fully populated configuration; the grid is written expanded."""
    d = copy.deepcopy(cfg.raw)
    d["grid"] = {"values": list(cfg.grid)}
    lines = []
    for k, v in d.items():
        if not isinstance(v, dict):
            lines.append(f"{k} = {_toml_value(v)}")
    for k, v in d.items():
        if isinstance(v, dict):
            lines.append("")
            lines.append(f"[{k}]")
            for kk, vv in v.items():
                if vv is None:
                    lines.append(f"# {kk} unset")
                else:
                    lines.append(f"{kk} = {_toml_value(vv)}")
    return "\n".join(lines) + "\n"
