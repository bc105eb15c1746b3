"""TOML run configuration.

Example::

    seed = 0

    [grid]
    L = 40.0
    N = 512

    [time]
    T = 1.0
    M = 256

    [params]
    a = 0.0
    b = 0.0

    [model]
    kernel = "gaussian(sigma=1.0,amp=1.0)"
    nonlinearity = "tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)"
    initial = "gaussian(sigma=1.0,amp=1.0)"

    [solver]
    tol = 1e-10
    max_iter = 50
    override_uncertified = false
    window_T = 0.0          # 0 means a single window over [0, T]

    [output]
    directory = "out"
    csv = true
    summary = true

    [certify]
    eps = 1e-8

``grid``, ``time``, ``params`` and ``model.kernel``/``model.nonlinearity``
are required; everything else has the defaults shown.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .catalog import KernelSpec, NonlinearitySpec, parse_kernel, parse_nonlinearity
from .duhamel import ProblemParams
from .spectral import Field, GridSpec, TimeGrid


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


_REQUIRED = object()

# section -> key -> (type, default)
_SCHEMA = {
    "": {"seed": (int, 0)},
    "grid": {"L": (float, _REQUIRED), "N": (int, _REQUIRED)},
    "time": {"T": (float, _REQUIRED), "M": (int, _REQUIRED)},
    "params": {"a": (float, _REQUIRED), "b": (float, _REQUIRED)},
    "model": {
        "kernel": (str, _REQUIRED),
        "nonlinearity": (str, _REQUIRED),
        "initial": (str, "gaussian(sigma=1.0,amp=1.0)"),
    },
    "solver": {
        "tol": (float, 1e-10),
        "max_iter": (int, 50),
        "override_uncertified": (bool, False),
        "window_T": (float, 0.0),
    },
    "output": {"directory": (str, "out"), "csv": (bool, True), "summary": (bool, True)},
    "certify": {"eps": (float, 1e-8)},
}
_REQUIRED_SECTIONS = ("grid", "time", "params", "model")


@dataclass(frozen=True)
class RunConfig:
    L: float
    N: int
    T: float
    M: int
    a: float
    b: float
    kernel: str
    nonlinearity: str
    initial: str = "gaussian(sigma=1.0,amp=1.0)"
    tol: float = 1e-10
    max_iter: int = 50
    override_uncertified: bool = False
    window_T: float = 0.0
    directory: str = "out"
    csv: bool = True
    summary: bool = True
    eps: float = 1e-8
    seed: int = 0

    # assembled objects ----------------------------------------------------

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.L, self.N)

    @property
    def timegrid(self) -> TimeGrid:
        return TimeGrid(self.T, self.M)

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(self.a, self.b)

    def kernel_spec(self) -> KernelSpec:
        return parse_kernel(self.kernel)

    def nonlinearity_spec(self) -> NonlinearitySpec:
        return parse_nonlinearity(self.nonlinearity, self.grid)

    def initial_field(self) -> Field:
        return parse_kernel(self.initial).sample(self.grid)

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        flat = asdict(self)
        out = {"seed": flat["seed"]}
        for section, keys in _SCHEMA.items():
            if section:
                out[section] = {k: flat[k] for k in keys}
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


def _coerce(path: str, value, kind):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


def _check(cond: bool, path: str, rule: str, value):
    if not cond:
        raise ConfigError(f"{path}: {rule} required (got {value!r})")


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a TOML document; raises ConfigError."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from None

    top_keys = set(_SCHEMA[""])
    for key in doc:
        if key not in top_keys and key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown key or section")
    for section in _REQUIRED_SECTIONS:
        if section not in doc:
            raise ConfigError(f"[{section}]: missing required section")

    values = {}
    for section, keys in _SCHEMA.items():
        table = doc if section == "" else doc.get(section, {})
        if not isinstance(table, dict):
            raise ConfigError(f"{section}: expected a table")
        if section:
            for key in table:
                if key not in keys:
                    raise ConfigError(f"{section}.{key}: unknown key")
        for key, (kind, default) in keys.items():
            path = f"{section}.{key}" if section else key
            if key in table:
                values[key] = _coerce(path, table[key], kind)
            elif default is _REQUIRED:
                raise ConfigError(f"{path}: missing required key")
            else:
                values[key] = default

    _check(values["L"] > 0, "grid.L", "L > 0", values["L"])
    _check(values["N"] >= 8 and values["N"] % 2 == 0, "grid.N", "even N ≥ 8", values["N"])
    _check(values["T"] > 0, "time.T", "T > 0", values["T"])
    _check(values["M"] >= 2, "time.M", "M ≥ 2", values["M"])
    _check(values["a"] >= 0, "params.a", "a ≥ 0", values["a"])
    _check(values["tol"] > 0, "solver.tol", "tol > 0", values["tol"])
    _check(values["max_iter"] >= 1, "solver.max_iter", "max_iter ≥ 1", values["max_iter"])
    _check(0 <= values["window_T"] <= values["T"], "solver.window_T", "0 ≤ window_T ≤ T", values["window_T"])
    _check(values["eps"] > 0, "certify.eps", "eps > 0", values["eps"])

    cfg = RunConfig(**values)
    for path, build in (("model.kernel", cfg.kernel_spec),
                        ("model.nonlinearity", cfg.nonlinearity_spec),
                        ("model.initial", cfg.initial_field)):
        try:
            build()
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
