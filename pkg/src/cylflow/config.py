"""TOML run configuration with dotted ``key=value`` overrides.

Schema (every key not listed is an error)::

    nu = 0.01                 # required, >= 0
    t_end = 1.0               # required, > 0
    cfl = 0.4
    sample_every = 0.02       # default t_end / 50
    advection = "auto"        # auto | centered | hybrid | upwind

    [grid]                    # required
    nr = 128
    nz = 128
    z_len = 1.0

    [initial_data]            # required
    kind = "gaussian_ring"    # plus the parameters of that kind

    [sweep]
    nu_ladder = [0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125]

    [verify]
    nr = 64
    nz = 64

    [fit]
    q = 1.5
    r = 2.0
    window = [0.1, 1.0]       # default: horizon minus its first 10%
    csv = ""                  # fit an existing diagnostics CSV instead of running

    [convergence]
    resolutions = [[32, 32], [64, 64], [128, 128]]

    [output]
    field_dump = true
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigurationError
from .experiments import DEFAULT_LADDER
from .transport import InitialDataSpec, SimConfig

_REQUIRED = ("nu", "t_end", "grid", "initial_data")

DEFAULTS = {
    "cfl": 0.4,
    "sample_every": None,
    "advection": "auto",
    "sweep": {"nu_ladder": list(DEFAULT_LADDER)},
    "verify": {"nr": 64, "nz": 64},
    "fit": {"q": 1.5, "r": 2.0, "window": None, "csv": ""},
    "convergence": {"resolutions": None},
    "output": {"field_dump": True},
}

_SCHEMA = {
    "nu": float, "t_end": float, "cfl": float, "sample_every": float, "advection": str,
    "grid": {"nr": int, "nz": int, "z_len": float},
    "initial_data": dict,
    "sweep": {"nu_ladder": list},
    "verify": {"nr": int, "nz": int},
    "fit": {"q": float, "r": float, "window": list, "csv": str},
    "convergence": {"resolutions": list},
    "output": {"field_dump": bool},
}


@dataclass
class RunConfig:
    """A validated simulation config plus the experiment sections."""

    sim: SimConfig
    raw: dict
    defaults_applied: list = field(default_factory=list)

    @property
    def sweep(self):
        return self.raw["sweep"]

    @property
    def verify(self):
        return self.raw["verify"]

    @property
    def fit(self):
        return self.raw["fit"]

    @property
    def convergence(self):
        return self.raw["convergence"]

    @property
    def output(self):
        return self.raw["output"]

    def resolved(self) -> dict:
        """Fully resolved config (defaults filled in), JSON-ready and canonical."""
        d = copy.deepcopy(self.raw)
        d["sample_every"] = self.sim.sample_every
        d["initial_data"] = self.sim.initial_data.to_dict()
        return d

    def hash(self) -> str:
        return config_hash(self.resolved())


def config_hash(d: dict) -> str:
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"), allow_nan=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(d: dict, item: str):
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not key=value", key=item)
    key, _, text = item.partition("=")
    parts = [p.strip() for p in key.strip().split(".")]
    if not all(parts):
        raise ConfigurationError("empty key segment", key=key)
    node = d
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigurationError("not a table", key=key)
    node[parts[-1]] = _parse_value(text.strip())


def _coerce(value, kind, key):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number, got {value!r}", key=key)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", key=key)
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"expected true/false, got {value!r}", key=key)
        return value
    if not isinstance(value, kind):
        raise ConfigurationError(f"expected {kind.__name__}, got {value!r}", key=key)
    return value


def _check_keys(d: dict, schema: dict, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if k not in schema:
            raise ConfigurationError("unknown key", key=key)
        kind = schema[k]
        if isinstance(kind, dict):
            if not isinstance(v, dict):
                raise ConfigurationError("expected a table", key=key)
            _check_keys(v, kind, key + ".")
        elif v is not None:
            d[k] = _coerce(v, kind, key)


def load_raw(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}", key="config")
    text = path.read_bytes().decode("utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
        # a manifest carries the resolved config under "config"
        return data["config"] if "manifest_version" in data else data
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"parse error: {exc}", key="config") from exc


def build_config(raw: dict) -> RunConfig:
    raw = copy.deepcopy(raw)
    _check_keys(raw, _SCHEMA)
    for k in _REQUIRED:
        if k not in raw:
            raise ConfigurationError("missing required key", key=k)
    g = raw["grid"]
    for k in ("nr", "nz", "z_len"):
        if k not in g:
            raise ConfigurationError("missing required key", key=f"grid.{k}")
    applied = []
    for k, v in DEFAULTS.items():
        if isinstance(v, dict):
            sect = raw.setdefault(k, {})
            for kk, vv in v.items():
                if sect.get(kk) is None:
                    sect[kk] = copy.deepcopy(vv)
                    applied.append(f"{k}.{kk}")
        elif raw.get(k) is None:
            raw[k] = v
            applied.append(k)
    idata = dict(raw["initial_data"])
    if "kind" not in idata:
        raise ConfigurationError("missing required key", key="initial_data.kind")
    kind = idata.pop("kind")
    for k, v in idata.items():
        if v is not None and (isinstance(v, bool) or not isinstance(v, (int, float))):
            raise ConfigurationError(f"expected a number, got {v!r}", key=f"initial_data.{k}")
    spec = InitialDataSpec(kind, idata)
    sim = SimConfig(nu=raw["nu"], t_end=raw["t_end"], nr=g["nr"], nz=g["nz"], z_len=g["z_len"],
                    initial_data=spec, cfl=raw["cfl"], sample_every=raw["sample_every"],
                    advection=raw["advection"])
    if raw["sample_every"] is None:
        raw["sample_every"] = sim.sample_every
    ladder = raw["sweep"]["nu_ladder"]
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in ladder):
        raise ConfigurationError("expected a list of numbers", key="sweep.nu_ladder")
    raw["sweep"]["nu_ladder"] = [float(v) for v in ladder]
    w = raw["fit"]["window"]
    if w is not None and (len(w) != 2 or not w[0] < w[1]):
        raise ConfigurationError("expected [lo, hi] with lo < hi", key="fit.window")
    if not (1.0 <= raw["fit"]["q"] <= raw["fit"]["r"]):
        raise ConfigurationError("need 1 <= q <= r", key="fit.q")
    if math.isinf(raw["fit"]["r"]):
        raw["fit"]["r"] = math.inf
    return RunConfig(sim, raw, applied)


def parse_config(path, overrides=()) -> RunConfig:
    """Load, override and validate. ``path`` may be a TOML file, a JSON config or a manifest."""
    raw = load_raw(path)
    for item in overrides:
        apply_override(raw, item)
    return build_config(raw)
