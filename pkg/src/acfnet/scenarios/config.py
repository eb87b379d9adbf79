"""
Declarative scenario configuration.

A scenario is a JSON object; every key is validated and unknown keys are
rejected.  Schema (all keys except ``id`` and ``kind`` are optional):

    id              free string, used for output file names
    kind            "trace" | "sweep" | "experimental" | "chain"
    model           "full" | "effective" | "full_with_feedback"   (default "full")
    params          SystemParams fields, plus "Omega_MW_ratio" (Omega_MW = ratio * Omega).
                    For the KLM scheme delta is derived as |Omega_MW| when absent.
    initial_state   {"basis": "<state>"} or {"mixture": {"a":..,"b":..,"c":..,"d":..}}
                    (a|00><00| + b|11><11| + c|10><10| + d|01><01|, vacuum modes)
    observables     list of named states recorded along traces
    target          named state whose population sweeps / experimental / chain runs report
    t_max, samples  uniform time grid [0, t_max] with ``samples`` points (units of 1/g)
    compare_effective   trace: also integrate the effective model
    family          trace: {"param": name, "values": [...]}, one run per value
    axes            sweep: two {"param", "min", "max", "points"} entries
    links           sweep/family: {"dependent": "source"}, e.g. {"kappa_fiber": "kappa_cavity"}
    triples_mhz     experimental: [[g, kappa, gamma], ...] in MHz; kappa_fiber = kappa
    n_values        chain: list of cavity counts
    omega_from_gap  chain: set Omega = g * min_gap(n) / 10 for each n
    full_max_dim    chain: largest Hilbert-space dimension integrated with the full model
    provenance      ignored on input (written into sidecars)
"""

import copy
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..effective import STATE_NAMES
from ..errors import AcfError, ConfigError
from ..model import KLM, SystemParams

KINDS = ("trace", "sweep", "experimental", "chain")
MODELS = ("full", "effective", "full_with_feedback")
MIXTURE_LABELS = {"a": "00", "b": "11", "c": "10", "d": "01"}

PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(SystemParams))
SCALAR_FIELDS = ("g", "J", "Omega", "Omega_MW", "delta", "gamma", "kappa_cavity", "kappa_fiber", "eta")
EXTRA_PARAM_KEYS = ("Omega_MW_ratio",)

_TOP_KEYS = {
    "id", "kind", "model", "params", "initial_state", "observables", "target", "t_max", "samples",
    "compare_effective", "family", "axes", "links", "triples_mhz", "n_values", "omega_from_gap",
    "full_max_dim", "provenance",
}
_KIND_KEYS = {
    "trace": {"t_max", "samples", "compare_effective", "family", "links"},
    "sweep": {"axes", "links"},
    "experimental": {"t_max", "samples", "triples_mhz"},
    "chain": {"t_max", "samples", "n_values", "omega_from_gap", "full_max_dim", "compare_effective"},
}
_COMMON = {"id", "kind", "model", "params", "initial_state", "observables", "target", "provenance"}


@dataclass
class Axis:
    param: str
    min: float
    max: float
    points: int

    def grid(self) -> List[float]:
        if self.points == 1:
            return [float(self.min)]
        step = (self.max - self.min) / (self.points - 1)
        return [float(self.min + i * step) for i in range(self.points)]


@dataclass
class ScenarioConfig:
    id: str
    kind: str
    params: Dict[str, Any]
    model: str = "full"
    initial_state: Dict[str, Any] = field(default_factory=lambda: {"basis": "00"})
    observables: List[str] = field(default_factory=list)
    target: Optional[str] = None
    t_max: float = 0.0
    samples: int = 1
    compare_effective: bool = False
    family: Optional[Dict[str, Any]] = None
    axes: List[Axis] = field(default_factory=list)
    links: Dict[str, str] = field(default_factory=dict)
    triples_mhz: List[List[float]] = field(default_factory=list)
    n_values: List[int] = field(default_factory=list)
    omega_from_gap: bool = False
    full_max_dim: int = 288

    @property
    def scheme(self) -> str:
        return self.params.get("scheme", "bell")

    def times(self) -> List[float]:
        if self.samples == 1:
            return [0.0] if self.t_max == 0 else [float(self.t_max)]
        step = self.t_max / (self.samples - 1)
        return [i * step for i in range(self.samples)]

    def system_params(self, **overrides) -> SystemParams:
        raw = {**self.params, **overrides}
        if "Omega_MW" in overrides:
            raw.pop("Omega_MW_ratio", None)
        for dep, src in self.links.items():
            raw[dep] = raw.get(src, getattr(SystemParams, src))
        return resolve_params(raw, field_prefix="params")

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "id": self.id,
            "kind": self.kind,
            "model": self.model,
            "params": copy.deepcopy(self.params),
            "initial_state": copy.deepcopy(self.initial_state),
            "observables": list(self.observables),
            "target": self.target,
        }
        if self.kind in ("trace", "experimental", "chain"):
            out["t_max"] = self.t_max
            out["samples"] = self.samples
        if self.kind in ("trace", "chain"):
            out["compare_effective"] = self.compare_effective
        if self.kind == "trace" and self.family is not None:
            out["family"] = copy.deepcopy(self.family)
        if self.kind in ("trace", "sweep") and self.links:
            out["links"] = dict(self.links)
        if self.kind == "sweep":
            out["axes"] = [dataclasses.asdict(a) for a in self.axes]
        if self.kind == "experimental":
            out["triples_mhz"] = [list(t) for t in self.triples_mhz]
        if self.kind == "chain":
            out["n_values"] = list(self.n_values)
            out["omega_from_gap"] = self.omega_from_gap
            out["full_max_dim"] = self.full_max_dim
        return out

    def with_truncation(self, k: int) -> "ScenarioConfig":
        data = self.to_dict()
        data["params"]["fock_truncation"] = k
        return parse_config(data)


def resolve_params(raw: Dict[str, Any], field_prefix: str = "params") -> SystemParams:
    """Build SystemParams from a config ``params`` mapping, applying derived values."""
    raw = dict(raw)
    for key in raw:
        if key not in PARAM_FIELDS and key not in EXTRA_PARAM_KEYS:
            raise ConfigError(f"{field_prefix}.{key}", "unknown parameter")
    ratio = raw.pop("Omega_MW_ratio", None)
    if ratio is not None:
        if "Omega_MW" in raw:
            raise ConfigError(f"{field_prefix}.Omega_MW_ratio", "give either Omega_MW or Omega_MW_ratio, not both")
        raw["Omega_MW"] = _number(ratio, f"{field_prefix}.Omega_MW_ratio") * _number(
            raw.get("Omega", SystemParams.Omega), f"{field_prefix}.Omega"
        )
    if raw.get("scheme", "bell") == KLM:
        mw = abs(_number(raw.get("Omega_MW", SystemParams.Omega_MW), f"{field_prefix}.Omega_MW"))
        if "delta" in raw and not math.isclose(_number(raw["delta"], f"{field_prefix}.delta"), mw, rel_tol=1e-12):
            raise ConfigError(f"{field_prefix}.delta", f"KLM requires delta = |Omega_MW| = {mw}; omit delta to derive it")
        raw["delta"] = mw
    try:
        return SystemParams(**raw)
    except AcfError as exc:
        raise ConfigError(field_prefix, str(exc)) from exc
    except TypeError as exc:
        raise ConfigError(field_prefix, str(exc)) from exc


def _number(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    return float(value)


def _int(value, name, minimum) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(name, f"expected an integer >= {minimum}, got {value!r}")
    return value


def _state_name(value, name) -> str:
    if value not in STATE_NAMES:
        raise ConfigError(name, f"unknown state {value!r}; expected one of {STATE_NAMES}")
    return value


def _parse_initial(value) -> Dict[str, Any]:
    if not isinstance(value, dict) or len(value) != 1:
        raise ConfigError("initial_state", 'expected {"basis": name} or {"mixture": {...}}')
    (key, body), = value.items()
    if key == "basis":
        return {"basis": _state_name(body, "initial_state.basis")}
    if key == "mixture":
        if not isinstance(body, dict) or set(body) - set(MIXTURE_LABELS):
            raise ConfigError("initial_state.mixture", f"weights must be keyed by {sorted(MIXTURE_LABELS)}")
        weights = {k: _number(body.get(k, 0.0), f"initial_state.mixture.{k}") for k in MIXTURE_LABELS}
        if any(w < 0 for w in weights.values()):
            raise ConfigError("initial_state.mixture", "weights must be non-negative")
        if abs(sum(weights.values()) - 1.0) > 1e-9:
            raise ConfigError("initial_state.mixture", f"weights sum to {sum(weights.values())}, expected 1")
        return {"mixture": {k: body[k] for k in MIXTURE_LABELS if k in body}}
    raise ConfigError("initial_state", f"unknown initial-state form {key!r}")


def _scalar_field(name, where) -> str:
    if name not in SCALAR_FIELDS:
        raise ConfigError(where, f"{name!r} is not a numeric SystemParams field; expected one of {SCALAR_FIELDS}")
    return name


def parse_config(data: Dict[str, Any]) -> ScenarioConfig:
    """Validate a decoded JSON object and return a ScenarioConfig."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    for key in ("id", "kind"):
        if key not in data:
            raise ConfigError(key, "missing required key")
    if not isinstance(data["id"], str) or not data["id"] or "/" in data["id"]:
        raise ConfigError("id", "must be a non-empty string without '/'")
    kind = data["kind"]
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {KINDS}, got {kind!r}")
    misplaced = set(data) - _COMMON - _KIND_KEYS[kind]
    if misplaced:
        raise ConfigError(sorted(misplaced)[0], f"not valid for kind {kind!r}")

    model = data.get("model", "full")
    if model not in MODELS:
        raise ConfigError("model", f"expected one of {MODELS}, got {model!r}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params", "must be an object")
    links = data.get("links", {})
    if not isinstance(links, dict):
        raise ConfigError("links", "must be an object")
    for dep, src in links.items():
        _scalar_field(dep, f"links.{dep}")
        _scalar_field(src, f"links.{dep}")

    cfg = ScenarioConfig(id=data["id"], kind=kind, params=dict(params), model=model, links=dict(links))
    base = cfg.system_params()
    if model == "full_with_feedback" and (base.feedback_mode is None or base.eta is None):
        raise ConfigError("model", "full_with_feedback needs params.feedback_mode and params.eta")
    if model != "full_with_feedback" and base.feedback_mode is not None:
        raise ConfigError("params.feedback_mode", "feedback requires model 'full_with_feedback'")
    if (model == "effective" or data.get("compare_effective")) and any(
        not math.isclose(k, base.gamma, rel_tol=1e-12) for k in base.kappa_fiber
    ):
        raise ConfigError("model", "the effective model requires gamma == kappa_fiber")

    cfg.initial_state = _parse_initial(data.get("initial_state", {"basis": "00"}))
    obs = data.get("observables", [])
    if not isinstance(obs, list):
        raise ConfigError("observables", "must be a list")
    cfg.observables = [_state_name(o, "observables") for o in obs]
    default_target = "S" if base.scheme == "bell" else "K1"
    cfg.target = _state_name(data.get("target") or default_target, "target")
    if kind in ("trace", "experimental", "chain"):
        cfg.t_max = _number(data.get("t_max", 0.0), "t_max")
        if cfg.t_max < 0:
            raise ConfigError("t_max", "must be non-negative")
        cfg.samples = _int(data.get("samples", 1 if cfg.t_max == 0 else 101), "samples", 1)
        if cfg.t_max == 0 and cfg.samples != 1:
            raise ConfigError("samples", "a zero-duration grid has exactly one sample")
    cfg.compare_effective = bool(data.get("compare_effective", False))
    if not isinstance(data.get("compare_effective", False), bool):
        raise ConfigError("compare_effective", "must be true or false")

    if "family" in data:
        fam = data["family"]
        if not isinstance(fam, dict) or set(fam) != {"param", "values"}:
            raise ConfigError("family", 'expected {"param": name, "values": [...]}')
        if fam["param"] != "fock_truncation":
            _scalar_field(fam["param"], "family.param")
        if not isinstance(fam["values"], list) or not fam["values"]:
            raise ConfigError("family.values", "must be a non-empty list")
        for v in fam["values"]:
            _number(v, "family.values")
        cfg.family = {"param": fam["param"], "values": list(fam["values"])}

    if kind == "sweep":
        axes = data.get("axes")
        if not isinstance(axes, list) or len(axes) != 2:
            raise ConfigError("axes", "a sweep needs exactly two axes")
        for i, ax in enumerate(axes):
            where = f"axes[{i}]"
            if not isinstance(ax, dict) or set(ax) != {"param", "min", "max", "points"}:
                raise ConfigError(where, 'expected {"param", "min", "max", "points"}')
            axis = Axis(
                _scalar_field(ax["param"], f"{where}.param"),
                _number(ax["min"], f"{where}.min"),
                _number(ax["max"], f"{where}.max"),
                _int(ax["points"], f"{where}.points", 1),
            )
            if axis.max < axis.min:
                raise ConfigError(where, "max must be >= min")
            cfg.axes.append(axis)
        if cfg.axes[0].param == cfg.axes[1].param:
            raise ConfigError("axes", "the two axes must differ")

    if kind == "experimental":
        triples = data.get("triples_mhz")
        if not isinstance(triples, list) or not triples:
            raise ConfigError("triples_mhz", "need a non-empty list of [g, kappa, gamma] triples")
        for i, t in enumerate(triples):
            if not isinstance(t, list) or len(t) != 3:
                raise ConfigError(f"triples_mhz[{i}]", "expected [g, kappa, gamma]")
            g, kappa, gamma = (_number(x, f"triples_mhz[{i}]") for x in t)
            if g <= 0:
                raise ConfigError(f"triples_mhz[{i}]", f"g must be positive, got {g}")
            if kappa < 0 or gamma < 0:
                raise ConfigError(f"triples_mhz[{i}]", "decay rates must be non-negative")
        cfg.triples_mhz = [list(t) for t in triples]

    if kind == "chain":
        ns = data.get("n_values")
        if not isinstance(ns, list) or not ns:
            raise ConfigError("n_values", "need a non-empty list of cavity counts")
        cfg.n_values = [_int(n, "n_values", 2) for n in ns]
        cfg.omega_from_gap = data.get("omega_from_gap", False)
        if not isinstance(cfg.omega_from_gap, bool):
            raise ConfigError("omega_from_gap", "must be true or false")
        cfg.full_max_dim = _int(data.get("full_max_dim", 288), "full_max_dim", 0)
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON in {path}: {exc}") from exc
    return parse_config(data)
