"""
Scenario execution: time traces, steady-state sweeps, experimental-parameter
runs and multi-cavity chains.  Independent runs (sweep points, family
members, triples, chain entries) go through ``_map`` so they can be spread
over worker processes; results are always collected in input order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..dynamics import evolve, liouvillian, population, steady_state, system_liouvillian
from ..effective import effective_model, min_gap, named_state
from ..errors import ConfigError, NonUniqueSteadyState, NumericalFailure, UnsupportedConfiguration
from ..model import SystemParams
from .config import MIXTURE_LABELS, ScenarioConfig

log = logging.getLogger(__name__)


@dataclass
class TraceResult:
    times: np.ndarray
    columns: Dict[str, np.ndarray]
    diagnostics: Dict[str, Dict[str, float]] = field(default_factory=dict)


@dataclass
class SweepResult:
    axes: Tuple[str, str]
    grid1: List[float]
    grid2: List[float]
    population: np.ndarray
    residual: np.ndarray
    errors: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.errors


@dataclass
class TableResult:
    """Final populations of several runs plus their traces."""

    rows: List[Dict[str, Any]]
    trace: TraceResult
    warnings: List[str] = field(default_factory=list)


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# ---- single runs ---------------------------------------------------------


def initial_density(spec: Dict[str, Any], vec) -> np.ndarray:
    """Density matrix for an ``initial_state`` spec; ``vec`` maps a state name to a vector."""
    if "basis" in spec:
        v = vec(spec["basis"])
        return np.outer(v, v.conj())
    rho = 0
    for key, label in MIXTURE_LABELS.items():
        w = spec["mixture"].get(key, 0.0)
        if w:
            v = vec(label)
            rho = rho + w * np.outer(v, v.conj())
    return np.asarray(rho, dtype=complex)


def _full_liouvillian(params: SystemParams):
    return system_liouvillian(params)


def trace_populations(
    params: SystemParams, model: str, initial: Dict[str, Any], names: List[str], times
) -> Tuple[Dict[str, np.ndarray], Dict[str, float]]:
    """Integrate one model and return population curves for ``names``."""
    if model == "effective":
        try:
            eff = effective_model(params)
        except UnsupportedConfiguration as exc:
            raise ConfigError("model", str(exc)) from exc
        L = liouvillian(eff.H, eff.lindblads)
        vec = eff.reduced_state
    else:
        L = _full_liouvillian(params)
        space = params.space()
        cache: Dict[str, np.ndarray] = {}

        def vec(name):
            if name not in cache:
                cache[name] = named_state(name, params, space)
            return cache[name]

    rho0 = initial_density(initial, vec)
    traj = evolve(L, rho0, times, observables={n: vec(n) for n in names}, keep_states=False)
    diag = {
        "max_trace_error": float(traj.trace_error.max()),
        "max_hermiticity_error": float(traj.hermiticity_error.max()),
        "min_eigenvalue": float(traj.min_eigenvalue.min()),
        "evaluations": traj.n_evaluations,
    }
    return traj.populations, diag


def _trace_job(job):
    params, model, initial, names, times = job
    return trace_populations(params, model, initial, names, times)


def steady_population(params: SystemParams, target: str, model: str = "full") -> Tuple[float, float]:
    """Target-state population in the steady state and the solver residual."""
    if model == "effective":
        eff = effective_model(params)
        L = liouvillian(eff.H, eff.lindblads)
        v = eff.reduced_state(target)
    else:
        L = _full_liouvillian(params)
        v = named_state(target, params)
    rho, info = steady_state(L, full_output=True)
    return population(rho, v), info.residual


def _sweep_job(job):
    params, target, model = job
    try:
        return steady_population(params, target, model) + (None,)
    except (NonUniqueSteadyState, NumericalFailure) as exc:
        return (math.nan, math.nan, f"{type(exc).__name__}: {exc}")


# ---- scenario kinds ------------------------------------------------------


def _column(name: str, tag: Optional[str]) -> str:
    return name if tag is None else f"{name}:{tag}"


def _fmt(v) -> str:
    return format(v, ".12g")


def run_trace(config: ScenarioConfig, workers: int = 1) -> TraceResult:
    times = np.asarray(config.times())
    names = config.observables or [config.target]
    model = "full" if config.model == "full_with_feedback" else config.model
    jobs, tags = [], []
    members = [(None, {})]
    if config.family:
        p = config.family["param"]
        members = [(f"{p}={_fmt(v)}", {p: v}) for v in config.family["values"]]
    for tag, override in members:
        params = config.system_params(**override)
        jobs.append((params, model, config.initial_state, names, times))
        tags.append(tag)
        if config.compare_effective and model == "full":
            jobs.append((params, "effective", config.initial_state, names, times))
            tags.append("effective" if tag is None else f"{tag}:effective")
    outputs = _map(_trace_job, jobs, workers)
    columns, diagnostics = {}, {}
    for tag, (pops, diag) in zip(tags, outputs):
        for n in names:
            columns[_column(n, tag)] = pops[n]
        diagnostics[tag or "main"] = diag
    return TraceResult(times, columns, diagnostics)


def run_sweep(config: ScenarioConfig, workers: int = 1) -> SweepResult:
    ax1, ax2 = config.axes
    g1, g2 = ax1.grid(), ax2.grid()
    model = "full" if config.model == "full_with_feedback" else config.model
    jobs = []
    for v1 in g1:
        for v2 in g2:
            jobs.append((config.system_params(**{ax1.param: v1, ax2.param: v2}), config.target, model))
    out = _map(_sweep_job, jobs, workers)
    pop = np.array([o[0] for o in out]).reshape(len(g1), len(g2))
    res = np.array([o[1] for o in out]).reshape(len(g1), len(g2))
    errors = []
    for idx, o in enumerate(out):
        if o[2] is not None:
            i, j = divmod(idx, len(g2))
            errors.append({ax1.param: g1[i], ax2.param: g2[j], "error": o[2]})
    return SweepResult((ax1.param, ax2.param), g1, g2, pop, res, errors)


def experimental_params(config: ScenarioConfig, triple) -> SystemParams:
    """Convert a (g, kappa, gamma) MHz triple to units of g, with kappa_fiber = kappa."""
    g, kappa, gamma = triple
    return config.system_params(g=1.0, kappa_cavity=kappa / g, kappa_fiber=kappa / g, gamma=gamma / g)


def run_experimental(config: ScenarioConfig, workers: int = 1) -> TableResult:
    times = np.asarray(config.times())
    target = config.target
    jobs, labels = [], []
    for triple in config.triples_mhz:
        params = experimental_params(config, triple)
        jobs.append((params, "full", config.initial_state, [target], times))
        labels.append("g={},kappa={},gamma={}".format(*(_fmt(x) for x in triple)))
    outputs = _map(_trace_job, jobs, workers)
    steady = _map(_sweep_job, [(j[0], target, "full") for j in jobs], workers)
    rows, columns, diagnostics = [], {}, {}
    for triple, label, (pops, diag), ss in zip(config.triples_mhz, labels, outputs, steady):
        columns[_column(target, label)] = pops[target]
        diagnostics[label] = diag
        rows.append({
            "g_mhz": triple[0],
            "kappa_mhz": triple[1],
            "gamma_mhz": triple[2],
            "population": float(pops[target][-1]),
            "steady_population": ss[0],
        })
    return TableResult(rows, TraceResult(times, columns, diagnostics))


def chain_params(config: ScenarioConfig, n: int) -> SystemParams:
    override: Dict[str, Any] = {"n": n}
    if config.omega_from_gap:
        g = config.system_params().g
        override["Omega"] = g * min_gap(n) / 10
    return config.system_params(**override)


def run_chain(config: ScenarioConfig, workers: int = 1) -> TableResult:
    times = np.asarray(config.times())
    target = config.target
    jobs, tags, warnings = [], [], []
    for n in config.n_values:
        params = chain_params(config, n)
        want_full = config.model != "effective"
        if want_full and params.space().total_dim > config.full_max_dim:
            warnings.append(
                f"n={n}: full model dimension {params.space().total_dim} exceeds full_max_dim="
                f"{config.full_max_dim}; effective model only"
            )
            want_full = False
        if want_full:
            jobs.append((params, "full", config.initial_state, [target], times))
            tags.append((n, "full", params.Omega))
        if config.model == "effective" or config.compare_effective or not want_full:
            jobs.append((params, "effective", config.initial_state, [target], times))
            tags.append((n, "effective", params.Omega))
    for w in warnings:
        log.warning(w)
    outputs = _map(_trace_job, jobs, workers)
    rows, columns, diagnostics = [], {}, {}
    for (n, model, omega), (pops, diag) in zip(tags, outputs):
        label = f"n={n}:{model}"
        columns[_column(target, label)] = pops[target]
        diagnostics[label] = diag
        rows.append({"n": n, "model": model, "Omega": omega, "population": float(pops[target][-1])})
    return TableResult(rows, TraceResult(times, columns, diagnostics), warnings)


def run(config: ScenarioConfig, workers: int = 1):
    runner = {"trace": run_trace, "sweep": run_sweep, "experimental": run_experimental, "chain": run_chain}
    return runner[config.kind](config, workers=workers)


def convergence_time(times, values, fraction: float = 0.95) -> float:
    """First time at which ``values`` reaches ``fraction`` of its final value."""
    values = np.asarray(values)
    hit = np.flatnonzero(values >= fraction * values[-1])
    return float(np.asarray(times)[hit[0]])
