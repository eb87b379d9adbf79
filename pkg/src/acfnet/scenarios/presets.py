"""
Preset scenarios, one per reproduced figure panel.

Rates are in units of g.  Figure captions fix most parameters; the choices
made where they are silent (time spans, grid ranges, the J family of the
convergence-time panels) are listed next to each preset.
"""

import copy
import math
from typing import Dict, List

from ..errors import ConfigError
from .config import ScenarioConfig, parse_config

FIG3A_MIXTURE = {"mixture": {"a": 0.12, "b": 0.42, "c": 0.35, "d": 0.11}}
VACUUM_00 = {"basis": "00"}
J_FAMILY = [0.5, 1.0, 2.0, 4.0]
EXPERIMENTAL_TRIPLES = [[430.0, 0.007, 2.72], [280.0, 0.05, 2.60], [86.0, 1.42, 2.60]]
GRID = 21

BELL_BASE = {"scheme": "bell", "Omega": 0.05, "Omega_MW_ratio": 0.3, "delta": 0.05,
             "gamma": 0.1, "kappa_cavity": 0.0, "kappa_fiber": 0.1, "J": 1.0}
KLM_BASE = {"scheme": "klm", "Omega": 0.05, "Omega_MW_ratio": 0.1,
            "gamma": 0.1, "kappa_cavity": 0.0, "kappa_fiber": 0.1, "J": 1.0}
BELL_LEAKY = {"scheme": "bell", "Omega": 0.01, "Omega_MW_ratio": 1.4, "delta": 0.017, "J": 1.0,
              "gamma": 0.05, "kappa_cavity": 0.1, "kappa_fiber": 0.1}
KLM_LEAKY = {"scheme": "klm", "Omega": 0.01, "Omega_MW_ratio": 0.3, "J": 1.0,
             "gamma": 0.05, "kappa_cavity": 0.1, "kappa_fiber": 0.1}
BELL_EXPERIMENT = {"scheme": "bell", "Omega": 0.01, "Omega_MW_ratio": 0.55, "delta": 0.01, "J": 1.0}
KLM_EXPERIMENT = {"scheme": "klm", "Omega": 0.01, "Omega_MW_ratio": 0.55, "J": 1.0}


def _axis(param, lo, hi, points=GRID):
    return {"param": param, "min": lo, "max": hi, "points": points}


# perfect-cavity contours: 0.015 .. 0.315 in steps of 0.015 (hits 0.3)
_DECAY_AXES = [_axis("gamma", 0.015, 0.315), _axis("kappa_fiber", 0.015, 0.315)]
# leaky-cavity contours: 0.005 .. 0.105 in steps of 0.005 (hits 0.1)
_LEAKY_AXES = [_axis("gamma", 0.005, 0.105), _axis("kappa_cavity", 0.005, 0.105)]

_PRESETS: Dict[str, dict] = {
    "fig3a": {
        "kind": "trace", "params": BELL_BASE, "initial_state": FIG3A_MIXTURE,
        "observables": ["S", "T", "00", "11"], "t_max": 6000, "samples": 601, "compare_effective": True,
    },
    "fig3a_inset": {
        "kind": "trace", "params": BELL_BASE, "initial_state": FIG3A_MIXTURE, "observables": ["S"],
        "t_max": 6000, "samples": 601, "family": {"param": "fock_truncation", "values": [1, 2, 3]},
    },
    "fig3b": {
        "kind": "trace", "params": BELL_BASE, "initial_state": VACUUM_00, "observables": ["S"],
        "t_max": 30000, "samples": 3001, "family": {"param": "J", "values": J_FAMILY},
    },
    "fig3c": {"kind": "sweep", "params": BELL_BASE, "axes": _DECAY_AXES},
    "fig4a": {"kind": "sweep", "params": {**BELL_LEAKY, "kappa_fiber": 0.0}, "axes": _LEAKY_AXES},
    "fig4b": {"kind": "sweep", "params": BELL_LEAKY, "axes": _LEAKY_AXES,
              "links": {"kappa_fiber": "kappa_cavity"}},
    "fig5a": {"kind": "sweep", "model": "full_with_feedback", "axes": _LEAKY_AXES,
              "params": {**BELL_LEAKY, "feedback_mode": "first", "eta": 0.5 * math.pi},
              "links": {"kappa_fiber": "kappa_cavity"}},
    "fig5b": {"kind": "sweep", "model": "full_with_feedback", "axes": _LEAKY_AXES,
              "params": {**BELL_LEAKY, "feedback_mode": "both", "eta": 0.5 * math.pi},
              "links": {"kappa_fiber": "kappa_cavity"}},
    "fig7": {"kind": "experimental", "params": BELL_EXPERIMENT, "triples_mhz": EXPERIMENTAL_TRIPLES,
             "t_max": 80000, "samples": 801},
    "fig8a": {
        "kind": "trace", "params": KLM_BASE, "initial_state": FIG3A_MIXTURE,
        "observables": ["K1", "K2", "K3", "K4"], "t_max": 9000, "samples": 901, "compare_effective": True,
    },
    "fig8b": {
        "kind": "trace", "params": KLM_BASE, "initial_state": VACUUM_00, "observables": ["K1"],
        "t_max": 9000, "samples": 901, "family": {"param": "J", "values": J_FAMILY},
    },
    "fig8c": {"kind": "sweep", "params": KLM_BASE, "axes": _DECAY_AXES},
    "fig9a": {"kind": "sweep", "params": KLM_LEAKY, "axes": _LEAKY_AXES,
              "links": {"kappa_fiber": "kappa_cavity"}},
    "fig9b": {"kind": "sweep", "model": "full_with_feedback", "axes": _LEAKY_AXES,
              "params": {**KLM_LEAKY, "feedback_mode": "both", "eta": 0.5 * math.pi},
              "links": {"kappa_fiber": "kappa_cavity"}},
    "fig10": {"kind": "experimental", "params": KLM_EXPERIMENT, "triples_mhz": EXPERIMENTAL_TRIPLES,
              "t_max": 150000, "samples": 1501},
    "fig12a": {
        "kind": "trace", "params": {**BELL_BASE, "n": 3}, "initial_state": VACUUM_00,
        "observables": ["S"], "t_max": 15000, "samples": 1501, "compare_effective": True,
    },
    "fig12b": {
        "kind": "chain", "model": "effective", "params": BELL_BASE, "initial_state": VACUUM_00,
        "n_values": [2, 3, 4, 5, 6], "omega_from_gap": True, "t_max": 30000, "samples": 3001,
    },
    "fig13a": {
        "kind": "trace", "params": {**KLM_BASE, "n": 3}, "initial_state": VACUUM_00,
        "observables": ["K1"], "t_max": 9000, "samples": 901, "compare_effective": True,
    },
    "fig13b": {
        "kind": "chain", "model": "effective", "params": KLM_BASE, "initial_state": VACUUM_00,
        "n_values": [2, 3, 4, 5, 6], "omega_from_gap": True, "t_max": 10000, "samples": 1001,
    },
}

# figure panel each preset reproduces
FIGURES = {
    "fig3a": "3a", "fig3a_inset": "3a", "fig3b": "3b", "fig3c": "3c", "fig4a": "4a", "fig4b": "4b",
    "fig5a": "5a", "fig5b": "5b", "fig7": "7", "fig8a": "8a", "fig8b": "8b", "fig8c": "8c",
    "fig9a": "9a", "fig9b": "9b", "fig10": "10", "fig12a": "12a", "fig12b": "12b",
    "fig13a": "13a", "fig13b": "13b",
}


def preset_names() -> List[str]:
    return list(_PRESETS)


def preset_dict(name: str) -> dict:
    if name not in _PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}")
    data = copy.deepcopy(_PRESETS[name])
    data["id"] = name
    return data


def preset(name: str) -> ScenarioConfig:
    return parse_config(preset_dict(name))
