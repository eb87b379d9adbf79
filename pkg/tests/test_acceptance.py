"""
End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(see conftest.py).  Heavy runs are shared through module-scoped fixtures and
marked slow; the whole module takes on the order of an hour or two on one core.
"""

import math

import numpy as np
import pytest

from acfnet.dynamics import liouvillian
from acfnet.effective import (
    effective_model,
    effective_rates,
    min_gap,
    named_state,
    reconstructed_hamiltonian,
    single_excitation_spectrum,
    smallest_nonzero,
    zeno_hamiltonian,
    zeno_projector,
)
from acfnet.model import SystemParams
from acfnet.scenarios import parse_config, preset, run
from acfnet.scenarios.presets import preset_dict
from acfnet.scenarios.runners import steady_population

from test_effective import _projected_dissipator_action

from conftest import random_density

pytestmark = pytest.mark.slow

TRACE_TOL = 1e-7
POSITIVITY = -1e-6
RESIDUAL = 1e-9

_diagnostics = []


def _trace(name, **changes):
    data = preset_dict(name)
    data.update(changes)
    result = run(parse_config(data))
    table = getattr(result, "trace", result)
    _diagnostics.extend(table.diagnostics.values())
    return result


def _steady(config, **overrides):
    pop, res = steady_population(config.system_params(**overrides), config.target)
    _diagnostics.append({"steady_residual": res})
    return pop


@pytest.fixture(scope="module")
def fig3a():
    return _trace("fig3a")


@pytest.fixture(scope="module")
def fig8a():
    return _trace("fig8a")


def check(report, n, ok, detail):
    report(n, ok, detail)
    assert ok, detail


def test_criterion_01_bell_trace(fig3a, report):
    p = fig3a.columns["S"][-1]
    check(report, 1, abs(p - 0.996) <= 0.01, f"P(S) at gt=6000 = {p:.5f} (0.996 +- 0.01)")


def test_criterion_02_effective_vs_full(fig3a, fig8a, report):
    bell = np.abs(fig3a.columns["S"] - fig3a.columns["S:effective"]).max()
    klm = np.abs(fig8a.columns["K1"] - fig8a.columns["K1:effective"]).max()
    check(report, 2, bell <= 0.02 and klm <= 0.02, f"sup gap Bell {bell:.4f}, KLM {klm:.4f} (<= 0.02)")


def test_criterion_03_truncation(report):
    cols = _trace("fig3a_inset").columns
    gap = np.abs(cols["S:fock_truncation=1"] - cols["S:fock_truncation=3"]).max()
    gap2 = np.abs(cols["S:fock_truncation=1"] - cols["S:fock_truncation=2"]).max()
    check(report, 3, gap < 0.01, f"sup gap k=1 vs k=3 = {gap:.2e} (< 0.01); k=1 vs k=2 = {gap2:.2e}")


def test_criterion_04_contour_points(report):
    bell = _steady(preset("fig3c"), gamma=0.3, kappa_fiber=0.3)
    klm = _steady(preset("fig8c"), gamma=0.3, kappa_fiber=0.3)
    ok = bell >= 0.9967 - 0.002 and klm >= 0.993 - 0.002
    check(report, 4, ok, f"Bell {bell:.5f} (>= 0.9947), KLM {klm:.5f} (>= 0.991)")


def test_criterion_05_leaky_cavities(report):
    bell = _steady(preset("fig4b"), gamma=0.03, kappa_cavity=0.1)
    klm = _steady(preset("fig9a"), gamma=0.1, kappa_cavity=0.1)
    ok = bell >= 0.90 and abs(klm - 0.955) <= 0.01
    check(report, 5, ok, f"Bell {bell:.5f} (>= 0.90), KLM {klm:.5f} (0.955 +- 0.01)")


def test_criterion_06_feedback(report):
    threshold = {"gamma": 0.0125, "kappa_cavity": 0.1}
    bell = _steady(preset("fig5b"), **threshold)
    klm = _steady(preset("fig9b"), gamma=0.1, kappa_cavity=0.1)
    probe = {"gamma": 0.02, "kappa_cavity": 0.1}
    order = [_steady(preset(name), **probe) for name in ("fig4b", "fig5a", "fig5b")]
    ordered = order[0] <= order[1] <= order[2]
    ok = bell >= 0.90 and klm >= 0.99 and ordered
    detail = (f"Bell both at gamma=0.0125 {bell:.5f} (>= 0.90), KLM both {klm:.5f} (>= 0.99), "
              "none/first/both at gamma=0.02 " + "/".join(f"{v:.4f}" for v in order))
    check(report, 6, ok, detail)


def test_criterion_07_experimental(report):
    expected = {"fig7": [0.9999, 0.9998, 0.9948], "fig10": [0.9958, 0.9977, 0.9967]}
    got = {name: [row["population"] for row in _trace(name).rows] for name in expected}
    ok = all(abs(a - b) <= 0.002 for name in expected for a, b in zip(got[name], expected[name]))
    detail = "; ".join(f"{name} " + ", ".join(f"{v:.4f}" for v in got[name]) for name in expected)
    check(report, 7, ok, detail + " (+- 0.002)")


def test_criterion_08_three_cavities(report):
    bell = _trace("fig12a").columns
    klm = _trace("fig13a").columns
    p_bell, p_klm = bell["S"][-1], klm["K1"][-1]
    gaps = (np.abs(bell["S"] - bell["S:effective"]).max(), np.abs(klm["K1"] - klm["K1:effective"]).max())
    ok = abs(p_bell - 0.9952) <= 0.01 and abs(p_klm - 0.9933) <= 0.01
    check(report, 8, ok, f"Bell {p_bell:.5f} (0.9952 +- 0.01), KLM {p_klm:.5f} (0.9933 +- 0.01); "
                         f"effective sup gap {gaps[0]:.4f}, {gaps[1]:.4f}")


def test_criterion_09_spectral_gap(report):
    errs = [abs(smallest_nonzero(single_excitation_spectrum(n)) - min_gap(n)) for n in range(2, 7)]
    check(report, 9, max(errs) < 1e-9, f"max |numerical - closed form| = {max(errs):.1e} for n=2..6")


def test_criterion_10_identities(report):
    rng = np.random.default_rng(7)
    rate_err = 0.0
    for _ in range(20):
        gamma = rng.uniform(1e-3, 1)
        p = SystemParams(n=int(rng.integers(2, 8)), g=rng.uniform(0.1, 10), J=rng.uniform(0.1, 10),
                         gamma=gamma, kappa_fiber=gamma)
        r = effective_rates(p)
        rate_err = max(rate_err, abs(r["gamma1"] ** 2 + r["gamma2"] ** 2 + r["gamma3"] ** 2 - gamma))
    proj_err = dark_err = 0.0
    for scheme in ("bell", "klm"):
        for n in (2, 3):
            p = SystemParams(scheme=scheme, n=n)
            H = zeno_hamiltonian(p)
            P = zeno_projector(H.toarray()).P0
            proj_err = max(proj_err, np.abs(P @ P - P).max(), np.abs(P - P.conj().T).max(),
                           np.abs(H @ P).max())
            dark_err = max(dark_err, np.linalg.norm(H @ named_state("D", p)))
    ok = rate_err < 1e-12 and proj_err < 1e-10 and dark_err < 1e-10
    check(report, 10, ok, f"rates {rate_err:.1e}, projector {proj_err:.1e}, H|D> {dark_err:.1e}")


def test_criterion_11_reconstruction(report):
    rng = np.random.default_rng(11)
    h_err = d_err = 0.0
    for scheme in ("bell", "klm"):
        p = SystemParams(scheme=scheme, Omega=0.05, Omega_MW=0.015, delta=0.015 if scheme == "klm" else 0.05)
        m = effective_model(p)
        h_err = max(h_err, np.abs(reconstructed_hamiltonian(p) - m.H).max())
        L_eff = liouvillian(np.zeros((5, 5)), m.lindblads)
        for _ in range(10):
            rho = random_density(5, rng)
            d_err = max(d_err, np.abs(_projected_dissipator_action(p, rho) - L_eff.apply(rho)).max())
    ok = h_err < 1e-10 and d_err < 1e-10
    check(report, 11, ok, f"Hamiltonian {h_err:.1e}, dissipator {d_err:.1e} (< 1e-10)")


def test_criterion_12_cptp(report):
    # runs last: inspects diagnostics gathered by every trajectory and steady state above
    assert _diagnostics, "no runs recorded"
    trace_err = max((d["max_trace_error"] for d in _diagnostics if "max_trace_error" in d), default=0.0)
    min_eig = min((d["min_eigenvalue"] for d in _diagnostics if "min_eigenvalue" in d), default=0.0)
    herm = max((d["max_hermiticity_error"] for d in _diagnostics if "max_hermiticity_error" in d), default=0.0)
    residual = max((d["steady_residual"] for d in _diagnostics if "steady_residual" in d), default=0.0)
    # the steady-state solver raises on a degenerate kernel, so every recorded solve was unique
    ok = trace_err < TRACE_TOL and min_eig > POSITIVITY and residual < RESIDUAL and not math.isnan(residual)
    check(report, 12, ok, f"{len(_diagnostics)} runs: max |tr-1| {trace_err:.1e}, min eig {min_eig:.1e}, "
                          f"max residual {residual:.1e}, Hermiticity drift {herm:.1e}")
