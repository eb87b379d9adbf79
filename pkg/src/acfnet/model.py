"""
Full interaction Hamiltonians and collapse operators for the Bell and KLM
schemes on an n-cavity chain.

Two atoms sit in cavities 1 and n; neighbouring cavities j and j+1 share
fiber j.  All rates are in units of the atom-cavity coupling (g = 1 sets the
scale, but g is kept as a parameter).
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InvalidArgument, InvalidState
from .hilbert import SpaceSpec, annihilation, atomic_transition, build_space, embed

BELL = "bell"
KLM = "klm"
SCHEMES = (BELL, KLM)

FIRST_CAVITY = "first"
BOTH_CAVITIES = "both"
FEEDBACK_MODES = (None, FIRST_CAVITY, BOTH_CAVITIES)

_FEEDBACK_ALIASES = {
    None: None,
    "none": None,
    "None": None,
    "first": FIRST_CAVITY,
    "FirstCavity": FIRST_CAVITY,
    "both": BOTH_CAVITIES,
    "BothCavities": BOTH_CAVITIES,
}

# KLM feedback generator: the printed exp[-i eta (|1><0| - |0><1|)] or its
# unitary counterpart exp[-i eta sigma_y].
AS_WRITTEN = "as_written"
UNITARY = "unitary"


def _as_rates(value, count, name):
    if np.isscalar(value):
        rates = (float(value),) * count
    else:
        rates = tuple(float(v) for v in value)
    if len(rates) != count:
        raise InvalidArgument(f"{name} needs {count} entries, got {len(rates)}")
    if any(r < 0 or not math.isfinite(r) for r in rates):
        raise InvalidArgument(f"{name} must be finite and non-negative, got {rates}")
    return rates


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and scheme selectors.

    ``kappa_cavity`` and ``kappa_fiber`` accept a scalar (broadcast to every
    cavity / fiber) or a sequence of length n / n-1.
    """

    scheme: str = BELL
    n: int = 2
    g: float = 1.0
    J: float = 1.0
    Omega: float = 0.05
    Omega_MW: float = 0.015
    delta: float = 0.05
    gamma: float = 0.1
    kappa_cavity: Sequence[float] = 0.0
    kappa_fiber: Sequence[float] = 0.1
    eta: Optional[float] = None
    feedback_mode: Optional[str] = None
    fock_truncation: int = 1
    klm_feedback_form: str = AS_WRITTEN

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidArgument(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if int(self.fock_truncation) != self.fock_truncation or self.fock_truncation < 1:
            raise InvalidArgument(f"fock_truncation must be an integer >= 1, got {self.fock_truncation}")
        object.__setattr__(self, "fock_truncation", int(self.fock_truncation))
        if not self.g > 0:
            raise InvalidArgument(f"g must be positive, got {self.g}")
        if not self.J > 0:
            raise InvalidArgument(f"J must be positive, got {self.J}")
        if self.gamma < 0:
            raise InvalidArgument(f"gamma must be non-negative, got {self.gamma}")
        for name in ("Omega", "Omega_MW", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")
        object.__setattr__(self, "kappa_cavity", _as_rates(self.kappa_cavity, self.n, "kappa_cavity"))
        object.__setattr__(self, "kappa_fiber", _as_rates(self.kappa_fiber, self.n - 1, "kappa_fiber"))
        if self.feedback_mode not in _FEEDBACK_ALIASES:
            raise InvalidArgument(f"unknown feedback mode {self.feedback_mode!r}")
        object.__setattr__(self, "feedback_mode", _FEEDBACK_ALIASES[self.feedback_mode])
        if self.klm_feedback_form not in (AS_WRITTEN, UNITARY):
            raise InvalidArgument(f"klm_feedback_form must be {AS_WRITTEN!r} or {UNITARY!r}")

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def space(self) -> SpaceSpec:
        return build_space(self.n, self.fock_truncation)

    @property
    def atom_cavities(self) -> Tuple[int, int]:
        """Cavity indices hosting atom 1 and atom 2."""
        return (0, self.n - 1)


def _check_space(params: SystemParams, space: Optional[SpaceSpec]) -> SpaceSpec:
    if space is None:
        return params.space()
    if space.n_cavities != params.n or space.fock_truncation != params.fock_truncation:
        raise InvalidArgument(
            f"space (n={space.n_cavities}, k={space.fock_truncation}) does not match "
            f"params (n={params.n}, k={params.fock_truncation})"
        )
    return space


class _Ops:
    """Embedded building blocks for one space."""

    def __init__(self, space: SpaceSpec):
        self.space = space
        a = annihilation(space.fock_truncation + 1)
        self.a = [embed(a, space.cavity(k), space) for k in range(space.n_cavities)]
        self.b = [embed(a, space.fiber(j), space) for j in range(space.n_fibers)]

    def sigma(self, atom: int, bra: int, ket: int):
        return embed(atomic_transition(bra, ket), self.space.atom(atom), self.space)


def _hc(op):
    return op + op.conj().T


def drive_amplitudes(params: SystemParams) -> Tuple[float, float]:
    """Laser Rabi frequencies on atom 1 and atom 2.

    Bell: Omega_1 = Omega and Omega_n = (-1)^n Omega, so Omega_1 = (-1)^n Omega_n.
    KLM: only atom 1 is driven.
    """
    if params.scheme == BELL:
        return params.Omega, (-1) ** params.n * params.Omega
    return params.Omega, 0.0


def coherent_part(params: SystemParams, space: Optional[SpaceSpec] = None) -> sp.csr_matrix:
    """Microwave and detuning terms."""
    space = _check_space(params, space)
    ops = _Ops(space)
    signs = (1.0, 1.0) if params.scheme == BELL else (1.0, -1.0)
    H = sp.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    for i in (0, 1):
        H = H + signs[i] * params.Omega_MW * _hc(ops.sigma(i, 1, 0))
        H = H + params.delta * ops.sigma(i, 1, 1)
    for mode in ops.a + ops.b:
        H = H - params.delta * (mode.conj().T @ mode)
    return H.tocsr()


def cavity_fiber_part(params: SystemParams, space: Optional[SpaceSpec] = None) -> sp.csr_matrix:
    """g a_i |2><1| + J b_j^dag (a_j + a_{j+1}) + h.c.; the Zeno-dominant terms."""
    space = _check_space(params, space)
    ops = _Ops(space)
    H = sp.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    for i, c in enumerate(params.atom_cavities):
        H = H + params.g * _hc(ops.a[c] @ ops.sigma(i, 2, 1))
    for j, bj in enumerate(ops.b):
        H = H + params.J * _hc(bj.conj().T @ (ops.a[j] + ops.a[j + 1]))
    return H.tocsr()


def drive_part(params: SystemParams, space: Optional[SpaceSpec] = None, unit: bool = False) -> sp.csr_matrix:
    """Laser terms Omega_i |2><0|_i + h.c.; with ``unit`` the overall Omega is divided out."""
    space = _check_space(params, space)
    ops = _Ops(space)
    H = sp.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    for i, amp in enumerate(drive_amplitudes(params)):
        if amp == 0.0:
            continue
        if unit:
            amp = amp / params.Omega
        H = H + amp * _hc(ops.sigma(i, 2, 0))
    return H.tocsr()


def quantum_part(params: SystemParams, space: Optional[SpaceSpec] = None) -> sp.csr_matrix:
    space = _check_space(params, space)
    return (cavity_fiber_part(params, space) + drive_part(params, space)).tocsr()


def hamiltonian(params: SystemParams, space: Optional[SpaceSpec] = None) -> sp.csr_matrix:
    """Full interaction-picture Hamiltonian H_C + H_Q on the joint space."""
    space = _check_space(params, space)
    H = coherent_part(params, space) + quantum_part(params, space)
    H.eliminate_zeros()
    return H.tocsr()


def feedback_generator(params: SystemParams) -> np.ndarray:
    """3x3 generator G with U_fb = exp(-i eta G) on atom 1."""
    G = np.zeros((3, 3), dtype=complex)
    if params.scheme == BELL:
        G[0, 1] = G[1, 0] = 1.0
    elif params.klm_feedback_form == AS_WRITTEN:
        # |1><0| - |0><1| exactly as printed; anti-Hermitian, so U is not unitary
        G[1, 0], G[0, 1] = 1.0, -1.0
    else:
        G[1, 0], G[0, 1] = 1j, -1j
    return G


def feedback_unitary(params: SystemParams, space: Optional[SpaceSpec] = None) -> sp.csr_matrix:
    """Feedback kick on atom 1 applied after a cavity photodetection.

    Bell uses exp[-i eta (|0><1| + |1><0|)].  KLM by default uses the operator
    as printed, exp[-i eta (|1><0| - |0><1|)], which equals
    cosh(eta) - sinh(eta) sigma_y on the ground doublet and is therefore not
    unitary; ``klm_feedback_form="unitary"`` selects exp(-i eta sigma_y).
    Level |2> is untouched in every case.
    """
    space = _check_space(params, space)
    if params.eta is None:
        raise InvalidState("feedback phase eta is not set")
    U = scipy.linalg.expm(-1j * params.eta * feedback_generator(params))
    U[np.abs(U) < 1e-15] = 0.0
    return embed(U, space.atom(0), space)


def feedback_cavities(params: SystemParams) -> Tuple[int, ...]:
    if params.feedback_mode is None:
        return ()
    if params.feedback_mode == FIRST_CAVITY:
        return (0,)
    return params.atom_cavities


def lindblad_ops(params: SystemParams, space: Optional[SpaceSpec] = None) -> List[sp.csr_matrix]:
    """Collapse operators in fixed order.

    Order: sqrt(gamma/2)|0><2| and sqrt(gamma/2)|1><2| for atom 1, the same for
    atom 2, sqrt(kappa_k) a_k for every cavity, sqrt(kappa_f^j) b_j for every
    fiber.  Zero-rate channels are kept (as zero matrices) so indices are
    stable.  Cavities selected by ``feedback_mode`` carry the feedback kick.
    """
    space = _check_space(params, space)
    ops = _Ops(space)
    out = []
    rate = math.sqrt(params.gamma / 2)
    for i in (0, 1):
        out.append(rate * ops.sigma(i, 0, 2))
        out.append(rate * ops.sigma(i, 1, 2))
    kicked = feedback_cavities(params)
    U = feedback_unitary(params, space) if kicked else None
    for k, ak in enumerate(ops.a):
        L = math.sqrt(params.kappa_cavity[k]) * ak
        if k in kicked:
            L = U @ L
        out.append(L.tocsr())
    for j, bj in enumerate(ops.b):
        out.append((math.sqrt(params.kappa_fiber[j]) * bj).tocsr())
    for L in out:
        L.eliminate_zeros()
    return out


def excitation_number(space: SpaceSpec) -> sp.csr_matrix:
    """Sum of |2><2| over atoms plus all photon numbers; conserved by the cavity/fiber part."""
    ops = _Ops(space)
    N = ops.sigma(0, 2, 2) + ops.sigma(1, 2, 2)
    for mode in ops.a + ops.b:
        N = N + mode.conj().T @ mode
    return N.tocsr()


@dataclass(frozen=True)
class ModeCountParams:
    fiber_length: float
    fiber_decay: float
    light_speed: float = 2.99792458e8


def resonant_mode_count(p: ModeCountParams) -> float:
    """Number of fiber modes resonant with the cavity, l kappa_f / (2 pi c).

    A value <= 1 justifies keeping a single fiber mode.
    """
    if not (p.fiber_length > 0 and p.light_speed > 0):
        raise InvalidArgument("fiber length and light speed must be positive")
    if not p.fiber_decay > 0:
        raise InvalidArgument("fiber decay rate must be positive")
    return p.fiber_length * p.fiber_decay / (2 * math.pi * p.light_speed)
