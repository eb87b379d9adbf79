"""
Zeno-reduced model: the dark-subspace projector of the cavity/fiber
Hamiltonian, named states, and the closed-form effective Hamiltonian and
collapse operators on the five-state reduced basis.

The effective operators live on the span of five full-space vectors.  They
are held as 5x5 matrices together with that basis; ``EffectiveModel``
embeds them into the joint space on request.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InvalidArgument, UnsupportedConfiguration
from .hilbert import SpaceSpec, basis_state
from .model import (
    BELL,
    SystemParams,
    cavity_fiber_part,
    coherent_part,
    drive_part,
    excitation_number,
)

BELL_BASIS = ("00", "11", "T", "S", "D")
KLM_BASIS = ("00", "01", "10", "11", "D")

_SQ2 = math.sqrt(2.0)
_THETA_P = (math.sqrt(5.0) + 1) / 2
_THETA_M = (math.sqrt(5.0) - 1) / 2

# atomic-sector superpositions over (00, 01, 10, 11), all modes in vacuum
_ATOMIC_STATES = {
    "00": (1, 0, 0, 0),
    "01": (0, 1, 0, 0),
    "10": (0, 0, 1, 0),
    "11": (0, 0, 0, 1),
    "S": (0, 1 / _SQ2, -1 / _SQ2, 0),
    "T": (0, 1 / _SQ2, 1 / _SQ2, 0),
    "K1": tuple(c / math.sqrt(3) for c in (1, 0, 1, 1)),
    "K2": tuple(c / math.sqrt(15) for c in (1, -3, -2, 1)),
    "K3": tuple(c / math.sqrt(5) for c in (_THETA_P, 1, -1, -_THETA_M)),
    "K4": tuple(c / math.sqrt(5) for c in (_THETA_M, -1, 1, -_THETA_P)),
}
STATE_NAMES = tuple(_ATOMIC_STATES) + ("D",)


def coupling_ratio(params: SystemParams) -> float:
    """G_n = (n - 1) (g / J)^2."""
    return (params.n - 1) * (params.g / params.J) ** 2


def effective_rates(params: SystemParams) -> Dict[str, float]:
    G = coupling_ratio(params)
    return {
        "G": G,
        "Omega_prime": _SQ2 * params.Omega / math.sqrt(G + 2),
        "gamma1": math.sqrt(params.gamma * (1 + G) / (G + 2)),
        "gamma2": math.sqrt(params.gamma / (2 * G + 4)),
        "gamma3": math.sqrt(params.gamma / (2 * G + 4)),
    }


def named_state(name: str, params: SystemParams, space: Optional[SpaceSpec] = None) -> np.ndarray:
    """Normalized full-space vector for ``name``.

    Atomic states ("00", "01", "10", "11", "S", "T", "K1".."K4") carry every
    cavity and fiber in vacuum.  "D" is the excited dark state of the
    cavity/fiber Hamiltonian.
    """
    space = space or params.space()
    n_modes = len(space.dims) - 2
    vac = [0] * n_modes
    if name in _ATOMIC_STATES:
        v = np.zeros(space.total_dim, dtype=complex)
        for coeff, atoms in zip(_ATOMIC_STATES[name], ((0, 0), (0, 1), (1, 0), (1, 1))):
            if coeff:
                v += coeff * basis_state(list(atoms) + vac, space)
        return v
    if name == "D":
        n = space.n_cavities
        ratio = params.g / params.J
        v = basis_state([2, 1] + vac, space) + (-1) ** n * basis_state([1, 2] + vac, space)
        for j in range(space.n_fibers):
            labels = [1, 1] + vac
            labels[space.fiber(j)] = 1
            v += ratio * (-1) ** (j + 1) * basis_state(labels, space)
        return v / math.sqrt(coupling_ratio(params) + 2)
    raise InvalidArgument(f"unknown state name {name!r}; expected one of {STATE_NAMES}")


def basis_labels(scheme: str):
    return BELL_BASIS if scheme == BELL else KLM_BASIS


@dataclass
class ZenoProjector:
    P0: np.ndarray
    zero_tolerance: float
    kernel_dim: int


def zeno_hamiltonian(params: SystemParams, space: Optional[SpaceSpec] = None) -> sp.csr_matrix:
    """Dimensionless cavity/fiber Hamiltonian of the Zeno decomposition.

    For J >= g it is sum a_i|2><1| + (J/g) b^dag a + h.c. (strength K = g/Omega);
    for J < g the roles swap: (g/J) a_i|2><1| + b^dag a + h.c. (K = J/Omega).
    """
    return (cavity_fiber_part(params, space) / zeno_strength(params)).tocsr()


def zeno_strength(params: SystemParams) -> float:
    """Omega * K, i.e. g when J >= g and J otherwise."""
    return params.g if params.J >= params.g else params.J


def zeno_projector(H, tol: Optional[float] = None) -> ZenoProjector:
    """Orthogonal projector onto the kernel of Hermitian ``H``.

    Eigenvalues with magnitude below ``tol`` (default 1e-9 times the largest
    magnitude) count as zero.
    """
    Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
    scale = max(np.abs(Hd).max(), 1.0)
    if np.abs(Hd - Hd.conj().T).max() > 1e-12 * scale:
        raise InvalidArgument("zeno_projector needs a Hermitian matrix")
    w, V = scipy.linalg.eigh(Hd)
    if tol is None:
        tol = 1e-9 * max(np.abs(w).max(), 1e-300)
    kernel = V[:, np.abs(w) < tol]
    return ZenoProjector(P0=kernel @ kernel.conj().T, zero_tolerance=tol, kernel_dim=kernel.shape[1])


def min_gap(n: int) -> float:
    """Smallest non-zero |eigenvalue| of the photonic chain at J = g: 2 cos[(n-1) pi / (2n)]."""
    if n < 2:
        raise InvalidArgument(f"n must be >= 2, got {n}")
    return 2 * math.cos((n - 1) * math.pi / (2 * n))


def single_excitation_spectrum(n: int, photonic_only: bool = True) -> np.ndarray:
    """Eigenvalues of the J = g Zeno Hamiltonian on a one-quantum sector.

    ``photonic_only`` keeps both atoms in |0> (one photon shared by the
    2n - 1 cavity and fiber modes, the sector the closed-form gap refers
    to); otherwise every state with exactly one quantum (|2> level or
    photon) is kept, whatever the spectator atom levels.
    """
    params = SystemParams(n=n, g=1.0, J=1.0)
    space = params.space()
    H = zeno_hamiltonian(params, space)
    N = excitation_number(space).diagonal().real
    keep = np.isclose(N, 1.0)
    if photonic_only:
        labels = np.array(np.unravel_index(np.arange(space.total_dim), space.dims))
        keep &= (labels[0] == 0) & (labels[1] == 0)
    idx = np.flatnonzero(keep)
    block = H[idx][:, idx].toarray()
    rest = np.setdiff1d(np.arange(space.total_dim), idx)
    if rest.size and abs(H[rest][:, idx]).max() > 0:
        raise RuntimeError("selected sector is not invariant under the Zeno Hamiltonian")
    return scipy.linalg.eigvalsh(block)


def smallest_nonzero(values, tol: float = 1e-9) -> float:
    mags = np.abs(np.asarray(values))
    return float(mags[mags > tol].min())


@dataclass
class EffectiveModel:
    """Reduced model on five named states.

    ``H`` and ``lindblads`` are matrices in the ``labels`` basis.  ``basis``
    (columns are full-space vectors) is built lazily since it is only
    needed when embedding or projecting full-space objects.
    """

    params: SystemParams
    labels: Sequence[str]
    H: np.ndarray
    lindblads: List[np.ndarray]
    rates: Dict[str, float]
    _basis: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def basis(self) -> np.ndarray:
        if self._basis is None:
            space = self.params.space()
            self._basis = np.column_stack([named_state(l, self.params, space) for l in self.labels])
        return self._basis

    def embed(self, op) -> sp.csr_matrix:
        """Reduced matrix -> full-space operator B op B^dag."""
        B = sp.csr_matrix(self.basis)
        return (B @ sp.csr_matrix(op) @ B.conj().T).tocsr()

    def project(self, op) -> np.ndarray:
        """Full-space operator -> reduced matrix B^dag op B."""
        B = self.basis
        return B.conj().T @ (op @ B)

    def reduce_vector(self, v) -> np.ndarray:
        """Reduced coordinates of a full-space vector, or of a named state."""
        if isinstance(v, str):
            return self.reduced_state(v)
        return self.basis.conj().T @ v

    def reduced_state(self, name: str) -> np.ndarray:
        """Coordinates of a named state in the reduced basis, without building full vectors."""
        if name in self.labels:
            e = np.zeros(len(self.labels), dtype=complex)
            e[list(self.labels).index(name)] = 1.0
            return e
        if name not in _ATOMIC_STATES:
            raise InvalidArgument(f"state {name!r} is not in the reduced span")
        atomic = {l: np.array(_ATOMIC_STATES[l], dtype=complex) for l in self.labels if l != "D"}
        target = np.array(_ATOMIC_STATES[name], dtype=complex)
        out = np.zeros(len(self.labels), dtype=complex)
        for i, l in enumerate(self.labels):
            if l != "D":
                out[i] = np.vdot(atomic[l], target)
        return out

    def full_hamiltonian(self) -> sp.csr_matrix:
        return self.embed(self.H)

    def full_lindblads(self) -> List[sp.csr_matrix]:
        return [self.embed(L) for L in self.lindblads]


def _require_gamma_equals_kappa_f(params: SystemParams):
    bad = [k for k in params.kappa_fiber if not math.isclose(k, params.gamma, rel_tol=1e-12, abs_tol=1e-15)]
    if bad:
        raise UnsupportedConfiguration(
            f"effective collapse operators assume gamma == kappa_fiber; got gamma={params.gamma}, "
            f"kappa_fiber={params.kappa_fiber}"
        )


def _reduced_hamiltonian(params: SystemParams, rates) -> np.ndarray:
    labels = basis_labels(params.scheme)
    ix = {l: i for i, l in enumerate(labels)}
    H = np.zeros((5, 5), dtype=complex)
    d, mw, op = params.delta, params.Omega_MW, rates["Omega_prime"]
    if params.scheme == BELL:
        H[ix["D"], ix["T"]] = op
        H[ix["T"], ix["00"]] = _SQ2 * mw
        H[ix["T"], ix["11"]] = _SQ2 * mw
        diag = {"11": 2 * d, "T": d, "S": d, "D": d}
    else:
        H[ix["D"], ix["01"]] = op / _SQ2
        H[ix["00"], ix["10"]] = mw
        H[ix["00"], ix["01"]] = -mw
        H[ix["11"], ix["10"]] = -mw
        H[ix["11"], ix["01"]] = mw
        diag = {"11": 2 * d, "01": d, "10": d, "D": d}
    H = H + H.conj().T
    for l, v in diag.items():
        H[ix[l], ix[l]] = v
    return H


def _reduced_lindblads(params: SystemParams, rates) -> List[np.ndarray]:
    labels = basis_labels(params.scheme)
    ix = {l: i for i, l in enumerate(labels)}
    # |11> collects the atomic |1>-decays and fiber loss; the rest go to the
    # two single-excitation ground states
    targets = ("11", "S", "T") if params.scheme == BELL else ("11", "01", "10")
    out = []
    for target, key in zip(targets, ("gamma1", "gamma2", "gamma3")):
        L = np.zeros((5, 5), dtype=complex)
        L[ix[target], ix["D"]] = rates[key]
        out.append(L)
    return out


def effective_model(params: SystemParams) -> EffectiveModel:
    _require_gamma_equals_kappa_f(params)
    rates = effective_rates(params)
    return EffectiveModel(
        params=params,
        labels=basis_labels(params.scheme),
        H=_reduced_hamiltonian(params, rates),
        lindblads=_reduced_lindblads(params, rates),
        rates=rates,
    )


def effective_hamiltonian(params: SystemParams) -> sp.csr_matrix:
    """Closed-form effective Hamiltonian embedded in the joint space."""
    rates = effective_rates(params)
    model = EffectiveModel(params, basis_labels(params.scheme), _reduced_hamiltonian(params, rates), [], rates)
    return model.full_hamiltonian()


def effective_lindblads(params: SystemParams) -> List[sp.csr_matrix]:
    """The three effective collapse operators embedded in the joint space."""
    return effective_model(params).full_lindblads()


def reconstructed_hamiltonian(params: SystemParams, projector: Optional[ZenoProjector] = None) -> np.ndarray:
    """Numerical Omega P0 H_c P0 + H_C, expressed on the reduced basis."""
    space = params.space()
    model = EffectiveModel(params, basis_labels(params.scheme), np.zeros((5, 5)), [], effective_rates(params))
    if projector is None:
        projector = zeno_projector(zeno_hamiltonian(params, space))
    P0 = projector.P0
    Hc = drive_part(params, space, unit=True).toarray()
    full = params.Omega * (P0 @ Hc @ P0) + coherent_part(params, space).toarray()
    return model.project(full)
