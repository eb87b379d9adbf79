"""
Lindblad master-equation evolution and steady states.

Density matrices are vectorized row-major (``rho.reshape(-1)``), so that
vec(A rho B) = (A kron B^T) vec(rho).  The Liouvillian is assembled once as a
sparse matrix; a matrix-free ``apply`` is kept for cross-checks.  Time
evolution runs on the real coordinates of a Hermitian matrix (diagonal, then
real and imaginary parts of the upper triangle), which halves the work and
keeps rho Hermitian exactly instead of letting roundoff accumulate.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import DOP853

from .errors import InvalidArgument, NonUniqueSteadyState, NumericalFailure
from .model import SystemParams, hamiltonian, lindblad_ops

log = logging.getLogger(__name__)

RTOL = 1e-8
ATOL = 1e-10
POSITIVITY_FLOOR = -1e-6
RESIDUAL_LIMIT = 1e-9


class Liouvillian:
    """Generator of rho' = -i[H, rho] + sum_k D[L_k] rho."""

    def __init__(self, H, collapse: Sequence):
        self.H = sp.csr_matrix(H, dtype=complex)
        self.collapse = [sp.csr_matrix(L, dtype=complex) for L in collapse]
        self.dim = self.H.shape[0]
        self._matrix = None
        self._no_jump = None
        self._real = None

    @property
    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            self._matrix = _assemble(self.H, self.collapse)
        return self._matrix

    @property
    def no_jump(self) -> sp.csr_matrix:
        """-i (H - i/2 sum L^dag L), the generator between jumps."""
        if self._no_jump is None:
            K = self.H.copy()
            for L in self.collapse:
                if L.nnz:
                    K = K - 0.5j * (L.conj().T @ L)
            self._no_jump = (-1j * K).tocsr()
        return self._no_jump

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Matrix-free action on a (not necessarily Hermitian) matrix."""
        A = self.no_jump
        out = A @ rho + (A @ rho.conj().T).conj().T
        for L in self.collapse:
            if L.nnz:
                out += L @ (L @ rho.conj().T).conj().T
        return np.asarray(out)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.reshape(-1)).reshape(self.dim, self.dim)

    @property
    def real_form(self) -> "HermitianCoordinates":
        if self._real is None:
            self._real = HermitianCoordinates(self.matrix, self.dim)
        return self._real

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


class HermitianCoordinates:
    """Real coordinates x of a Hermitian d x d matrix and the generator acting on them.

    x = (rho_ii, Re rho_ij, Im rho_ij) with i < j; ``R`` satisfies
    R x(rho) = x(L rho) for every Hermitian rho.
    """

    def __init__(self, M: sp.csr_matrix, d: int):
        self.dim = d
        self.iu, self.ju = np.triu_indices(d, 1)
        self.diag = np.arange(d)
        iu, ju, di = self.iu, self.ju, self.diag
        n_up = iu.size
        upper, lower = iu * d + ju, ju * d + iu
        re_cols = d + np.arange(n_up)
        im_cols = re_cols + n_up
        rows = np.concatenate([di * d + di, upper, lower, upper, lower])
        cols = np.concatenate([di, re_cols, re_cols, im_cols, im_cols])
        vals = np.concatenate([np.ones(d + 2 * n_up), np.full(n_up, 1j), np.full(n_up, -1j)])
        T = sp.csr_matrix((vals, (rows, cols)), shape=(d * d, d * d))
        C = (M @ T).tocsr()
        R = sp.vstack([C[di * d + di].real, C[upper].real, C[upper].imag]).tocsr()
        R.eliminate_zeros()
        self.R = R

    def to_real(self, rho: np.ndarray) -> np.ndarray:
        upper = rho[self.iu, self.ju]
        return np.concatenate([rho[self.diag, self.diag].real, upper.real, upper.imag])

    def to_matrix(self, x: np.ndarray) -> np.ndarray:
        d, n_up = self.dim, self.iu.size
        rho = np.zeros((d, d), dtype=complex)
        rho[self.diag, self.diag] = x[:d]
        upper = x[d:d + n_up] + 1j * x[d + n_up:]
        rho[self.iu, self.ju] = upper
        rho[self.ju, self.iu] = upper.conj()
        return rho


def _assemble(H, collapse) -> sp.csr_matrix:
    d = H.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    M = -1j * (sp.kron(H, eye) - sp.kron(eye, H.T))
    for L in collapse:
        if L.nnz == 0:
            continue
        LdL = (L.conj().T @ L).tocsr()
        M = M + sp.kron(L, L.conj()) - 0.5 * sp.kron(LdL, eye) - 0.5 * sp.kron(eye, LdL.T)
    M = M.tocsr()
    M.eliminate_zeros()
    return M


def liouvillian(H, collapse: Sequence) -> Liouvillian:
    H = sp.csr_matrix(H, dtype=complex)
    if H.shape[0] != H.shape[1]:
        raise InvalidArgument(f"Hamiltonian must be square, got {H.shape}")
    scale = max(abs(H).max() if H.nnz else 0.0, 1.0)
    diff = H - H.conj().T
    if diff.nnz and abs(diff).max() > 1e-12 * scale:
        raise InvalidArgument("Hamiltonian is not Hermitian")
    for L in collapse:
        if L.shape != H.shape:
            raise InvalidArgument(f"collapse operator shape {L.shape} does not match {H.shape}")
    return Liouvillian(H, collapse)


def system_liouvillian(params: SystemParams) -> Liouvillian:
    space = params.space()
    return liouvillian(hamiltonian(params, space), lindblad_ops(params, space))


def feedback_liouvillian(params: SystemParams) -> Liouvillian:
    """Liouvillian with the feedback kick folded into the detected cavity channels."""
    if params.feedback_mode is None:
        raise InvalidArgument("feedback_liouvillian needs feedback_mode 'first' or 'both'")
    if params.eta is None:
        raise InvalidArgument("feedback_liouvillian needs eta")
    return system_liouvillian(params)


def density_diagnostics(rho: np.ndarray) -> Dict[str, float]:
    herm = 0.5 * (rho + rho.conj().T)
    return {
        "trace_error": float(abs(np.trace(rho) - 1.0)),
        "hermiticity_error": float(np.abs(rho - rho.conj().T).max()),
        "min_eigenvalue": float(scipy.linalg.eigvalsh(herm)[0]),
    }


def check_density_matrix(rho, tol: float = 1e-8) -> np.ndarray:
    """Validate a user-supplied initial state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgument(f"density matrix must be square, got shape {rho.shape}")
    diag = density_diagnostics(rho)
    if diag["hermiticity_error"] > tol:
        raise InvalidArgument(f"density matrix is not Hermitian (error {diag['hermiticity_error']:.2e})")
    if diag["trace_error"] > tol:
        raise InvalidArgument(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    if diag["min_eigenvalue"] < -tol:
        raise InvalidArgument(f"density matrix has negative eigenvalue {diag['min_eigenvalue']:.2e}")
    return rho


def pure_state(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def population(rho: np.ndarray, v: np.ndarray) -> float:
    """<v|rho|v> for a normalized state vector ``v``."""
    return float(np.real(np.vdot(v, rho @ v)))


@dataclass
class Trajectory:
    times: np.ndarray
    populations: Dict[str, np.ndarray]
    trace_error: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    states: Optional[List[np.ndarray]] = None
    n_evaluations: int = 0

    @property
    def final_state(self) -> Optional[np.ndarray]:
        return None if not self.states else self.states[-1]


def evolve(
    L: Liouvillian,
    rho0: np.ndarray,
    times: Sequence[float],
    observables: Optional[Mapping[str, np.ndarray]] = None,
    keep_states: bool = True,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Trajectory:
    """Integrate the master equation and sample at ``times``.

    Uses an adaptive 8th-order Runge-Kutta scheme with dense output, so
    snapshots are interpolated rather than forcing steps onto the grid.
    ``rtol`` and ``atol`` bound the local error of each component.  The state
    lives in real Hermitian coordinates, so only the Hermitian part
    of ``rho0`` is used and every snapshot is Hermitian exactly.  It is never
    renormalized; trace, Hermiticity and the smallest eigenvalue are recorded
    at every snapshot, and an eigenvalue below -1e-6 aborts with
    ``NumericalFailure``.
    """
    rho0 = check_density_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidArgument("times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise InvalidArgument("times must be non-negative and strictly increasing")
    if rho0.shape[0] != L.dim:
        raise InvalidArgument(f"state dimension {rho0.shape[0]} does not match Liouvillian dimension {L.dim}")
    observables = dict(observables or {})
    for name, v in observables.items():
        if np.shape(v) != (L.dim,):
            raise InvalidArgument(f"observable {name!r} has shape {np.shape(v)}, expected ({L.dim},)")

    coords = L.real_form
    R = coords.R
    n_eval = [0]

    def rhs(t, x):
        n_eval[0] += 1
        return R @ x

    pops = {k: np.empty(times.size) for k in observables}
    tr_err = np.empty(times.size)
    h_err = np.empty(times.size)
    min_eig = np.empty(times.size)
    states = [] if keep_states else None

    def record(i, x):
        rho = coords.to_matrix(x)
        diag = density_diagnostics(rho)
        tr_err[i] = diag["trace_error"]
        h_err[i] = diag["hermiticity_error"]
        min_eig[i] = diag["min_eigenvalue"]
        if diag["min_eigenvalue"] < POSITIVITY_FLOOR:
            raise NumericalFailure(
                f"state lost positivity at t={times[i]:.6g}",
                time=float(times[i]),
                **diag,
            )
        for k, v in observables.items():
            pops[k][i] = population(rho, v)
        if keep_states:
            states.append(rho.copy())

    y0 = coords.to_real(rho0)
    i = 0
    while i < times.size and times[i] == 0.0:
        record(i, y0)
        i += 1
    if i < times.size:
        # scipy measures the error in an RMS norm; dividing by sqrt(size) makes
        # rtol/atol hold for every component, which is what keeps the nearly
        # empty corners of rho from drifting negative
        scale = math.sqrt(y0.size)
        solver = DOP853(rhs, 0.0, y0, times[-1], rtol=rtol / scale, atol=atol / scale)
        while i < times.size:
            msg = solver.step()
            if solver.status == "failed":
                raise NumericalFailure(
                    f"integrator failed at t={solver.t:.6g}: {msg}",
                    time=float(solver.t),
                    evaluations=n_eval[0],
                )
            interp = None
            while i < times.size and times[i] <= solver.t:
                if times[i] == solver.t:
                    y = solver.y
                else:
                    interp = interp or solver.dense_output()
                    y = interp(times[i])
                record(i, y)
                i += 1
            if not np.all(np.isfinite(solver.y)):
                raise NumericalFailure(f"non-finite state at t={solver.t:.6g}", time=float(solver.t))

    return Trajectory(times, pops, tr_err, h_err, min_eig, states, n_eval[0])


@dataclass
class SteadyStateInfo:
    residual: float
    inverse_norm: float
    scale: float
    method: str


class _NoJumpInverse:
    """Inverse of rho -> -i(H_eff rho - rho H_eff^dag) - s rho.

    H_eff = H - (i/2) sum L^dag L.  When H_eff has a well-conditioned
    eigenbasis the map is diagonal there; otherwise the Schur form
    H_eff = Q T Q^dag turns it into the triangular Sylvester equation
    R Y + Y R^dag = Q^dag X Q with R = -i T - s/2.
    """

    def __init__(self, L: Liouvillian, shift: float, max_condition: float = 1e6):
        Heff = L.H.toarray()
        for c in L.collapse:
            if c.nnz:
                Heff = Heff - 0.5j * (c.conj().T @ c).toarray()
        self.dim = L.dim
        lam, V = scipy.linalg.eig(Heff)
        if np.linalg.cond(V) < max_condition:
            self.V, self.Vinv = V, np.linalg.inv(V)
            self.denom = -1j * (lam[:, None] - lam.conj()[None, :]) - shift
            self.R = None
        else:
            T, self.Q = scipy.linalg.schur(Heff, output="complex")
            self.R = -1j * T - 0.5 * shift * np.eye(L.dim)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        X = x.reshape(self.dim, self.dim)
        if self.R is None:
            Y = (self.Vinv @ X @ self.Vinv.conj().T) / self.denom
            return (self.V @ Y @ self.V.conj().T).reshape(-1)
        Q = self.Q
        Y, scale, info = scipy.linalg.lapack.ztrsyl(self.R, self.R, Q.conj().T @ X @ Q, trana="N", tranb="C", isgn=1)
        if info < 0:
            raise NumericalFailure(f"triangular Sylvester solve failed (info={info})")
        return (Q @ (Y / scale) @ Q.conj().T).reshape(-1)


def _kernel_dimension(M: sp.csr_matrix, tol: float) -> int:
    """Count (near-)zero eigenvalues of a Liouvillian."""
    N = M.shape[0]
    if M.nnz == 0:
        return N
    if N <= 1500:
        s = scipy.linalg.svdvals(M.toarray())
        return int(np.sum(s < tol))
    k = min(8, N - 2)
    vals = spla.eigs(M.tocsc(), k=k, sigma=-tol, which="LM", return_eigenvectors=False)
    return int(np.sum(np.abs(vals) < tol))


def _trace_row_system(M: sp.csr_matrix, d: int):
    """L with its first row (d rho_00/dt, redundant by trace preservation) replaced by tr(rho)."""
    N = d * d
    diag = np.arange(d) * (d + 1)
    tr = sp.csr_matrix((np.ones(d, dtype=complex), (np.zeros(d, dtype=int), diag)), shape=(1, N))
    return sp.vstack([tr, M[1:]], format="csr"), diag


def _krylov_solver(L: Liouvillian, A: sp.csr_matrix, shift: float):
    N = A.shape[0]
    P = spla.LinearOperator((N, N), _NoJumpInverse(L, shift), dtype=complex)

    def solve(b, rtol=1e-13):
        x, info = spla.gmres(A, b, M=P, rtol=rtol, atol=0.0, restart=60, maxiter=30)
        if info != 0:
            return None
        return x

    return solve


def _lu_solver(A: sp.csr_matrix):
    try:
        lu = spla.splu(A.tocsc(), permc_spec="COLAMD")
    except RuntimeError:
        return None

    def solve(b, rtol=None):
        x = lu.solve(b)
        x = x + lu.solve(b - A @ x)
        return x if np.all(np.isfinite(x)) else None

    return solve


def _inverse_norm(solve, N: int, iterations: int = 2, seed: int = 0) -> float:
    """Power-iteration estimate of ||A^-1||; inf if a solve breaks down."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    x /= np.linalg.norm(x)
    growth = 0.0
    for _ in range(iterations):
        y = solve(x, rtol=1e-6)
        if y is None:
            return np.inf
        growth = np.linalg.norm(y)
        x = y / growth
    return float(growth)


def steady_state(L: Liouvillian, full_output: bool = False, method: str = "auto", shift: float = 1e-2):
    """Unique stationary density matrix of ``L``.

    Solves L vec(rho) = 0 with one row replaced by the trace condition.
    That system is non-singular exactly when the kernel is one-dimensional,
    so an estimate of the norm of its inverse serves as the uniqueness check.

    ``method="krylov"`` runs GMRES preconditioned by the inverse of the
    no-jump part of L (a Sylvester solve, O(d^3) per application);
    ``"lu"`` factorizes the sparse system directly; ``"auto"`` tries Krylov
    and falls back to LU.  Raises ``NonUniqueSteadyState`` for a degenerate
    kernel and ``NumericalFailure`` if the residual exceeds 1e-9.
    """
    if method not in ("auto", "krylov", "lu"):
        raise InvalidArgument(f"unknown steady-state method {method!r}")
    M = L.matrix
    d = L.dim
    N = d * d
    if M.nnz == 0:
        raise NonUniqueSteadyState(N)
    scale = float(abs(M).sum(axis=0).max())
    A, diag = _trace_row_system(M, d)
    b = np.zeros(N, dtype=complex)
    b[0] = 1.0

    order = {"auto": ("krylov", "lu"), "krylov": ("krylov",), "lu": ("lu",)}[method]
    singular_limit = 1e10 / max(scale, 1.0)
    x = None
    for name in order:
        solve = _krylov_solver(L, A, shift) if name == "krylov" else _lu_solver(A)
        if solve is None:
            inv_norm = np.inf
        else:
            inv_norm = _inverse_norm(solve, N)
            x = solve(b) if inv_norm < singular_limit else None
        if x is not None:
            break
        log.debug("steady state: %s solver gave no usable solution", name)
    if x is None:
        if inv_norm >= singular_limit:
            dim = _kernel_dimension(M, 1e-8 * max(scale, 1.0))
            raise NonUniqueSteadyState(max(dim, 2))
        raise NumericalFailure("steady-state solve did not converge", inverse_norm=inv_norm)

    rho = x.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(M @ rho.reshape(-1)))
    if not residual < RESIDUAL_LIMIT:
        raise NumericalFailure(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_LIMIT}", residual=residual)
    if full_output:
        return rho, SteadyStateInfo(residual, inv_norm, scale, name)
    return rho
