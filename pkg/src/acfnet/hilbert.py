"""
Tensor-product Hilbert spaces for the two-atom cavity/fiber chain.

Subsystems are always ordered atom 1, atom 2, cavities 1..n, fibers 1..n-1,
and flat basis indices are mixed-radix with the leftmost subsystem most
significant.  Operators are ``scipy.sparse`` CSR matrices (complex128).
"""

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument

ATOM = "atom"
CAVITY = "cavity"
FIBER = "fiber"

ATOM_LEVELS = 3


@dataclass(frozen=True)
class SpaceSpec:
    kinds: Tuple[str, ...]
    dims: Tuple[int, ...]

    def __post_init__(self):
        if len(self.kinds) != len(self.dims):
            raise InvalidArgument("kinds and dims must have equal length")
        if any(d < 2 for d in self.dims):
            raise InvalidArgument(f"every subsystem dimension must be >= 2, got {self.dims}")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_cavities(self) -> int:
        return self.kinds.count(CAVITY)

    @property
    def n_fibers(self) -> int:
        return self.kinds.count(FIBER)

    @property
    def fock_truncation(self) -> int:
        return self.dims[2] - 1

    def atom(self, i: int) -> int:
        """Site index of atom ``i`` (0 or 1)."""
        if i not in (0, 1):
            raise InvalidArgument(f"atom index must be 0 or 1, got {i}")
        return i

    def cavity(self, k: int) -> int:
        if not 0 <= k < self.n_cavities:
            raise InvalidArgument(f"cavity index {k} out of range")
        return 2 + k

    def fiber(self, j: int) -> int:
        if not 0 <= j < self.n_fibers:
            raise InvalidArgument(f"fiber index {j} out of range")
        return 2 + self.n_cavities + j

    @property
    def index(self) -> "BasisIndex":
        return BasisIndex(self)


@dataclass(frozen=True)
class BasisIndex:
    """Bijection between per-subsystem level labels and flat basis indices."""

    space: SpaceSpec

    def flat(self, labels: Sequence[int]) -> int:
        labels = tuple(int(l) for l in labels)
        if len(labels) != len(self.space.dims):
            raise InvalidArgument(f"expected {len(self.space.dims)} labels, got {len(labels)}")
        for l, d in zip(labels, self.space.dims):
            if not 0 <= l < d:
                raise InvalidArgument(f"label {l} out of range for subsystem of dim {d}")
        return int(np.ravel_multi_index(labels, self.space.dims))

    def unflatten(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < self.space.total_dim:
            raise InvalidArgument(f"flat index {index} out of range")
        return tuple(int(x) for x in np.unravel_index(index, self.space.dims))


def build_space(n: int, fock_truncation: int = 1) -> SpaceSpec:
    """Two three-level atoms, ``n`` cavities and ``n - 1`` fibers."""
    if n < 2:
        raise InvalidArgument(f"need at least two cavities, got n={n}")
    if fock_truncation < 1:
        raise InvalidArgument(f"fock truncation must be >= 1, got {fock_truncation}")
    m = fock_truncation + 1
    kinds = (ATOM, ATOM) + (CAVITY,) * n + (FIBER,) * (n - 1)
    dims = (ATOM_LEVELS, ATOM_LEVELS) + (m,) * (2 * n - 1)
    return SpaceSpec(kinds, dims)


def annihilation(dim: int) -> sp.csr_matrix:
    """Truncated bosonic lowering operator with <m-1|a|m> = sqrt(m)."""
    if dim < 2:
        raise InvalidArgument(f"bosonic dimension must be >= 2, got {dim}")
    return sp.diags(np.sqrt(np.arange(1, dim)), 1, shape=(dim, dim), format="csr", dtype=complex)


def atomic_transition(bra_level: int, ket_level: int) -> sp.csr_matrix:
    """The 3x3 atomic operator |bra_level><ket_level|."""
    for lvl in (bra_level, ket_level):
        if lvl not in range(ATOM_LEVELS):
            raise InvalidArgument(f"atomic level must be 0, 1 or 2, got {lvl}")
    return sp.csr_matrix(([1.0 + 0j], ([bra_level], [ket_level])), shape=(3, 3))


def embed(local, site: int, space: SpaceSpec) -> sp.csr_matrix:
    """Place ``local`` on subsystem ``site``; identity everywhere else."""
    if not 0 <= site < len(space.dims):
        raise InvalidArgument(f"site {site} out of range")
    local = sp.csr_matrix(local, dtype=complex)
    d = space.dims[site]
    if local.shape != (d, d):
        raise InvalidArgument(f"operator shape {local.shape} does not match subsystem dim {d}")
    left = int(np.prod(space.dims[:site]))
    right = int(np.prod(space.dims[site + 1:]))
    out = sp.kron(sp.identity(left, dtype=complex, format="csr"), local, format="csr")
    return sp.kron(out, sp.identity(right, dtype=complex, format="csr"), format="csr")


def tensor(*ops) -> sp.csr_matrix:
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), [sp.csr_matrix(o) for o in ops])


def basis_state(labels: Sequence[int], space: SpaceSpec) -> np.ndarray:
    v = np.zeros(space.total_dim, dtype=complex)
    v[space.index.flat(labels)] = 1.0
    return v


def is_hermitian(op, tol: float = 1e-12) -> bool:
    diff = op - op.conj().T
    if sp.issparse(diff):
        return diff.nnz == 0 or abs(diff).max() <= tol
    return bool(np.abs(diff).max() <= tol) if diff.size else True
