"""Hierarchy of auxiliary density operators (ADOs) and its rescaled generator.

Each ADO is labelled by a multi-index ``n`` with one non-negative entry per
(site i, Matsubara term k) pair, flattened as ``j = i * (K + 1) + k``. The
all-zero index comes first and is the physical reduced density matrix.

The generator, with time in ps and ``kappa = 2 pi c``, is

    d rho_n/dt = kappa * ( -i [H, rho_n] - sum_j n_j nu_j rho_n
                           - Delta sum_i [Q_i, [Q_i, rho_n]]
                           - i sum_j sqrt((n_j + 1)|c_j|) [Q_i, rho_{n+j}]
                           - i sum_j sqrt(n_j / |c_j|) (c_j Q_i rho_{n-j} - c_j^* rho_{n-j} Q_i) )

Raise-neighbours beyond the depth are dropped (hard truncation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .bath import BathDecomposition
from .model import SystemHamiltonian
from .units import CM1_TO_RAD_PS

#: refuse hierarchies with more ADOs than this
MAX_ADOS = 200_000


def ado_count(n_sites: int, K: int, depth: int) -> int:
    D = n_sites * (K + 1)
    return math.comb(depth + D, D)


@dataclass(frozen=True)
class Hierarchy:
    """Ordered multi-indices with raise/lower neighbour tables.

    ``plus[a, j]`` / ``minus[a, j]`` give the position of ``n +/- e_j``, or
    ``-1`` when that index is outside the truncated set.
    """

    indices: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    n_sites: int
    K: int
    depth: int

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def tiers(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    @property
    def n_modes(self) -> int:
        return self.indices.shape[1]

    def position(self, index) -> int:
        hits = np.flatnonzero((self.indices == np.asarray(index)).all(axis=1))
        if len(hits) == 0:
            raise KeyError(tuple(index))
        return int(hits[0])


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``total``, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_hierarchy(n_sites: int, K: int, depth: int, cap: int = MAX_ADOS) -> Hierarchy:
    if n_sites < 1 or K < 0 or depth < 0:
        raise ValueError("need n_sites >= 1, K >= 0, depth >= 0")
    count = ado_count(n_sites, K, depth)
    if count > cap:
        raise ValueError(f"hierarchy would hold {count} ADOs, above the cap of {cap}")
    D = n_sites * (K + 1)
    indices = [c for tier in range(depth + 1) for c in _compositions(tier, D)]
    lookup = {c: a for a, c in enumerate(indices)}
    plus = np.full((count, D), -1, dtype=np.intp)
    minus = np.full((count, D), -1, dtype=np.intp)
    for a, c in enumerate(indices):
        for j in range(D):
            up = c[:j] + (c[j] + 1,) + c[j + 1:]
            plus[a, j] = lookup.get(up, -1)
            if c[j] > 0:
                minus[a, j] = lookup[c[:j] + (c[j] - 1,) + c[j + 1:]]
    return Hierarchy(np.array(indices, dtype=np.int64).reshape(count, D), plus, minus, n_sites, K, depth)


class HEOMGenerator:
    """Right-hand side of the rescaled hierarchy for a fixed H, Q and bath.

    The integrator state is the packed real form of the ADO stack (see
    :func:`vibheom._kernels.pack`), element-major: a flat view of a
    ``(d*d, n_ados)`` array.
    :meth:`apply` works on full complex stacks ``(n_ados, d, d)``.

    ``backend="numba"`` runs the compiled packed kernel (``parallel=True``
    spreads packed elements over numba threads); ``backend="numpy"`` is the vectorized
    complex reference implementation.
    """

    def __init__(self, H: SystemHamiltonian, decomp: BathDecomposition, depth: int,
                 cap: int = MAX_ADOS, backend: str = "numba", parallel: bool = False):
        if backend not in ("numba", "numpy"):
            raise ValueError(f"unknown backend {backend!r}")
        if np.any(np.abs(H.matrix.imag) > 0):
            raise ValueError("the system Hamiltonian must be real symmetric")
        self.H = H
        self.decomp = decomp
        self.hierarchy = enumerate_hierarchy(H.n_sites, decomp.K, depth, cap)
        self.backend = backend
        self.parallel = parallel
        d = H.dim
        kappa = CM1_TO_RAD_PS
        hier = self.hierarchy
        A, D = len(hier), hier.n_modes
        K1 = decomp.K + 1
        self.shape = (A, d, d)

        # the uniform energy offset commutes with everything
        Hs = H.matrix.real - np.trace(H.matrix).real / d * np.eye(d)
        self._H = kappa * Hs

        q = H.site_projector_diagonals()
        site_of = np.repeat(np.arange(H.n_sites), K1)
        k_of = np.tile(np.arange(K1), H.n_sites)
        c = decomp.coefficients[k_of]
        nu = decomp.frequencies[k_of]
        absc = np.abs(c)

        self._damping = kappa * (hier.indices @ nu)
        diff = q[:, :, None] - q[:, None, :]
        self._closure = kappa * decomp.remainder * np.sum(diff ** 2, axis=0)

        n = hier.indices.astype(float)
        safe = np.where(absc > 0, absc, 1.0)
        self._cplus = np.where(absc > 0, kappa * np.sqrt((n + 1.0) * absc), 0.0)
        self._cminus = np.where(absc > 0, kappa * np.sqrt(n / safe), 0.0)
        self._cplus[hier.plus < 0] = 0.0
        self._cminus[hier.minus < 0] = 0.0
        self._active = [j for j in range(D) if absc[j] > 0]

        # reference path: -i [Q_i, .] and -i (c Q_i . - c^* . Q_i) as elementwise masks
        self._raise_mask = -1j * diff[site_of]
        self._lower_mask = -1j * (c[:, None, None] * q[site_of][:, :, None]
                                  - np.conj(c)[:, None, None] * q[site_of][:, None, :])
        self._plus = np.where(hier.plus < 0, A, hier.plus)
        self._minus = np.where(hier.minus < 0, A, hier.minus)

        # compiled path: each mask is (alpha - i gamma) on whole site blocks
        block = d // H.n_sites
        if not np.array_equal(q, np.repeat(np.eye(H.n_sites), block, axis=1)):
            raise ValueError("coupling operators must be contiguous site projectors")
        closure = self._closure
        liou = _kernels.packed_superoperator(lambda r: -1j * (self._H @ r - r @ self._H) - closure * r, d)
        self._liouvillian = _kernels.csr(liou)
        self._bath_tables = self._build_bath_tables(d, block)
        self._zero_damping = np.zeros(A)

    def _build_bath_tables(self, d, block):
        """Per-element gather lists for the raise/lower terms (see :mod:`vibheom._kernels`)."""
        hier = self.hierarchy
        A = len(hier)
        nblk = d // block
        corners = np.arange(nblk) * block
        masks = np.stack([self._raise_mask, self._lower_mask])[:, :, corners][:, :, :, corners]
        alpha, gamma = masks.real, -masks.imag
        off_re, off_im = _kernels.packed_layout(d)
        iu = np.triu_indices(d)
        e_re = off_re[iu[0]] + iu[1] - iu[0]
        e_im = np.where(iu[1] > iu[0], off_im[iu[0]] + iu[1] - iu[0] - 1, -1)
        src, scale, records = [], [], []
        for j in self._active:
            for kind, (nbr, coef) in enumerate(((hier.plus, self._cplus), (hier.minus, self._cminus))):
                r = len(src)
                src.append(np.where(nbr[:, j] < 0, 0, nbr[:, j]))
                scale.append(np.where(nbr[:, j] < 0, 0.0, coef[:, j]))
                for e, (a, b) in enumerate(zip(*iu)):
                    al, ga = alpha[kind, j, a // block, b // block], gamma[kind, j, a // block, b // block]
                    if al != 0.0 or (ga != 0.0 and a != b):
                        records.append((e, r, al, ga))
        records.sort(key=lambda x: (x[0], x[1]))
        rec = np.array(records, dtype=float).reshape(-1, 4)
        ptr = np.searchsorted(rec[:, 0], np.arange(len(e_re) + 1)).astype(np.int64)
        return (e_re.astype(np.int64), e_im.astype(np.int64), ptr, rec[:, 1].astype(np.int64),
                np.ascontiguousarray(rec[:, 2]), np.ascontiguousarray(rec[:, 3]),
                np.array(src, dtype=np.int32).reshape(-1, A),
                np.array(scale, dtype=float).reshape(-1, A))

    @property
    def n_ados(self) -> int:
        return self.shape[0]

    @property
    def state_size(self) -> int:
        A, d, _ = self.shape
        return A * d * d

    @property
    def decay_rates(self) -> np.ndarray:
        """Tier damping ``kappa * sum_j n_j nu_j`` per ADO (ps^-1)."""
        return self._damping

    def initial_state(self, rho0: np.ndarray) -> np.ndarray:
        A, d, _ = self.shape
        y = np.zeros((d * d, A))
        y[:, 0] = _kernels.pack(rho0)
        return y.reshape(-1)

    def physical(self, y: np.ndarray) -> np.ndarray:
        """The reduced density matrix held in a packed state."""
        A, d, _ = self.shape
        return _kernels.unpack(y.reshape(d * d, A)[:, 0], d)

    def _apply_numpy(self, rho: np.ndarray) -> np.ndarray:
        A, d, _ = self.shape
        padded = np.concatenate([rho, np.zeros((1, d, d), dtype=rho.dtype)])
        comm = np.matmul(self._H, rho) - (rho.reshape(A * d, d) @ self._H).reshape(A, d, d)
        out = -1j * comm
        out -= (self._damping[:, None, None] + self._closure) * rho
        for j in self._active:
            out += (self._cplus[:, j, None, None] * self._raise_mask[j]) * padded[self._plus[:, j]]
            out += (self._cminus[:, j, None, None] * self._lower_mask[j]) * padded[self._minus[:, j]]
        return out

    def _apply_packed(self, v: np.ndarray, damping: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
        if out is None:
            out = np.empty_like(v)
        kernel = _kernels.rhs_parallel if self.parallel else _kernels.rhs_serial
        kernel(v, out, *self._liouvillian, damping, *self._bath_tables)
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Time derivative of a full Hermitian ADO stack ``(n_ados, d, d)``."""
        if self.backend == "numpy":
            return self._apply_numpy(np.asarray(rho, dtype=complex))
        d = self.shape[1]
        v = np.ascontiguousarray(_kernels.pack(rho).T)
        return _kernels.unpack(self._apply_packed(v, self._damping).T, d)

    def _derivative(self, y: np.ndarray, damped: bool) -> np.ndarray:
        A, d, _ = self.shape
        if self.backend == "numpy":
            rho = _kernels.unpack(y.reshape(d * d, A).T, d)
            out = self._apply_numpy(rho)
            if not damped:
                out += self._damping[:, None, None] * rho
            return _kernels.pack(out).T.reshape(-1)
        damping = self._damping if damped else self._zero_damping
        return self._apply_packed(y.reshape(d * d, A), damping).reshape(-1)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        """Full time derivative of a packed state."""
        return self._derivative(y, True)

    def rhs_undamped(self, t: float, y: np.ndarray) -> np.ndarray:
        """Time derivative without the tier damping, for use with :attr:`decay_rates`."""
        return self._derivative(y, False)

    def rhs_undamped_into(self, t: float, y: np.ndarray, out: np.ndarray) -> None:
        """:meth:`rhs_undamped` written into ``out`` (compiled backend only)."""
        A, d, _ = self.shape
        self._apply_packed(y.reshape(d * d, A), self._zero_damping, out.reshape(d * d, A))

    def stiffness_hint(self) -> str:
        nu_max = float(np.max(self.decomp.frequencies))
        return (f"largest Matsubara frequency {nu_max:.1f} cm^-1, depth {self.hierarchy.depth}, "
                f"max tier damping {float(np.max(self._damping)) / CM1_TO_RAD_PS:.1f} cm^-1; "
                "try a smaller depth or looser tolerances")

    def memory_estimate(self) -> int:
        """Bytes held by one packed state vector."""
        return self.state_size * 8
