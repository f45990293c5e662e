"""Exciton-vibration system Hamiltonians, bath coupling operators and initial states.

Two variants are built:

``"collective"``
    Two sites plus the single relative-displacement mode
    ``b = (b1 - b2)/sqrt(2)``, which couples as ``(g/sqrt2)(n1 - n2)(b + b^dag)``.
    The centre-of-mass mode only produces a uniform displacement in the
    single-excitation manifold and is dropped. Dimension ``2 (M + 1)``.
``"local"``
    N sites with one truncated mode each, ``g_i n_i (b_i + b_i^dag)``.
    Dimension ``N (M + 1)^N``.

Basis ordering is electronic (site) index major, phonon index minor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .config import DimerParameters, InitialStateSpec
from .units import CM1_TO_RAD_PS, thermal_beta

COLLECTIVE = "collective"
LOCAL = "local"

#: refuse to build Hamiltonians above this dimension
MAX_DIMENSION = 20000


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated ladder operator on levels 0..cutoff."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1, dtype=float))


@dataclass(frozen=True)
class ExcitonBasis:
    """Exciton splitting, mixing angle and site-to-exciton rotation.

    Columns of ``transformation`` are ``|X>`` (upper) and ``|Y>`` (lower)
    expressed in the site basis.
    """

    delta_E: float
    theta: float
    transformation: np.ndarray
    mean_energy: float

    @property
    def upper_energy(self) -> float:
        return self.mean_energy + 0.5 * self.delta_E

    @property
    def lower_energy(self) -> float:
        return self.mean_energy - 0.5 * self.delta_E

    @property
    def delocalization(self) -> float:
        """``2|V|/Delta E`` (= |sin 2 theta|)."""
        return abs(math.sin(2.0 * self.theta))


def exciton_basis(p: DimerParameters) -> ExcitonBasis:
    d = p.detuning
    delta_E = math.hypot(d, 2.0 * p.coupling)
    theta = 0.5 * math.atan2(2.0 * p.coupling, d)
    c, s = math.cos(theta), math.sin(theta)
    U = np.array([[c, -s], [s, c]])
    return ExcitonBasis(delta_E, theta, U, 0.5 * (p.epsilon_1 + p.epsilon_2))


@dataclass(frozen=True)
class SystemHamiltonian:
    matrix: np.ndarray
    labels: Tuple[tuple, ...]
    variant: str
    n_sites: int
    fock_cutoff: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_levels(self) -> int:
        return self.fock_cutoff + 1

    def site_projector_diagonals(self) -> np.ndarray:
        """Diagonals of the bath coupling operators, shape ``(n_sites, dim)``.

        Every coupling operator is diagonal in this basis.
        """
        sites = np.array([lab[0] for lab in self.labels])
        return (sites[None, :] == np.arange(self.n_sites)[:, None]).astype(float)


def coupling_operators(H: SystemHamiltonian) -> List[np.ndarray]:
    """Site projectors ``sigma_i^+ sigma_i^- (x) 1_vib``."""
    return [np.diag(q) for q in H.site_projector_diagonals()]


def _check_dim(dim: int, cap: int) -> None:
    if dim > cap:
        raise ValueError(f"Hamiltonian dimension {dim} exceeds cap {cap}; lower fock_cutoff")


def build_collective_hamiltonian(p: DimerParameters, cap: int = MAX_DIMENSION) -> SystemHamiltonian:
    M = p.fock_cutoff
    nl = M + 1
    _check_dim(2 * nl, cap)
    h_el = np.array([[p.epsilon_1, p.coupling], [p.coupling, p.epsilon_2]])
    b = annihilation(M)
    x = b + b.T
    rel = np.diag([1.0, -1.0])
    H = (np.kron(h_el, np.eye(nl))
         + p.omega_vib * np.kron(np.eye(2), number_operator(M))
         + p.g / math.sqrt(2.0) * np.kron(rel, x))
    labels = tuple((site, n) for site in range(2) for n in range(nl))
    return SystemHamiltonian(H.astype(complex), labels, COLLECTIVE, 2, M)


def build_local_hamiltonian(site_energies: Sequence[float], couplings: np.ndarray,
                            omegas: Sequence[float], gs: Sequence[float], cutoff: int,
                            cap: int = MAX_DIMENSION) -> SystemHamiltonian:
    """General N-site model, one truncated local mode per site.

    ``couplings`` is the symmetric N x N electronic coupling matrix (diagonal ignored).
    """
    N = len(site_energies)
    nl = cutoff + 1
    nvib = nl ** N
    _check_dim(N * nvib, cap)
    V = np.array(couplings, dtype=float)
    h_el = np.diag(np.asarray(site_energies, dtype=float)) + V - np.diag(np.diag(V))
    b = annihilation(cutoff)
    eye = np.eye(nl)

    def on_mode(op, i):
        out = np.ones((1, 1))
        for j in range(N):
            out = np.kron(out, op if j == i else eye)
        return out

    H = np.kron(h_el, np.eye(nvib))
    for i in range(N):
        H += omegas[i] * np.kron(np.eye(N), on_mode(number_operator(cutoff), i))
        proj = np.zeros((N, N))
        proj[i, i] = 1.0
        H += gs[i] * np.kron(proj, on_mode(b + b.T, i))
    labels = tuple((site, occ) for site in range(N)
                   for occ in itertools.product(range(nl), repeat=N))
    return SystemHamiltonian(H.astype(complex), labels, LOCAL, N, cutoff)


def build_hamiltonian(p: DimerParameters, variant: str = COLLECTIVE,
                      cap: int = MAX_DIMENSION) -> SystemHamiltonian:
    if variant == COLLECTIVE:
        return build_collective_hamiltonian(p, cap)
    if variant == LOCAL:
        V = np.array([[0.0, p.coupling], [p.coupling, 0.0]])
        return build_local_hamiltonian([p.epsilon_1, p.epsilon_2], V,
                                       [p.omega_vib] * 2, [p.g] * 2, p.fock_cutoff, cap)
    raise ValueError(f"unknown variant {variant!r}")


def exciton_rotation(H: SystemHamiltonian, basis: ExcitonBasis) -> np.ndarray:
    """Full-space unitary whose columns are ``|X,n>`` then ``|Y,n>``."""
    nvib = H.dim // 2
    return np.kron(basis.transformation, np.eye(nvib))


def thermal_occupations(omega: float, temperature: float, cutoff: int) -> np.ndarray:
    """``(1-x) x^n`` for n = 0..cutoff, renormalized; ``x = exp(-beta omega)``."""
    x = math.exp(-thermal_beta(temperature) * omega)
    p = x ** np.arange(cutoff + 1)
    return p / p.sum()


def initial_density_matrix(spec: InitialStateSpec, p: DimerParameters, temperature: float,
                           variant: str = COLLECTIVE) -> np.ndarray:
    """``rho_ex (x) rho_vib^th`` in the site/phonon basis of ``variant``.

    ``temperature`` sets the thermal state of the mode(s).
    """
    r = spec.purity
    if not 0.5 <= r <= 1.0:
        raise ValueError(f"purity r must lie in [1/2, 1], got {r}")
    U = exciton_basis(p).transformation
    rho_el = U @ np.diag([r, 1.0 - r]) @ U.T
    pth = thermal_occupations(p.omega_vib, temperature, p.fock_cutoff)
    if variant == COLLECTIVE:
        rho_vib = np.diag(pth)
    elif variant == LOCAL:
        rho_vib = np.diag(np.kron(pth, pth))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return np.kron(rho_el, rho_vib).astype(complex)


def linear_entropy(r: float) -> float:
    return 2.0 * r * (1.0 - r)


def displacement_amplitude(t, p: DimerParameters):
    """``2g (1 - exp(-i omega t)) / omega``: local-mode displacement at V = 0, t in ps."""
    phase = p.omega_vib * CM1_TO_RAD_PS * np.asarray(t)
    return 2.0 * p.g * (1.0 - np.exp(-1j * phase)) / p.omega_vib
