"""Quantities extracted from the reduced density matrix.

All extractors take ``rho_S`` in the site/phonon basis of the collective
Hamiltonian and rotate to the exciton basis where needed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .model import COLLECTIVE, ExcitonBasis, SystemHamiltonian, exciton_rotation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedVibState:
    probabilities: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.probabilities) - 1

    @property
    def mean(self) -> float:
        n = np.arange(len(self.probabilities))
        return float(np.dot(n, self.probabilities))

    @property
    def second_moment(self) -> float:
        n = np.arange(len(self.probabilities))
        return float(np.dot(n * n, self.probabilities))


def reduce_to_vibration(rho: np.ndarray, H: SystemHamiltonian) -> ReducedVibState:
    """Partial trace over the electronic factor: ``P(n) = sum_e <e,n|rho|e,n>``.

    The partial trace is basis independent on the electronic factor, so the
    site basis gives the same P(n) as the exciton basis.
    """
    if H.variant != COLLECTIVE:
        raise ValueError("vibrational statistics need the collective-mode variant; "
                         f"got {H.variant!r}")
    nl = H.n_levels
    diag = np.real(np.diagonal(rho)).reshape(2, nl)
    return ReducedVibState(diag.sum(axis=0))


def thermal_statistics(x: float, cutoff: int) -> ReducedVibState:
    p = x ** np.arange(cutoff + 1)
    return ReducedVibState(p / p.sum())


def mandel_q(v: ReducedVibState) -> float:
    """``(<n^2> - <n>^2)/<n> - 1``; 0 for the vacuum."""
    mean = v.mean
    if mean <= 0.0:
        return 0.0
    return (v.second_moment - mean * mean) / mean - 1.0


def klyshko_b(v: ReducedVibState, n: int) -> float:
    """``(n+2) P(n) P(n+2) - (n+1) P(n+1)^2``; negative values are non-classical."""
    if not 0 <= n <= v.cutoff - 2:
        raise ValueError(f"Klyshko index n={n} outside 0..{v.cutoff - 2}")
    P = v.probabilities
    return (n + 2) * P[n] * P[n + 2] - (n + 1) * P[n + 1] ** 2


def klyshko_all(v: ReducedVibState) -> np.ndarray:
    P = v.probabilities
    n = np.arange(v.cutoff - 1)
    return (n + 2) * P[n] * P[n + 2] - (n + 1) * P[n + 1] ** 2


def to_exciton_basis(rho: np.ndarray, H: SystemHamiltonian, basis: ExcitonBasis) -> np.ndarray:
    W = exciton_rotation(H, basis)
    return W.T @ rho @ W


def exciton_observables(rho: np.ndarray, H: SystemHamiltonian, basis: ExcitonBasis):
    """Return ``(rho_YY, rho_XX, <X,0|rho|Y,0>)``."""
    nl = H.n_levels
    rx = to_exciton_basis(rho, H, basis)
    diag = np.real(np.diagonal(rx))
    return float(diag[nl:].sum()), float(diag[:nl].sum()), complex(rx[0, nl])


def system_energy(rho: np.ndarray, H: SystemHamiltonian) -> float:
    return float(np.real(np.einsum("ij,ji->", H.matrix, rho)))


def time_average(t: Sequence[float], values: Sequence[float], tau: float) -> float:
    """``(1/tau) int_0^tau F dt`` by the trapezoidal rule on the samples in ``[t0, tau]``."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(values)
    if tau <= 0:
        raise ValueError("tau must be positive")
    if tau > t[-1] * (1 + 1e-12):
        raise ValueError(f"tau = {tau} lies beyond the last sample at {t[-1]}")
    stop = int(np.searchsorted(t, tau * (1 + 1e-12), side="right"))
    ts, fs = t[:stop], f[:stop]
    if not np.isclose(ts[-1], tau, rtol=1e-9, atol=1e-12):
        raise ValueError(f"tau = {tau} does not fall on the sample grid")
    return float(np.trapezoid(fs, ts) / tau)


def negative_part(values):
    """``F Theta[-F]``."""
    v = np.asarray(values, dtype=float)
    return np.where(v < 0.0, v, 0.0)


@dataclass
class ObservableRecord:
    t: float
    rho_YY: float
    rho_XX: float
    coherence_X0Y0: complex
    probabilities: np.ndarray
    mandel_Q: float
    klyshko_B: np.ndarray
    energy: float
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float
    vacuum: bool = False

    @property
    def abs_coherence(self) -> float:
        return abs(self.coherence_X0Y0)


def record(t: float, rho: np.ndarray, H: SystemHamiltonian, basis: ExcitonBasis) -> ObservableRecord:
    yy, xx, coh = exciton_observables(rho, H, basis)
    v = reduce_to_vibration(rho, H)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    rho_h = 0.5 * (rho + rho.conj().T)
    q = mandel_q(v)
    b = klyshko_all(v)
    if q < -0.05 and len(b) and b[0] >= 0.0:
        log.info("t=%.4f ps: Q=%.4f < -0.05 while B0=%.3e >= 0", t, q, b[0])
    return ObservableRecord(
        t=t, rho_YY=yy, rho_XX=xx, coherence_X0Y0=coh,
        probabilities=v.probabilities, mandel_Q=q, klyshko_B=b,
        energy=system_energy(rho, H),
        trace_error=float(abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)),
        hermiticity_error=herm,
        min_eigenvalue=float(np.linalg.eigvalsh(rho_h)[0]),
        vacuum=v.mean <= 0.0,
    )


@dataclass
class Trajectory:
    """Observable records on the sample grid of one run."""

    records: List[ObservableRecord] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def __len__(self) -> int:
        return len(self.records)
