"""Drude-Lorentz spectral density and its Matsubara exponential decomposition.

With ``J(w) = (2 lambda / pi) w Omega_c / (w^2 + Omega_c^2)`` the bath
correlation function is

    C(t) = int_0^inf dw J(w) [coth(beta w / 2) cos(w t) - i sin(w t)]
         = sum_k c_k exp(-nu_k t),

with ``nu_0 = Omega_c``, ``nu_k = 2 pi k / beta`` and the coefficients below.
All frequencies are in cm^-1 and ``t`` is measured in cm (``t_ps * 2 pi c``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .config import BathSpec
from .units import CM1_TO_RAD_PS


def spectral_density(omega, spec: BathSpec):
    omega = np.asarray(omega, dtype=float)
    lam, wc = spec.reorganization, spec.cutoff
    return 2.0 * lam / math.pi * omega * wc / (omega ** 2 + wc ** 2)


@dataclass(frozen=True)
class BathDecomposition:
    """Kept exponentials ``c_k exp(-nu_k t)`` (k = 0..K) and the Markovian remainder.

    ``remainder`` is ``sum_{k > K} c_k / nu_k``; identical for every site.
    """

    frequencies: np.ndarray
    coefficients: np.ndarray
    remainder: float
    n_sites: int = 2

    @property
    def K(self) -> int:
        return len(self.frequencies) - 1

    def correlation(self, t_cm):
        """Reconstruct ``C(t)`` from the kept terms only."""
        t = np.asarray(t_cm, dtype=float)[..., None]
        return np.sum(self.coefficients * np.exp(-self.frequencies * t), axis=-1)


def matsubara_frequencies(beta: float, cutoff: float, K: int) -> np.ndarray:
    nu = 2.0 * math.pi * np.arange(K + 1) / beta
    nu[0] = cutoff
    return nu


def matsubara_coefficients(spec: BathSpec, K: int) -> np.ndarray:
    lam, wc, beta = spec.reorganization, spec.cutoff, spec.beta
    nu = matsubara_frequencies(beta, wc, K)
    c = np.empty(K + 1, dtype=complex)
    c[0] = lam * wc * (1.0 / math.tan(beta * wc / 2.0) - 1j)
    nk = nu[1:]
    denom = nk ** 2 - wc ** 2
    if np.any(np.isclose(denom, 0.0, rtol=0, atol=1e-9 * wc ** 2)):
        raise ValueError("Matsubara frequency coincides with the Drude cutoff; "
                         "perturb the temperature slightly")
    c[1:] = 4.0 * lam * wc * nk / (beta * denom)
    return c


def total_matsubara_weight(spec: BathSpec) -> float:
    """Closed form of ``sum_{k >= 1} c_k / nu_k = 2 lambda/(beta Omega_c) - lambda cot(beta Omega_c/2)``."""
    lam, wc, beta = spec.reorganization, spec.cutoff, spec.beta
    x = beta * wc
    return lam * (2.0 / x - 1.0 / math.tan(x / 2.0))


def matsubara_decomposition(spec: BathSpec, K: int | None = None, n_sites: int = 2) -> BathDecomposition:
    K = spec.matsubara if K is None else K
    nu = matsubara_frequencies(spec.beta, spec.cutoff, K)
    c = matsubara_coefficients(spec, K)
    kept = float(np.sum(c[1:].real / nu[1:])) if K >= 1 else 0.0
    remainder = max(total_matsubara_weight(spec) - kept, 0.0)
    return BathDecomposition(nu, c, remainder, n_sites)


def remainder_by_summation(spec: BathSpec, K: int, rel_tol: float = 1e-12,
                           chunk: int = 100_000, max_terms: int = 10 ** 8) -> float:
    """Tail ``sum_{k>K} c_k/nu_k`` by direct summation.

    Terms fall off as ``a/k^2``; summation stops once a term is below
    ``rel_tol`` of the running total and the rest is added as
    ``a/(n + 1/2)``, the midpoint estimate of ``sum_{k>n} a/k^2``.
    """
    lam, wc, beta = spec.reorganization, spec.cutoff, spec.beta
    if lam == 0:
        return 0.0
    a = lam * wc * beta / math.pi ** 2
    total = 0.0
    start = K + 1
    while start < max_terms:
        k = np.arange(start, start + chunk, dtype=float)
        nu = 2.0 * math.pi * k / beta
        terms = 4.0 * lam * wc / (beta * (nu ** 2 - wc ** 2))
        total += float(np.sum(terms[::-1]))
        if terms[-1] < rel_tol * total:
            return total + a / (k[-1] + 0.5)
        start += chunk
    return total + a / (start - 0.5)


def correlation_by_quadrature(t_ps: float, spec: BathSpec) -> complex:
    """``C(t)`` by direct numerical integration over the spectral density (t > 0)."""
    if t_ps <= 0:
        raise ValueError("quadrature of C(t) requires t > 0 (C(0) diverges for a Drude bath)")
    t = t_ps * CM1_TO_RAD_PS
    beta = spec.beta

    def weight_re(w):
        if w == 0.0:
            return 2.0 * spec.reorganization / math.pi / spec.cutoff * 2.0 / beta
        return float(spectral_density(w, spec)) / math.tanh(beta * w / 2.0)

    def weight_im(w):
        return float(spectral_density(w, spec))

    re, _ = integrate.quad(weight_re, 0.0, np.inf, weight="cos", wvar=t, limlst=200)
    im, _ = integrate.quad(weight_im, 0.0, np.inf, weight="sin", wvar=t, limlst=200)
    return complex(re, -im)
