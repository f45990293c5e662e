"""Dormand-Prince 5(4) integrator with PI step-size control.

Works on flat real or complex state vectors. Output times are hit exactly
by clamping the step; the unclamped proposal is kept for the following step.

An optional vector of decay rates ``D`` splits off a stiff diagonal part,
``y' = -D y + f(t, y)``, which is then integrated exactly by the Lawson
integrating-factor form of the same tableau:

    Y_i = e^{-c_i h D} y + h sum_j a_ij e^{-(c_i - c_j) h D} f(t + c_j h, Y_j)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numba as nb
import numpy as np

log = logging.getLogger(__name__)

# Butcher tableau (Hairer, Norsett & Wanner, 1993)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# fifth-order weights minus embedded fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

MIN_STEP = 1e-8


class StiffnessError(RuntimeError):
    """Step size collapsed below the minimum."""


@dataclass
class IntegratorControls:
    rtol: float = 1e-7
    atol: float = 1e-9
    initial_step: Optional[float] = None
    max_step: float = math.inf
    min_step: float = MIN_STEP
    safety: float = 0.9
    beta: float = 0.04  # PI memory exponent
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0
    smallest_step: float = math.inf
    largest_step: float = 0.0


@nb.njit(cache=True, fastmath={"contract"})
def _combine(y, k, slot, w, ey, ek, out):
    """``out[r, c] = ey[c] y[r, c] + sum_j w[j] ek[j, c] k[slot[j], r, c]`` for j < len(w)."""
    R, C = y.shape
    for r in range(R):
        for c in range(C):
            out[r, c] = ey[c] * y[r, c]
        for j in range(w.shape[0]):
            if w[j] == 0.0:
                continue
            kj = k[slot[j]]
            for c in range(C):
                out[r, c] += w[j] * ek[j, c] * kj[r, c]


@nb.njit(cache=True, fastmath={"contract"})
def _combine_with_error(y, k, slot, w, e, ey, ek, out, err):
    """:func:`_combine` that also accumulates ``err = sum_j e[j] ek[j, c] k[slot[j]]``."""
    R, C = y.shape
    for r in range(R):
        for c in range(C):
            out[r, c] = ey[c] * y[r, c]
            err[r, c] = 0.0
        for j in range(w.shape[0]):
            kj = k[slot[j]]
            for c in range(C):
                x = ek[j, c] * kj[r, c]
                out[r, c] += w[j] * x
                err[r, c] += e[j] * x


@nb.njit(cache=True)
def _error_norm(y, y_new, err, k_last, e_last, rtol, atol):
    """RMS of ``err + e_last k_last`` scaled by ``atol + rtol * max(|y|, |y_new|)``."""
    R, C = y.shape
    total = 0.0
    for r in range(R):
        for c in range(C):
            sc = atol + rtol * max(abs(y[r, c]), abs(y_new[r, c]))
            total += (abs(err[r, c] + e_last * k_last[r, c]) / sc) ** 2
    return math.sqrt(total / (R * C))


def _initial_step(f, t0, y0, f0, rtol, atol) -> float:
    """Hairer's starting-step heuristic."""
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((np.abs(y0) / scale) ** 2))
    d1 = np.sqrt(np.mean((np.abs(f0) / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(f: Callable, y0: np.ndarray, times: Sequence[float],
              controls: IntegratorControls = IntegratorControls(),
              observe: Callable = lambda y: y.copy(),
              stiffness_hint: Callable[[], str] = lambda: "",
              decay: Optional[np.ndarray] = None,
              into: Optional[Callable] = None) -> tuple[list, IntegrationStats]:
    """Integrate ``y' = -decay * y + f(t, y)`` from ``times[0]`` and record ``observe(y)`` at every time.

    ``times`` must be strictly increasing. ``decay`` holds non-negative rates
    for the columns of ``y`` viewed as ``(len(y) // len(decay), len(decay))``;
    ``f`` must leave that part out. ``into(t, y, buf)``, if given, is used in
    place of ``f`` inside the loop and writes the derivative into ``buf``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("need at least one output time")
    if np.any(np.diff(times) <= 0):
        raise ValueError("output times must be strictly increasing")
    c = controls
    stats = IntegrationStats()
    t = float(times[0])
    y = np.array(y0, copy=True).reshape(-1)
    out = [observe(y)]
    if len(times) == 1:
        return out, stats

    D = np.zeros(1) if decay is None else np.asarray(decay, dtype=float).reshape(-1)
    if len(y) % len(D):
        raise ValueError("state length is not a multiple of the decay vector length")
    if np.any(D < 0):
        raise ValueError("decay rates must be non-negative")
    shape2 = (len(y) // len(D), len(D))
    A = np.zeros((7, 7))
    for s_, row in enumerate(_A):
        A[s_, :len(row)] = row

    if into is None:
        def into(t_, y_, buf):
            buf[...] = f(t_, y_).reshape(buf.shape)
    f0 = f(t, y)
    y = y.reshape(shape2)
    # Stage j lives in k[slot[j]]. Stage 2 is dead once stage 6 is formed, so
    # the FSAL stage 7 reuses its buffer; six derivative buffers in all.
    k = np.empty((6,) + shape2, dtype=np.result_type(y, f0))
    slot = np.array([0, 1, 2, 3, 4, 5, 1])
    k[0] = f0.reshape(shape2)
    stats.evaluations += 1
    h = c.initial_step or _initial_step(f, t, y.reshape(-1), f0, c.rtol, c.atol)
    stats.evaluations += 0 if c.initial_step else 1
    h = min(h, c.max_step)
    err_old = 1e-4
    scratch = np.empty(shape2, dtype=k.dtype)  # stage inputs, then the partial error sum
    y_new = np.empty(shape2, dtype=k.dtype)
    e_head = _E[:6].copy()

    for t_next in times[1:]:
        while t < t_next:
            if stats.accepted + stats.rejected >= c.max_steps:
                raise RuntimeError(f"exceeded {c.max_steps} steps at t = {t}")
            remaining = t_next - t
            # stretch by up to 10% rather than leave a sliver before the output time
            clamped = h * 1.1 >= remaining
            step = remaining if clamped else h
            for s_ in range(1, 7):
                ey = np.exp(-_C[s_] * step * D)
                ek = np.exp(-(_C[s_] - _C[:s_])[:, None] * step * D)
                if s_ < 6:
                    _combine(y, k, slot, step * A[s_, :s_], ey, ek, scratch)
                    stage = scratch
                else:
                    # y_new is the fifth-order solution; stage 7 is evaluated there (FSAL)
                    _combine_with_error(y, k, slot, step * A[6, :6], step * e_head, ey, ek, y_new, scratch)
                    stage = y_new
                into(t + _C[s_] * step, stage.reshape(-1), k[slot[s_]].reshape(-1))
            stats.evaluations += 6
            en = _error_norm(y, y_new, scratch, k[slot[6]], step * _E[6], c.rtol, c.atol)
            if not math.isfinite(en):
                en = math.inf  # overflow or NaN: reject and shrink as hard as allowed

            if en <= 1.0:
                t = t_next if clamped else t + step
                y, y_new = y_new, y
                slot[0], slot[1] = slot[6], slot[0]
                slot[6] = slot[1]
                stats.accepted += 1
                stats.smallest_step = min(stats.smallest_step, step)
                stats.largest_step = max(stats.largest_step, step)
                en = max(en, 1e-10)
                fac = c.safety * en ** (-(0.2 - 0.75 * c.beta)) * err_old ** c.beta
                fac = min(5.0, max(0.2, fac))
                err_old = en
                # a clamped step says nothing about how far the next one may go
                h = min(c.max_step, max(h, step * fac) if clamped else step * fac)
            else:
                stats.rejected += 1
                h = step * max(0.1, c.safety * en ** -0.2)
                if h < c.min_step:
                    raise StiffnessError(f"step size {h:.3e} below {c.min_step:.1e} at t = {t:.6f}; "
                                         + stiffness_hint())
        out.append(observe(y.reshape(-1)))
    log.debug("integration: %d accepted, %d rejected, %d evaluations",
              stats.accepted, stats.rejected, stats.evaluations)
    return out, stats
