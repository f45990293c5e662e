"""Compiled hierarchy right-hand side on packed Hermitian ADOs.

Every ADO stays Hermitian (the hierarchy is invariant under
``rho_n -> rho_n^dag`` when the Matsubara frequencies are real), so each one
is stored as ``d*d`` reals: the upper triangle of the real part row by row,
then the strict upper triangle of the imaginary part row by row.

The state is laid out element-major, ``v[p, n]`` = packed element ``p`` of
ADO ``n``. The commutator and the closure then act as a small sparse real
matrix ``L`` on the element axis, applied to whole contiguous rows, and every
bath term is a row-wise gather from a neighbour ADO:

    out[p, n] += s_r[n] * (a * v[p, m_r(n)] + g * v[p', m_r(n)])

where ``r`` runs over (mode, raise/lower) pairs and ``p'`` is the real or
imaginary partner of ``p``. Output rows are independent, so the parallel
kernel is bit-identical to the serial one.
"""

import numba as nb
import numpy as np


def packed_layout(d: int):
    """Start offsets of real-part rows and imaginary-part rows in a packed ADO.

    Real row ``a`` holds b = a..d-1, imaginary row ``a`` holds b = a+1..d-1.
    """
    a = np.arange(d)
    off_re = (a * d - a * (a - 1) // 2).astype(np.int64)
    tri = d * (d + 1) // 2
    off_im = (tri + a * (d - 1) - a * (a - 1) // 2).astype(np.int64)
    return off_re, off_im


def pack(rho: np.ndarray) -> np.ndarray:
    """``(..., d, d)`` Hermitian -> ``(..., d*d)`` real."""
    d = rho.shape[-1]
    iu = np.triu_indices(d)
    iu1 = np.triu_indices(d, 1)
    return np.concatenate([rho[..., iu[0], iu[1]].real, rho[..., iu1[0], iu1[1]].imag], axis=-1)


def unpack(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`pack`."""
    iu = np.triu_indices(d)
    iu1 = np.triu_indices(d, 1)
    tri = len(iu[0])
    rho = np.zeros(v.shape[:-1] + (d, d), dtype=complex)
    rho[..., iu[0], iu[1]] = v[..., :tri]
    rho[..., iu1[0], iu1[1]] += 1j * v[..., tri:]
    rho[..., iu1[1], iu1[0]] = np.conj(rho[..., iu1[0], iu1[1]])
    return rho


def packed_superoperator(op, d: int) -> np.ndarray:
    """Real matrix of a Hermiticity-preserving map ``op`` in packed coordinates."""
    P = d * d
    out = np.empty((P, P))
    for q in range(P):
        e = np.zeros(P)
        e[q] = 1.0
        out[:, q] = pack(op(unpack(e, d)))
    return out


def csr(matrix: np.ndarray):
    """Row pointers, column indices and values of the nonzeros of a dense real matrix."""
    mask = matrix != 0
    ptr = np.concatenate([[0], np.cumsum(mask.sum(axis=1))]).astype(np.int64)
    rows, cols = np.nonzero(mask)
    return ptr, cols.astype(np.int64), np.ascontiguousarray(matrix[rows, cols], dtype=np.float64)


def _element(e, v, out, l_ptr, l_idx, l_val, damping, e_re, e_im, b_ptr, b_term, b_a, b_g, src, scale):
    """All output rows of matrix element ``e``: its real row and, off the diagonal, its imaginary row."""
    A = v.shape[1]
    pr = e_re[e]
    pi = e_im[e]
    for p in (pr, pi):
        if p < 0:
            continue
        o = out[p]
        vp = v[p]
        for n in range(A):
            o[n] = -damping[n] * vp[n]
        for t in range(l_ptr[p], l_ptr[p + 1]):
            h = l_val[t]
            vq = v[l_idx[t]]
            for n in range(A):
                o[n] += h * vq[n]
    ore = out[pr]
    vre = v[pr]
    if pi < 0:
        # diagonal element: real, and only the alpha part survives
        for t in range(b_ptr[e], b_ptr[e + 1]):
            a = b_a[t]
            sr = scale[b_term[t]]
            ir = src[b_term[t]]
            for n in range(A):
                ore[n] += sr[n] * (a * vre[ir[n]])
        return
    oim = out[pi]
    vim = v[pi]
    for t in range(b_ptr[e], b_ptr[e + 1]):
        a = b_a[t]
        g = b_g[t]
        sr = scale[b_term[t]]
        ir = src[b_term[t]]
        for n in range(A):
            m = ir[n]
            s = sr[n]
            x = vre[m]
            y = vim[m]
            ore[n] += s * (a * x + g * y)
            oim[n] += s * (a * y - g * x)


_element_jit = nb.njit(cache=True, inline="always", fastmath={"contract"})(_element)


@nb.njit(cache=True, fastmath={"contract"})
def rhs_serial(v, out, l_ptr, l_idx, l_val, damping, e_re, e_im, b_ptr, b_term, b_a, b_g, src, scale):
    for e in range(e_re.shape[0]):
        _element_jit(e, v, out, l_ptr, l_idx, l_val, damping, e_re, e_im, b_ptr, b_term, b_a, b_g,
                     src, scale)


@nb.njit(cache=True, parallel=True, fastmath={"contract"})
def rhs_parallel(v, out, l_ptr, l_idx, l_val, damping, e_re, e_im, b_ptr, b_term, b_a, b_g, src, scale):
    for e in nb.prange(e_re.shape[0]):
        _element_jit(e, v, out, l_ptr, l_idx, l_val, damping, e_re, e_im, b_ptr, b_term, b_a, b_g,
                     src, scale)
