import numpy as np
import pytest

from vibheom import HEOMGenerator, build_hamiltonian, enumerate_hierarchy, matsubara_decomposition
from vibheom._kernels import pack, unpack
from vibheom.config import BathSpec, DimerParameters
from vibheom.hierarchy import ado_count
from vibheom.model import SystemHamiltonian
from vibheom.units import CM1_TO_RAD_PS


def random_hermitian_stack(n, d, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    return a + np.conj(np.swapaxes(a, 1, 2))


@pytest.fixture(scope="module")
def dimer_H():
    return build_hamiltonian(DimerParameters())


@pytest.fixture(scope="module")
def bath_terms():
    return matsubara_decomposition(BathSpec(reorganization=110.0), 1)


def test_counts():
    assert len(enumerate_hierarchy(2, 1, 0)) == 1
    assert len(enumerate_hierarchy(2, 1, 10)) == 1001 == ado_count(2, 1, 10)
    assert ado_count(2, 2, 10) == 8008


def test_ordering_and_neighbours():
    h = enumerate_hierarchy(2, 1, 4)
    assert not np.any(h.indices[0])
    assert np.all(np.diff(h.tiers) >= 0)
    for a in range(len(h)):
        for j in range(h.n_modes):
            up = h.plus[a, j]
            if up >= 0:
                assert h.minus[up, j] == a
                assert h.tiers[up] == h.tiers[a] + 1
            else:
                assert h.tiers[a] == 4
            if h.indices[a, j] > 0:
                assert h.plus[h.minus[a, j], j] == a
            else:
                assert h.minus[a, j] == -1


def test_cap():
    with pytest.raises(ValueError, match="cap"):
        enumerate_hierarchy(2, 3, 20, cap=1000)
    with pytest.raises(ValueError):
        enumerate_hierarchy(2, -1, 2)


def test_pack_round_trip():
    rho = random_hermitian_stack(3, 5)
    v = pack(rho)
    assert v.shape == (3, 25)
    np.testing.assert_array_equal(unpack(v, 5), rho)


def test_compiled_matches_reference(dimer_H, bath_terms):
    fast = HEOMGenerator(dimer_H, bath_terms, 3)
    ref = HEOMGenerator(dimer_H, bath_terms, 3, backend="numpy")
    rho = random_hermitian_stack(fast.n_ados, 14, seed=1)
    a, b = fast.apply(rho), ref.apply(rho)
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_parallel_is_bitwise_serial(dimer_H, bath_terms):
    serial = HEOMGenerator(dimer_H, bath_terms, 4)
    par = HEOMGenerator(dimer_H, bath_terms, 4, parallel=True)
    y = serial.initial_state(np.eye(14) / 14) + np.random.default_rng(2).normal(size=serial.state_size)
    np.testing.assert_array_equal(serial.rhs(0.0, y), par.rhs(0.0, y))


def test_undamped_rhs_adds_back_tier_damping(dimer_H, bath_terms):
    gen = HEOMGenerator(dimer_H, bath_terms, 2)
    y = np.random.default_rng(3).normal(size=gen.state_size)
    D = np.tile(gen.decay_rates, 14 * 14)
    np.testing.assert_allclose(gen.rhs_undamped(0.0, y) - D * y, gen.rhs(0.0, y), rtol=0, atol=1e-9)
    buf = np.empty_like(y)
    gen.rhs_undamped_into(0.0, y, buf)
    np.testing.assert_array_equal(buf, gen.rhs_undamped(0.0, y))


def test_closed_system_limit(dimer_H):
    gen = HEOMGenerator(dimer_H, matsubara_decomposition(BathSpec(reorganization=0.0), 1), 0)
    rho = random_hermitian_stack(1, 14, seed=4)
    H = CM1_TO_RAD_PS * dimer_H.matrix
    np.testing.assert_allclose(gen.apply(rho)[0], -1j * (H @ rho[0] - rho[0] @ H), atol=1e-9)


def test_physical_derivative_is_traceless(dimer_H, bath_terms):
    gen = HEOMGenerator(dimer_H, bath_terms, 2)
    rho = random_hermitian_stack(gen.n_ados, 14, seed=5)
    out = gen.apply(rho)
    assert abs(np.trace(out[0])) < 1e-13 * np.max(np.abs(out[0]))


def test_hand_expanded_toy():
    """Two sites, no mode (d=2), K=0, L=1: three ADOs written out by hand."""
    Hm = np.array([[120.0, 35.0], [35.0, -40.0]])
    H = SystemHamiltonian(Hm.astype(complex), ((0, 0), (1, 0)), "collective", 2, 0)
    dec = matsubara_decomposition(BathSpec(reorganization=50.0, cutoff=80.0), 0)
    k = CM1_TO_RAD_PS
    c, nu, delta = dec.coefficients[0], dec.frequencies[0], dec.remainder
    Q = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    Hs = k * (Hm - np.trace(Hm) / 2 * np.eye(2))

    def comm(a, b):
        return a @ b - b @ a

    rho0, rho1, rho2 = random_hermitian_stack(3, 2, seed=6)
    up = [rho1, rho2]

    def closure(r):
        return -k * delta * sum(comm(q, comm(q, r)) for q in Q)

    d0 = -1j * comm(Hs, rho0) + closure(rho0)
    for q, r in zip(Q, up):
        d0 += -1j * k * np.sqrt(abs(c)) * comm(q, r)
    expected = [d0]
    for q, r in zip(Q, up):
        d = -1j * comm(Hs, r) - k * nu * r + closure(r)
        d += -1j * k / np.sqrt(abs(c)) * (c * q @ rho0 - np.conj(c) * rho0 @ q)
        expected.append(d)

    for backend in ("numba", "numpy"):
        gen = HEOMGenerator(H, dec, 1, backend=backend)
        pos = [gen.hierarchy.position(i) for i in ([0, 0], [1, 0], [0, 1])]
        stack = np.empty((3, 2, 2), dtype=complex)
        stack[pos] = [rho0, rho1, rho2]
        got = gen.apply(stack)[pos]
        scale = max(np.max(np.abs(e)) for e in expected)
        assert np.max(np.abs(got - np.array(expected))) < 1e-12 * scale


def test_rejects_complex_hamiltonian(bath_terms):
    H = SystemHamiltonian(np.array([[0, 1j], [-1j, 0]]), ((0, 0), (1, 0)), "collective", 2, 0)
    with pytest.raises(ValueError, match="real"):
        HEOMGenerator(H, bath_terms, 1)


def test_diagnostics(dimer_H, bath_terms):
    gen = HEOMGenerator(dimer_H, bath_terms, 10)
    assert gen.memory_estimate() == 1001 * 196 * 8
    assert "1310.1" in gen.stiffness_hint()
