import math

import numpy as np
import pytest

from vibheom import RunConfig, build_hamiltonian, exciton_basis, initial_density_matrix, unitary_evolution
from vibheom.config import DimerParameters, InitialStateSpec
from vibheom.units import CM1_TO_RAD_PS
from vibheom.model import (LOCAL, displacement_amplitude, exciton_rotation, linear_entropy,
                           thermal_occupations)


@pytest.fixture
def dimer():
    return DimerParameters()


def test_exciton_splitting(dimer):
    b = exciton_basis(dimer)
    assert b.delta_E == pytest.approx(math.hypot(1042.0, 184.4), rel=1e-14)
    assert b.delta_E == pytest.approx(1058.2, abs=0.05)
    assert b.delocalization == pytest.approx(184.4 / b.delta_E, rel=1e-14)
    assert b.delocalization == pytest.approx(0.17427, abs=2e-5)  # quoted value is rounded
    assert b.upper_energy > b.lower_energy


def test_decoupled_sites():
    b = exciton_basis(DimerParameters(coupling=0.0))
    assert b.delta_E == 1042.0 and b.theta == 0.0
    np.testing.assert_allclose(b.transformation, np.eye(2))


def test_uncoupled_hamiltonian_is_diagonal():
    p = DimerParameters(coupling=0.0, huang_rhys=0.0, fock_cutoff=3)
    H = build_hamiltonian(p).matrix
    expected = [e + n * p.omega_vib for e in (p.epsilon_1, p.epsilon_2) for n in range(4)]
    np.testing.assert_array_equal(H, np.diag(expected))


def test_vibronic_transition_element(dimer):
    H = build_hamiltonian(dimer)
    b = exciton_basis(dimer)
    W = exciton_rotation(H, b)
    Hx = (W.T @ H.matrix @ W).real
    nl = H.n_levels
    for n in range(3):
        f = dimer.g * b.delocalization * math.sqrt((n + 1) / 2)
        assert abs(Hx[nl + n + 1, n]) == pytest.approx(f, rel=1e-12)
    assert abs(Hx[nl + 1, 0]) == pytest.approx(32.9, abs=0.05)


def test_hermitian_and_real(dimer):
    H = build_hamiltonian(dimer).matrix
    assert H.shape == (14, 14)
    np.testing.assert_array_equal(H, H.conj().T)
    assert not np.any(H.imag)


def test_local_and_collective_variants_agree(dimer):
    """The centre-of-mass mode decouples, so rho_YY is the same in both pictures.

    The two variants truncate different modes; at M=7 both are converged to ~1e-7.
    """
    p = DimerParameters(fock_cutoff=7)
    spec = InitialStateSpec()
    times = np.linspace(0.0, 1.0, 51)
    yy = []
    for variant in ("collective", LOCAL):
        H = build_hamiltonian(p, variant)
        rho0 = initial_density_matrix(spec, p, 300.0, variant)
        W = exciton_rotation(H, exciton_basis(p))
        half = H.dim // 2
        yy.append([np.trace((W.T @ r @ W)[half:, half:]).real
                   for r in unitary_evolution(H.matrix, rho0, times)])
    np.testing.assert_allclose(yy[0], yy[1], atol=1e-6)
    assert max(yy[0]) > 0.01


def test_thermal_ground_weight(dimer):
    p = thermal_occupations(dimer.omega_vib, 300.0, dimer.fock_cutoff)
    x = math.exp(-1111.0 / (0.6950348 * 300.0))
    assert p[0] == pytest.approx(1 - x, rel=1e-9)
    assert p[0] == pytest.approx(0.99517, abs=3e-5)  # quoted value is rounded
    assert p.sum() == pytest.approx(1.0, abs=1e-15)


def test_initial_state(dimer):
    rho = initial_density_matrix(InitialStateSpec(purity=0.75), dimer, 300.0)
    np.testing.assert_allclose(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-14)
    assert np.linalg.eigvalsh(rho).min() > -1e-15
    H = build_hamiltonian(dimer)
    W = exciton_rotation(H, exciton_basis(dimer))
    rx = W.T @ rho @ W
    assert np.trace(rx[:7, :7]).real == pytest.approx(0.75, abs=1e-14)


def test_linear_entropy():
    assert linear_entropy(1.0) == 0.0
    assert linear_entropy(0.5) == 0.5
    assert linear_entropy(0.75) == pytest.approx(0.375, abs=1e-15)


def test_displacement_amplitude(dimer):
    period = 2 * math.pi / (dimer.omega_vib * CM1_TO_RAD_PS)
    assert displacement_amplitude(0.0, dimer) == 0
    assert abs(displacement_amplitude(period / 2, dimer)) == pytest.approx(4 * dimer.g / dimer.omega_vib, rel=1e-12)
    assert abs(displacement_amplitude(period, dimer)) < 1e-12


def test_dimension_cap(dimer):
    with pytest.raises(ValueError, match="cap"):
        build_hamiltonian(DimerParameters(fock_cutoff=100), LOCAL)
    with pytest.raises(ValueError):
        build_hamiltonian(dimer, "other")


def test_fock_ladder():
    from vibheom.model import annihilation, number_operator
    b = annihilation(4)
    np.testing.assert_allclose(b.T @ b, number_operator(4))
