import numpy as np
import pytest

from vibheom import (HEOMGenerator, IntegratorControls, RunConfig, load_scenario, matsubara_decomposition,
                     propagate, simulate, unitary_evolution)
from vibheom.config import BathSpec
from vibheom.dynamics import sample_times
from vibheom.model import SystemHamiltonian


def short(cfg: RunConfig, final=0.3) -> RunConfig:
    return cfg.replace(integrator={"final_time": final}, output={"tau": final})


def test_sample_grid():
    t = sample_times(1.0, 0.001)
    assert len(t) == 1001 and t[-1] == 1.0 and t[500] == 0.5


def test_zero_hamiltonian_zero_bath_is_a_fixed_point():
    H = SystemHamiltonian(np.zeros((4, 4), dtype=complex), tuple((s, n) for s in range(2) for n in range(2)),
                          "collective", 2, 1)
    gen = HEOMGenerator(H, matsubara_decomposition(BathSpec(reorganization=0.0), 1), 2)
    rho0 = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    rho0[0, 1] = rho0[1, 0] = 0.05
    states, _ = propagate(gen, rho0, [0.0, 0.5, 1.0], IntegratorControls())
    for rho in states:
        np.testing.assert_allclose(rho, rho0, atol=1e-15)


def test_closed_system_matches_exact(run_scenario):
    res = run_scenario("fig1")
    exact = unitary_evolution(res.hamiltonian.matrix, res.states[0], res.t)
    err = max(np.max(np.abs(a - b)) for a, b in zip(res.states, exact))
    assert err < 1e-6
    # population maximum of rho_YY against the exact trajectory
    i = int(np.argmax(res.column("rho_YY")))
    from vibheom.observables import exciton_observables
    assert abs(res.column("rho_YY")[i] - exciton_observables(exact[i], res.hamiltonian, res.basis)[0]) < 1e-6


def test_closed_system_conserves_energy(run_scenario):
    e = run_scenario("fig1").column("energy")
    assert np.max(np.abs(e - e[0])) < 1e-6 * abs(e[0])


def test_closed_system_average_negative_q(run_scenario):
    assert run_scenario("fig1").summary()["avg_neg_Q"] < 0


def test_depth_irrelevant_without_bath():
    cfg = short(load_scenario("fig1"))
    a = simulate(cfg.replace(integrator={"rtol": 1e-10, "atol": 1e-12}))
    b = simulate(cfg.replace(hierarchy={"depth": 4}, integrator={"rtol": 1e-10, "atol": 1e-12}))
    assert b.n_ados == 70
    assert np.max(np.abs(a.column("rho_YY") - b.column("rho_YY"))) < 1e-10


def test_fock_cutoff_converged_without_bath(run_scenario):
    base = run_scenario("fig1")
    more = simulate(load_scenario("fig1").replace(dimer={"fock_cutoff": 7}))
    assert np.max(np.abs(base.column("rho_YY") - more.column("rho_YY"))) < 1e-3


def test_depth_matters_at_strong_coupling():
    cfg = short(load_scenario("fig2g-i"))
    a = simulate(cfg.replace(hierarchy={"depth": 0}))
    b = simulate(cfg.replace(hierarchy={"depth": 2}))
    assert np.max(np.abs(a.column("rho_YY") - b.column("rho_YY"))) > 1e-2


@pytest.mark.slow
def test_tolerance_self_convergence(run_scenario):
    base = run_scenario("fig2g-i")
    c = base.config.integrator
    tight = simulate(base.config.replace(integrator={"rtol": c.rtol / 2, "atol": c.atol / 2}))
    assert np.max(np.abs(base.column("rho_YY") - tight.column("rho_YY"))) < 1e-5


def test_summary_uses_tau():
    res = simulate(short(load_scenario("fig2a-c"), 0.1))
    s = res.summary()
    assert set(s) == {"avg_rho_YY", "avg_rho_YY_transfer", "avg_neg_Q", "avg_abs_coh"}
    assert s["avg_rho_YY_transfer"] == pytest.approx(s["avg_rho_YY"] - res.column("rho_YY")[0], abs=1e-15)
    assert res.stats.accepted >= 100  # steps capped by the 1 fs sample interval
    assert res.summary(0.05)["avg_rho_YY"] != s["avg_rho_YY"]


def test_deterministic():
    cfg = short(load_scenario("fig2d-f"), 0.05)
    a, b = simulate(cfg), simulate(cfg)
    np.testing.assert_array_equal(a.column("rho_YY"), b.column("rho_YY"))
    np.testing.assert_array_equal(a.column("mandel_Q"), b.column("mandel_Q"))
