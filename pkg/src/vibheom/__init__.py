"""Hierarchical equations of motion for a vibronic exciton dimer.

Typical use::

    from vibheom import load_scenario, simulate
    res = simulate(load_scenario("fig2a-c"))
    res.summary()
"""

from .bath import BathDecomposition, matsubara_decomposition, spectral_density
from .config import (BathSpec, ConfigError, DimerParameters, HierarchySpec, InitialStateSpec,
                     IntegratorSpec, OutputSpec, RunConfig, load_config, parse_config,
                     serialize_config)
from .dynamics import RunResult, convergence_audit, propagate, simulate, unitary_evolution
from .hierarchy import HEOMGenerator, enumerate_hierarchy
from .integrate import IntegratorControls, StiffnessError, integrate
from .model import (build_hamiltonian, exciton_basis, initial_density_matrix)
from .observables import klyshko_b, mandel_q, reduce_to_vibration, time_average
from .sweeps import coherent_boundary, load_scenario, scenario_names, sweep_lambda, sweep_purity

__version__ = "0.1.0"
