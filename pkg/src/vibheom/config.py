"""Run configuration: validated, JSON-serializable scenario description.

A configuration document is a JSON object with the sections ``dimer``,
``bath``, ``initial``, ``hierarchy``, ``integrator`` and ``output`` plus a
top-level ``label``. Every section is optional and falls back to the PE545
dimer defaults; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .units import BOLTZMANN, thermal_beta


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message names the key."""


def _require(cond: bool, key: str, what: str) -> None:
    if not cond:
        raise ConfigError(f"{key}: {what}")


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


@dataclass(frozen=True)
class DimerParameters:
    """Two-site exciton model with one intramolecular mode per site (cm^-1)."""

    epsilon_1: float = 19574.0
    epsilon_2: float = 18532.0
    coupling: float = 92.2
    omega_vib: float = 1111.0
    huang_rhys: float = 0.0578
    fock_cutoff: int = 6

    def __post_init__(self):
        for name in ("epsilon_1", "epsilon_2", "coupling", "omega_vib", "huang_rhys"):
            _require(_finite(getattr(self, name)), f"dimer.{name}", "must be a finite number")
        _require(self.epsilon_1 > 0, "dimer.epsilon_1", "site energy must be > 0")
        _require(self.epsilon_2 > 0, "dimer.epsilon_2", "site energy must be > 0")
        _require(self.omega_vib > 0, "dimer.omega_vib", "mode frequency must be > 0")
        _require(self.huang_rhys >= 0, "dimer.huang_rhys", "Huang-Rhys factor must be >= 0")
        _require(_is_int(self.fock_cutoff) and self.fock_cutoff >= 1,
                 "dimer.fock_cutoff", "Fock cutoff M must be an integer >= 1")

    @property
    def g(self) -> float:
        """Per-site mode coupling ``omega_vib * sqrt(S)``."""
        return self.omega_vib * math.sqrt(self.huang_rhys)

    @property
    def detuning(self) -> float:
        return self.epsilon_1 - self.epsilon_2


@dataclass(frozen=True)
class BathSpec:
    """Drude bath: reorganization energy and cutoff in cm^-1, temperature in K."""

    reorganization: float = 110.0
    cutoff: float = 100.0
    temperature: float = 300.0
    matsubara: int = 1

    def __post_init__(self):
        _require(_finite(self.reorganization) and self.reorganization >= 0,
                 "bath.reorganization", "reorganization energy must be >= 0")
        _require(_finite(self.cutoff) and self.cutoff > 0, "bath.cutoff", "cutoff must be > 0")
        _require(_finite(self.temperature) and self.temperature > 0,
                 "bath.temperature", "temperature must be > 0")
        _require(_is_int(self.matsubara) and self.matsubara >= 0,
                 "hierarchy.matsubara", "Matsubara count K must be an integer >= 0")

    @property
    def beta(self) -> float:
        return thermal_beta(self.temperature)

    @property
    def coupling_scale(self) -> float:
        """``sqrt(lambda * Omega_c)``, the system-bath coupling strength."""
        return math.sqrt(self.reorganization * self.cutoff)


@dataclass(frozen=True)
class InitialStateSpec:
    """Exciton mixture ``r|X><X| + (1-r)|Y><Y|`` times a thermal mode.

    ``vib_temperature`` of None means "same as the bath".
    """

    purity: float = 1.0
    vib_temperature: Optional[float] = None

    def __post_init__(self):
        _require(_finite(self.purity) and 0.5 <= self.purity <= 1.0,
                 "initial.purity", "r must lie in [1/2, 1]")
        if self.vib_temperature is not None:
            _require(_finite(self.vib_temperature) and self.vib_temperature > 0,
                     "initial.vib_temperature", "temperature must be > 0")

    @property
    def linear_entropy(self) -> float:
        return 2.0 * self.purity * (1.0 - self.purity)


@dataclass(frozen=True)
class HierarchySpec:
    depth: int = 10

    def __post_init__(self):
        _require(_is_int(self.depth) and self.depth >= 0,
                 "hierarchy.depth", "depth L must be an integer >= 0")


@dataclass(frozen=True)
class IntegratorSpec:
    rtol: float = 1e-6
    atol: float = 1e-8
    sample_interval: float = 0.001
    final_time: float = 1.0

    def __post_init__(self):
        _require(_finite(self.rtol) and self.rtol > 0, "integrator.rtol", "tolerance must be > 0")
        _require(_finite(self.atol) and self.atol > 0, "integrator.atol", "tolerance must be > 0")
        _require(_finite(self.sample_interval) and self.sample_interval > 0,
                 "integrator.sample_interval", "sample interval must be > 0")
        _require(_finite(self.final_time) and self.final_time > 0,
                 "integrator.final_time", "final time must be > 0")

    @property
    def n_samples(self) -> int:
        return int(round(self.final_time / self.sample_interval)) + 1


@dataclass(frozen=True)
class OutputSpec:
    tau: float = 0.5

    def __post_init__(self):
        _require(_finite(self.tau) and self.tau > 0, "output.tau", "averaging window must be > 0")


@dataclass(frozen=True)
class RunConfig:
    dimer: DimerParameters = field(default_factory=DimerParameters)
    bath: BathSpec = field(default_factory=BathSpec)
    initial: InitialStateSpec = field(default_factory=InitialStateSpec)
    hierarchy: HierarchySpec = field(default_factory=HierarchySpec)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    label: str = "run"

    def __post_init__(self):
        _require(isinstance(self.label, str) and self.label != "", "label", "must be a non-empty string")
        _require(self.output.tau <= self.integrator.final_time + 1e-12,
                 "output.tau", "averaging window exceeds integrator.final_time")

    @property
    def vib_temperature(self) -> float:
        t = self.initial.vib_temperature
        return self.bath.temperature if t is None else t

    def replace(self, **sections) -> "RunConfig":
        """Copy with whole sections or nested fields replaced.

        ``cfg.replace(bath={"reorganization": 20.0}, label="x")``
        """
        changes = {}
        for name, value in sections.items():
            if isinstance(value, Mapping):
                value = dataclasses.replace(getattr(self, name), **value)
            changes[name] = value
        return dataclasses.replace(self, **changes)


_SECTIONS = {
    "dimer": DimerParameters,
    "bath": BathSpec,
    "initial": InitialStateSpec,
    "hierarchy": HierarchySpec,
    "integrator": IntegratorSpec,
    "output": OutputSpec,
}


def _build_section(name: str, cls, values: Any, extra: Optional[dict] = None):
    if not isinstance(values, Mapping):
        raise ConfigError(f"{name}: section must be an object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    if extra:
        allowed -= set(extra)
    kwargs = {}
    for key, value in values.items():
        if key not in allowed:
            raise ConfigError(f"{name}.{key}: unknown key")
        kwargs[key] = value
    if extra:
        kwargs.update(extra)
    try:
        return cls(**kwargs)
    except TypeError as exc:  # wrong value types reaching arithmetic
        raise ConfigError(f"{name}: {exc}") from exc


def config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("document: top level must be an object")
    unknown = set(doc) - set(_SECTIONS) - {"label"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown key")

    hier = doc.get("hierarchy", {})
    if not isinstance(hier, Mapping):
        raise ConfigError("hierarchy: section must be an object")
    hier = dict(hier)
    matsubara = hier.pop("matsubara", BathSpec.matsubara)

    sections = {}
    for name, cls in _SECTIONS.items():
        if name == "hierarchy":
            sections[name] = _build_section(name, cls, hier)
        elif name == "bath":
            bath = doc.get("bath", {})
            if isinstance(bath, Mapping) and "matsubara" in bath:
                raise ConfigError("bath.matsubara: unknown key (set hierarchy.matsubara)")
            sections[name] = _build_section(name, cls, bath, extra={"matsubara": matsubara})
        else:
            sections[name] = _build_section(name, cls, doc.get(name, {}))
    return RunConfig(label=doc.get("label", "run"), **sections)


def parse_config(document: str) -> RunConfig:
    """Parse a JSON configuration document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"document: malformed JSON ({exc})") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    doc: dict = {"label": cfg.label}
    for name in _SECTIONS:
        doc[name] = dataclasses.asdict(getattr(cfg, name))
    doc["hierarchy"]["matsubara"] = doc["bath"].pop("matsubara")
    return doc


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def temperature_for_thermal_energy(kt: float) -> float:
    """Temperature (K) at which k_B T equals ``kt`` cm^-1."""
    return kt / BOLTZMANN
