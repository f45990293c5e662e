"""Parameter sweeps over bath coupling and initial-state purity, plus shipped scenarios."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence

from .config import RunConfig, config_from_dict
from .dynamics import RunResult, simulate
from .model import exciton_basis

log = logging.getLogger(__name__)

#: depth used by :func:`sweep_lambda` when a point does not say otherwise
SHALLOW_DEPTH, DEEP_DEPTH, DEPTH_SWITCH = 6, 10, 20.0


def default_depth(reorganization: float) -> int:
    return SHALLOW_DEPTH if reorganization <= DEPTH_SWITCH else DEEP_DEPTH


def coherent_boundary(cfg: RunConfig) -> Dict[str, float]:
    """Compare ``sqrt(lambda Omega_c)`` with ``2 g |V| / dE`` (exciton splitting).

    ``boundary_lambda`` is the reorganization energy where the two meet.
    """
    p = cfg.dimer
    threshold = 2.0 * p.g * abs(p.coupling) / exciton_basis(p).delta_E
    scale = cfg.bath.coupling_scale
    return {
        "coupling_scale": scale,
        "threshold": threshold,
        "boundary_lambda": threshold ** 2 / cfg.bath.cutoff,
        "coherent": scale <= threshold,
    }


@dataclass
class SweepRow:
    value: float
    label: str
    summary: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None
    result: Optional[RunResult] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepTable:
    parameter: str
    rows: List[SweepRow]
    columns: List[str]

    def column(self, name: str) -> List[float]:
        return [r.summary.get(name, math.nan) for r in self.rows]

    @property
    def values(self) -> List[float]:
        return [r.value for r in self.rows]

    @property
    def failures(self) -> List[SweepRow]:
        return [r for r in self.rows if not r.ok]


def _run_points(parameter: str, points: Sequence[tuple], columns: List[str],
                summarize: Callable[[RunConfig, RunResult], Dict[str, float]],
                keep_results: bool, runner: Callable[[RunConfig], RunResult]) -> SweepTable:
    rows = []
    for value, cfg in points:
        try:
            res = runner(cfg)
            rows.append(SweepRow(value, cfg.label, summarize(cfg, res), None,
                                 res if keep_results else None))
        except Exception as exc:  # a failed point is recorded, the sweep goes on
            log.warning("%s=%g failed: %s", parameter, value, exc)
            rows.append(SweepRow(value, cfg.label, {}, f"{type(exc).__name__}: {exc}"))
    return SweepTable(parameter, rows, columns)


def sweep_lambda(base: RunConfig, values: Sequence[float], depth: Optional[Callable[[float], int]] = None,
                 keep_results: bool = False, runner: Callable[[RunConfig], RunResult] = simulate) -> SweepTable:
    """Run ``base`` at each reorganization energy and tabulate the time averages.

    Hierarchy depth follows :func:`default_depth` unless ``depth`` is given.
    """
    depth = depth or default_depth
    points = []
    for lam in values:
        lam = float(lam)
        if lam < 0:
            raise ValueError(f"reorganization energy must be >= 0, got {lam}")
        points.append((lam, base.replace(bath={"reorganization": lam}, hierarchy={"depth": depth(lam)},
                                         label=f"{base.label}-lambda{lam:g}")))

    def summarize(cfg, res):
        s = res.summary()
        return {"avg_rho_YY": s["avg_rho_YY"], "avg_neg_Q": s["avg_neg_Q"], "avg_abs_coh": s["avg_abs_coh"],
                "coupling_scale": cfg.bath.coupling_scale}

    return _run_points("lambda", points, ["avg_rho_YY", "avg_neg_Q", "avg_abs_coh", "coupling_scale"],
                       summarize, keep_results, runner)


def sweep_purity(base: RunConfig, values: Sequence[float], keep_results: bool = False,
                 runner: Callable[[RunConfig], RunResult] = simulate) -> SweepTable:
    """Run ``base`` from the mixed exciton state at each purity ``r``."""
    points = []
    for r in values:
        r = float(r)
        if not 0.5 <= r <= 1.0:
            raise ValueError(f"purity r must lie in [1/2, 1], got {r}")
        points.append((r, base.replace(initial={"purity": r}, label=f"{base.label}-r{r:g}")))

    def summarize(cfg, res):
        s = res.summary()
        return {"linear_entropy": cfg.initial.linear_entropy,
                "avg_rho_YY_transfer": s["avg_rho_YY_transfer"], "avg_neg_Q": s["avg_neg_Q"]}

    return _run_points("r", points, ["linear_entropy", "avg_rho_YY_transfer", "avg_neg_Q"],
                       summarize, keep_results, runner)


# --- shipped scenario files -------------------------------------------------

def scenario_names() -> List[str]:
    files = resources.files("vibheom") / "scenarios"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def scenario_document(name: str) -> dict:
    path = resources.files("vibheom") / "scenarios" / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no shipped scenario {name!r}; have {', '.join(scenario_names())}")
    return json.loads(path.read_text())


def split_document(doc: dict):
    """Separate the ``sweep`` block (if any) from the run configuration."""
    doc = dict(doc)
    sweep = doc.pop("sweep", None)
    return config_from_dict(doc), sweep


def load_scenario(name: str) -> RunConfig:
    return split_document(scenario_document(name))[0]


def scenario_sweep(name: str) -> Optional[dict]:
    return split_document(scenario_document(name))[1]
