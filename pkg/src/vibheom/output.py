"""CSV and text artifacts: trajectories, summaries, sweep tables and matrix dumps."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from .dynamics import RunResult
from .sweeps import SweepTable

#: 17 significant digits round-trip every double exactly
NUMBER_FORMAT = "{:.16e}"


def fmt(x: float) -> str:
    return NUMBER_FORMAT.format(float(x))


def trajectory_header(cutoff: int) -> List[str]:
    return (["t_ps", "rho_YY", "rho_XX", "re_coh", "im_coh", "abs_coh"]
            + [f"P{n}" for n in range(cutoff + 1)] + ["Q"]
            + [f"B{n}" for n in range(cutoff - 1)]
            + ["energy_cm1", "trace_err", "min_eig"])


def trajectory_rows(result: RunResult) -> List[List[float]]:
    rows = []
    for r in result.trajectory.records:
        rows.append([r.t, r.rho_YY, r.rho_XX, r.coherence_X0Y0.real, r.coherence_X0Y0.imag,
                     r.abs_coherence, *r.probabilities, r.mandel_Q, *r.klyshko_B,
                     r.energy, r.trace_error, r.min_eigenvalue])
    return rows


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def trajectory_csv(result: RunResult) -> str:
    return _csv_text(trajectory_header(result.hamiltonian.fock_cutoff), trajectory_rows(result))


def read_csv(path) -> Dict[str, np.ndarray]:
    """Columns of a numeric CSV written by this module."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return {name: data[:, i] for i, name in enumerate(header)}


def summary(result: RunResult) -> Dict[str, object]:
    s = result.summary()
    return {
        "label": result.config.label,
        "tau_ps": result.config.output.tau,
        "avg_rho_YY": s["avg_rho_YY"],
        "avg_rho_YY_transfer": s["avg_rho_YY_transfer"],
        "avg_neg_Q": s["avg_neg_Q"],
        "avg_abs_coh": s["avg_abs_coh"],
        "n_ados": result.n_ados,
        "steps_accepted": result.stats.accepted,
        "steps_rejected": result.stats.rejected,
    }


def sweep_csv(table: SweepTable) -> str:
    header = [table.parameter] + table.columns
    rows = [[r.value] + [r.summary[c] for c in table.columns] for r in table.rows if r.ok]
    return _csv_text(header, rows)


def sweep_text(table: SweepTable) -> str:
    width = max(14, *(len(c) + 2 for c in table.columns))
    lines = [f"{table.parameter:>8}" + "".join(f"{c:>{width}}" for c in table.columns)]
    for r in table.rows:
        if r.ok:
            lines.append(f"{r.value:>8g}" + "".join(f"{r.summary[c]:>{width}.6g}" for c in table.columns))
        else:
            lines.append(f"{r.value:>8g}  FAILED: {r.error}")
    return "\n".join(lines)


def matrix_text(m: np.ndarray) -> str:
    """Row-major dump, one matrix row per line of ``re,im`` pairs."""
    m = np.asarray(m, dtype=complex)
    return "".join(" ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in row) + "\n" for row in m)


def write_run(result: RunResult, out_dir) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    label = result.config.label
    paths = {"csv": out / f"{label}.csv", "summary": out / f"{label}.summary.json"}
    paths["csv"].write_text(trajectory_csv(result))
    paths["summary"].write_text(json.dumps(summary(result), indent=2) + "\n")
    return paths
