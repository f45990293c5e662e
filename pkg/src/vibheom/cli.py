"""Command-line runner.

    vibheom simulate --config fig2g-i --out results/
    vibheom sweep-lambda --config fig4.json --values 2,6,12,20,40,70,110
    vibheom sweep-purity --config fig-mixed --values 1.0,0.9,0.8,0.7,0.6,0.5
    vibheom audit --config fig2g-i
    vibheom scenarios

``--config`` takes a JSON file or the name of a shipped scenario.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import output
from .bath import matsubara_decomposition
from .config import ConfigError, RunConfig
from .dynamics import convergence_audit, simulate
from .hierarchy import HEOMGenerator
from .integrate import StiffnessError
from .model import COLLECTIVE, build_hamiltonian, coupling_operators, initial_density_matrix
from .sweeps import (coherent_boundary, scenario_document, scenario_names, split_document,
                     sweep_lambda, sweep_purity)

log = logging.getLogger("vibheom")


class UsageError(Exception):
    pass


def _load(ref: str):
    """Config and optional sweep block from a file path or a shipped scenario name."""
    path = Path(ref)
    if path.is_file():
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"document: malformed JSON ({exc})") from exc
    elif ref in scenario_names():
        doc = scenario_document(ref)
    else:
        raise UsageError(f"config {ref!r} is neither a file nor a shipped scenario "
                         f"({', '.join(scenario_names())})")
    if not isinstance(doc, dict):
        raise ConfigError("document: top level must be an object")
    return split_document(doc)


def _values(text: Optional[str], sweep: Optional[dict], parameter: str) -> List[float]:
    if text:
        try:
            vals = [float(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"--values: {exc}") from exc
    elif sweep and sweep.get("parameter") == parameter:
        vals = [float(v) for v in sweep["values"]]
    else:
        raise UsageError("--values is required (the config carries no matching sweep)")
    if len(vals) > 1:
        steps = [b - a for a, b in zip(vals, vals[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise UsageError("--values must be strictly monotone")
    return vals


def _dump_matrices(cfg: RunConfig, out: Path) -> None:
    H = build_hamiltonian(cfg.dimer, COLLECTIVE)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{cfg.label}_H.txt").write_text(output.matrix_text(H.matrix))
    rho0 = initial_density_matrix(cfg.initial, cfg.dimer, cfg.vib_temperature)
    (out / f"{cfg.label}_rho0.txt").write_text(output.matrix_text(rho0))
    for i, Q in enumerate(coupling_operators(H), start=1):
        (out / f"{cfg.label}_Q{i}.txt").write_text(output.matrix_text(Q))
    print(f"matrices written to {out} (basis: site major, Fock index minor)")


def _debug_bath(cfg: RunConfig) -> None:
    dec = matsubara_decomposition(cfg.bath)
    print(f"bath: lambda={cfg.bath.reorganization:g} Omega_c={cfg.bath.cutoff:g} "
          f"T={cfg.bath.temperature:g} K  beta*Omega_c={cfg.bath.beta * cfg.bath.cutoff:.4f}")
    for k, (nu, c) in enumerate(zip(dec.frequencies, dec.coefficients)):
        print(f"  k={k}  nu={nu:.6f} cm^-1  c={c.real:.6e}{c.imag:+.6e}i cm^-2")
    print(f"  remainder Delta={dec.remainder:.6e} cm^-1")
    H = build_hamiltonian(cfg.dimer, COLLECTIVE)
    gen = HEOMGenerator(H, dec, cfg.hierarchy.depth)
    print(f"hierarchy: {gen.n_ados} ADOs of dimension {H.dim}, "
          f"{gen.memory_estimate() / 2 ** 20:.1f} MB per state vector")
    logging.getLogger("vibheom.integrate").setLevel(logging.DEBUG)


def cmd_simulate(args) -> int:
    cfg, sweep = _load(args.config)
    if sweep:
        log.info("%s carries a sweep block; simulating the base point only", cfg.label)
    out = Path(args.out)
    if args.dump_matrices:
        _dump_matrices(cfg, out)
    if args.debug_bath:
        _debug_bath(cfg)
    res = simulate(cfg)
    paths = output.write_run(res, out)
    if args.debug_bath:
        st = res.stats
        print(f"steps: {st.accepted} accepted, {st.rejected} rejected, {st.evaluations} evaluations, "
              f"h in [{st.smallest_step:.3e}, {st.largest_step:.3e}] ps")
    print(json.dumps(output.summary(res), indent=2))
    print(f"wrote {paths['csv']} ({res.wall_time:.1f} s)", file=sys.stderr)
    return 0


def _report_sweep(table, base: RunConfig, out: Optional[Path], name: str) -> int:
    print(output.sweep_text(table))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{base.label}_{name}.csv").write_text(output.sweep_csv(table))
        for row in table.rows:
            if row.ok and row.result is not None:
                output.write_run(row.result, out)
    for row in table.failures:
        print(f"{table.parameter}={row.value:g} ({row.label}) failed: {row.error}", file=sys.stderr)
    return 1 if table.failures else 0


def cmd_sweep_lambda(args) -> int:
    base, sweep = _load(args.config)
    values = _values(args.values, sweep, "lambda")
    out = Path(args.out) if args.out else None
    table = sweep_lambda(base, values, keep_results=out is not None)
    b = coherent_boundary(base)
    print(f"coherent regime while sqrt(lambda*Omega_c) <= 2g|V|/dE = {b['threshold']:.1f} cm^-1 "
          f"(lambda <= {b['boundary_lambda']:.1f} cm^-1)")
    return _report_sweep(table, base, out, "lambda_sweep")


def cmd_sweep_purity(args) -> int:
    base, sweep = _load(args.config)
    values = _values(args.values, sweep, "r")
    out = Path(args.out) if args.out else None
    table = sweep_purity(base, values, keep_results=out is not None)
    return _report_sweep(table, base, out, "purity_sweep")


def cmd_audit(args) -> int:
    cfg, _ = _load(args.config)
    report = convergence_audit(cfg)
    print("\n".join(report.lines()))
    worst = max(d["rho_YY"] for d in report.drifts.values())
    if args.threshold is not None and worst >= args.threshold:
        print(f"largest rho_YY drift {worst:.3e} >= {args.threshold:g}", file=sys.stderr)
        return 1
    return 0


def cmd_scenarios(args) -> int:
    for name in scenario_names():
        cfg, sweep = split_document(scenario_document(name))
        extra = f"  sweep {sweep['parameter']}={sweep['values']}" if sweep else ""
        print(f"{name:<16} lambda={cfg.bath.reorganization:g} L={cfg.hierarchy.depth} "
              f"V={cfg.dimer.coupling:g} S={cfg.dimer.huang_rhys:g}{extra}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vibheom", description="Vibronic dimer HEOM runs.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configuration and write its CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--dump-matrices", action="store_true", help="write H, rho0 and Q_i as text")
    p.add_argument("--debug-bath", action="store_true",
                   help="print the Matsubara terms, hierarchy size and step statistics")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-lambda", help="scan the reorganization energy")
    p.add_argument("--config", required=True)
    p.add_argument("--values", help="comma-separated cm^-1 values (default: the config's sweep)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_lambda)

    p = sub.add_parser("sweep-purity", help="scan the initial exciton purity r")
    p.add_argument("--config", required=True)
    p.add_argument("--values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_purity)

    p = sub.add_parser("audit", help="re-run at L+2, M+1, K+1 and report drifts")
    p.add_argument("--config", required=True)
    p.add_argument("--threshold", type=float, help="exit 1 if any rho_YY drift reaches this")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("scenarios", help="list the shipped scenarios")
    p.set_defaults(func=cmd_scenarios)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StiffnessError as exc:
        print(f"error in {getattr(args, 'config', '?')}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error in {getattr(args, 'config', '?')}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
