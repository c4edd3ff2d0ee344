"""Command-line driver: deterministic CSV emission for runs, error studies,
and stability scans.

Every output file starts with a ``#``-prefixed provenance line holding the
fully resolved configuration (defaults included) as compact sorted-key JSON,
so a CSV can always be traced back to the exact inputs that produced it.
Floats are written with ``repr`` — the shortest decimal that round-trips —
and files use LF endings regardless of platform, which makes repeated runs
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, PRESETS, RunConfig, load_preset, parse_config
from .grid import GridSpec
from .mms import mms_run
from .model1 import DivergenceError, Scenario1, run_m1
from .model2 import Scenario2, run_m2
from .sources import QuadratureError
from .stability import EigenSolverError, scan_stability

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_NUMERICS = 4


def _fmt(v) -> str:
    """One CSV cell: strings pass through, ints stay ints, floats use the
    shortest round-trip decimal."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: Path, provenance: dict, header: str, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("# " + json.dumps(provenance, sort_keys=True,
                                   separators=(",", ":")) + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# run mode
# ---------------------------------------------------------------------------

def _snapshot_rows(cfg: RunConfig, state):
    g = cfg.grid
    if cfg.model == 1:
        yield (g.a0, state.phi_a0, 0.0, 0.0)
        for k in range(g.n):
            yield (g.x[k], state.phi[k], state.rho[k], state.j[k])
        yield (g.a1, state.phi_a1, 0.0, 0.0)
    else:
        yield (g.a0, state.phi_a0, state.psi_a0, 0.0, 0.0)
        for k in range(g.n):
            yield (g.x[k], state.phi[k], state.psi[k], state.rho[k], state.j[k])
        yield (g.a1, state.phi_a1, state.psi_a1, 0.0, 0.0)


def _flush_run(cfg: RunConfig, res, out: Path, prov: dict) -> None:
    if cfg.model == 1:
        header = "t,phi_a0,phi_a1"
        rows = zip(res.times, res.phi_a0, res.phi_a1)
    else:
        header = "t,phi_a0,phi_a1,psi_a0,psi_a1"
        rows = zip(res.times, res.phi_a0, res.phi_a1, res.psi_a0, res.psi_a1)
    _write_csv(out / "boundary.csv", prov, header, rows)
    snap_header = "x,phi,rho,j" if cfg.model == 1 else "x,phi,psi,rho,j"
    for t_req, state in res.snapshots:
        _write_csv(out / f"snapshot_{_fmt(t_req)}.csv", prov, snap_header,
                   _snapshot_rows(cfg, state))


def _run_mode(cfg: RunConfig, out: Path) -> int:
    if cfg.model == 1:
        scn = Scenario1(grid=cfg.grid, mat=cfg.mat, dt=cfg.dt,
                        t_end=cfg.t_end, source=cfg.source)
        res_or_err = _attempt(run_m1, scn, cfg.snapshot_times)
    else:
        scn = Scenario2(grid=cfg.grid, mat=cfg.mat, dt=cfg.dt,
                        t_end=cfg.t_end, source=cfg.source)
        res_or_err = _attempt(run_m2, scn, cfg.snapshot_times)
    prov = cfg.provenance()
    if isinstance(res_or_err, DivergenceError):
        if res_or_err.partial is not None:
            _flush_run(cfg, res_or_err.partial, out, prov)
        print(f"error: {res_or_err}", file=sys.stderr)
        return EXIT_DIVERGED
    _flush_run(cfg, res_or_err, out, prov)
    return EXIT_OK


def _attempt(runner, scn, snapshot_times):
    try:
        return runner(scn, snapshot_times=snapshot_times)
    except DivergenceError as exc:
        return exc


# ---------------------------------------------------------------------------
# mms mode
# ---------------------------------------------------------------------------

def _order_cell(prev, rep, field: str) -> str:
    """Observed order against the previous rung, blank when the rung pair is
    not an N-doubling at fixed dt*N."""
    if prev is None or rep.n != 2 * prev.n:
        return ""
    if not math.isclose(rep.dt * rep.n, prev.dt * prev.n, rel_tol=0.02):
        return ""
    ea, eb = prev.linf[field], rep.linf[field]
    if ea == 0.0 or eb == 0.0:
        return "nan"
    return _fmt(math.log2(ea / eb))


def _flush_mms(cfg: RunConfig, reports, out: Path, prov: dict) -> None:
    fields = ("phi", "rho", "j") if cfg.model == 1 else ("phi", "psi", "rho", "j")
    rows = []
    trace_rows = []
    prev = None
    for rep in reports:
        for f in fields:
            rows.append((f, rep.n, rep.dt, rep.linf[f], rep.l2[f],
                         _order_cell(prev, rep, f)))
        for name in sorted(rep.trace_linf):
            trace_rows.append((name, rep.n, rep.dt, rep.trace_linf[name]))
        prev = rep
    _write_csv(out / "errors.csv", prov, "field,N,dt,linf,l2,order", rows)
    _write_csv(out / "trace_errors.csv", prov, "field,N,dt,linf", trace_rows)


def _mms_mode(cfg: RunConfig, out: Path) -> int:
    prov = cfg.provenance()
    reports = []
    failure = None
    for n in cfg.n_ladder:
        g = GridSpec(a0=cfg.grid.a0, a1=cfg.grid.a1, n=n,
                     epsilon=cfg.grid.epsilon)
        dt = cfg.dt_cfl * g.dx / cfg.mat.c1
        try:
            reports.append(mms_run(cfg.model, cfg.mms, g, cfg.mat, dt,
                                   cfg.t_end))
        except DivergenceError as exc:
            failure = exc
            break
    _flush_mms(cfg, reports, out, prov)
    if failure is not None:
        print(f"error: {failure} (N = {n})", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# stability mode
# ---------------------------------------------------------------------------

def _stability_mode(cfg: RunConfig, out: Path) -> int:
    ctl = cfg.stability
    prov = cfg.provenance()
    domains = scan_stability(cfg.model, cfg.mat, ctl.n, ctl.epsilons,
                             dt_max_factor=ctl.dt_max_factor,
                             scan_points=ctl.scan_points,
                             bisect_tol=ctl.bisect_tol)
    rows = [(d.epsilon, d.tau1, d.tau2, d.n, d.model) for d in domains]
    _write_csv(out / "stability.csv", prov, "epsilon,tau1,tau2,N,model", rows)
    if ctl.write_samples:
        srows = [(d.epsilon, tau, rho)
                 for d in domains for tau, rho in d.samples]
        _write_csv(out / "samples.csv", prov, "epsilon,dt_over_cfl,rho", srows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eos",
        description="Hybrid interior-stepper / boundary-integral solver for "
                    "two transient scattering models: production runs, "
                    "manufactured-solution error studies, and time-step "
                    "stability scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "advance a scenario and write boundary traces and snapshots"),
        ("mms", "measure errors against a manufactured solution"),
        ("stability", "map the stable time-step window over grid stretching"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", nargs="?", metavar="CONFIG",
                        help="path to a JSON configuration file")
        sp.add_argument("--preset", metavar="NAME",
                        help="use a built-in scenario instead of a file")
        sp.add_argument("--out", metavar="DIR",
                        help="output directory (overrides the config)")
    sub.add_parser("scenarios", help="list the built-in scenarios")
    return parser


def _load(args) -> RunConfig:
    if args.preset and args.config:
        raise ConfigError("give either a config file or --preset, not both")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        cfg = parse_config(args.config, default_mode=args.command)
    else:
        raise ConfigError("a config file or --preset is required")
    if cfg.mode != args.command:
        raise ConfigError(
            f"config mode '{cfg.mode}' does not match the "
            f"'{args.command}' subcommand")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "scenarios":
        for name, data in PRESETS.items():
            print(f"{name}  (model {data['model']}, {data['mode']})")
        return EXIT_OK
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if cfg.mode == "run":
            return _run_mode(cfg, out)
        if cfg.mode == "mms":
            return _mms_mode(cfg, out)
        return _stability_mode(cfg, out)
    except (QuadratureError, EigenSolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    raise SystemExit(main())
