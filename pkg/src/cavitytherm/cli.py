"""Command-line front end: cutoff solving, temperature sweeps, oracle runs.

Subcommands
-----------
cutoffs   print the infrared thresholds (10 significant figures); --figure
          emits (v0, G) samples as CSV
sweep     evaluate the report over a xi grid, write CSV (+ jump-resolving
          rows at xi +/- 1e-6 around interior branch crossings) and a JSON
          summary
oracle    run a named check suite and write a JSON report

Configuration is plain key=value lines with '#' comments; every key can be
overridden by a command flag of the same name.  CAVITYTHERM_THREADS sets the
default worker count.  Exit codes: 0 ok, 2 usage, 3 cutoff-solver failure,
4 flagged sweep rows, 5 hard oracle failure.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import matsubara, oracle, regularize, thermo
from .core import (
    CavityGeometry,
    CavityThermError,
    SumPolicy,
    TailMethod,
    ThermoPoint,
    validate_geometry,
)

_CSV_COLUMNS = [
    "xi", "f_total", "f_bb", "delta_f", "s_total", "s_bb", "delta_s",
    "e_total", "e_bb", "delta_e", "c_v", "p1", "p2", "p3",
    "p1_bb", "p2_bb", "p3_bb", "branch_id",
]


@dataclasses.dataclass
class RunConfig:
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0
    xi_min: float = 0.01
    xi_max: float = 5.0
    xi_points: int = 64
    xi_spacing: str = "linear"
    rel_tol: float = 1e-6
    max_shell_radius: int = 400
    tail_method: str = "continuum_integral"
    cutoff_tolerance: float = 1e-9
    output_csv: str = "sweep.csv"
    output_json: str = "sweep.json"
    threads: int = int(os.environ.get("CAVITYTHERM_THREADS", "1"))
    with_oracle: bool = False
    omega_max_factor: float = 40.0
    # crossings accumulate as xi -> 0; only the largest this-many inside the
    # grid get jump-resolving xi +/- 1e-6 row pairs
    boundary_emit_max: int = 40

    def validate(self):
        if not (self.xi_min < self.xi_max):
            raise ValueError("grid requires xi_min < xi_max")
        if self.xi_points < 2:
            raise ValueError("grid requires points >= 2")
        if self.xi_spacing not in ("linear", "log"):
            raise ValueError("xi_spacing must be 'linear' or 'log'")
        for name in ("rel_tol", "cutoff_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        return self

    def geometry(self) -> CavityGeometry:
        return validate_geometry(self.a1, self.a2, self.a3)

    def policy(self) -> SumPolicy:
        return SumPolicy(
            max_shell_radius=self.max_shell_radius,
            rel_tol=self.rel_tol,
            tail_method=TailMethod(self.tail_method),
        )


def load_config(path: str) -> dict:
    """Parse key=value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


def _coerce(cfg: RunConfig, key: str, val: str):
    field_types = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    if key not in field_types:
        raise ValueError(f"unknown config key {key!r}")
    current = getattr(cfg, key)
    if isinstance(current, bool):
        setattr(cfg, key, str(val).lower() in ("1", "true", "yes", "on"))
    elif isinstance(current, int):
        setattr(cfg, key, int(val))
    elif isinstance(current, float):
        setattr(cfg, key, float(val))
    else:
        setattr(cfg, key, str(val))


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, val in load_config(args.config).items():
            _coerce(cfg, key, val)
    for f in dataclasses.fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
    cfg.validate()
    return cfg


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_cutoffs(args) -> int:
    try:
        cuts = regularize.solve_cutoffs(args.tolerance)
    except CavityThermError as exc:
        print(f"cutoff solve failed: {exc}", file=sys.stderr)
        return 3
    print(f"v_V={cuts.v_volume:.10g}, v_E={cuts.v_edge:.10g}")
    if args.figure:
        vs = np.linspace(0.05, 6.0, args.figure_points)
        with open(args.figure, "w") as fh:
            fh.write("v0,G\n")
            for v in vs:
                fh.write(f"{_fmt(v)},{_fmt(regularize.G(float(v)))}\n")
        print(f"wrote {args.figure}")
    return 0


def _eval_point(task):
    xi, (a1, a2, a3), pol_fields, tol = task
    geometry = CavityGeometry(a1, a2, a3)
    policy = SumPolicy(**pol_fields)
    cutoffs = regularize.solve_cutoffs(tol)
    point = ThermoPoint.from_xi(xi, geometry)
    try:
        rep = thermo.evaluate_report(point, geometry, cutoffs, policy)
    except CavityThermError as exc:
        return xi, None, str(exc)
    return xi, rep, None


def _report_row(xi, rep):
    return [
        xi,
        rep.f.total, rep.f.blackbody, rep.f.delta,
        rep.s.total, rep.s.blackbody, rep.s.delta,
        rep.e.total, rep.e.blackbody, rep.e.delta,
        rep.c_v.total,
        rep.p1.total, rep.p2.total, rep.p3.total,
        rep.p1.blackbody, rep.p2.blackbody, rep.p3.blackbody,
        rep.branch_id,
    ]


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    geometry = cfg.geometry()
    policy = cfg.policy()
    cutoffs = regularize.solve_cutoffs(cfg.cutoff_tolerance)
    if cfg.xi_spacing == "log":
        grid = np.geomspace(cfg.xi_min, cfg.xi_max, cfg.xi_points)
    else:
        grid = np.linspace(cfg.xi_min, cfg.xi_max, cfg.xi_points)
    bounds = thermo.branch_boundaries(geometry, cutoffs, policy, cfg.xi_max)
    interior = [b for b in bounds if cfg.xi_min < b < cfg.xi_max]
    xis = list(map(float, grid))
    for b in interior[-cfg.boundary_emit_max:]:
        xis.extend((b - 1e-6, b + 1e-6))
    xis = sorted(set(xis))

    pol_fields = {
        "max_shell_radius": policy.max_shell_radius,
        "rel_tol": policy.rel_tol,
        "tail_method": policy.tail_method,
    }
    tasks = [(xi, geometry.edges, pol_fields, cfg.cutoff_tolerance) for xi in xis]
    if cfg.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_eval_point, tasks))
    else:
        results = [_eval_point(t) for t in tasks]

    flagged = []
    eos_max = 0.0
    with open(cfg.output_csv, "w") as fh:
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for xi, rep, errmsg in results:
            if rep is None:
                flagged.append({"xi": xi, "error": errmsg})
                fh.write(_fmt(xi) + "," + ",".join(["nan"] * (len(_CSV_COLUMNS) - 2))
                         + ",-1\n")
                continue
            row = _report_row(xi, rep)
            fh.write(",".join(_fmt(x) for x in row) + "\n")
            # dimensionless equation of state: e = (p1+p2+p3) V / a1^3
            psum = (rep.p1.total + rep.p2.total + rep.p3.total) * geometry.volume / geometry.a1**3
            eos_max = max(eos_max, abs(rep.e.total - psum) / max(abs(rep.e.total), 1e-300))

    summary = {
        "geometry": {"a1": geometry.a1, "a2": geometry.a2, "a3": geometry.a3},
        "cutoffs": {"v_volume": cutoffs.v_volume, "v_edge": cutoffs.v_edge},
        "policy": {
            "max_shell_radius": policy.max_shell_radius,
            "rel_tol": policy.rel_tol,
            "tail_method": policy.tail_method.value,
        },
        "config": {f.name: getattr(cfg, f.name) for f in dataclasses.fields(RunConfig)},
        "branch_boundaries": bounds,
        "eos_max_residual": eos_max,
        "flagged_rows": flagged,
    }
    if cfg.with_oracle:
        xi_mid = math.sqrt(cfg.xi_min * cfg.xi_max)
        T = xi_mid / (math.pi * geometry.a1)
        summary["oracle_comparison"] = oracle.compare_regularized(
            T, geometry, cutoffs, policy, cfg.omega_max_factor * T
        )
    with open(cfg.output_json, "w") as fh:
        json.dump(summary, fh, indent=2, default=float)
    print(f"wrote {cfg.output_csv} and {cfg.output_json}"
          + (f" ({len(flagged)} flagged rows)" if flagged else ""))
    return 4 if flagged else 0


def cmd_oracle(args) -> int:
    cfg = build_config(args)
    geometry = cfg.geometry()
    policy = cfg.policy()
    cutoffs = regularize.solve_cutoffs(cfg.cutoff_tolerance)
    report = {"which": args.which}
    hard_fail = False
    if args.which == "appendix":
        us = np.geomspace(0.1, 10.0, 7)
        betas = np.geomspace(0.5, 20.0, 7)
        worst = 0.0
        for u in us:
            for b in betas:
                d1 = abs(oracle.appendix_integral_sin(u, b) - oracle.closed_form_sin(u, b))
                d2 = abs(
                    oracle.appendix_integral_omega_cos(u, b)
                    - oracle.closed_form_omega_cos(u, b)
                )
                worst = max(worst, d1, d2)
        report["max_abs_error"] = worst
        report["pass"] = worst < 1e-9
        hard_fail = not report["pass"]
    elif args.which == "modes":
        lo = 20.0 * math.pi / geometry.a1
        hi = 40.0 * math.pi / geometry.a1
        stats = oracle.weyl_drift(geometry, lo, hi)
        report.update(stats)
        report["pass"] = stats["relative_drift"] < 0.01
        hard_fail = not report["pass"]
    elif args.which == "direct":
        out = []
        for xi in (0.5, 1.0, 2.0):
            T = xi / (math.pi * geometry.a1)
            out.append(oracle.compare_regularized(
                T, geometry, cutoffs, policy, max(cfg.omega_max_factor * T, 25.0)
            ))
        report["comparisons"] = out
    elif args.which == "matsubara":
        T = 1.0 / (math.pi * geometry.a1)
        diag = matsubara.delta_f_matsubara(T, geometry, 256, policy)
        report["partial_values"] = list(diag.partial_values)
        report["log_fit"] = diag.log_fit
        report["fit_residual"] = diag.fit_residual
        report["volume_converged"] = diag.components["volume_converged"]
    elif args.which == "massive":
        m = 0.5 / geometry.a1
        T = m / 20.0
        exact = matsubara.delta_f_massive(T, geometry, m, 400, policy)
        closed = matsubara.low_t_massive_free_energy(T, m)
        report["exact"] = exact
        report["low_t_closed_form"] = closed
        report["rel_diff"] = abs(exact - closed) / abs(closed)
    else:  # pragma: no cover - argparse restricts choices
        print(f"unknown oracle suite {args.which!r}", file=sys.stderr)
        return 2
    path = args.output or f"oracle_{args.which}.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, default=float)
    print(f"wrote {path}" + ("" if not hard_fail else " (FAILED)"))
    return 5 if hard_fail else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool" or isinstance(f.default, bool):
            p.add_argument(flag, dest=f.name, default=None,
                           action=argparse.BooleanOptionalAction)
        else:
            p.add_argument(flag, dest=f.name, default=None,
                           type=type(f.default) if f.default is not None else str)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavitytherm",
                                description="thermodynamics of a closed rectangular cavity")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("cutoffs", help="solve and print the infrared thresholds")
    pc.add_argument("--tolerance", type=float, default=1e-9)
    pc.add_argument("--figure", help="write (v0, G) samples to this CSV path")
    pc.add_argument("--figure-points", type=int, default=240)
    pc.set_defaults(func=cmd_cutoffs)

    ps = sub.add_parser("sweep", help="evaluate the report over a xi grid")
    _add_config_flags(ps)
    ps.set_defaults(func=cmd_sweep)

    po = sub.add_parser("oracle", help="run a verification suite")
    po.add_argument("which",
                    choices=["appendix", "modes", "direct", "matsubara", "massive"])
    po.add_argument("--output", help="JSON report path")
    _add_config_flags(po)
    po.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
