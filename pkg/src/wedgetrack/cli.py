"""Command line: scenario loading, runs, comparison, refinement and audits.

    wedgetrack run SCENARIO.yaml [--dx --mu --delta --nu --xmax --mode --out DIR]
    wedgetrack compare SCENARIO.yaml --eps 0.02,0.01,0.005,0.0025 --x 2,4
    wedgetrack converge SCENARIO.yaml --levels 3
    wedgetrack audit SCENARIO.yaml [--pair OTHER.yaml]

Scenario files are YAML with top-level keys gamma, mode, background,
boundary_pressure, incoming and solver.  CSV numbers use 17 significant
digits so identical runs give identical bytes.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

import numpy as np
import yaml

from . import functionals as fn
from .gas import DomainError
from .riemann import SolverError
from .scenario import Background, ConditionError, Perturbation, Scenario, SolverConfig
from .tracking import TrackingError, params_from_scenario, run, sample_solution

log = logging.getLogger("wedgetrack")

EXIT_CONDITION = 2
EXIT_SOLVER = 3


# Scenario files ------------------------------------------------------------------

def _float(v, key):
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ValueError(f"{key}: expected a number, got {v!r}") from None


def _perturbation(d, key, dim):
    if d is None:
        return Perturbation()
    if not isinstance(d, dict):
        raise ValueError(f"{key}: expected a mapping")
    if "samples" in d:
        s = d["samples"]
        t = np.array([_float(v, key) for v in s["x" if "x" in s else "y"]])
        vals = np.array(s["values"], float)
        if np.any(np.diff(t) <= 0):
            raise ValueError(f"{key}: sample abscissae must increase")
        if dim == 1:
            func = lambda z: float(np.interp(z, t, vals))
        else:
            vals = vals.reshape(len(t), -1)
            func = lambda z: np.array([np.interp(z, t, vals[:, k]) for k in range(vals.shape[1])])
        return Perturbation(func=func, support=(float(t[0]), float(t[-1])))
    breaks = [_float(v, key) for v in d["breaks"]]
    if dim == 1:
        values = [_float(v, key) for v in d["values"]]
    else:
        values = [[_float(c, key) for c in v] for v in d["values"]]
    return Perturbation(breaks, values)


def scenario_from_dict(d):
    unknown = set(d) - {"gamma", "mode", "background", "boundary_pressure", "incoming", "solver", "name"}
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    mode = d.get("mode", "euler")
    bg = dict(d.get("background") or {})
    pb_given = "pb_bar" in bg
    bgk = {f.name for f in fields(Background)}
    bad = set(bg) - bgk
    if bad:
        raise ValueError(f"unknown background keys: {sorted(bad)}")
    bgv = {k: (None if v is None else _float(v, k)) for k, v in bg.items()}
    if mode != "euler" and not pb_given:
        bgv["pb_bar"] = None
    background = Background(**bgv)
    sol = dict(d.get("solver") or {})
    sk = {f.name for f in fields(SolverConfig)}
    bad = set(sol) - sk
    if bad:
        raise ValueError(f"unknown solver keys: {sorted(bad)}")
    for k, v in list(sol.items()):
        if k in ("max_events",):
            sol[k] = int(v)
        elif k == "record_functionals":
            sol[k] = bool(v)
        elif v is not None:
            sol[k] = _float(v, k)
    dim = 4 if mode == "euler" else 2
    sc = Scenario(gamma=_float(d.get("gamma", 1.4), "gamma"), mode=mode, background=background,
                  boundary_pressure=_perturbation(d.get("boundary_pressure"), "boundary_pressure", 1),
                  incoming=_perturbation(d.get("incoming"), "incoming", dim),
                  solver=SolverConfig(**sol), name=str(d.get("name", "scenario")))
    validate(sc, pb_given)
    return sc


def validate(sc, pb_given=True):
    """Admissibility conditions at load time (raises ConditionError)."""
    sc.background_states()
    if sc.mode != "euler" and pb_given and sc.background.pb_bar is not None:
        U = sc.isentropic_background()
        if abs(sc.background.pb_bar - U[2]) > 1e-12 * U[2]:
            raise ConditionError(
                f"Condition E1.2(a): comparison mode needs pb_bar = R(|u|)^gamma = {U[2]:.17g}")


def load_scenario(path):
    with open(path) as fh:
        d = yaml.safe_load(fh)
    if not isinstance(d, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    d.setdefault("name", Path(path).stem)
    return scenario_from_dict(d)


# CSV output -------------------------------------------------------------------

def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_trajectory(traj, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "boundary.csv", ["x0", "b0", "slope", "u_b", "v_b", "p_b", "rho_b", "p_sample"],
              [(s[0], s[1], s[2], *s[3], s[4]) for s in traj.boundary])
    write_csv(out / "strong_shock.csv", ["x0", "y0", "speed"],
              [(f.x0, f.y0, f.speed) for f in traj.strong_fronts()])
    write_csv(out / "fronts.csv",
              ["id", "family", "kind", "strength", "speed", "x0", "y0", "x_end", "order",
               "ul", "vl", "pl", "rhol", "ur", "vr", "pr", "rhor"],
              [(f.id, f.family, f.kind, f.strength, f.speed, f.x0, f.y0, f.x_end, f.order,
                *f.Ul, *f.Ur) for f in traj.fronts])
    write_csv(out / "events.csv", ["x", "kind", "solver", "ids_in", "ids_out"],
              [(e.x, e.kind, e.solver, " ".join(map(str, e.ids_in)), " ".join(map(str, e.ids_out)))
               for e in traj.events])
    s = traj.series
    keys = ["x", "L", "Q", "F", "NP", "dev_lo", "dev_hi", "n_fronts"]
    if len(s["x"]):
        write_csv(out / "functional.csv", keys, zip(*[s[k] for k in keys]))


# Commands -------------------------------------------------------------------------

def _apply_flags(sc, a):
    sol = sc.solver
    upd = {}
    for flag, key in (("dx", "dx"), ("mu", "mu"), ("delta", "delta"), ("nu", "nu"), ("xmax", "x_max")):
        v = getattr(a, flag, None)
        if v is not None:
            upd[key] = v
    sc = replace(sc, solver=replace(sol, **upd))
    if getattr(a, "mode", None):
        sc = replace(sc, mode=a.mode)
        if a.mode != "euler":
            sc = replace(sc, background=replace(sc.background, pb_bar=None))
        validate(sc, False)
    return sc


def threads():
    try:
        return max(1, int(os.environ.get("WEDGETRACK_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(f, items):
    n = min(threads(), len(items))
    if n <= 1:
        return [f(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(f, items))


def cmd_run(a):
    sc = _apply_flags(load_scenario(a.scenario), a)
    traj = run(sc)
    out = Path(a.out or f"out_{sc.name}")
    write_trajectory(traj, out)
    print(f"{sc.name}: {len(traj.events)} events, {len(traj.fronts)} fronts, "
          f"b({traj.x_max:g}) = {traj.b_at(traj.x_max):.17g} -> {out}")
    return 0


def _scaled(sc, eps):
    """Scenario with its piecewise perturbations rescaled to amplitude eps."""
    def sc1(p):
        if p.breaks is None:
            return p
        amp = max(float(np.max(np.abs(np.atleast_1d(v)))) for v in p.values)
        if amp == 0.0:
            return p
        return Perturbation(p.breaks, [np.asarray(v, float) * (eps / amp) for v in p.values])
    return replace(sc, boundary_pressure=sc1(sc.boundary_pressure), incoming=sc1(sc.incoming))


def cmd_compare(a):
    from .comparison import cubic_scaling_study
    sc = _apply_flags(load_scenario(a.scenario), a)
    if sc.mode == "euler":
        sc = replace(sc, mode="compare", background=replace(sc.background, pb_bar=None))
    eps = [float(t) for t in a.eps.split(",")]
    xs = [float(t) for t in a.x.split(",")]
    rep = cubic_scaling_study(lambda e: _scaled(sc, e), eps, xs, dx=sc.solver.dx)
    out = Path(a.out or f"out_{sc.name}")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "cubic.csv", ["eps", "x", "mu", "Y", "flagged", "n_events"], rep.rows)
    write_csv(out / "cubic_fit.csv", ["x_fit", "slope", "ci_lo", "ci_hi", "intercept"],
              [(rep.x_fit, rep.slope, rep.slope_ci[0], rep.slope_ci[1], rep.intercept)])
    print(f"slope {rep.slope:.4f} (95% CI {rep.slope_ci[0]:.4f}..{rep.slope_ci[1]:.4f}), "
          f"excluded {rep.excluded}, linear in x: {rep.linear_ok()}")
    return 0


def _converge_one(args):
    sc, dx, xs = args
    t = run(replace(sc, solver=replace(sc.solver, dx=dx)))
    secs = [sample_solution(t, x) for x in xs]
    return t, secs


def refinement_table(sc, levels=3, n_x=41):
    """Successive differences between the runs at dx, dx/2, ..., dx/2^levels."""
    from .lyapunov import plain_l1
    dx0 = sc.solver.dx
    dxs = [dx0 / 2 ** k for k in range(levels + 1)]
    xg = np.linspace(0.0, sc.solver.x_max, n_x)
    res = _pmap(_converge_one, [(sc, dx, [sc.solver.x_max]) for dx in dxs])
    rows = []
    for k in range(levels):
        (t0, s0), (t1, s1) = res[k], res[k + 1]
        l1 = plain_l1(s0[0], s1[0])
        db = max(abs(t0.b_at(x) - t1.b_at(x)) for x in xg)
        dchi = 0.0
        if sc.mode == "euler":
            dchi = max(abs(t0.chi_at(x)[0] - t1.chi_at(x)[0]) for x in xg)
        rows.append((dxs[k], dxs[k + 1], l1, db, dchi))
    return rows


def cmd_converge(a):
    sc = _apply_flags(load_scenario(a.scenario), a)
    rows = refinement_table(sc, a.levels)
    out = Path(a.out or f"out_{sc.name}")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "converge.csv", ["dx", "dx_half", "l1_diff", "b_sup_diff", "chi_sup_diff"], rows)
    l1 = [r[2] for r in rows]
    mono = all(b < a_ for a_, b in zip(l1[:-1], l1[1:]))
    for r in rows:
        print(" ".join(fmt(v) for v in r))
    print(f"successive L1 differences decreasing: {mono}")
    return 0


def audit_trajectory(traj):
    """Named pass/fail audits of one run."""
    res = {}
    v = fn.monotonicity_audit(traj)
    res["glimm_monotone"] = (not v, f"{len(v)} increases")
    np_max = float(np.max(traj.series["NP"])) if len(traj.series["NP"]) else 0.0
    res["np_below_mu"] = (np_max < traj.params.mu, f"max NP {np_max:.3g} vs mu {traj.params.mu:.3g}")
    e = fn.entropy_audit(traj)
    res["entropy"] = (not e, f"{len(e)} fronts")
    r = fn.rh_audit(traj)
    res["rankine_hugoniot"] = (not r, f"{len(r)} fronts")
    return res


def cmd_audit(a):
    sc = _apply_flags(load_scenario(a.scenario), a)
    traj = run(sc)
    res = audit_trajectory(traj)
    if a.pair:
        from .lyapunov import stability_audit
        sc2 = _apply_flags(load_scenario(a.pair), a)
        t2 = run(sc2)
        rep = stability_audit(traj, t2)
        res["lyapunov_monotone"] = (not rep.violations,
                                    f"{len(rep.violations)} increases, C_Y {rep.C_Y:.4g}")
        out = Path(a.out or f"out_{sc.name}")
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "lyapunov.csv", ["x", "F", "Y", "db", "l1"],
                  zip(rep.xs, rep.F, rep.Y, rep.db, rep.l1))
    out = Path(a.out or f"out_{sc.name}")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "audit.csv", ["audit", "pass", "detail"],
              [(k, ok, d) for k, (ok, d) in res.items()])
    for k, (ok, d) in res.items():
        print(f"{'PASS' if ok else 'FAIL'} {k}: {d}")
    return 0 if all(ok for ok, _ in res.values()) else 1


# Entry point -----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="wedgetrack", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("scenario")
        sp.add_argument("--dx", type=float)
        sp.add_argument("--mu", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--nu", type=float)
        sp.add_argument("--xmax", type=float)
        sp.add_argument("--mode", choices=["euler", "potential", "compare"])
        sp.add_argument("--out")

    sp = sub.add_parser("run", help="track one scenario and write CSVs")
    common(sp)
    sp.set_defaults(func=cmd_run)
    sp = sub.add_parser("compare", help="Euler vs potential cubic-scaling study")
    common(sp)
    sp.add_argument("--eps", default="0.02,0.01,0.005,0.0025")
    sp.add_argument("--x", default="2,4")
    sp.set_defaults(func=cmd_compare)
    sp = sub.add_parser("converge", help="refinement table over dx, dx/2, ...")
    common(sp)
    sp.add_argument("--levels", type=int, default=3)
    sp.set_defaults(func=cmd_converge)
    sp = sub.add_parser("audit", help="functional, entropy and jump-condition audits")
    common(sp)
    sp.add_argument("--pair", help="second scenario for the Lyapunov audit")
    sp.set_defaults(func=cmd_audit)
    return p


def main(argv=None):
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except ConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except TrackingError as exc:
        print(f"solver aborted: {exc}", file=sys.stderr)
        for ev in exc.events or []:
            print(f"  {ev}", file=sys.stderr)
        return EXIT_SOLVER
    except (SolverError, DomainError) as exc:
        # a kernel failure outside the tracker's own error wrapping
        print(f"solver aborted: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITION


if __name__ == "__main__":
    sys.exit(main())
