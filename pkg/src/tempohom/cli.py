"""Command-line interface: coefficient tables, single runs, convergence sweeps.

Exit codes: 0 success, 2 guard violation (dt too coarse for eta, or fast
carrier), 3 when `converge --check` finds a slope outside its acceptance band.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .blueprint import DEFAULT_M, parse_blueprint
from .cell import compute_coefficients, verify_identities
from .errors import GuardViolation, TempohomError
from .harness import (PacketParams, check_sweep_guards, convergence_study,
                      packet_init)
from .homogenize import make_bundle, normalize_order
from .spectral import ELECTRIC, MAGNETIC, dump_field, make_grid

DESK_ELLS = (10, 20, 40, 80)
PAPER_ELLS = (10, 20, 30, 40, 50, 60, 80, 100, 150, 200, 250, 300)

#: slope acceptance bands used by `converge --check`
CHECK_BANDS = {0: (0.7, 1.3), 1: (1.7, 2.3), 2: (2.6, 3.4),
               "macro2": (2.6, 3.4)}


def _cmd_coeffs(args):
    bp = parse_blueprint(args.blueprint)
    co = compute_coefficients(bp, args.grid)
    report = verify_identities(bp, args.grid)
    rows = [("eps_hom", co.eps_hom), ("eps_cor", co.eps_cor),
            ("chi0", co.chi0), ("theta0", co.theta0), ("kappa", co.kappa)]
    width = max(len(n) for n, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value: .17g}")
    print(f"degenerate: {co.degenerate}")
    print(report)
    if args.csv:
        lines = ["name,value"]
        lines += [f"{n},{v:.17g}" for n, v in rows]
        lines.append(f"degenerate,{int(co.degenerate)}")
        lines += [f"residual_{n},{v:.17g}"
                  for n, v in sorted(report.residuals.items())]
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return 0


def _cmd_run(args):
    bp = parse_blueprint(args.blueprint)
    case = args.case
    order = normalize_order(args.order)
    T = args.T
    dt = args.dt if args.dt is not None else T / 2 ** 11
    params = PacketParams(T0=args.T0, omega0=args.omega0)
    check_sweep_guards(params, args.eta, dt)
    grid = make_grid(args.N)
    v0, v1 = packet_init(params, grid)
    bundle = make_bundle(case, bp, args.eta, v0, v1, grid, T, dt,
                         with_macro2=(order == "macro2"))

    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    every = args.dump_every
    n_steps = round(T / dt)

    last = None
    for i, step in enumerate(bundle.iterate()):
        rec_hat = bundle.reconstruct_at(step, order)
        last = (step, rec_hat)
        if out is None or every is None or i % every:
            continue
        components = {"recon": rec_hat, "u0": step.u0, "ubar1": step.ubar1,
                      "ubar2": step.ubar2}
        if step.ucheck is not None:
            components["ucheck"] = step.ucheck
        for name, hat in components.items():
            dump_field(out / f"{name}_step{i:06d}.dat", grid,
                       grid.from_hat(hat), step.t)

    step, rec_hat = last
    print(f"t = {step.t:.17g}  order = {order}  "
          f"l2 = {grid.norm_l2(rec_hat):.17g}")
    if args.plot is not None:
        from . import plots
        path = args.plot if isinstance(args.plot, str) else None
        if path is None:
            path = (out / "snapshot.png") if out else "run_snapshot.png"
        fields = {f"order {order}": grid.from_hat(rec_hat),
                  "u0": grid.from_hat(step.u0)}
        plots.field_snapshot(grid, fields, step.t, path)
        print(f"wrote {path}")
    return 0


def _read_config(path):
    """Plain `key = value` lines; '#' starts a comment; keys use the same
    names as the long flags (dashes or underscores)."""
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TempohomError(f"bad config line {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _truthy(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _cmd_converge(args):
    cfg = _read_config(args.config) if args.config else {}

    def pick(name, builtin, convert=str):
        flag = getattr(args, name)
        if flag is not None:
            return flag
        if name in cfg:
            return convert(cfg[name])
        return builtin

    paper = pick("paper_scale", False, _truthy)
    case = pick("case", None)
    if case not in (ELECTRIC, MAGNETIC):
        raise TempohomError(f"--case must be electric or magnetic, got {case!r}")
    bp = parse_blueprint(pick("blueprint", "sine_inverse"))
    ells_txt = pick("ells", None)
    if ells_txt is None:
        ells = PAPER_ELLS if paper else DESK_ELLS
    else:
        ells = [int(v) for v in str(ells_txt).split(",") if v.strip()]
    orders_txt = pick("orders", "0,1,2,macro2")
    orders = [normalize_order(tok.strip())
              for tok in str(orders_txt).split(",") if tok.strip()]
    N = pick("N", 64, int)
    dt_frac = pick("dt_frac", 13 if paper else 11, int)
    T = pick("T", 0.4, float)
    workers = pick("workers", None, int)
    csv = pick("csv", None)
    params = PacketParams(T0=pick("T0", 0.1, float),
                          omega0=pick("omega0", 0.01, float))

    dt = T / 2 ** dt_frac
    etas = [T / ell for ell in ells]
    report = convergence_study(case, bp, params, etas, orders, N, dt, T,
                               workers=workers)
    print(report)
    if csv:
        report.to_csv(csv)
        print(f"wrote {csv}")
    if args.plot is not None:
        from . import plots
        path = args.plot if isinstance(args.plot, str) else None
        if path is None:
            path = str(Path(csv).with_suffix(".png")) if csv else "convergence.png"
        plots.convergence_figure(report, path)
        print(f"wrote {path}")

    if pick("check", False, _truthy):
        failed = False
        for order in orders:
            band = CHECK_BANDS.get(order)
            if band is None:
                continue
            slope = report.slopes[order]
            ok = slope is not None and band[0] <= slope <= band[1]
            failed |= not ok
            slope_txt = "n/a" if slope is None else f"{slope:.3f}"
            print(f"check order {order}: slope {slope_txt} in "
                  f"[{band[0]}, {band[1]}]: {'PASS' if ok else 'FAIL'}")
        if failed:
            return 3
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tempohom",
        description="Homogenization pipeline for waves in time-modulated media")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="effective coefficients and identity residuals")
    p.add_argument("--blueprint", required=True,
                   help="sine_inverse | cosine_inverse | constant:<c> | file:<path>")
    p.add_argument("--grid", type=int, default=DEFAULT_M,
                   help="cell grid size (power of two)")
    p.add_argument("--csv", help="also write name,value rows to this path")
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("run", help="solve one reconstruction and dump fields")
    p.add_argument("--case", required=True, choices=(ELECTRIC, MAGNETIC))
    p.add_argument("--blueprint", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--order", default="2",
                   help="0 | 1 | 2 | macro2 | bare1 | bare2")
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--dt", type=float, help="time step (default T/2^11)")
    p.add_argument("--T", type=float, default=0.4)
    p.add_argument("--T0", type=float, default=0.1, help="packet width")
    p.add_argument("--omega0", type=float, default=0.01, help="packet carrier")
    p.add_argument("--dump-every", type=int, help="dump every k-th step")
    p.add_argument("--out", help="directory for field dumps")
    p.add_argument("--plot", nargs="?", const=True, default=None,
                   help="write a final-time snapshot figure")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("converge", help="eta sweep with slope fitting")
    p.add_argument("--case", choices=(ELECTRIC, MAGNETIC))
    p.add_argument("--blueprint")
    p.add_argument("--ells", help="comma list of T/eta values, e.g. 10,20,40,80")
    p.add_argument("--orders", help="comma list from 0,1,2,macro2,bare1,bare2")
    p.add_argument("--N", type=int)
    p.add_argument("--dt-frac", type=int, dest="dt_frac",
                   help="dt = T / 2^dt_frac")
    p.add_argument("--T", type=float)
    p.add_argument("--T0", type=float)
    p.add_argument("--omega0", type=float)
    p.add_argument("--csv", help="write the report as delimited text")
    p.add_argument("--workers", type=int, help="process pool size")
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--paper-scale", dest="paper_scale", action="store_const",
                   const=True, help="full published sweep (finer dt, ell up to 300)")
    p.add_argument("--check", action="store_const", const=True,
                   help="verify slopes against acceptance bands (exit 3 on failure)")
    p.add_argument("--plot", nargs="?", const=True, default=None,
                   help="render the log-log error figure next to the CSV")
    p.set_defaults(func=_cmd_converge)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuardViolation as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return 2
    except TempohomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
