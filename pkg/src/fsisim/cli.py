"""Command-line entry point ``fsisim``.

Exit codes: 0 success; 1 runtime or data error (including failed
compatibility); 2 usage or configuration error; 3 window underflow.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

from .config import parse_config
from .errors import FsiError, IncompatibleInitialData, ParseError, ValidationError, WindowUnderflow


def _write_csv(rows, stream) -> None:
    cols = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    writer = csv.DictWriter(stream, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})


def _cmd_run(args, cfg) -> int:
    from .coupling import run_simulation

    out = args.out or cfg.output.dir
    try:
        res = run_simulation(cfg, out_dir=out)
    except WindowUnderflow as exc:
        print(f"fsisim: window underflow: {exc}", file=sys.stderr)
        print(f"partial output in {out}", file=sys.stderr)
        return 3
    except IncompatibleInitialData as exc:
        print(f"fsisim: incompatible initial data: {exc}", file=sys.stderr)
        return 1
    last = res.rows[-1]
    print(f"finished t={last['t']:.6g}: {len(res.window_iterations)} windows, "
          f"{res.halvings} halvings, steady residual {last['steady_residual']:.3e}")
    print(f"output written to {out}")
    return 0


def _cmd_check(args, cfg) -> int:
    from .initial import build_initial
    from .sources import check_compatibility

    grid, params = cfg.make_grid(), cfg.phys_params()
    data = build_initial(cfg, grid, params)
    rep = check_compatibility(data.rho0, data.u0, data.eta1, params, grid, cfg.numerics.compat_tol)
    for line in rep.lines():
        print(line)
    # (b)1 is the boundary condition itself and gates the run; (b)2 is advisory
    print("velocity trace condition", "satisfied" if rep.b1_pass else "VIOLATED")
    return 0 if rep.b1_pass else 1


def _cmd_oracle(args, cfg) -> int:
    from . import oracles

    params = cfg.phys_params()
    if args.which == "source-terms":
        rows = oracles.transformation_table(params)
    elif args.which == "transport":
        rows = [{"test": "translation", **r} for r in oracles.translation_errors()]
        up = oracles.upwind_comparison()
        rows.append({"test": "upwind_16", **up})
    else:
        rows = oracles.dispersion_table(params)
    _write_csv(rows, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsisim",
                                description="Compressible flow under a damped periodic beam.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    run = sub.add_parser("run", help="run a simulation")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides [output] dir)")
    run.set_defaults(func=_cmd_run)

    chk = sub.add_parser("check-compat", help="check the initial data against the wall conditions")
    chk.add_argument("--config", required=True)
    chk.set_defaults(func=_cmd_check)

    orc = sub.add_parser("oracle", help="print a verification table as CSV")
    orc.add_argument("which", choices=("source-terms", "transport", "beam"))
    orc.add_argument("--config", required=True)
    orc.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config)
    except (ParseError, ValidationError) as exc:
        print(f"fsisim: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fsisim: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, cfg)
    except (FsiError, OSError, ValueError) as exc:
        print(f"fsisim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
