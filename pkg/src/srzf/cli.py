"""Command line front end: ``srzf-sim {sumrate,prop2,check}``."""

import argparse
import sys
from importlib import resources

from .errors import ConfigError
from .harness import run_prop2_sweep, run_property_suite, run_sumrate_sweep, write_csv
from .precoding import SCHEMES


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _schemes(text):
    out = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in out if x not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown scheme(s) {', '.join(bad)}; choose from {', '.join(SCHEMES)}")
    return out


def _config_path(name):
    """A path, or the name of a bundled config such as ``desk``."""
    if name.endswith(".cfg") or "/" in name:
        return name
    return str(resources.files("srzf") / "configs" / f"{name}.cfg")


def build_parser():
    p = argparse.ArgumentParser(prog="srzf-sim", description="Multi-user MIMO precoding simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default="desk",
                        help="config file, or bundled name (desk, full, desk_prop2, full_prop2, degenerate)")
        sp.add_argument("--trials", type=int, help="override the config's trial count")
        sp.add_argument("--seed", type=int, help="override the config's seed")

    sp = sub.add_parser("sumrate", help="mean sum rate per scheme, power and CSI mode")
    common(sp)
    sp.add_argument("--schemes", type=_schemes, default=list(SCHEMES))
    sp.add_argument("--pt-dbm", type=_floats, help="transmit powers in dBm")
    sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sp.add_argument("--out", help="CSV path (default: stdout)")

    sp = sub.add_parser("prop2", help="extra interference caused by one user's CSI error")
    common(sp)
    sp.add_argument("--mu2", type=_floats, default=[1e-4, 1e-3, 1e-2])
    sp.add_argument("--user", type=int, default=1, help="1-based user index")
    sp.add_argument("--pt-dbm", type=_floats, help="transmit power in dBm (first value used)")
    sp.add_argument("--out", help="CSV path (default: stdout)")

    sp = sub.add_parser("check", help="run the structural self-checks")
    common(sp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _config_path(args.config)
    try:
        if args.command == "sumrate":
            res = run_sumrate_sweep(cfg, args.schemes, args.pt_dbm, args.trials, args.seed,
                                    workers=args.workers)
        elif args.command == "prop2":
            pt = args.pt_dbm[0] if args.pt_dbm else None
            res = run_prop2_sweep(cfg, args.user - 1, args.mu2, args.trials, args.seed, pt)
            bad = sum(res.extra["violations"].values())
            if bad:
                print(f"warning: {bad} per-pair bound violations", file=sys.stderr)
        else:
            rep = run_property_suite(cfg, trials=args.trials or 10, seed=args.seed)
            print("\n".join(rep.lines()))
            return 0 if rep.passed else 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (IndexError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.out:
        write_csv(res, args.out)
        print(f"{res.tag}: {len(res.rows)} rows, {res.trials} trials, "
              f"{res.wall_clock:.1f} s -> {args.out}", file=sys.stderr)
    else:
        write_csv(res, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
