"""Command-line front end.

Every subcommand takes one config (a file path or the name of a shipped
preset), runs the corresponding battery, and prints the report.  The
exit code is the contract: 0 when every check passed, 1 when the run
completed with a failed check or a structural assertion fired while
building, 2 when the config itself could not be read.
"""
import argparse
import sys

from .graded import ConfigError, StructureError
from .report import emit_report, load_config, run_config


def _presets():
    from importlib.resources import files
    root = files("bvhiggs").joinpath("presets")
    out = {}
    if root.is_dir():
        for entry in root.iterdir():
            if entry.name.endswith(".yaml"):
                out[entry.name[:-len(".yaml")]] = entry
    return out

def resolve_config(name: str) -> str:
    """A real path wins; otherwise the name is looked up in the shipped
    presets."""
    import os
    if os.path.exists(name):
        return name
    got = _presets().get(name)
    if got is None:
        raise ConfigError(
            "no such config file or preset: %r (try 'presets list')"
            % (name,))
    return str(got)


def _add_run_flags(p):
    p.add_argument("config", help="config file or preset name")
    p.add_argument("--mode", choices=("rational", "float"), default=None,
                   help="override the numeric mode")
    p.add_argument("--tolerance", type=float, default=None,
                   help="override the float-mode threshold")
    p.add_argument("--seed", type=int, default=None,
                   help="override the sampling seed recorded in the report")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="report form (default text)")
    p.add_argument("--out", default=None,
                   help="write the report here instead of stdout")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bvhiggs",
        description="build finite symmetry-breaking models and verify "
                    "their homological identities")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "run the full check battery for the configured theory",
        "cohomology": "compute degreewise cohomology tables",
        "spectrum": "compute zero-momentum mass tables",
        "transfer": "run the bracket and homotopy-transfer battery",
        "gaugefix": "run the gauge-fixing family battery",
    }
    for name in ("verify", "cohomology", "spectrum", "transfer",
                 "gaugefix"):
        _add_run_flags(sub.add_parser(name, help=helps[name]))
    p = sub.add_parser("presets", help="manage shipped configurations")
    p.add_argument("action", choices=("list",))
    args = parser.parse_args(argv)

    if args.command == "presets":
        for name in sorted(_presets()):
            print(name)
        return 0

    try:
        cfg = load_config(resolve_config(args.config), task=args.command,
                          mode=args.mode, tolerance=args.tolerance,
                          seed=args.seed, out=args.out)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    try:
        report = run_config(cfg)
        text = emit_report(report, args.format)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except StructureError as e:
        print("structural check failed while building: %s" % e,
              file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
