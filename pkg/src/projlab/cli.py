"""Command-line harness: run experiments, emit CSV, render companion figures.

Exit codes: 0 success, 2 configuration error, 3 admissibility or splitting
violation, 4 numerical failure.
"""

import argparse
import sys
from pathlib import Path

from . import __version__
from . import config as cf
from . import experiments as ex
from .errors import AdmissibilityError, ConfigError, NumericalError, SplittingError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ADMISSIBILITY = 3
EXIT_NUMERICAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projlab",
        description=(
            "Numerical experiments on Dirichlet-Laplacian spectral projections "
            "under planar domain perturbations"
        ),
    )
    parser.add_argument("--version", action="version", version=f"projlab {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    descriptions = {
        "census": "splitting census of the square cutoffs F_N",
        "perturb": "projection-difference sweep over a perturbation family",
        "kato": "contour projection vs direct spectral projection",
        "multiplier": "resolvent multiplier constant growth across windows",
        "lebesgue": "square vs ball partial-sum norm trends",
        "eigencont": "eigenvalue continuity along the bump family",
    }
    for name, help_text in descriptions.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, default=None, help="key=value file")
        cmd.add_argument(
            "--set",
            dest="sets",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (repeatable)",
        )
        cmd.add_argument("--out", type=Path, default=None, help="output CSV path")
        cmd.add_argument("--seed", type=int, default=None, help="override the seed")
        cmd.add_argument(
            "--no-plot",
            action="store_true",
            help="skip rendering the companion PNG figure",
        )
    return parser


def _collect_overrides(args) -> dict:
    overrides = {}
    for item in args.sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.out is not None:
        overrides["out"] = str(args.out)
    return overrides


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_pairs = cf.parse_config_file(args.config) if args.config else {}
        cfg = cf.build_config(file_pairs, _collect_overrides(args))
        result = ex.RUNNERS[args.experiment](cfg)
        out_csv = Path(cfg.out) if cfg.out else Path(f"{args.experiment}.csv")
        ex.write_csv(result, out_csv)
        print(f"wrote {out_csv}")
        if not args.no_plot:
            from . import plots

            out_png = plots.render_figure(result, out_csv.with_suffix(".png"))
            print(f"wrote {out_png}")
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AdmissibilityError, SplittingError) as exc:
        print(f"admissibility/splitting error: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
