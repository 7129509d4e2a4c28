import argparse
from typing import Any, Dict, List, Optional

from biharm_bench.criteria import CRITERIA
from biharm_bench.family import CATALOG


def _add_tolerance_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--tol-geometry",
        help="Tolerance of structure defects and consistency oracles",
        type=float,
    )
    parser.add_argument(
        "--tol-criteria", help="Tolerance of relative criterion residuals", type=float
    )
    parser.add_argument(
        "--tol-identities",
        help="Tolerance of the closed-form classification identities",
        type=float,
    )


def _add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--grid",
        help="Points per chart axis, one value for every axis or comma separated (i.e. 32,32)",
        type=str,
    )
    parser.add_argument("--workers", help="Number of worker threads", type=int)


def _parse_grid(raw: Optional[str]) -> Optional[List[int]]:
    if raw is None:
        return None
    return [int(x) for x in raw.split(",") if x.strip()]


def get_cmd_line_parser(argv: Optional[List[str]] = None) -> Dict[str, Any]:
    parser = argparse.ArgumentParser(
        description="Numerical verification of biharmonic Lagrangian submanifolds"
    )
    parser.add_argument(
        "-v", "--verbose", help="Log per point evaluations", action="store_true"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Grid verification of one immersion.
    verify = subparsers.add_parser("verify", help="Sweep a grid and evaluate the criteria")
    verify.add_argument("--config", help="YAML run configuration", type=str)
    verify.add_argument(
        "-i",
        "--immersion",
        help=f"Catalog key ({', '.join(sorted(CATALOG))}) or module:builder",
        type=str,
    )
    verify.add_argument("--m", help="Dimension of the submanifold", type=int)
    verify.add_argument("--mu-root", help="Index of the mu root (0-3)", type=int)
    verify.add_argument("--mu", help="Explicit mu, overrides --mu-root", type=float)
    _add_grid_arguments(verify)
    _add_tolerance_arguments(verify)
    verify.add_argument(
        "--criteria",
        help=f"Comma separated subset of {','.join(CRITERIA)}",
        type=str,
    )
    verify.add_argument("-o", "--out", help="Report path", type=str)
    verify.add_argument("--format", help="Report format", choices=["json", "csv"])
    verify.add_argument("--seed", help="Seed of the randomized frame gauge", type=int)
    verify.add_argument(
        "--wandb-mode",
        help="Run tracking mode",
        choices=["disabled", "offline", "online"],
    )

    # Closed-form scan over the family.
    scan = subparsers.add_parser("scan", help="Tabulate the family over m and mu roots")
    scan.add_argument("--m-min", help="Smallest m", default=2, type=int)
    scan.add_argument("--m-max", help="Largest m", default=10, type=int)
    scan.add_argument(
        "--verify", help="Also run the grid verification per member", action="store_true"
    )
    _add_grid_arguments(scan)
    _add_tolerance_arguments(scan)
    scan.add_argument("-o", "--out", help="CSV path", type=str)

    # Legendre curve integration.
    legendre = subparsers.add_parser("legendre", help="Solve a Legendre curve and export diagnostics")
    legendre.add_argument(
        "--profile",
        help="Lambda profile: constant Chen profile or 0.5 + 0.3 sin x",
        choices=["chen", "generic"],
        default="chen",
    )
    legendre.add_argument("--m", help="Dimension selecting the mu roots", default=2, type=int)
    legendre.add_argument("--mu-root", help="Index of the mu root (0-3)", default=0, type=int)
    legendre.add_argument("--mu", help="Explicit mu, overrides --mu-root", type=float)
    legendre.add_argument("--step", help="RK4 step", default=1e-3, type=float)
    legendre.add_argument("-o", "--out", help="Diagnostics CSV path", type=str)

    subparsers.add_parser("catalog", help="List the built-in immersions")

    arguments = vars(parser.parse_args(argv))

    if arguments["command"] in ("verify", "scan"):
        arguments["grid"] = _parse_grid(arguments["grid"])
        arguments["tolerances"] = {
            "geometry": arguments.pop("tol_geometry"),
            "criteria": arguments.pop("tol_criteria"),
            "identities": arguments.pop("tol_identities"),
        }

    # Flags that were given override the config file.
    if arguments["command"] == "verify":
        if arguments["criteria"] is not None:
            arguments["criteria"] = [x.strip() for x in arguments["criteria"].split(",")]
        arguments["overrides"] = {
            key: arguments[key]
            for key in (
                "immersion",
                "m",
                "mu_root",
                "mu",
                "grid",
                "tolerances",
                "criteria",
                "out",
                "format",
                "workers",
                "seed",
                "wandb_mode",
            )
        }

    return arguments
