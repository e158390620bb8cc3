"""
Command-line interface for mkpoly.

Examples:
    mk compute --n 1 --lambda 2 --params 0.3,-0.2,0.5,-0.4,0.6,0.5
    mk gram --n 2 --max-deg 3 --params 0.3,-0.2,0.5,-0.4,0.6,0.5 --format csv -o gram.csv
    mk aw-verify --q 0.5 --sigma 0.3 --tau 0.7 --k1 2 --k2 -1 --max-mu 4
    mk rosengren --m 4 --sigma 0.7
    mk spectrum --m 5 --sigma 0.3
"""
import argparse
import contextlib
import logging
import sys
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

from .koornwinder import SphericalLabels
from .main import (
    run_aw_verify,
    run_compute,
    run_gram,
    run_groundstate,
    run_rosengren,
    run_spectrum,
)
from .precision import DEFAULT_HP_BITS, Precision, hp_context
from .qseries import TruncationPolicy
from .report import build_report, dumps_report, gram_csv, write_text
from .torus_measure import MKParams, validate_params

DEFAULT_THRESHOLDS = {
    "compute": 1e-10,
    "gram": 1e-10,
    "groundstate": 1e-11,
    "aw-verify": 1e-9,
    "rosengren": 1e-11,
    "spectrum": 1e-10,
}


class UsageError(ValueError):
    """A flag value that is well-formed for argparse but invalid for the computation."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    precision: str = "f64"
    hp_bits: int = DEFAULT_HP_BITS
    threshold: float = 1e-9
    output_path: Optional[str] = None
    format: str = "json"
    quiet: bool = False
    n: Optional[int] = None
    lam: Optional[Tuple[int, ...]] = None
    params: Optional[MKParams] = None
    labels: Optional[SphericalLabels] = None
    max_deg: Optional[int] = None
    max_mu: Optional[int] = None
    m: Optional[int] = None
    sigma: Optional[float] = None
    q: Optional[float] = None
    grid: Optional[int] = None
    auto_grid_tol: float = 1e-10
    trunc_eps: float = 1e-16
    max_terms: int = 10_000
    workers: Optional[int] = None

    # where and how the report is written does not change its content
    OUTPUT_FIELDS = frozenset({"output_path", "format", "quiet"})

    def as_dict(self) -> dict:
        data = {
            key: value for key, value in asdict(self).items()
            if value is not None and key not in self.OUTPUT_FIELDS
        }
        if self.params is not None:
            data["params"] = self.params.as_dict()
        if self.labels is not None:
            data["labels"] = self.labels.as_dict()
        if self.lam is not None:
            data["lam"] = list(self.lam)
        return data

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.trunc_eps, self.max_terms)


def _int_tuple(text: str, name: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"{name} expects comma-separated integers, got {text!r}") from None


def _float_tuple(text: str, name: str, count: int) -> Tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"{name} expects comma-separated numbers, got {text!r}") from None
    if len(values) != count:
        raise UsageError(f"{name} expects {count} values, got {len(values)}")
    return values


def parse_params(text: str) -> MKParams:
    """``a,b,c,d,t,q`` into validated Koornwinder parameters."""
    a, b, c, d, t, q = _float_tuple(text, "--params", 6)
    params = MKParams(a, b, c, d, t, q)
    if not validate_params(params):
        raise UsageError(f"--params outside |a|,|b|,|c|,|d| < 1, 0 < t < 1: {text}")
    return params


def parse_labels(text: str) -> SphericalLabels:
    """``n,k1,k2,k,sigma,tau,q`` into spherical labels."""
    parts = text.split(",")
    if len(parts) != 7:
        raise UsageError(f"--labels expects 7 values n,k1,k2,k,sigma,tau,q, got {len(parts)}")
    n, k1, k2, k = _int_tuple(",".join(parts[:4]), "--labels")
    sigma, tau, q = _float_tuple(",".join(parts[4:]), "--labels", 3)
    return SphericalLabels(n, k1, k2, k, sigma, tau, q)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--precision", choices=("f64", "hp"), default="f64",
        help="f64: numpy double precision. hp: mpmath at --hp-bits (default: f64).",
    )
    parser.add_argument(
        "--hp-bits", type=int, default=DEFAULT_HP_BITS,
        help=f"Mantissa bits for --precision hp (default: {DEFAULT_HP_BITS}).",
    )
    parser.add_argument(
        "--threshold", type=float, default=None,
        help="Residual threshold for the pass/fail verdict (default depends on the command).",
    )
    parser.add_argument("-o", "--output", default=None, help="Report file (default: stdout).")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json",
        help="Report format; csv is available for gram only (default: json).",
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="Suppress the summary line.")
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level.")
    parser.add_argument("--debug", action="store_true", help="Log details at DEBUG level.")


def _add_measure(parser: argparse.ArgumentParser) -> None:
    grid = parser.add_mutually_exclusive_group()
    grid.add_argument("--grid", type=int, default=None, metavar="M", help="Quadrature points per circle.")
    grid.add_argument(
        "--auto-grid", action="store_true",
        help="Refine the grid until the Gram matrix settles (the default when --grid is absent).",
    )
    parser.add_argument(
        "--auto-grid-tol", type=float, default=1e-10,
        help="Relative change accepted by --auto-grid (default: 1e-10).",
    )
    parser.add_argument(
        "--trunc-eps", type=float, default=1e-16,
        help="Tail bound for truncated infinite q-Pochhammer products (default: 1e-16).",
    )
    parser.add_argument(
        "--max-terms", type=int, default=10_000,
        help="Hard cap on factors in a truncated product (default: 10000).",
    )


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mk",
        description="Macdonald-Koornwinder polynomials by torus quadrature, "
                    "and their rank-one construction as quantum spherical functions.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    compute = commands.add_parser("compute", help="Compute one monic polynomial P_lambda.")
    compute.add_argument("--n", type=int, required=True, help="Number of variables.")
    compute.add_argument("--lambda", dest="lam", required=True, help='Partition, e.g. "2,1".')
    compute.add_argument("--params", required=True, help="a,b,c,d,t,q")
    compute.add_argument("--workers", type=int, default=None, help="Processes for the weight evaluation.")
    _add_measure(compute)
    _add_common(compute)

    gram = commands.add_parser("gram", help="Orthogonality residuals of all P_lambda up to a degree.")
    gram.add_argument("--n", type=int, default=1, help="Number of variables (default: 1).")
    gram.add_argument("--max-deg", type=int, required=True, help="Largest |lambda|.")
    gram.add_argument("--params", required=True, help="a,b,c,d,t,q")
    gram.add_argument("--workers", type=int, default=None, help="Processes for the weight evaluation.")
    _add_measure(gram)
    _add_common(gram)

    ground = commands.add_parser("groundstate", help="Closed-form ground state restricted to the torus.")
    ground.add_argument("--labels", required=True, help="n,k1,k2,k,sigma,tau,q")
    _add_common(ground)

    verify = commands.add_parser("aw-verify", help="Rank-one check f_mu = P_mu * f_0 on the torus.")
    verify.add_argument("--q", type=float, required=True)
    verify.add_argument("--sigma", type=float, required=True)
    verify.add_argument("--tau", type=float, required=True)
    verify.add_argument("--k1", type=int, required=True, help="kappa1 >= 0.")
    verify.add_argument("--k2", type=int, required=True, help="-kappa1 <= kappa2 <= kappa1.")
    verify.add_argument("--kappa", type=int, default=0, help="kappa (inert at rank one, default: 0).")
    verify.add_argument("--max-mu", type=int, required=True)
    _add_measure(verify)
    _add_common(verify)

    rosengren = commands.add_parser("rosengren", help="Conjugation residual of x_sigma on L_(m,-m).")
    rosengren.add_argument("--m", type=int, required=True)
    rosengren.add_argument("--sigma", type=float, required=True)
    rosengren.add_argument("--q", type=float, default=0.5, help="Deformation parameter (default: 0.5).")
    _add_common(rosengren)

    spectrum = commands.add_parser("spectrum", help="Eigenvalues of B^sigma on L_(m,-m) against s_l.")
    spectrum.add_argument("--m", type=int, required=True)
    spectrum.add_argument("--sigma", type=float, required=True)
    spectrum.add_argument("--q", type=float, default=0.5, help="Deformation parameter (default: 0.5).")
    _add_common(spectrum)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validate parsed flags into a RunConfig. Raises ValueError on bad values."""
    command = args.command
    if args.format == "csv" and command != "gram":
        raise UsageError("--format csv is only available for gram")
    if args.hp_bits < 53:
        raise UsageError("--hp-bits must be at least 53")
    values = {
        "command": command,
        "precision": args.precision,
        "hp_bits": args.hp_bits,
        "threshold": args.threshold if args.threshold is not None else DEFAULT_THRESHOLDS[command],
        "output_path": args.output,
        "format": args.format,
        "quiet": args.quiet,
    }
    if hasattr(args, "trunc_eps"):
        if args.grid is not None and args.grid < 4:
            raise UsageError("--grid must be at least 4")
        TruncationPolicy(args.trunc_eps, args.max_terms)
        values.update(grid=args.grid, auto_grid_tol=args.auto_grid_tol, trunc_eps=args.trunc_eps,
                      max_terms=args.max_terms)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        raise UsageError("--workers must be positive")

    if command in ("compute", "gram"):
        if args.n < 1:
            raise UsageError("--n must be positive")
        values.update(n=args.n, params=parse_params(args.params), workers=args.workers)
    if command == "compute":
        values["lam"] = _int_tuple(args.lam, "--lambda")
    elif command == "gram":
        if args.max_deg < 0:
            raise UsageError("--max-deg must be nonnegative")
        values["max_deg"] = args.max_deg
    elif command == "groundstate":
        values["labels"] = parse_labels(args.labels)
    elif command == "aw-verify":
        if args.max_mu < 0:
            raise UsageError("--max-mu must be nonnegative")
        labels = SphericalLabels(1, args.k1, args.k2, args.kappa, args.sigma, args.tau, args.q)
        values.update(labels=labels, max_mu=args.max_mu)
    elif command in ("rosengren", "spectrum"):
        if args.m < 0:
            raise UsageError("--m must be nonnegative")
        if not 0 < args.q < 1:
            raise UsageError("--q must lie in (0, 1)")
        values.update(m=args.m, sigma=args.sigma, q=args.q)
    return RunConfig(**values)


def _dispatch(config: RunConfig):
    precision = Precision(config.precision)
    if config.command == "compute":
        return run_compute(config.n, config.lam, config.params, config.grid, config.auto_grid_tol,
                           config.policy, precision, config.workers, config.threshold)
    if config.command == "gram":
        return run_gram(config.n, config.max_deg, config.params, config.grid, config.auto_grid_tol,
                        config.policy, precision, config.workers, config.threshold)
    if config.command == "groundstate":
        return run_groundstate(config.labels, config.threshold, precision)
    if config.command == "aw-verify":
        return run_aw_verify(config.labels, config.max_mu, config.grid, config.policy, precision,
                             config.threshold)
    if config.command == "rosengren":
        return run_rosengren(config.m, config.sigma, config.q, precision, config.threshold)
    return run_spectrum(config.m, config.sigma, config.q, config.threshold, precision)


def run(config: RunConfig) -> int:
    """Run one command and write its report. Returns the exit status, never raises."""
    provenance = config.as_dict()
    precision_scope = hp_context(config.hp_bits) if config.precision == "hp" else contextlib.nullcontext()
    try:
        with precision_scope:
            outcome = _dispatch(config)
    except Exception as exc:
        # Computational failures are reported, not raised.
        print(f"error: {config.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        if config.format == "json":
            write_text(dumps_report(build_report(config.command, provenance, error=exc)), config.output_path)
        return 1

    if config.format == "csv":
        text = gram_csv(outcome.result["labels"], outcome.result["residuals"])
    else:
        text = dumps_report(build_report(config.command, provenance, outcome.result, outcome.passed))
    write_text(text, config.output_path)

    if config.output_path is not None and not config.quiet:
        print(f"--- {config.command} ---")
        print(outcome.summary)
    return 0 if outcome.passed else 1


def _configure_logging(args: argparse.Namespace) -> None:
    if args.debug:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    else:
        return
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_arg_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    _configure_logging(args)
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
