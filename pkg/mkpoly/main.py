"""
Pipelines behind the command-line subcommands.

Each ``run_*`` function performs one computation and returns a ``RunResult``
holding the JSON-ready result payload, the pass/fail verdict against the
given threshold and a short human-readable summary.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .koornwinder import (
    SphericalLabels,
    delta_partition,
    ground_state_restriction,
    mk_family,
    mk_polynomial,
    spherical_parameter_map,
)
from .precision import Precision
from .qseries import TruncationPolicy
from .rankone import (
    branching_check,
    build_module,
    explicit_b_eigenvalue,
    relation_residuals,
    rosengren_residuals,
    s_value,
    spectrum_table,
    spherical_restriction,
    unitarity_residuals,
    verify_theorem_i_rank1,
    verify_theorem_iii_rank1,
)
from .symlaurent import as_partition, is_w_invariant, projective_residual
from .torus_measure import MKParams, QuadratureGrid, TorusMeasure, auto_grid

DEFAULT_AUTO_GRID_TOL = 1e-10


@dataclass
class RunResult:
    result: dict
    passed: bool
    summary: str


def _grid(max_degree: int, params: MKParams, rank: int, grid_points: Optional[int], auto_tol: float,
          policy: TruncationPolicy) -> QuadratureGrid:
    if grid_points is not None:
        return QuadratureGrid(grid_points, rank)
    return auto_grid(max_degree, params, tol=auto_tol, rank=rank, policy=policy)


def _label_key(label: Sequence[int]) -> str:
    return ",".join(str(v) for v in label)


def run_compute(n: int, lam: Sequence[int], params: MKParams, grid_points: Optional[int] = None,
                auto_tol: float = DEFAULT_AUTO_GRID_TOL, policy: Optional[TruncationPolicy] = None,
                precision: Precision = Precision.F64, workers: Optional[int] = None,
                threshold: float = 1e-10) -> RunResult:
    lam = as_partition(lam)
    if len(lam) != n:
        raise ValueError(f"--lambda has {len(lam)} entries but --n is {n}")
    policy = policy or TruncationPolicy()
    grid = _grid(sum(lam), params, n, grid_points, auto_tol, policy)
    measure = TorusMeasure(params, grid, policy, max_workers=workers)
    poly = mk_polynomial(lam, params, measure=measure, precision=precision)
    scale = float(poly.poly.max_abs_coefficient())
    invariant = is_w_invariant(poly.poly, tol=threshold * scale)
    result = {
        "label": list(lam),
        "params": params.as_dict(),
        "grid": grid.points_per_circle,
        "polynomial": poly.poly,
        "orbit_coefficients": {_label_key(mu): value for mu, value in sorted(poly.coefficients.items())},
        "gram_diag": poly.gram_diag,
        "condition": poly.condition,
        "w_invariant": invariant,
    }
    summary = (
        f"P_{list(lam)}: {len(poly.coefficients) + 1} orbit sums, <P,P> = {poly.gram_diag:.6g}, "
        f"grid M = {grid.points_per_circle}"
    )
    return RunResult(result, invariant, summary)


def run_gram(n: int, max_deg: int, params: MKParams, grid_points: Optional[int] = None,
             auto_tol: float = DEFAULT_AUTO_GRID_TOL, policy: Optional[TruncationPolicy] = None,
             precision: Precision = Precision.F64, workers: Optional[int] = None,
             threshold: float = 1e-10) -> RunResult:
    policy = policy or TruncationPolicy()
    grid = _grid(max_deg, params, n, grid_points, auto_tol, policy)
    measure = TorusMeasure(params, grid, policy, max_workers=workers)
    family = mk_family(max_deg, params, rank=n, measure=measure, precision=precision)
    index = {label: i for i, label in enumerate(family.labels)}
    incomparable = [
        {"pair": [list(a), list(b)], "residual": float(family.residuals[index[a], index[b]])}
        for a, b in family.incomparable_pairs
    ]
    passed = family.max_offdiag < threshold
    result = {
        "params": params.as_dict(),
        "grid": grid.points_per_circle,
        "labels": [list(label) for label in family.labels],
        "residuals": family.residuals,
        "max_offdiag": family.max_offdiag,
        "incomparable_pairs": incomparable,
    }
    summary = (
        f"{len(family.labels)} polynomials up to degree {max_deg}, "
        f"max normalised off-diagonal {family.max_offdiag:.3e} ({'pass' if passed else 'FAIL'})"
    )
    return RunResult(result, passed, summary)


def run_groundstate(labels: SphericalLabels, threshold: float = 1e-11,
                    precision: Precision = Precision.F64) -> RunResult:
    poly = ground_state_restriction(labels, precision)
    delta = delta_partition(labels.kappa, labels.kappa1, labels.n)
    top = poly.coefficient(delta)
    bottom = poly.coefficient(tuple(-v for v in delta))
    passed = top != 0 and bottom != 0
    result = {
        "labels": labels.as_dict(),
        "delta": list(delta),
        "polynomial": poly,
        "extreme_coefficients": [top, bottom],
    }
    if labels.n == 1:
        restricted = spherical_restriction(0, labels, precision).poly
        scale, residual = projective_residual(restricted, poly)
        result["restriction_residual"] = residual
        result["restriction_scale"] = scale
        passed = passed and residual < threshold
    summary = f"ground state with {len(poly)} terms, delta = {list(delta)}"
    if "restriction_residual" in result:
        summary += f", matrix-coefficient residual {result['restriction_residual']:.3e}"
    return RunResult(result, passed, summary)


def run_aw_verify(labels: SphericalLabels, max_mu: int, grid_points: Optional[int] = None,
                  policy: Optional[TruncationPolicy] = None, precision: Precision = Precision.F64,
                  threshold: float = 1e-9) -> RunResult:
    if labels.n != 1:
        raise ValueError("aw-verify runs at rank one (n = 1)")
    grid = QuadratureGrid(grid_points, 1) if grid_points is not None else None
    rows: List[dict] = []
    for mu in range(max_mu + 1):
        check = verify_theorem_iii_rank1(mu, labels, grid=grid, policy=policy, precision=precision)
        division = verify_theorem_i_rank1(mu, labels, precision=precision)
        rows.append({
            "mu": mu,
            "route": check.route,
            "grid": check.grid_points,
            "scale": check.scale,
            "residual": check.residual,
            "divisibility_remainder": division["remainder"],
            "quotient_degree": division["quotient_degree"],
            "quotient_symmetric": division["quotient_symmetric"],
            "passed": check.residual < threshold and division["remainder"] < threshold,
        })
    ground = ground_state_restriction(labels)
    _, ground_residual = projective_residual(spherical_restriction(0, labels, precision).poly, ground)
    explicit = explicit_b_eigenvalue(labels.kappa, labels.kappa1, labels.kappa, labels.tau, labels.q)
    expected = s_value(-labels.kappa1, labels.tau, labels.q)
    theta_gap = abs(explicit - expected) / max(1.0, abs(expected))
    passed = all(row["passed"] for row in rows) and ground_residual < threshold and theta_gap < threshold
    result = {
        "labels": labels.as_dict(),
        "params": spherical_parameter_map(labels).as_dict(),
        "per_mu": rows,
        "ground_state_residual": ground_residual,
        "theta_consistency": theta_gap,
        "threshold": threshold,
    }
    worst = max(row["residual"] for row in rows)
    summary = (
        f"mu = 0..{max_mu}: worst residual {worst:.3e} via {rows[-1]['route']}, "
        f"ground state {ground_residual:.3e} ({'pass' if passed else 'FAIL'})"
    )
    return RunResult(result, passed, summary)


def run_rosengren(m: int, sigma: float, q: float, precision: Precision = Precision.F64,
                  threshold: float = 1e-11) -> RunResult:
    module = build_module(m, q, precision)
    residuals = rosengren_residuals(module, sigma)
    passed = residuals["conjugation"] < threshold
    result = {
        "m": m,
        "sigma": sigma,
        "q": q,
        "conjugation_residual": residuals["conjugation"],
        "intertwining_residual": residuals["intertwining"],
        "relations": relation_residuals(module),
        "unitarity": unitarity_residuals(module),
    }
    summary = (
        f"L_({m},{-m}): |x B x^-1 - Bhat| = {float(residuals['conjugation']):.3e} "
        f"({'pass' if passed else 'FAIL'})"
    )
    return RunResult(result, passed, summary)


def run_spectrum(m: int, sigma: float, q: float, threshold: float = 1e-10,
                 precision: Precision = Precision.F64) -> RunResult:
    table = spectrum_table(m, sigma, q, precision)
    eigenvalues = [row["eigenvalue"] for row in table]
    simple = all(b > a for a, b in zip(eigenvalues, eigenvalues[1:]))
    branching = {str(k2): branching_check(m, sigma, k2, q, precision) for k2 in range(-m - 1, m + 2)}
    expected_branching = all(count == (1 if abs(int(k2)) <= m else 0) for k2, count in branching.items())
    worst = max(row["error"] for row in table)
    passed = worst < threshold and simple and expected_branching
    result = {
        "m": m,
        "sigma": sigma,
        "q": q,
        "table": table,
        "simple": simple,
        "branching": branching,
    }
    summary = f"{len(table)} eigenvalues, worst absolute error {worst:.3e} ({'pass' if passed else 'FAIL'})"
    return RunResult(result, passed, summary)
