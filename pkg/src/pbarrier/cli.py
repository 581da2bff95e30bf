"""Command-line interface for pbarrier experiments.

Commands:

    pbarrier verify-barrier --family petrovskii --p 3 --n 1 --alpha 1 --K 1 --j auto
    pbarrier calibrate --family north_pole --p 3 --l 4 --k 2
    pbarrier probe --domain petrovskii --p 3 --point origin-final
    pbarrier scaling --p 3 --a-mult 8
    pbarrier comparison --p 3 --pairs 20

Every command accepts --config <file.json>; flags override the file.
Exit codes: 0 pass, 1 verification failed, 2 bad parameters, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable

from pydantic import ValidationError

from pbarrier.barriers.specs import FAMILY_KINDS, FamilySpec, build_family
from pbarrier.barriers.validation import validate_family
from pbarrier.config import (
    ExperimentConfig,
    build_config,
    merge_overrides,
    read_config_file,
    resolve_output_dir,
    spec_fields,
)
from pbarrier.core.errors import NumericalAbort, ParameterError, PBarrierError
from pbarrier.core.family import BarrierFamily
from pbarrier.exporter import (
    export_cert_points,
    export_csv,
    export_grid_solution,
    export_json,
    export_mask,
)
from pbarrier.geometry.domains import (
    DOMAIN_KINDS,
    DomainGeometry,
    DomainSpec,
    make_domain,
    parse_domain_spec,
    suggest,
)
from pbarrier.geometry.mask import SpaceTimeMask, rasterize
from pbarrier.residual.certify import certify
from pbarrier.run_log import RunLogger
from pbarrier.solver.checks import check_comparison, check_scaling_identity, smooth_bump_pair
from pbarrier.solver.grid import GridSolution
from pbarrier.solver.marching import cylinder_mask, suggested_levels
from pbarrier.solver.probes import PROBE_POINTS, probe_point, regularity_probe

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_BAD_PARAMETERS = 2
EXIT_NUMERICAL_ABORT = 3

GAUGE_LEVELS = (1, 2, 4, 8)
VALIDATION_SAMPLES = 2000

# cylinder (0, 1) × (0, 0.05): short enough that the explicit runs stay cheap
DEFAULT_SOLVER_DOMAIN = {"kind": "cylinder", "lower": [0.0], "upper": [1.0], "T": 0.05}

# flags shared by family and domain specs; each is routed to whichever spec declares it
SPEC_FLAGS = (
    "alpha",
    "K",
    "gamma",
    "theta",
    "l",
    "k",
    "radius",
    "orientation",
    "center",
    "diam_theta",
    "C",
    "t1",
    "t2",
    "shrink",
    "T",
    "lower",
    "upper",
    "r",
    "v",
    "R",
    "x0",
)


def _banner(title: str) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from e


def _index(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--j takes 'auto' or an integer, got '{text}'") from e


# -- config assembly -------------------------------------------------------


def _spec_from_flags(
    current: dict[str, Any] | None,
    kind: str | None,
    union: Any,
    kinds: tuple[str, ...],
    args: argparse.Namespace,
    params: dict[str, Any],
    what: str,
) -> dict[str, Any] | None:
    """Overlay the spec flags that the spec of kind declares on current."""
    kind = kind or (current or {}).get("kind")
    if kind is None:
        return current
    if kind not in kinds:
        raise ParameterError(f"unknown {what} '{kind}'{suggest(kind, kinds)}")
    spec = dict(current) if current and current.get("kind") == kind else {"kind": kind}
    fields = spec_fields(union, kind)
    for name in SPEC_FLAGS:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name in fields:
            spec[name] = value
    # domains parametrised by the equation follow the run's p and n
    for name in ("p", "n"):
        if name in fields and name not in spec and name in params:
            spec[name] = params[name]
    return spec


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Read --config when given and apply the command-line overrides.

    Raises:
        ParameterError: If the merged config is invalid
    """
    data = read_config_file(args.config) if args.config else {}
    overrides: dict[str, Any] = {
        "command": args.command,
        "params": {"p": args.p, "n": args.n, "a": args.a},
        "output_dir": args.output_dir,
    }
    if args.command in ("verify-barrier", "calibrate"):
        overrides["j"] = args.j
        overrides["ladder"] = True if args.ladder else None
    if args.command == "verify-barrier":
        overrides["run_validation"] = True if args.validate else None
        overrides["sampling"] = {
            "samples": args.samples,
            "seed": args.seed,
            "tol": args.tol,
            "step": args.step,
            "floor": args.floor,
            "per_point": True if args.per_point else None,
            "sense": args.sense,
            "workers": args.workers,
        }
    if args.command in ("probe", "scaling", "comparison"):
        overrides["grid"] = {"h": args.h, "levels": args.levels, "level_factor": args.level_factor}
        overrides["sampling"] = {"seed": getattr(args, "seed", None)}
    if args.command == "probe":
        overrides["probe"] = {
            "point": args.point,
            "refinements": args.refinements,
            "r_max": args.r_max,
            "alpha": args.datum_alpha,
            "workers": args.workers,
            "expect": args.expect,
            "export_grid": True if args.export_grid else None,
        }
        if args.target is not None:
            if len(args.target) < 2:
                raise ParameterError("--target needs x_0,...,x_{n-1},t")
            overrides["probe"]["target"] = {"x": args.target[:-1], "t": args.target[-1]}
    if args.command == "scaling":
        overrides["scaling"] = {"a": args.a_mult, "tol": args.tol}
    if args.command == "comparison":
        overrides["comparison"] = {"pairs": args.pairs, "bumps": args.bumps, "tol": args.tol}

    merged = merge_overrides(data, overrides)
    params = merged.get("params", {})
    if args.command in ("verify-barrier", "calibrate"):
        merged["family"] = _spec_from_flags(
            merged.get("family"), args.family, FamilySpec, FAMILY_KINDS, args, params, "family"
        )
        if merged["family"] is None:
            raise ParameterError("no family given; use --family or a config file")
    else:
        merged["domain"] = _spec_from_flags(
            merged.get("domain"), args.domain, DomainSpec, DOMAIN_KINDS, args, params, "domain kind"
        )
    return build_config(merged)


# -- shared helpers --------------------------------------------------------


def _indices(config: ExperimentConfig, family: BarrierFamily) -> list[int]:
    if config.ladder:
        return family.ladder()
    if config.j == "auto":
        logger.info(f"{family.name}: j auto resolved to j_min = {family.j_min}")
        return [family.j_min]
    return [int(config.j)]


def _solver_domain(config: ExperimentConfig) -> tuple[Any, DomainGeometry]:
    spec = config.domain
    if spec is None:
        spec = parse_domain_spec(DEFAULT_SOLVER_DOMAIN)
    return spec, make_domain(spec)


def _solver_mask(config: ExperimentConfig, spec: Any, domain: DomainGeometry) -> SpaceTimeMask:
    """Node-aligned cylinder mask for plain 1-D cylinders, rasterization otherwise."""
    grid = config.grid
    t_lo, t_hi = domain.bbox.t_range
    levels = grid.levels or suggested_levels(t_hi - t_lo, grid.h, grid.level_factor)
    if spec.kind == "cylinder" and domain.n == 1 and not spec.halfspaces:
        return cylinder_mask((spec.lower[0], spec.upper[0]), spec.T, grid.h, levels=levels)
    return rasterize(domain, grid.h, levels, align=grid.align)


# -- commands --------------------------------------------------------------


def verify_barrier_command(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Certify family members and export one report per index."""
    params = config.params
    family = build_family(config.family, params)
    sense = config.sense_code(family.sense)
    sampling = config.sampling
    output_dir = config.resolved_output_dir()
    checksum = config.config_checksum()
    paths: list[Path] = []
    failed = False

    _banner(f"Certifying {family.name} (p={params.p}, n={params.n}, a={params.a}) as {sense}")
    for j in _indices(config, family):
        field = family.member(j)
        report = certify(
            field,
            params,
            family.domain,
            samples=sampling.samples,
            seed=sampling.seed,
            tol=sampling.tol,
            step=sampling.step,
            sense=sense,
            floor=sampling.floor,
            per_point=sampling.per_point,
            workers=sampling.workers,
        )
        body: dict[str, Any] = {
            "command": "verify-barrier",
            "family": family.name,
            "params": params,
            "j": j,
            "j_rule": "explicit" if config.j != "auto" and not config.ladder else "auto",
            "calibration": family.calibration(j),
            "certification": report.model_dump(exclude={"records"}),
        }
        if config.run_validation:
            validation = validate_family(
                family, j, samples=min(sampling.samples, VALIDATION_SAMPLES), seed=sampling.seed
            )
            body["validation"] = validation
            if validation.overall_status == "FAIL":
                failed = True
            print(f"  validation j={j}: {validation.overall_status}")

        stem = f"verify_{family.name}_j{j}"
        paths.append(export_json(body, output_dir / f"{stem}.json", checksum))
        if sampling.per_point:
            paths.append(
                export_cert_points(report, params.n, output_dir / f"{stem}_points.csv", checksum)
            )

        status = "PASS" if report.passed else "FAIL"
        failed = failed or not report.passed
        print(f"\n  j={j}: {status}")
        print(f"    Points sampled: {report.points_sampled}")
        print(f"    Violations: {report.violations}")
        print(f"    Excluded (degenerate): {report.excluded_degenerate} ({report.excluded_fraction:.2%})")
        if report.min_residual is not None:
            print(f"    Residual range: [{report.min_residual:.3e}, {report.max_residual:.3e}]")

    print(f"\n[OK] Reports saved to: {output_dir}")
    return (EXIT_FAILED if failed else EXIT_PASS), paths


def calibrate_command(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Print and export the calibration constants without certifying."""
    params = config.params
    family = build_family(config.family, params)
    indices = _indices(config, family)
    members = [family.calibration(j) for j in indices]
    gauge_indices = {str(k): family.index_for_gauge(k) for k in GAUGE_LEVELS}

    _banner(f"Calibration of {family.name} (p={params.p}, n={params.n})")
    print(f"  j_min: {family.j_min}")
    for data in members:
        print(f"\n  j={data['j']}")
        for key, value in data.items():
            if key not in ("family", "j"):
                print(f"    {key}: {value}")
    print("\n  Gauge indices j(k): " + ", ".join(f"k={k} -> {v}" for k, v in gauge_indices.items()))

    body = {
        "command": "calibrate",
        "family": family.name,
        "params": params,
        "j_min": family.j_min,
        "members": members,
        "gauge_indices": gauge_indices,
    }
    output_dir = config.resolved_output_dir()
    path = export_json(body, output_dir / f"calibration_{family.name}.json", config.config_checksum())
    print(f"\n[OK] Calibration saved to: {path}")
    return EXIT_PASS, [path]


def probe_command(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Run a regularity probe and export the D(r, h) table."""
    if config.domain is None:
        raise ParameterError(f"probe needs a domain (--domain, one of {', '.join(DOMAIN_KINDS)})")
    params = config.params
    probe = config.probe
    domain = make_domain(config.domain)
    if probe.target is not None:
        xi0, point_name = probe.target, "target"
    elif probe.point is not None:
        xi0, point_name = probe_point(domain, probe.point), probe.point
    else:
        raise ParameterError(f"probe needs --point ({', '.join(PROBE_POINTS)}) or --target")

    output_dir = config.resolved_output_dir()
    checksum = config.config_checksum()
    stem = f"probe_{domain.label}_{point_name}"
    paths: list[Path] = []

    def keep(sol: GridSolution) -> None:
        h_tag = f"h{round(1.0 / sol.mask.h)}"
        paths.append(export_mask(sol.mask, output_dir / f"{stem}_{h_tag}_mask.csv", checksum))
        paths.extend(export_grid_solution(sol, output_dir, f"{stem}_{h_tag}_grid", checksum))

    _banner(f"Probing {domain.label} at x={list(xi0.x)}, t={xi0.t} (p={params.p})")
    report = regularity_probe(
        params,
        domain,
        xi0,
        probe.refinements,
        r_max=probe.r_max,
        alpha=probe.alpha,
        level_factor=probe.level_factor,
        workers=probe.workers,
        on_solution=keep if probe.export_grid else None,
    )
    body = {"command": "probe", "domain": domain.label, "params": params, "probe": report}
    paths.append(export_json(body, output_dir / f"{stem}.json", checksum))

    paths.append(
        export_csv(
            ["r", "h", "deviation"],
            report.rows(),
            output_dir / f"{stem}.csv",
            comments=[f"domain: {domain.label}", f"datum: {report.datum}", f"verdict: {report.verdict}"],
            config_checksum=checksum,
        )
    )

    print(f"\n  Window: {report.window}")
    for h, row in zip(report.refinements, report.deviations):
        cells = "  ".join("    -    " if d is None else f"{d:.3e}" for d in row)
        print(f"    h={h:<10.4g} {cells}")
    print(f"\n  Verdict: {report.verdict}")
    print(f"  Reason: {report.reason}")

    if probe.expect is not None and report.verdict != probe.expect:
        print(f"\n[FAIL] expected {probe.expect}")
        return EXIT_FAILED, paths
    return EXIT_PASS, paths


def scaling_command(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Check the multiplier scaling identity on a mask."""
    params = config.params
    params.requires_p_not_two("the scaling identity")
    spec, domain = _solver_domain(config)
    mask = _solver_mask(config, spec, domain)
    f, _ = smooth_bump_pair(domain.bbox, config.sampling.seed)

    _banner(f"Scaling identity on {mask.label} (p={params.p}, a={config.scaling.a})")
    report = check_scaling_identity(params, config.scaling.a, mask, f, tol=config.scaling.tol)
    body = {"command": "scaling", "params": params, "scaling": report}
    output_dir = config.resolved_output_dir()
    path = export_json(body, output_dir / f"scaling_p{params.p:g}_a{config.scaling.a:g}.json", config.config_checksum())

    print(f"  Factor a^(1/(p-2)): {report.factor:.6g}")
    print(f"  Steps: {report.steps}")
    print(f"  Relative discrepancy: {report.discrepancy:.3e} (tol {report.tol:.1e})")
    print(f"\n[{'OK' if report.passed else 'FAIL'}] Report saved to: {path}")
    return (EXIT_PASS if report.passed else EXIT_FAILED), [path]


def comparison_command(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Solve seeded ordered data pairs and check the discrete ordering."""
    params = config.params
    spec, domain = _solver_domain(config)
    mask = _solver_mask(config, spec, domain)
    cmp = config.comparison
    seed = config.sampling.seed
    pairs = [smooth_bump_pair(domain.bbox, seed + i, cmp.bumps) for i in range(cmp.pairs)]

    _banner(f"Comparison on {mask.label} (p={params.p}, {cmp.pairs} pairs)")
    report = check_comparison(params, mask, pairs, tol=cmp.tol)
    body = {"command": "comparison", "params": params, "seed": seed, "comparison": report}
    output_dir = config.resolved_output_dir()
    path = export_json(body, output_dir / f"comparison_{domain.label}.json", config.config_checksum())

    print(f"  Min slack: {report.min_slack:.3e}")
    print(f"  Worst pair: {report.worst_pair} at cell {report.worst_cell}")
    print(f"\n[{'OK' if report.holds else 'FAIL'}] Report saved to: {path}")
    return (EXIT_PASS if report.holds else EXIT_FAILED), [path]


COMMANDS: dict[str, Callable[[ExperimentConfig], tuple[int, list[Path]]]] = {
    "verify-barrier": verify_barrier_command,
    "calibrate": calibrate_command,
    "probe": probe_command,
    "scaling": scaling_command,
    "comparison": comparison_command,
}


def run_command(args: argparse.Namespace) -> int:
    """Build the config, run the command and log the outcome.

    Returns:
        Exit code: 0 pass, 1 failed, 2 bad parameters, 3 numerical abort
    """
    start = time.monotonic()
    output_dir = resolve_output_dir(args.output_dir)
    metadata: dict[str, Any] = {}
    try:
        config = config_from_args(args)
        output_dir = config.resolved_output_dir()
        metadata["config_checksum"] = config.config_checksum()
        code, paths = COMMANDS[args.command](config)
        metadata["reports"] = [str(p) for p in paths]
    except (ParameterError, ValidationError) as e:
        logger.error(f"{args.command}: rejected parameters: {e}")
        print(f"Error: {e}", file=sys.stderr)
        metadata["error"] = str(e)
        code = EXIT_BAD_PARAMETERS
    except PBarrierError as e:
        logger.error(f"{args.command}: numerical abort: {e}", exc_info=True)
        print(f"Aborted: {e}", file=sys.stderr)
        metadata["error"] = str(e)
        if isinstance(e, NumericalAbort):
            metadata["step"] = e.step
        code = EXIT_NUMERICAL_ABORT
    RunLogger.in_directory(output_dir).log_run(
        args.command, code, duration=time.monotonic() - start, metadata=metadata
    )
    return code


# -- parser ----------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="JSON experiment config; flags override it")
    parser.add_argument("--p", type=float, help="Exponent p > 1")
    parser.add_argument("--n", type=int, help="Spatial dimension")
    parser.add_argument("--a", type=float, help="Time multiplier a > 0")
    parser.add_argument("--output-dir", type=str, help="Report directory (default $PBARRIER_OUTPUT_DIR or ./reports)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("construction parameters")
    for name in ("alpha", "K", "gamma", "theta", "l", "k", "radius", "diam-theta", "C", "t1", "t2", "shrink", "T", "r", "R"):
        group.add_argument(f"--{name}", type=float, dest=name.replace("-", "_"))
    group.add_argument("--orientation", choices=["horizontal", "downward"])
    for name in ("center", "lower", "upper", "v", "x0"):
        group.add_argument(f"--{name}", type=_float_list, help="Comma-separated numbers")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--domain", type=str, help=f"Domain kind ({', '.join(DOMAIN_KINDS)})")
    parser.add_argument("--h", type=float, help="Grid spacing")
    parser.add_argument("--levels", type=int, help="Number of time levels")
    parser.add_argument("--level-factor", type=float, help="Level length in units of h")
    parser.add_argument("--seed", type=int, help="Seed of the boundary data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbarrier",
        description="Barrier families and boundary-regularity experiments for a·u_t = Δ_p u",
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    for name, help_text in (
        ("verify-barrier", "Certify members of a barrier family at sampled points"),
        ("calibrate", "Print and export the calibration constants of a family"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
        _add_spec_flags(sub)
        sub.add_argument("--family", type=str, help=f"Family kind ({', '.join(FAMILY_KINDS)})")
        sub.add_argument("--j", type=_index, help="'auto' (j_min) or an integer index")
        sub.add_argument("--ladder", action="store_true", help="Use j_min, 2·j_min and 10·j_min")
        if name == "verify-barrier":
            sub.add_argument("--samples", type=int, help="Sample points (default 10000)")
            sub.add_argument("--seed", type=int, help="Sampler seed")
            sub.add_argument("--tol", type=float, help="Relative tolerance (default 1e-8)")
            sub.add_argument("--step", type=float, help="FD step")
            sub.add_argument("--floor", type=float, help="Degenerate-gradient floor")
            sub.add_argument("--per-point", action="store_true", help="Export one CSV row per point")
            sub.add_argument(
                "--as",
                dest="sense",
                choices=["supersolution", "subsolution", "solution"],
                help="Certify in this sense instead of the family's own",
            )
            sub.add_argument("--workers", type=int, help="Thread workers")
            sub.add_argument("--validate", action="store_true", help="Also run the family-condition checks")

    probe = subparsers.add_parser("probe", help="Probe a boundary point for regularity")
    _add_common(probe)
    _add_spec_flags(probe)
    _add_grid(probe)
    probe.add_argument("--point", type=str, help=f"Named point ({', '.join(PROBE_POINTS)})")
    probe.add_argument("--target", type=_float_list, help="Explicit point x_0,...,x_{n-1},t")
    probe.add_argument("--refinements", type=_float_list, help="Grid spacings, e.g. 0.03125,0.015625")
    probe.add_argument("--r-max", type=float, help="Largest window radius")
    probe.add_argument("--datum-alpha", type=float, help="Exponent of the datum |xi - xi0|^alpha")
    probe.add_argument("--workers", type=int, help="Refinements solved concurrently")
    probe.add_argument(
        "--expect",
        choices=["consistent-with-regular", "consistent-with-irregular", "inconclusive"],
        help="Exit 1 unless the verdict matches",
    )
    probe.add_argument("--export-grid", action="store_true", help="Also export masks and grid solutions")

    scaling = subparsers.add_parser("scaling", help="Check the multiplier scaling identity")
    _add_common(scaling)
    _add_spec_flags(scaling)
    _add_grid(scaling)
    scaling.add_argument("--a-mult", type=float, help="Multiplier of the multiplied run (default 8)")
    scaling.add_argument("--tol", type=float, help="Relative tolerance (default 1e-10)")

    comparison = subparsers.add_parser("comparison", help="Check the discrete comparison principle")
    _add_common(comparison)
    _add_spec_flags(comparison)
    _add_grid(comparison)
    comparison.add_argument("--pairs", type=int, help="Number of ordered data pairs (default 20)")
    comparison.add_argument("--bumps", type=int, help="Gaussian bumps per datum")
    comparison.add_argument("--tol", type=float, help="Ordering tolerance (default 1e-12)")

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_BAD_PARAMETERS

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
    )
    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
