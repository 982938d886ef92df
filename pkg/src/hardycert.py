#!/usr/bin/env python3
# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Command-line front end: run checks, estimates and sweeps, and write reports."""

import argparse
import itertools
import logging
import sys
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

import carleman
import conditions
import norms
import recurrences
import wirtinger
from conditions import Condition, ConditionReport
from config import Command, ConfigError, OutputFormat, RunConfig, dump_config, parse_config
from norms import NormEstimate, NormMethod
from reports import Report, write_report
from weights import WeightKind, WeightSequence, WeightSpec, make_weights

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-9
LOSSERS_SLACK = 1e-12

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _estimate(config: RunConfig, w: WeightSequence, p: float) -> NormEstimate:
    method = NormMethod(config.method)
    if method is NormMethod.EIGEN:
        if p != 2:
            raise ValueError(f"the eigen method computes the p = 2 norm only, got p={p}")
        return norms.exact_l2_norm(w, config.N)
    if method is NormMethod.ETA_BISECTION:
        return norms.norm_via_eta_bisection(w, p, config.N)
    if method is NormMethod.COPSON:
        return norms.estimate_adjoint_pnorm(w, p, config.N, config.tol, config.max_iter)
    return norms.estimate_pnorm(w, p, config.N, config.tol, config.max_iter)


def _dump_path(config: RunConfig, cell: int, cells: int) -> Path | None:
    """Dump target for ``cell``; with several cells the index goes before the suffix."""
    if config.dump is None:
        return None
    path = Path(config.dump)
    if cells > 1:
        path = path.with_name(f"{path.stem}.{cell}{path.suffix}")
    return path


def run_norm(config: RunConfig, report: Report) -> None:
    """Estimate the truncated norm for every p of the grid.

    With ``dump`` set, the η trace at the multiplier ``norm^p`` is written for each p.
    """
    w = make_weights(config.weights, config.N)
    for cell, p in enumerate(config.p):
        est = _estimate(config, w, p)
        path = _dump_path(config, cell, len(config.p))
        if path is not None:
            recurrences.write_trace(recurrences.eta_trace(w, p, est.norm**p, config.N), path)
        verdict = "converged" if est.converged else "not-converged"
        report.add(
            cell=cell,
            item=est.method.value,
            p=p,
            N=config.N,
            value=est.norm,
            residual=est.residual,
            iterations=est.iterations,
            verdict=verdict,
        )
        if not est.converged:
            report.note(f"{est.method.value} did not converge for p={p}")
        if est.norm < 1 - BOUND_SLACK:
            report.fail(f"norm {est.norm} below 1 for p={p}")


def _default_L(w: WeightSequence) -> float | None:  # noqa: N802
    alpha = w.spec.alpha
    if alpha is None:
        return None
    return 1 / (alpha + 1)


def _l_grid(config: RunConfig, w: WeightSequence) -> list[float]:
    if config.L:
        return list(config.L)
    default = _default_L(w)
    if default is None:
        raise ValueError(f"L is required for {config.condition} with weights {config.weights}")
    return [default]


def _emit_condition(report: Report, rep: ConditionReport, cell: int, per_n: bool) -> None:
    p = rep.parameters.get("p")
    L = rep.parameters.get("L")  # noqa: N806
    alpha = rep.parameters.get("alpha")
    constant = rep.condition in conditions.CONSTANTS
    if per_n:
        for n, m in enumerate(rep.margins, start=1):
            report.add(
                cell=cell,
                item=rep.condition.value,
                p=p,
                L=L,
                alpha=alpha,
                N=rep.n_checked,
                n=n,
                value=float(m) if constant else None,
                margin=None if constant else float(m),
            )
    report.add(
        cell=cell,
        item=rep.condition.value,
        p=p,
        L=L,
        alpha=alpha,
        N=rep.n_checked,
        value=rep.sup_value,
        margin=None if constant else float(np.min(rep.margins)),
        verdict=rep.verdict,
    )
    if not rep.holds:
        report.fail(f"{rep.condition.value} {rep.parameters} {rep.verdict}")


def _condition_reports(config: RunConfig, w: WeightSequence) -> list[ConditionReport]:
    cond = Condition(config.condition or Condition.CARTLIDGE)
    N = config.N  # noqa: N806
    if cond is Condition.THM61:
        grid = itertools.product(config.alpha or [0.5], config.p)
        return [conditions.thm61_checks(a, p, N) for a, p in grid]
    if cond is Condition.CARTLIDGE:
        return [conditions.cartlidge_L(w, N, p) for p in config.p]
    if cond is Condition.CARLEMAN_M:
        return [conditions.carleman_M(w, N)]
    if cond is Condition.BENNETT_E:
        return [conditions.bennett_E(w, N)]
    check = {
        Condition.THM13: conditions.thm13_condition,
        Condition.COR14: conditions.cor14_condition,
        Condition.REVERSED_LS: conditions.reversed_condition_check,
    }[cond]
    return [check(w, p, L, N) for p, L in itertools.product(config.p, _l_grid(config, w))]


def run_conditions(config: RunConfig, report: Report) -> None:
    """Per-index margins of one condition over the p (and L or alpha) grid."""
    w = make_weights(config.weights, config.N + 1)
    for cell, rep in enumerate(_condition_reports(config, w)):
        _emit_condition(report, rep, cell, per_n=True)
        if rep.tail_note:
            logger.info("%s: %s", rep.condition.value, rep.tail_note)


def _required_L(w: WeightSequence, p: float, N: int, report: Report) -> float | None:  # noqa: N802, N803
    L = conditions.thm13_required_L(w, p, N)  # noqa: N806
    if L is None:
        return None
    # nudge off the binding index so recomputed margins stay nonnegative
    L = min(L * (1 + 1e-9), (L + p) / 2)  # noqa: N806
    report.note(f"p={p}: smallest admissible L on n <= {N} is {L:.17g}")
    return L


def run_certify(config: RunConfig, report: Report) -> None:
    """Check the thm13 condition on the prefix, estimate the norm, assert norm ≤ p/(p−L)."""
    w = make_weights(config.weights, config.N + 1)
    cells = itertools.count()
    n_cells = len(config.p) * (len(config.L) if config.L else 1)
    for p in config.p:
        grid = list(config.L) if config.L else [_required_L(w, p, config.N, report)]
        for L in grid:  # noqa: N806
            cell = next(cells)
            if L is None:
                report.fail(f"no L < p={p} satisfies the thm13 condition on n <= {config.N}")
                continue
            _emit_condition(report, conditions.thm13_condition(w, p, L, config.N), cell, False)
            gao = recurrences.gao_sequence(w, p, L, config.N)
            path = _dump_path(config, cell, n_cells)
            if path is not None:
                recurrences.write_trace(gao, path)
            gao_ok = gao.first_violation is None
            report.add(
                cell=cell,
                item=gao.kind.value,
                p=p,
                L=L,
                N=config.N,
                value=float(gao.values[-1]),
                margin=float(np.min(gao.margins)),
                verdict="holds-on-prefix" if gao_ok else f"violated-at({gao.first_violation})",
            )
            if not gao_ok:
                report.fail(f"auxiliary sequence fails at n={gao.first_violation} (p={p}, L={L})")
            est = _estimate(config, w.truncate(config.N), p)
            bound = p / (p - L)
            ok = est.norm <= bound + BOUND_SLACK
            report.add(
                cell=cell,
                item=f"norm-{est.method.value}",
                p=p,
                L=L,
                N=config.N,
                value=est.norm,
                margin=bound - est.norm,
                residual=est.residual,
                iterations=est.iterations,
                verdict="within-bound" if ok else "exceeds-bound",
            )
            if not ok:
                report.fail(f"norm {est.norm} exceeds certified bound {bound} (p={p}, L={L})")


def run_carleman(config: RunConfig, report: Report) -> None:
    """Optimize the Carleman ratio and compare it with the proven constants."""
    w = make_weights(config.weights, config.N + 1)
    try:
        est = carleman.bound_comparison(
            w, config.N, restarts=config.restarts, seed=config.seed, max_iter=config.max_iter
        )
    except carleman.BoundOrderingError as e:
        report.fail(str(e))
        return
    report.add(
        item="lower_bound_E",
        N=config.N,
        value=est.lower_bound_E,
        iterations=est.iterations,
        verdict="stagnated" if est.stagnated else "converged",
    )
    for name, bound in est.upper_bounds.items():
        report.add(item=name, N=config.N, value=bound, margin=bound - est.lower_bound_E)


def run_wirtinger(config: RunConfig, report: Report) -> None:
    """Spectrum, two-sided form bounds on random vectors, telescoping identities."""
    a, b, N = config.a, config.b, config.N  # noqa: N806
    spectrum = wirtinger.tridiag_spectrum(a, b, N)
    if config.dump is not None:
        wirtinger.write_spectrum(a, b, N, Path(config.dump))
    for k, value in enumerate(spectrum, start=1):
        report.add(item="eigenvalue", N=N, n=k, value=float(value))

    rng = np.random.default_rng(config.seed)
    vectors = [np.sin(np.arange(1, N + 1) * np.pi / (N + 1))]
    vectors += [rng.standard_normal(N) for _ in range(config.samples)]
    margins = np.array([wirtinger.lossers_bounds_check(a, b, x) for x in vectors])
    scale = (a**2 + b**2) * max(float(np.dot(x, x)) for x in vectors)
    for name, column in (("lossers_lower", margins[:, 0]), ("lossers_upper", margins[:, 1])):
        worst = float(np.min(column))
        ok = worst >= -LOSSERS_SLACK * scale
        report.add(item=name, N=N, margin=worst, verdict="holds" if ok else "violated")
        if not ok:
            report.fail(f"{name} margin {worst} on a sampled vector")

    if N >= 2:
        for sign in (1, -1):
            trace = wirtinger.redheffer_mu(a, b, N, sign)
            report.add(
                item="redheffer+" if sign > 0 else "redheffer-",
                N=N,
                value=trace.constant,
                residual=trace.max_error,
                verdict="identity-holds",
            )


def _sweep_cell(config: RunConfig, alpha: float | None, p: float, L: float | None):  # noqa: N803
    cond = Condition(config.condition or Condition.COR14)
    if cond is Condition.THM61:
        return conditions.thm61_checks(alpha if alpha is not None else 0.5, p, config.N)
    spec = WeightSpec.parse(config.weights)
    if alpha is not None:
        spec = WeightSpec(WeightKind.POWER, param=alpha)
    w = make_weights(spec, config.N + 1)
    if cond in (Condition.THM13, Condition.COR14, Condition.REVERSED_LS):
        L = L if L is not None else _default_L(w)  # noqa: N806
        if L is None:
            raise ValueError(f"L is required for {cond.value} with weights {spec}")
        check = {
            Condition.THM13: conditions.thm13_condition,
            Condition.COR14: conditions.cor14_condition,
            Condition.REVERSED_LS: conditions.reversed_condition_check,
        }[cond]
        return check(w, p, L, config.N)
    if cond is Condition.CARTLIDGE:
        return conditions.cartlidge_L(w, config.N, p)
    if cond is Condition.CARLEMAN_M:
        return conditions.carleman_M(w, config.N)
    return conditions.bennett_E(w, config.N)


def run_sweep(config: RunConfig, report: Report) -> None:
    """Evaluate a condition on every (alpha, p, L) grid cell concurrently."""
    grid = list(itertools.product(config.alpha or [None], config.p, config.L or [None]))
    with ThreadPoolExecutor(max_workers=carleman.worker_count()) as pool:
        results = list(pool.map(lambda cell: _sweep_cell(config, *cell), grid))
    for cell, ((alpha, p, _), rep) in enumerate(zip(grid, results, strict=True)):
        _emit_condition(report, rep, cell, per_n=False)
        if alpha is not None and (alpha + 1) * p > 1 and p > 1:
            report.add(
                cell=cell,
                item="bennett_constant",
                p=p,
                alpha=alpha,
                value=conditions.bennett_power_constant(alpha + 1, p),
            )


def run_counterexample(config: RunConfig, report: Report) -> None:
    """Test the Levin–Steckin inequality on the unit vector and on two-term vectors."""
    for cell, p in enumerate(config.p):
        found = conditions.ls_counterexample(p)
        report.add(
            cell=cell,
            item="unit-vector",
            p=p,
            value=found.rhs,
            margin=found.lhs - found.rhs,
            verdict="fails" if found.fails else "holds",
        )
        report.add(
            cell=cell,
            item="two-term",
            p=p,
            value=found.pair[1] if found.pair else None,
            margin=found.pair_margin,
            verdict="fails" if found.pair else "holds",
        )
        if found.fails:
            report.note(f"p={p}: a=(1,0,...) gives lhs=1 < rhs={found.rhs:.17g}")
        if found.pair:
            report.note(f"p={p}: two-term vector {found.pair} violates the inequality")


COMMANDS: dict[Command, Callable[[RunConfig, Report], None]] = {
    Command.NORM: run_norm,
    Command.CONDITIONS: run_conditions,
    Command.CERTIFY: run_certify,
    Command.CARLEMAN: run_carleman,
    Command.WIRTINGER: run_wirtinger,
    Command.SWEEP: run_sweep,
    Command.COUNTEREXAMPLE: run_counterexample,
}


def run(config: RunConfig) -> Report:
    """Dispatch ``config`` to its command and collect the report."""
    command = Command(config.command)
    report = Report(command.value)
    COMMANDS[command](config, report)
    return report


def build_parser() -> argparse.ArgumentParser:
    """Command-line flags; every config key can be overridden by its flag."""
    parser = argparse.ArgumentParser(
        prog="hardy-cert",
        description="Certify and estimate l^p norm bounds of weighted mean matrices.",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", type=Path, help="flat YAML config file")
    parser.add_argument("--weights", help="constant | power:A | geometric:R | list:.. | file:P")
    parser.add_argument("--p", help="exponent or comma-separated grid")
    parser.add_argument("--L", help="condition constant or grid")
    parser.add_argument("--alpha", help="power exponent or grid")
    parser.add_argument("--N", type=int, help="truncation order")
    parser.add_argument("--condition", choices=[c.value for c in Condition])
    parser.add_argument("--method", choices=[m.value for m in NormMethod])
    parser.add_argument("--a", type=float)
    parser.add_argument("--b", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--restarts", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="report path (stdout when omitted)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])
    parser.add_argument("--dump", help="write the raw trace or spectrum to this path")
    parser.add_argument("--dump-config", action="store_true", help="print the config and exit")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


OVERRIDE_KEYS = (
    "command",
    "weights",
    "p",
    "L",
    "alpha",
    "N",
    "condition",
    "method",
    "a",
    "b",
    "tol",
    "max_iter",
    "restarts",
    "samples",
    "seed",
    "out",
    "format",
    "dump",
)


def main(argv: list[str] | None = None) -> int:
    """Run the command line and return the exit status.

    0 when every verdict holds, 1 when a verdict or assertion fails, 2 on a
    configuration, validation or I/O error.
    """
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        logger.info("Run 1/3 Validating configuration")
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        overrides = {key: getattr(args, key) for key in OVERRIDE_KEYS}
        config = parse_config(text, overrides)
        if args.dump_config:
            sys.stdout.write(dump_config(config))
            return EXIT_OK
        logger.info("Run 2/3 Evaluating %s", args.command)
        report = run(config)
        logger.info("Run 3/3 Writing report")
        write_report(report, config.format, config.out)
    except ConfigError as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    except (ValueError, ZeroDivisionError, OSError) as e:
        logger.error("Run aborted: %s", e)
        return EXIT_CONFIG
    except ArithmeticError as e:
        logger.error("Numerical invariant violated: %s", e)
        return EXIT_FAILED

    if not report.ok:
        logger.warning("%d verdict(s) failed", len(report.failures))
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: nocover
    sys.exit(main())
