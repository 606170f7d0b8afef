"""
Command implementations. Each returns an exit status: 0 on success or a
certified verdict, 1 on an analytic rejection or violation. Input and
runtime errors are raised and mapped to status 2 by the dispatcher.
"""
import logging
import sys
from typing import List, Optional, Tuple

from rich.console import Console
from rich.table import Table

from analysis.bounds import (
    BoundSource,
    ReferenceComparison,
    certify,
    compare_many,
    compare_with_reference,
    permanence_bounds,
)
from analysis.diagnostics import empirical_lambda_bounds, lyapunov_decay_check
from models.config import RunConfig
from models.errors import ConfigError, InvalidArgumentError
from models.saiqh import State, parse_number
from solver.integrator import Trajectory, simulate
from utils.plotting import write_trajectory_svg
from utils.reporting import (
    atomic_write,
    bounds_frame,
    bounds_rows,
    format_report,
    frame_to_csv,
    lyapunov_frame,
    read_trajectory_csv,
    trajectory_frame,
)

logger = logging.getLogger(__name__)

console = Console()


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        atomic_write(path, text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _run(config: RunConfig, initial: Optional[State] = None) -> Trajectory:
    config.require("timescale", "initial")
    start = initial if initial is not None else config.initial.to_state()
    return simulate(config.model, config.timescale.build(), start)


def _lambda_bounds(
    config: RunConfig, empirical: bool, traj: Optional[Trajectory] = None
) -> Tuple[float, float, BoundSource]:
    if empirical:
        traj = traj if traj is not None else _run(config)
        found = empirical_lambda_bounds(traj, config.analysis.transient_fraction)
        logger.info(f"Empirical lambda bounds: {found.lower!r} .. {found.upper!r}")
        return found.lower, found.upper, BoundSource.EMPIRICAL

    supplied = config.lambda_bounds()
    if supplied is None:
        raise ConfigError("lambdaL and lambdaU are required unless --empirical is given")
    return supplied[0], supplied[1], BoundSource.SUPPLIED


def parse_state(text: str) -> State:
    """Parse ``x1,...,x6`` (decimals or rational literals)."""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 6:
        raise InvalidArgumentError(f"expected 6 comma-separated values, got {len(parts)}")
    values = []
    for part in parts:
        value = parse_number(part)
        if not isinstance(value, float):
            raise InvalidArgumentError(f"'{part}' is not a number")
        values.append(value)
    return State.from_sequence(values)


def cmd_simulate(config: RunConfig, out: Optional[str] = None) -> int:
    """Write the trajectory CSV ``t,mu,x1..x6,N,lambda``."""
    traj = _run(config)
    text = frame_to_csv(trajectory_frame(traj), config.output.precision)
    _emit(text, out or config.output.csv_path)
    return 0


def _print_bounds_table(rows: List[Tuple[str, float, Optional[float], int]], source: BoundSource) -> None:
    table = Table(title=f"Permanence bounds (lambda {source.value})")
    table.add_column("name", style="cyan")
    table.add_column("value", justify="right")
    table.add_column("paper", justify="right")
    table.add_column("flag")
    for name, value, reference, flagged in rows:
        table.add_row(
            name,
            f"{value:.10g}",
            "" if reference is None else f"{reference:.10g}",
            "[yellow]paper-discrepancy[/yellow]" if flagged else "",
        )
    console.print(table)


def cmd_bounds(config: RunConfig, empirical: bool = False, out: Optional[str] = None) -> int:
    """Compute m_i and M_i; write the bounds CSV and print a table."""
    lo, hi, source = _lambda_bounds(config, empirical)
    bounds = permanence_bounds(config.model, lo, hi, source)

    comparisons: List[ReferenceComparison] = []
    ref = config.reference
    if ref is not None:
        if ref.m is not None:
            comparisons += compare_many([f"m{i}" for i in range(1, 7)], bounds.m_values, ref.m)
        if ref.M is not None:
            comparisons += compare_many([f"M{i}" for i in range(1, 7)], bounds.M_values, ref.M)

    frame = bounds_frame(bounds, comparisons)
    destination = out or config.output.bounds_path
    if destination:
        atomic_write(destination, frame_to_csv(frame, config.output.precision))
        logger.info(f"Wrote {destination}")
    _print_bounds_table(bounds_rows(bounds, comparisons), source)
    for warning in bounds.warnings:
        logger.warning(f"Degenerate bound: {warning}")
    return 0


def cmd_certify(config: RunConfig, empirical: bool = False, out: Optional[str] = None) -> int:
    """Key-value certificate report; exit 0 when certified, 1 when rejected."""
    config.require("timescale")
    lo, hi, source = _lambda_bounds(config, empirical)
    scale = config.timescale.build()
    cert = certify(config.model, scale, lo, hi, config.analysis.M_override)
    c = cert.constants

    pairs = [(f"A{i}", v) for i, v in enumerate(c.A_values, start=1)]
    pairs += [(f"B{i}", v) for i, v in enumerate(c.B_values, start=1)]
    pairs += [
        ("A", c.A),
        ("B", c.B),
        ("M", cert.M),
        ("lambdaL", cert.lambda_l),
        ("lambdaU", cert.lambda_u),
        ("lambda_source", source),
        ("psi", cert.psi),
        ("mu_sup", cert.mu_sup),
        ("one_minus_psi_mu", cert.min_decay_factor),
        ("identity_residual", cert.identity_residual),
        ("h1", cert.h1_holds),
        ("h2", cert.h2_holds),
        ("regressive", cert.regressive_ok),
        ("verdict", cert.verdict),
        ("reasons", "; ".join(cert.reasons)),
    ]

    ref = config.reference
    if ref is not None:
        computed = {
            "A": c.A,
            "B": c.B,
            "psi": cert.psi,
            "one_minus_psi_mu": cert.min_decay_factor,
        }
        for name, value in computed.items():
            comparison = compare_with_reference(name, value, getattr(ref, name))
            if comparison.reference is None:
                continue
            pairs.append((f"paper_{name}", comparison.reference))
            pairs.append((f"paper_{name}_discrepancy", comparison.discrepancy))
        if ref.psi is not None:
            pairs.append(("paper_psi_implied_one_minus_psi_mu", 1.0 - ref.psi * cert.mu_sup))

    _emit(format_report(pairs, config.output.precision), out or config.output.report_path)
    if not cert.certified:
        logger.info(f"Certificate rejected: {'; '.join(cert.reasons)}")
        return 1
    return 0


def cmd_compare(
    config: RunConfig,
    second_initial: str,
    psi: Optional[float] = None,
    empirical: bool = False,
    out: Optional[str] = None,
) -> int:
    """Lyapunov CSV ``t,V,envelope,ok`` for two initial states; exit 1 on any violation."""
    traj1 = _run(config)
    traj2 = _run(config, parse_state(second_initial))

    if psi is None:
        lo, hi, _ = _lambda_bounds(config, empirical, traj1)
        cert = certify(config.model, traj1.scale, lo, hi, config.analysis.M_override)
        if not cert.certified:
            logger.warning(f"Checking with an uncertified psi={cert.psi!r}")
        psi = cert.psi

    report = lyapunov_decay_check(traj1, traj2, psi)
    text = frame_to_csv(lyapunov_frame(report), config.output.precision)
    _emit(text, out or config.output.lyapunov_path)
    return 0 if report.passed else 1


def cmd_plot(config: RunConfig, out: Optional[str] = None) -> int:
    """Render the trajectory CSV at ``output.csv_path`` as a six-panel SVG."""
    source = config.output.csv_path
    if not source:
        raise ConfigError("output.csv_path is required to locate the trajectory CSV")
    target = out or config.output.svg_path
    if not target:
        raise ConfigError("an SVG destination is required (--out or output.svg_path)")
    write_trajectory_svg(read_trajectory_csv(source), target)
    return 0
