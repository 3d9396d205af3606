# src/cli/commands.py
"""Dispatch of the CLI commands to the sweep and oracle modules."""
import logging
from dataclasses import replace

from src.cli.output import Table, write_output
from src.cli.verify import REPORT_COLUMNS, run_verification
from src.core.errors import VerificationFailed
from src.core.sweeps import cutoff_evolution, normalized_time, param_sweep, scale_kappa, time_series

logger = logging.getLogger('tmss')

CUTOFF_COLUMNS = ("T", "r_max", "value_at_max", "r_lcf", "r_ucf", "threshold",
                  "max_status", "lcf_status", "ucf_status", "multimodal")
HISTORY_COLUMNS = ("id", "command", "start_time", "end_time", "status", "details")


def evolve_table(config, max_workers = None):
    series = time_series(config.params, config.measure, config.T_grid, config.bell, max_workers)
    kappa = scale_kappa(config.params)
    rows = tuple((T, normalized_time(kappa, T), value) for T, value in series.points)
    return Table(("T", "t", config.measure.value), rows)


def sweep_table(config, max_workers = None):
    series = param_sweep(config.params, config.sweep_axis, config.sweep_values, config.measure, config.sweep_T,
                         config.bell, max_workers)
    return Table((config.sweep_axis.value, config.measure.value), tuple(series.points))


def extrema_table(config, max_workers = None):
    reports = cutoff_evolution(config.params, config.measure, config.extrema_T, config.r_search, config.bell,
                               max_workers)
    rows = tuple((rep.T, rep.r_max, rep.value_at_max, rep.r_lcf, rep.r_ucf, rep.threshold, rep.max_status,
                  rep.lcf_status, rep.ucf_status, rep.multimodal) for rep in reports)
    return Table(CUTOFF_COLUMNS, rows)


def verify_table(config, max_workers = None):
    report = run_verification(config.verify, config.quadrature, config.bell, config.seed)
    return Table(REPORT_COLUMNS, tuple(report.rows)), report.passed


def history_table(journal, limit = 20):
    return Table(HISTORY_COLUMNS, tuple(journal.get_runs(page_size=limit)))


def run(config, max_workers = None, journal = None):
    """Executes one configured command and writes its output; returns the exit status."""
    bell = replace(config.bell, max_workers=max_workers or config.bell.max_workers)
    config = replace(config, bell=bell)
    run_id = journal.start_run(config.command, config.preset) if journal else None
    logger.info(f"Running '{config.command}'" + (f" (preset {config.preset})" if config.preset else ""))
    try:
        passed = True
        if config.command == "evolve":
            table = evolve_table(config, max_workers)
        elif config.command == "sweep":
            table = sweep_table(config, max_workers)
        elif config.command == "extrema":
            table = extrema_table(config, max_workers)
        else:
            table, passed = verify_table(config, max_workers)

        write_output(table, config.metadata(), config.format, config.out)
        if not passed:
            raise VerificationFailed("at least one verification check failed; see the report")
    except Exception as e:
        if journal:
            journal.finish_run(run_id, "failed", f"{type(e).__name__}: {e}")
        raise
    if journal:
        journal.finish_run(run_id, "completed", f"{len(table.rows)} rows")
    return 0
