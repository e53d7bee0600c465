"""Relaxation-guided decomposition: theta bound, greedy rounding, then
limited discrepancy subproblems solved by branch and bound."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .cp import CpResult, CpStatus, SharedIncumbent, cp_only_solve, solve_subproblem
from .graph import Number, WeightedGraph, read_dimacs
from .lds import subproblems_at
from .rounding import greedy_partition, greedy_round
from .sdp import SdpStatus, solve_sdp
from .theta import (
    ROUND_EPS,
    ThetaError,
    ThetaForm,
    add_discrepancy_cut,
    build_theta,
    extract_scores,
    usable_upper_bound,
)

log = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "name",
    "n",
    "m",
    "theta",
    "round",
    "best",
    "best_discr",
    "time_sdp",
    "time_subp",
    "time_total",
    "backtracks",
    "optimal",
)
WALL_CLOCK_COLUMNS = ("time_sdp", "time_subp", "time_total")


@dataclass(frozen=True)
class HybridConfig:
    max_discrepancy: int = 2
    theta_variant: ThetaForm = ThetaForm.X
    sdp_tol: float = 1e-7
    sdp_max_iter: int = 200
    cp_time_limit_per_subproblem: float | None = None
    total_time_limit: float | None = None
    enable_discrepancy_cuts: bool = False
    skip_discrepancy_zero: bool = False
    deterministic: bool = True
    workers: int = 4

    def __post_init__(self):
        object.__setattr__(self, "theta_variant", ThetaForm(self.theta_variant))
        if self.max_discrepancy < 0:
            raise ValueError("max_discrepancy must be non-negative")
        if not self.sdp_tol > 0:
            raise ValueError("sdp_tol must be positive")
        for name in ("cp_time_limit_per_subproblem", "total_time_limit"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class SkippedLevel:
    discrepancy: int
    bound: float
    incumbent: Number


@dataclass
class RunReport:
    name: str
    n: int
    m: int
    theta: float
    round_value: Number
    best_value: Number
    best_discrepancy: int
    time_sdp: float
    time_subproblems: float
    time_total: float
    backtracks: int
    proven_optimal: bool
    best_set: frozenset[int] = field(default=frozenset(), repr=False)
    v0: tuple[int, ...] = ()
    subproblems_solved: int = 0
    skipped_levels: list[SkippedLevel] = field(default_factory=list)
    degraded: bool = False
    warnings: list[str] = field(default_factory=list)

    def row(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "theta": self.theta,
            "round": self.round_value,
            "best": self.best_value,
            "best_discr": self.best_discrepancy,
            "time_sdp": self.time_sdp,
            "time_subp": self.time_subproblems,
            "time_total": self.time_total,
            "backtracks": self.backtracks,
            "optimal": int(self.proven_optimal),
        }


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6f}"
    return str(value)


def format_tsv(reports: Iterable[RunReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, delimiter="\t", lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        row = r.row()
        writer.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
    return out.getvalue()


def format_json(reports: Iterable[RunReport]) -> str:
    rows = []
    for r in reports:
        row = r.row()
        if isinstance(row["theta"], float) and math.isnan(row["theta"]):
            row["theta"] = None
        rows.append(row)
    return json.dumps(rows, indent=2)


def _reached(value: Number, upper: float, integral: bool) -> bool:
    return value >= upper if integral else value >= upper - ROUND_EPS


def hybrid_solve(g: WeightedGraph, cfg: HybridConfig = HybridConfig(), name: str = "") -> RunReport:
    """Solve the stable set problem on ``g``.

    Returns a report whose ``proven_optimal`` flag is set when the incumbent
    reaches the (rounded) theta bound or when every discrepancy level up to
    ``|V0|`` was searched to completion.
    """
    t_start = time.perf_counter()
    deadline = None if cfg.total_time_limit is None else t_start + cfg.total_time_limit
    integral = g.integral_weights

    model = build_theta(g, cfg.theta_variant)
    sol = solve_sdp(model.problem, tol=cfg.sdp_tol, max_iter=cfg.sdp_max_iter)
    try:
        res = extract_scores(model, sol, g)
    except ThetaError as exc:
        return _degraded(g, cfg, name, t_start, str(exc))
    time_sdp = time.perf_counter() - t_start
    warnings = []
    if sol.status is not SdpStatus.OPTIMAL:
        warnings.append(f"SDP status {sol.status.value}; bound certified from final dual iterate")

    theta = res.theta
    upper = usable_upper_bound(theta, g)
    rounded = greedy_round(g, res.scores)
    partition = greedy_partition(g, res.scores)

    incumbent: Number = rounded.value
    best_set = rounded.selected
    best_k = 0
    backtracks = 0
    solved = 0
    skipped: list[SkippedLevel] = []
    proven = _reached(incumbent, upper, integral)
    complete = True
    t_sub = time.perf_counter()

    top = min(cfg.max_discrepancy, len(partition.v0))
    for k in range(top + 1):
        if proven:
            break
        if deadline is not None and time.perf_counter() >= deadline:
            complete = False
            break
        if k == 0:
            if cfg.skip_discrepancy_zero:
                continue
            # Propagation alone settles the level-0 subproblem; it must reproduce the rounding.
            sub = next(subproblems_at(partition, 0))
            r0 = solve_subproblem(g, sub)
            solved += 1
            backtracks += r0.backtracks
            if r0.best_value != rounded.value:
                raise RuntimeError(f"level-0 subproblem gave {r0.best_value}, rounding gave {rounded.value}")
            continue

        if cfg.enable_discrepancy_cuts:
            cut_model = add_discrepancy_cut(model, partition.v0, k)
            cut_sol = solve_sdp(cut_model.problem, tol=cfg.sdp_tol, max_iter=cfg.sdp_max_iter)
            if cut_sol.status is SdpStatus.OPTIMAL:
                try:
                    cut_bound = usable_upper_bound(extract_scores(cut_model, cut_sol, g).theta, g)
                except ThetaError:
                    cut_bound = math.inf
                if cut_bound <= incumbent:
                    skipped.append(SkippedLevel(k, cut_bound, incumbent))
                    continue

        shared = SharedIncumbent(incumbent)
        level = _solve_level(g, partition, k, cfg, shared, upper, deadline)
        for res_k in level:
            solved += 1
            backtracks += res_k.backtracks
            if res_k.status is CpStatus.TIME_LIMIT:
                complete = False
            if res_k.best_value is not None and res_k.best_value > incumbent:
                incumbent, best_set, best_k = res_k.best_value, res_k.best_set, k
        if len(level) < _level_size(partition, k):
            complete = False
        if _reached(incumbent, upper, integral):
            proven = True
        if not complete:
            break

    if not proven and complete and top == len(partition.v0):
        proven = True

    now = time.perf_counter()
    return RunReport(
        name=name,
        n=g.n,
        m=g.m,
        theta=theta,
        round_value=rounded.value,
        best_value=incumbent,
        best_discrepancy=best_k,
        time_sdp=time_sdp,
        time_subproblems=now - t_sub,
        time_total=now - t_start,
        backtracks=backtracks,
        proven_optimal=proven,
        best_set=best_set,
        v0=partition.v0,
        subproblems_solved=solved,
        skipped_levels=skipped,
        warnings=warnings,
    )


def _level_size(partition, k: int) -> int:
    return math.comb(len(partition.v0), k)


def _remaining(cfg: HybridConfig, deadline: float | None) -> float | None:
    limits = [cfg.cp_time_limit_per_subproblem]
    if deadline is not None:
        limits.append(max(deadline - time.perf_counter(), 1e-3))
    limits = [x for x in limits if x is not None]
    return min(limits) if limits else None


def _solve_level(g, partition, k, cfg, shared: SharedIncumbent, upper, deadline) -> list[CpResult]:
    """Solve every subproblem of one level; results come back in stream order.

    Returns fewer than C(|V0|, k) results if the deadline or the upper bound
    stops the level early.
    """
    results: list[CpResult] = []
    integral = g.integral_weights
    if cfg.deterministic or cfg.workers == 1:
        for sub in subproblems_at(partition, k):
            if deadline is not None and time.perf_counter() >= deadline:
                break
            r = solve_subproblem(g, sub, shared.value, upper, _remaining(cfg, deadline))
            if r.best_value is not None:
                shared.offer(r.best_value)
            results.append(r)
            if shared.value is not None and _reached(shared.value, upper, integral):
                break
        return results

    def work(sub):
        if deadline is not None and time.perf_counter() >= deadline:
            return None
        if shared.value is not None and _reached(shared.value, upper, integral):
            return None
        return solve_subproblem(g, sub, shared.value, upper, _remaining(cfg, deadline), shared=shared)

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for r in pool.map(work, subproblems_at(partition, k)):
            if r is not None:
                results.append(r)
    return results


def _degraded(g: WeightedGraph, cfg: HybridConfig, name: str, t_start: float, why: str) -> RunReport:
    log.warning("relaxation failed (%s); falling back to plain branch and bound", why)
    time_sdp = time.perf_counter() - t_start
    remaining = None if cfg.total_time_limit is None else max(cfg.total_time_limit - time_sdp, 1e-3)
    cp = cp_only_solve(g, remaining)
    now = time.perf_counter()
    return RunReport(
        name=name,
        n=g.n,
        m=g.m,
        theta=math.nan,
        round_value=0,
        best_value=cp.best_value if cp.best_value is not None else 0,
        best_discrepancy=0,
        time_sdp=time_sdp,
        time_subproblems=cp.elapsed,
        time_total=now - t_start,
        backtracks=cp.backtracks,
        proven_optimal=cp.status is CpStatus.OPTIMAL,
        best_set=cp.best_set or frozenset(),
        degraded=True,
        warnings=[f"relaxation failed: {why}"],
    )


@dataclass
class BenchRow:
    name: str
    report: RunReport | None
    baseline: CpResult | None
    error: str | None = None


BENCH_COLUMNS = REPORT_COLUMNS + ("cp_best", "cp_time", "cp_backtracks", "cp_optimal")


def run_bench(
    instances: Sequence[str | Path | tuple[str, WeightedGraph]],
    cfg: HybridConfig = HybridConfig(),
    baseline_time_limit: float | None = 100.0,
) -> list[BenchRow]:
    """Hybrid solve plus the plain CP baseline on each instance.

    Instances are DIMACS paths or ``(name, graph)`` pairs. Unreadable files
    become rows with ``error`` set; the run continues.
    """
    rows = []
    for inst in instances:
        if isinstance(inst, tuple):
            name, g = inst
        else:
            name = Path(inst).name
            try:
                g = read_dimacs(inst)
            except (OSError, ValueError) as exc:
                log.warning("skipping %s: %s", inst, exc)
                rows.append(BenchRow(name, None, None, str(exc)))
                continue
        report = hybrid_solve(g, cfg, name=name)
        baseline = cp_only_solve(g, baseline_time_limit)
        rows.append(BenchRow(name, report, baseline))
    return rows


def format_bench_tsv(rows: Iterable[BenchRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, delimiter="\t", lineterminator="\n")
    writer.writerow(BENCH_COLUMNS + ("error",))
    for row in rows:
        if row.report is None:
            writer.writerow([row.name] + [""] * (len(BENCH_COLUMNS) - 1) + [row.error or ""])
            continue
        base = row.report.row()
        cells = [_fmt(base[c]) for c in REPORT_COLUMNS]
        b = row.baseline
        cells += [
            _fmt(b.best_value) if b.best_value is not None else "",
            _fmt(b.elapsed),
            str(b.backtracks),
            str(int(b.status is CpStatus.OPTIMAL)),
        ]
        writer.writerow(cells + [""])
    return out.getvalue()


def report_dict(r: RunReport) -> dict:
    d = asdict(r)
    d["best_set"] = sorted(r.best_set)
    d["v0"] = list(r.v0)
    return d
