"""Cut-point experiments on St(n, p).

Each trial shoots a unit-speed geodesic of length ``mu`` from ``[I_p; 0]``,
computes the Riemannian logarithm of its endpoint and records whether a
strictly shorter connecting geodesic came back. Every trial draws from its
own counter-based random stream keyed on ``(seed, n, p, rank, mu index,
trial)``, so results do not depend on sweep order.
"""

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import logmap
from .errors import LogBranchBoundary, NoConvergence, UnreachableRank
from .stiefel import (
    StiefelPoint,
    exp_tangent,
    max_curvature_pair,
    random_tangent,
    random_tangent_rank,
)

CUT_MARGIN = 1e-6
EXPERIMENTS = ("rank-scan", "np-scan", "mu-scan", "maxcurv-scan", "so2-scan", "verify-cutpoint")

TRIAL_COLUMNS = [
    "experiment", "n", "p", "rank", "mu", "seed", "trial",
    "log_status", "recovered_length", "shorter_found", "margin",
]
NP_SUMMARY_COLUMNS = ["n", "p", "trials", "hits", "hit_rate"]
SO2_COLUMNS = [
    "n", "iteration", "mu", "candidates_found", "shortest_length", "mu_next", "max_curvature",
]


def fmt(x):
    """Float formatting used in every CSV (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    experiment_name: str = "rank-scan"
    n_values: tuple = (4, 10)
    p_values: tuple = (2, 3)
    mu_min: float = 2.8
    mu_max: float = 3.1
    mu_step: float = 0.05
    mu_values: tuple = None
    trials_per_cell: int = 100
    seed: int = 0
    out_path: str = None
    log_tol: float = logmap.DEFAULT_TOL
    log_max_iter: int = 20000
    rank: int = None
    max_curvature: bool = False
    grid: int = logmap.DEFAULT_GRID
    so2_iterations: int = 250
    so2_mu_start: float = 3.2
    so2_mu_decrement: float = 0.01

    def __post_init__(self):
        if self.experiment_name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment_name!r}")
        self.n_values = tuple(int(n) for n in self.n_values)
        self.p_values = tuple(int(p) for p in self.p_values)
        if not self.n_values or not self.p_values:
            raise ValueError("n and p ranges must be nonempty")
        if min(self.p_values) < 1 or max(self.p_values) > min(self.n_values):
            raise ValueError("p range must lie within [1, min(n)]")
        if not self.mu_step > 0:
            raise ValueError("mu_step must be positive")
        if self.mu_min > self.mu_max:
            raise ValueError("mu_min must not exceed mu_max")
        if self.trials_per_cell < 0:
            raise ValueError("trials_per_cell must be nonnegative")
        if self.mu_values is not None:
            self.mu_values = tuple(float(m) for m in self.mu_values)

    @property
    def mus(self):
        if self.mu_values is not None:
            return self.mu_values
        count = int(math.floor((self.mu_max - self.mu_min) / self.mu_step + 1e-9)) + 1
        return tuple(round(self.mu_min + k * self.mu_step, 10) for k in range(count))


@dataclass(eq=False)
class CutRecord:
    experiment: str
    n: int
    p: int
    rank_j: int
    mu: float
    seed: int
    trial: int
    log_status: str
    recovered_length: float = None
    shorter_found: bool = False
    margin: float = None
    iterations: int = None
    exp_residual: float = None
    start: StiefelPoint = field(default=None, repr=False)
    endpoint: StiefelPoint = field(default=None, repr=False)
    recovered: object = field(default=None, repr=False)

    def row(self):
        return [
            self.experiment,
            str(self.n),
            str(self.p),
            str(self.rank_j),
            fmt(self.mu),
            str(self.seed),
            str(self.trial),
            self.log_status,
            "" if self.recovered_length is None else fmt(self.recovered_length),
            "true" if self.shorter_found else "false",
            "" if self.margin is None else fmt(self.margin),
        ]


def trial_rng(seed, *key):
    """Independent Philox stream for one trial."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def max_curvature_tangent(base, rng):
    """Random unit vector ``cos(theta) D1 + sin(theta) D2`` in the 5/4-curvature plane."""
    d1, d2 = max_curvature_pair(base)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return math.cos(theta) * d1 + math.sin(theta) * d2


def run_cut_trial(
    n,
    p,
    rank_j,
    mu,
    rng,
    *,
    max_curvature=False,
    log_tol=logmap.DEFAULT_TOL,
    log_max_iter=20000,
    seed=0,
    trial=0,
    experiment="",
):
    """Shoot a geodesic of length ``mu`` and look for a shorter one via the log map."""
    U0 = StiefelPoint.standard(n, p)
    if max_curvature:
        direction = max_curvature_tangent(U0, rng)
    else:
        direction = random_tangent_rank(U0, rank_j, rng)
    U1 = exp_tangent(direction * mu)
    record = CutRecord(experiment, n, p, rank_j, float(mu), seed, trial, "Converged",
                       start=U0, endpoint=U1)
    try:
        result = logmap.stiefel_log(U0, U1, tol=log_tol, max_iter=log_max_iter)
    except NoConvergence as exc:
        record.log_status = "NoConvergence"
        record.iterations = exc.iterations
        return record
    except LogBranchBoundary:
        record.log_status = "BranchBoundary"
        return record
    record.recovered = result.tangent
    record.recovered_length = result.length
    record.iterations = result.iterations
    record.exp_residual = float(np.linalg.norm(exp_tangent(result.tangent).U - U1.U))
    if result.length < mu - CUT_MARGIN and record.exp_residual <= 1e-7:
        record.shorter_found = True
        record.margin = mu - result.length
    return record


@dataclass
class ScanResult:
    records: list
    skipped_cells: list
    summary: str
    tables: dict = field(default_factory=dict)

    @property
    def hits(self):
        return [r for r in self.records if r.shorter_found]


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _sibling(path, suffix):
    if path is None:
        return None
    path = Path(path)
    return path.with_name(f"{path.stem}.{suffix}{path.suffix or '.csv'}")


def _sweep(cfg, experiment, ranks_for, force_max_curvature):
    records = []
    skipped = []
    for n in cfg.n_values:
        for p in cfg.p_values:
            if p > n:
                continue
            for rank_j in ranks_for(n, p):
                if force_max_curvature and (p < 2 or n < p + 2):
                    skipped.append((n, p, rank_j, "dimension too small for the maximal-curvature plane"))
                    continue
                for mu_idx, mu in enumerate(cfg.mus):
                    cell_records = []
                    try:
                        for trial in range(cfg.trials_per_cell):
                            rng = trial_rng(cfg.seed, n, p, rank_j, mu_idx, trial)
                            cell_records.append(run_cut_trial(
                                n, p, rank_j, mu, rng,
                                max_curvature=force_max_curvature,
                                log_tol=cfg.log_tol,
                                log_max_iter=cfg.log_max_iter,
                                seed=cfg.seed,
                                trial=trial,
                                experiment=experiment,
                            ))
                    except UnreachableRank:
                        skipped.append((n, p, rank_j, f"rank {rank_j} unreachable"))
                        break
                    records.extend(cell_records)
    return records, skipped


def _status_line(records):
    counts = Counter(r.log_status for r in records)
    return "log status: " + ", ".join(f"{k}={counts[k]}" for k in sorted(counts))


def run_rank_scan(cfg):
    """Cut trials over (n, p, rank, mu); hits are summarized per rank."""
    ranks = (lambda n, p: [cfg.rank]) if cfg.rank else (lambda n, p: range(1, p + 1))
    records, skipped = _sweep(cfg, "rank-scan", ranks, cfg.max_curvature)
    _write_csv(cfg.out_path, TRIAL_COLUMNS, [r.row() for r in records])

    by_rank = defaultdict(lambda: [0, 0])
    for r in records:
        by_rank[r.rank_j][0] += 1
        by_rank[r.rank_j][1] += r.shorter_found
    lines = ["rank,trials,hits"]
    lines += [f"{j},{t},{h}" for j, (t, h) in sorted(by_rank.items())]
    lines.append(_status_line(records))
    return ScanResult(records, skipped, "\n".join(lines), {"by_rank": dict(by_rank)})


def run_mu_scan(cfg, force_max_curvature=None):
    """Cut trials over (n, p, mu) with rank-2 (or maximal-curvature) directions."""
    if force_max_curvature is None:
        force_max_curvature = cfg.max_curvature
    rank = cfg.rank or 2
    name = "maxcurv-scan" if force_max_curvature else "mu-scan"
    records, skipped = _sweep(cfg, name, lambda n, p: [rank], force_max_curvature)
    _write_csv(cfg.out_path, TRIAL_COLUMNS, [r.row() for r in records])

    by_mu = defaultdict(lambda: [0, 0])
    for r in records:
        by_mu[r.mu][0] += 1
        by_mu[r.mu][1] += r.shorter_found
    hit_mus = [mu for mu, (_, h) in by_mu.items() if h]
    smallest = min(hit_mus) if hit_mus else None
    lines = ["mu,trials,hits"]
    lines += [f"{mu:.10g},{t},{h}" for mu, (t, h) in sorted(by_mu.items())]
    lines.append(_status_line(records))
    if smallest is None:
        lines.append("smallest μ with cut: none")
    else:
        lines.append(f"smallest μ with cut: {smallest:.10g} (±{cfg.mu_step:g} grid)")
    return ScanResult(records, skipped, "\n".join(lines),
                      {"by_mu": dict(by_mu), "smallest_mu": smallest})


def run_np_scan(cfg):
    """Cut trials over (n, p) with all ranks 1..p; hit rates per (n, p) cell.

    Writes the ``n,p,trials,hits,hit_rate`` summary to ``out_path`` and, next
    to it, the per-trial records (``.trials.csv``) and an n-by-p hit-rate
    matrix (``.matrix.csv``). Cells with ``n < p + 2`` are marked absent.
    """
    def ranks(n, p):
        if n < p + 2:
            return []
        return [cfg.rank] if cfg.rank else range(1, p + 1)

    records, skipped = _sweep(cfg, "np-scan", ranks, cfg.max_curvature)
    for n in cfg.n_values:
        for p in cfg.p_values:
            if p <= n < p + 2:
                skipped.append((n, p, None, "absent: n < p + 2"))

    cells = defaultdict(lambda: [0, 0])
    for r in records:
        cells[(r.n, r.p)][0] += 1
        cells[(r.n, r.p)][1] += r.shorter_found

    summary_rows = []
    matrix_rows = []
    for n in cfg.n_values:
        mrow = [str(n)]
        for p in cfg.p_values:
            if (n, p) in cells and cells[(n, p)][0] > 0:
                t, h = cells[(n, p)]
                summary_rows.append([str(n), str(p), str(t), str(h), fmt(h / t)])
                mrow.append(fmt(h / t))
            else:
                summary_rows.append([str(n), str(p), "0", "0", "NA"])
                mrow.append("NA")
        matrix_rows.append(mrow)

    summary_text = _write_csv(cfg.out_path, NP_SUMMARY_COLUMNS, summary_rows)
    _write_csv(_sibling(cfg.out_path, "trials"), TRIAL_COLUMNS, [r.row() for r in records])
    matrix_text = _write_csv(_sibling(cfg.out_path, "matrix"),
                             ["n\\p"] + [str(p) for p in cfg.p_values], matrix_rows)
    rates = {k: v[1] / v[0] for k, v in cells.items() if v[0]}
    return ScanResult(records, skipped, summary_text + "\n" + matrix_text + _status_line(records),
                      {"cells": dict(cells), "hit_rate": rates})


@dataclass(eq=False)
class SO2Row:
    n: int
    iteration: int
    mu: float
    candidates_found: int
    shortest_length: float
    mu_next: float
    max_curvature: bool
    shorter: object = field(default=None, repr=False)
    start: StiefelPoint = field(default=None, repr=False)
    endpoint: StiefelPoint = field(default=None, repr=False)

    def row(self):
        return [
            str(self.n),
            str(self.iteration),
            fmt(self.mu),
            str(self.candidates_found),
            "" if self.shortest_length is None else fmt(self.shortest_length),
            fmt(self.mu_next),
            "true" if self.max_curvature else "false",
        ]


@dataclass
class SO2Result:
    rows: list
    final_mu: dict
    summary: str


def run_so2_experiment(cfg):
    """Shrinking-length search for shorter geodesics on St(n, 2) via the alpha scan.

    Starting at ``so2_mu_start``, each iteration shoots a random unit
    geodesic of the current length; whenever the scan finds a strictly
    shorter connecting geodesic the length is reduced by
    ``so2_mu_decrement``. The final value per n is the smallest length at
    which a shorter geodesic was found (the start length if none was).
    """
    rows = []
    final = {}
    for n in cfg.n_values:
        if n < 4:
            continue
        U0 = StiefelPoint.standard(n, 2)
        hits = 0
        mu = cfg.so2_mu_start
        smallest = None
        for it in range(cfg.so2_iterations):
            rng = trial_rng(cfg.seed, n, 2, 0, 0, it)
            if cfg.max_curvature:
                direction = max_curvature_tangent(U0, rng)
            else:
                direction = random_tangent(U0, rng)
            U1 = exp_tangent(direction * mu)
            cands = logmap.so2_scan(U0, U1, grid_size=cfg.grid, tol=cfg.log_tol)
            shorter = [c for c in cands if c.length < mu - CUT_MARGIN]
            if shorter:
                hits += 1
                smallest = mu if smallest is None else min(smallest, mu)
                mu_next = round(cfg.so2_mu_start - cfg.so2_mu_decrement * hits, 10)
            else:
                mu_next = mu
            rows.append(SO2Row(
                n, it, mu, len(cands),
                cands[0].length if cands else None,
                mu_next, cfg.max_curvature,
                shorter=shorter[0] if shorter else None,
                start=U0, endpoint=U1,
            ))
            mu = mu_next
        final[n] = cfg.so2_mu_start if smallest is None else smallest

    _write_csv(cfg.out_path, SO2_COLUMNS, [r.row() for r in rows])
    lines = ["n,final_smallest_mu"] + [f"{n},{mu:.10g}" for n, mu in final.items()]
    return SO2Result(rows, final, "\n".join(lines))


def run_experiment(cfg):
    """Dispatch on ``cfg.experiment_name``; returns the result object."""
    name = cfg.experiment_name
    if name == "rank-scan":
        return run_rank_scan(cfg)
    if name == "np-scan":
        return run_np_scan(cfg)
    if name == "mu-scan":
        return run_mu_scan(cfg)
    if name == "maxcurv-scan":
        return run_mu_scan(replace(cfg, max_curvature=True), force_max_curvature=True)
    if name == "so2-scan":
        return run_so2_experiment(cfg)
    raise ValueError(f"{name!r} is not a sweep experiment")
