"""Parameter sweeps, sparsity study and the triple-division tuning protocol.

Every run is a pure function of (links, grid, seeds): one split and one
graph per seed, shared by all grid cells of that seed. Cell results are
gathered in grid order, so output files do not depend on ``workers``.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.stats import spearmanr

from .data import SplitSpec, split_sparsity, split_three, split_two
from .diffusion import (DiffusionParams, RecommendationSet, scores_from_similarity,
                        similarity_matrix)
from .errors import SpecError
from .graph import build_graph
from .metrics import CSV_HEADER, MetricsReport, evaluate, ranking_score

__all__ = [
    "GridSpec", "SweepResult", "SparsityCurve", "TuneResult",
    "default_theta_grid", "default_lambda_grid", "evaluate_cells",
    "run_grid", "sweep_theta", "sparsity_study", "tune_and_test", "tune_compare",
    "write_header",
]

log = logging.getLogger(__name__)

METRICS = {"RS": "ranking_score", "P": "precision", "H": "hamming", "N": "novelty"}


def default_theta_grid():
    """0.2, 0.4, ..., 4.0 (contains exactly 1.0)."""
    return tuple(round(0.2 * k, 10) for k in range(1, 21))


def default_lambda_grid():
    """0.00, 0.02, ..., 1.00."""
    return tuple(round(0.02 * k, 10) for k in range(51))


@dataclass(frozen=True)
class GridSpec:
    theta_values: tuple = field(default_factory=default_theta_grid)
    lambda_values: tuple = field(default_factory=default_lambda_grid)
    seeds: tuple = (0, 1, 2, 3, 4)
    L: int = 20

    def __post_init__(self):
        object.__setattr__(self, "theta_values", tuple(float(t) for t in self.theta_values))
        object.__setattr__(self, "lambda_values", tuple(float(v) for v in self.lambda_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not (self.theta_values and self.lambda_values and self.seeds):
            raise SpecError("grid lists must be non-empty")
        if any(not t > 0 for t in self.theta_values):
            raise SpecError("theta values must be > 0")
        if any(not 0.0 <= v <= 1.0 for v in self.lambda_values):
            raise SpecError("lambda values must lie in [0, 1]")
        for name in ("theta_values", "lambda_values", "seeds"):
            values = getattr(self, name)
            if len(set(values)) != len(values):
                raise SpecError(f"duplicate entries in {name}")
        if self.L < 1:
            raise SpecError("L must be >= 1")


def evaluate_cells(g, probe, thetas, lam, L=20, catalog_size=None, full=True):
    """MetricsReports for every theta at one lambda on one graph.

    The first diffusion pass depends only on lambda and is shared by all
    thetas. With ``full=False`` only the ranking score is computed.
    """
    warm = np.flatnonzero(g.user_degree > 0)
    skipped_users = g.num_users - len(warm)
    collected = g.collected_mask(warm)
    f = similarity_matrix(g, lam, warm)
    reports = []
    for theta in thetas:
        scores = scores_from_similarity(g, f, lam, theta)
        recs = RecommendationSet(warm, scores, collected, skipped_users)
        if full:
            reports.append(evaluate(recs, probe, g, L, catalog_size=catalog_size))
        else:
            rs, skipped = ranking_score(recs, probe, g, catalog_size=catalog_size)
            reports.append(MetricsReport(rs, None, None, None, L, len(probe) - skipped,
                                         skipped, len(recs)))
    return reports


def _cell_task(args):
    train, probe, num_users, num_items, thetas, lam, L, catalog_size, full = args
    g = build_graph(train, num_users, num_items)
    return evaluate_cells(g, probe, thetas, lam, L, catalog_size, full)


def _run_tasks(tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell_task, tasks))
    return [_cell_task(t) for t in tasks]


class SweepResult:
    """Per-(seed, theta, lambda) reports with seed statistics and the RS optimum."""

    def __init__(self, grid, reports, algorithm="hybrid-pref"):
        self.grid = grid
        self.reports = reports
        self.algorithm = algorithm

    @property
    def thetas(self):
        return self.grid.theta_values

    @property
    def lambdas(self):
        return self.grid.lambda_values

    def values(self, metric="RS"):
        """Array (seeds, thetas, lambdas); undefined metrics are NaN."""
        attr = METRICS[metric]
        out = np.full((len(self.grid.seeds), len(self.thetas), len(self.lambdas)), np.nan)
        for s, seed in enumerate(self.grid.seeds):
            for t, theta in enumerate(self.thetas):
                for v, lam in enumerate(self.lambdas):
                    value = getattr(self.reports[seed, theta, lam], attr)
                    if value is not None:
                        out[s, t, v] = value
        return out

    def mean(self, metric="RS"):
        return self.values(metric).mean(axis=0)

    def std(self, metric="RS"):
        vals = self.values(metric)
        if vals.shape[0] < 2:
            return np.zeros(vals.shape[1:])
        return vals.std(axis=0, ddof=1)

    def argmin(self, metric="RS", theta=None, seed=None):
        """Cell minimising ``metric`` as ``(theta, lambda, value)``.

        Uses the seed mean unless ``seed`` is given; ``theta`` pins one row.
        Ties go to the lexicographically smallest (theta, lambda).
        """
        if seed is None:
            table = self.mean(metric)
        else:
            table = self.values(metric)[self.grid.seeds.index(seed)]
        best = None
        for t in np.argsort(self.thetas, kind="stable"):
            if theta is not None and self.thetas[t] != theta:
                continue
            for v in np.argsort(self.lambdas, kind="stable"):
                value = table[t, v]
                if math.isnan(value):
                    continue
                if best is None or value < best[2]:
                    best = (self.thetas[t], self.lambdas[v], float(value))
        if best is None:
            raise SpecError("no cell matches the requested restriction")
        return best

    @property
    def best(self):
        return self.argmin()

    def write_csv(self, fh, header=None):
        write_header(fh, header)
        fh.write(",".join(CSV_HEADER) + "\n")
        for seed in self.grid.seeds:
            for theta in self.thetas:
                for lam in self.lambdas:
                    rep = self.reports[seed, theta, lam]
                    fh.write(rep.csv_row(self.algorithm, lam, theta, seed) + "\n")

    def write_summary_csv(self, fh, header=None):
        write_header(fh, header)
        cols = ["theta", "lambda", "n_seeds"]
        for m in METRICS:
            cols += [f"{m}_mean", f"{m}_std"]
        fh.write(",".join(cols) + "\n")
        means = {m: self.mean(m) for m in METRICS}
        stds = {m: self.std(m) for m in METRICS}
        for t, theta in enumerate(self.thetas):
            for v, lam in enumerate(self.lambdas):
                row = [repr(theta), repr(lam), str(len(self.grid.seeds))]
                for m in METRICS:
                    row += [_num(means[m][t, v]), _num(stds[m][t, v])]
                fh.write(",".join(row) + "\n")

    def write_heatmap(self, fh, metric="RS", header=None):
        """Seed-mean ``metric`` as a TSV matrix: rows theta ascending, columns lambda ascending."""
        write_header(fh, header)
        table = self.mean(metric)
        t_order = np.argsort(self.thetas, kind="stable")
        v_order = np.argsort(self.lambdas, kind="stable")
        fh.write("theta\\lambda\t" + "\t".join(repr(self.lambdas[v]) for v in v_order) + "\n")
        for t in t_order:
            fh.write(repr(self.thetas[t]) + "\t"
                     + "\t".join(_num(table[t, v]) for v in v_order) + "\n")


def _num(x):
    return "" if math.isnan(x) else repr(float(x))


def write_header(fh, header):
    """Echo a config mapping as ``# key=value`` comment lines."""
    for key, value in (header or {}).items():
        fh.write(f"# {key}={value}\n")


def run_grid(links, num_users, num_items, grid, probe_fraction=0.1, catalog_size=None,
             workers=1, full=True, algorithm="hybrid-pref", splitter=None):
    """Evaluate every (theta, lambda) cell on one random split per seed.

    ``splitter(links, seed) -> (train, probe)`` overrides the default 90/10
    division (the sparsity study passes its own).
    """
    if splitter is None:
        def splitter(links, seed):
            return split_two(links, SplitSpec(probe_fraction, seed=seed))
    tasks, keys = [], []
    for seed in grid.seeds:
        train, probe = splitter(links, seed)
        if not len(train):
            raise SpecError(f"seed {seed}: split leaves an empty training set")
        log.info("seed %d: %d training / %d probe links", seed, len(train), len(probe))
        for lam in grid.lambda_values:
            tasks.append((train, probe, num_users, num_items, grid.theta_values, lam,
                          grid.L, catalog_size, full))
            keys.append((seed, lam))
    reports = {}
    for (seed, lam), cell_reports in zip(keys, _run_tasks(tasks, workers)):
        for theta, rep in zip(grid.theta_values, cell_reports):
            reports[seed, theta, lam] = rep
    return SweepResult(grid, reports, algorithm)


def sweep_theta(links, num_users, num_items, theta_values, lambda_fixed=1.0, seeds=(0,),
                L=20, probe_fraction=0.1, catalog_size=None, workers=1, full=True):
    """One-dimensional theta sweep with lambda pinned (SPMD when lambda is 1)."""
    grid = GridSpec(theta_values, (lambda_fixed,), seeds, L)
    return run_grid(links, num_users, num_items, grid, probe_fraction, catalog_size,
                    workers, full, algorithm="spmd" if lambda_fixed == 1.0 else "hybrid-pref")


@dataclass
class SparsityCurve:
    """Optimal RS of both hybrids at each training fraction ``p``."""

    p_values: tuple
    rs_pref: list
    rs_orig: list
    theta_star: list
    lambda_star: list
    lambda_star_orig: list
    rs_pref_std: list
    rs_orig_std: list
    n_seeds: int

    def rows(self):
        for k, p in enumerate(self.p_values):
            yield (p, self.rs_pref[k], self.rs_orig[k], self.theta_star[k], self.lambda_star[k],
                   self.lambda_star_orig[k], self.rs_pref_std[k], self.rs_orig_std[k])

    def trends(self):
        """Spearman correlation of theta* and lambda* with p (NaN if constant)."""
        out = {}
        for name, seq in (("theta_star", self.theta_star), ("lambda_star", self.lambda_star)):
            if len(set(seq)) < 2 or len(seq) < 3:
                out[name] = float("nan")
            else:
                out[name] = float(spearmanr(self.p_values, seq).statistic)
        return out

    def write_csv(self, fh, header=None):
        write_header(fh, header)
        fh.write("p,RS*_pref,RS*_orig,theta*,lambda*,lambda*_orig,RS*_pref_std,RS*_orig_std,n_seeds\n")
        for row in self.rows():
            fh.write(",".join(repr(float(x)) for x in row) + f",{self.n_seeds}\n")


def sparsity_study(links, num_users, num_items, p_values, grid, catalog_size=None, workers=1):
    """Optimise both hybrids at each training fraction ``p``.

    The preferential hybrid is optimised over the whole grid, the original
    MD+HC hybrid over its theta=1 row, which must be in the grid.
    """
    p_values = tuple(float(p) for p in p_values)
    if any(not 0.0 < p < 1.0 for p in p_values):
        raise SpecError("p values must lie in (0, 1)")
    if list(p_values) != sorted(set(p_values)):
        raise SpecError("p values must be strictly increasing")
    if 1.0 not in grid.theta_values:
        raise SpecError("the grid must contain theta=1 for the MD+HC baseline")
    cols = {k: [] for k in ("rs_pref", "rs_orig", "theta_star", "lambda_star",
                            "lambda_star_orig", "rs_pref_std", "rs_orig_std")}
    for p in p_values:
        sweep = run_grid(links, num_users, num_items, grid, catalog_size=catalog_size,
                         workers=workers, full=False,
                         splitter=lambda links, seed, p=p: split_sparsity(links, p, seed))
        std = sweep.std("RS")
        theta, lam, rs = sweep.argmin()
        _, lam_o, rs_o = sweep.argmin(theta=1.0)
        t_i, v_i = sweep.thetas.index(theta), sweep.lambdas.index(lam)
        cols["rs_pref"].append(rs)
        cols["rs_orig"].append(rs_o)
        cols["theta_star"].append(theta)
        cols["lambda_star"].append(lam)
        cols["lambda_star_orig"].append(lam_o)
        cols["rs_pref_std"].append(float(std[t_i, v_i]))
        cols["rs_orig_std"].append(float(std[sweep.thetas.index(1.0), sweep.lambdas.index(lam_o)]))
        log.info("p=%.2f RS*_pref=%.5f (theta=%g, lambda=%g) RS*_orig=%.5f (lambda=%g)",
                 p, rs, theta, lam, rs_o, lam_o)
    return SparsityCurve(p_values, n_seeds=len(grid.seeds), **cols)


@dataclass
class TuneResult:
    params: DiffusionParams
    testing: MetricsReport
    probe: MetricsReport


def _tuning_sweep(links, num_users, num_items, spec, grid, catalog_size, workers):
    train, testing, probe = split_three(links, spec)
    one_seed = GridSpec(grid.theta_values, grid.lambda_values, (spec.seed,), grid.L)
    sweep = run_grid(links, num_users, num_items, one_seed, catalog_size=catalog_size,
                     workers=workers, full=False, splitter=lambda links, seed: (train, testing))
    return sweep, train, testing, probe


def _final(sweep, cell, train, testing, probe, num_users, num_items, L, catalog_size):
    theta, lam, _ = cell
    history = build_graph(train, num_users, num_items)
    tested = evaluate_cells(history, testing, (theta,), lam, L, catalog_size)[0]
    known = build_graph(train.concat(testing), num_users, num_items)
    final = evaluate_cells(known, probe, (theta,), lam, L, catalog_size)[0]
    return TuneResult(DiffusionParams(lam, theta), tested, final)


def tune_and_test(links, num_users, num_items, spec, grid, catalog_size=None, workers=1):
    """Choose (theta, lambda) on the testing set, then report on the probe set.

    Tuning scores recommendations built from the training set against the
    testing set. The final run treats training and testing links together
    as history and is scored against the probe set.
    """
    sweep, train, testing, probe = _tuning_sweep(links, num_users, num_items, spec, grid,
                                                 catalog_size, workers)
    return _final(sweep, sweep.argmin(), train, testing, probe, num_users, num_items,
                  grid.L, catalog_size)


def tune_compare(links, num_users, num_items, spec, grid, catalog_size=None, workers=1):
    """Tune both hybrids from one tuning sweep.

    Returns ``{"hybrid": ..., "hybrid-pref": ...}``; the MD+HC hybrid is
    restricted to the theta=1 row of the grid.
    """
    if 1.0 not in grid.theta_values:
        raise SpecError("the grid must contain theta=1 for the MD+HC baseline")
    sweep, train, testing, probe = _tuning_sweep(links, num_users, num_items, spec, grid,
                                                 catalog_size, workers)
    out = {}
    for name, cell in (("hybrid", sweep.argmin(theta=1.0)), ("hybrid-pref", sweep.argmin())):
        out[name] = _final(sweep, cell, train, testing, probe, num_users, num_items,
                           grid.L, catalog_size)
    return out
