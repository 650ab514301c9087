"""Command-line driver: ``spdiff {prepare,evaluate,sweep,sparsity,tune,synth}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines, then command-line flags (last wins). Every output is
written to a temporary file and renamed into place, and starts with
``# key=value`` lines echoing the resolved configuration.
"""

import argparse
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
import logging
import os
from pathlib import Path
import sys
import tempfile

import numpy as np

from .data import (SplitSpec, read_idmap, read_manifest, read_ratings, split_three,
                   split_two, synth_dataset, threshold_filter, write_idmap, write_manifest)
from .diffusion import ALGORITHMS, params_for, recommend_all
from .errors import SpdiffError, SpecError
from .graph import LinkSet, build_graph
from .harness import (GridSpec, default_lambda_grid, default_theta_grid, run_grid,
                      sparsity_study, tune_compare, write_header)
from .metrics import CSV_HEADER, evaluate

log = logging.getLogger("spdiff")

DEFAULTS = {
    "data": None,
    "delim": "\t",
    "min_rating": 3,
    "probe_frac": 0.1,
    "test_frac": None,
    "seed": 42,
    "seeds": "0,1,2,3,4",
    "theta": None,
    "lambda": None,
    "theta_grid": "0.2:4.0:0.2",
    "lambda_grid": "0:1:0.02",
    "L": 20,
    "algo": "hybrid-pref",
    "out": ".",
    "workers": None,
    "p_values": "0.1:0.9:0.1",
    "rs_norm": "uncollected",
    "users": 3000,
    "items": 3000,
    "links": 197248,
}

MANIFEST = "split.manifest"
IDMAP = "idmap.tsv"


class UsageError(SpdiffError):
    """Bad or inconsistent command-line usage."""


def parse_values(text):
    """``"a,b,c"`` or inclusive ``"start:stop:step"`` -> tuple of floats."""
    text = str(text).strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise UsageError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = parts
        n = int(round((stop - start) / step))
        return tuple(round(start + k * step, 10) for k in range(n + 1))
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_seeds(text):
    text = str(text).strip()
    if ":" in text:
        lo, hi = (int(x) for x in text.split(":"))
        return tuple(range(lo, hi + 1))
    return tuple(int(x) for x in text.split(",") if x.strip())


def parse_delim(text):
    named = {"tab": "\t", "\\t": "\t", "space": " ", "whitespace": None,
             "comma": ",", "::": "::"}
    return named.get(text, text)


def read_config(path):
    """``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


@dataclass
class RunConfig:
    command: str
    data: str | None = None
    delim: str | None = "\t"
    min_rating: int = 3
    probe_frac: float = 0.1
    test_frac: float | None = None
    seed: int = 42
    seeds: tuple = (0, 1, 2, 3, 4)
    theta: float | None = None
    lam: float | None = None
    theta_grid: tuple = field(default_factory=default_theta_grid)
    lambda_grid: tuple = field(default_factory=default_lambda_grid)
    L: int = 20
    algo: tuple = ("hybrid-pref",)
    out: str = "."
    workers: int = 1
    p_values: tuple = ()
    rs_norm: str = "uncollected"
    users: int = 3000
    items: int = 3000
    links: int = 197248

    def validate(self):
        if self.command != "synth" and not self.data:
            raise UsageError("--data is required")
        if self.rs_norm not in ("uncollected", "catalog"):
            raise UsageError("--rs-norm must be 'uncollected' or 'catalog'")
        if self.L < 1:
            raise UsageError("--L must be >= 1")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        try:
            SplitSpec(self.probe_frac, self.test_frac, self.seed)
        except SpecError as exc:
            raise UsageError(str(exc)) from None
        for algo in self.algo:
            if algo not in ALGORITHMS:
                raise UsageError(f"unknown --algo {algo!r}")
        # with several selectors, free values only go to those that take them
        if len(self.algo) == 1:
            fixed_lam, fixed_theta = ALGORITHMS[self.algo[0]]
            algo = self.algo[0]
            if fixed_theta is not None and self.theta not in (None, fixed_theta):
                raise UsageError(f"--algo {algo} fixes theta={fixed_theta}")
            if fixed_lam is not None and self.lam not in (None, fixed_lam):
                raise UsageError(f"--algo {algo} fixes lambda={fixed_lam}")
        return self

    def echo(self, keys):
        """Header mapping for output files (excludes ``workers`` and ``out``)."""
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        out = {"command": self.command}
        for key in keys:
            value = d[key]
            if isinstance(value, tuple):
                value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif key == "delim":
                value = repr(value)
            out[key] = value
        return out


def resolve(args):
    """Merge defaults, config file and explicit flags into a validated RunConfig."""
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            merged[key] = value
    try:
        cfg = RunConfig(
            command=args.command,
            data=merged["data"],
            delim=parse_delim(merged["delim"]),
            min_rating=int(merged["min_rating"]),
            probe_frac=float(merged["probe_frac"]),
            test_frac=None if merged["test_frac"] in (None, "") else float(merged["test_frac"]),
            seed=int(merged["seed"]),
            seeds=parse_seeds(merged["seeds"]),
            theta=None if merged["theta"] in (None, "") else float(merged["theta"]),
            lam=None if merged["lambda"] in (None, "") else float(merged["lambda"]),
            theta_grid=parse_values(merged["theta_grid"]),
            lambda_grid=parse_values(merged["lambda_grid"]),
            L=int(merged["L"]),
            algo=tuple(a.strip() for a in str(merged["algo"]).split(",") if a.strip()),
            out=str(merged["out"]),
            workers=int(merged["workers"] or os.cpu_count() or 1),
            p_values=parse_values(merged["p_values"]),
            rs_norm=str(merged["rs_norm"]),
            users=int(merged["users"]),
            items=int(merged["items"]),
            links=int(merged["links"]),
        )
    except ValueError as exc:
        if isinstance(exc, SpdiffError):
            raise
        raise UsageError(str(exc)) from None
    return cfg.validate()


@contextmanager
def atomic_write(path):
    """Open ``path`` for writing via a temp file renamed into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(cfg):
    records = read_ratings(cfg.data, cfg.delim)
    links, idmap = threshold_filter(records, cfg.min_rating)
    raw_items = len({r.raw_item_id for r in records})
    catalog = raw_items if cfg.rs_norm == "catalog" else None
    log.info("%s: %d ratings, %d links (rating >= %d), %d users x %d items",
             cfg.data, len(records), len(links), cfg.min_rating, idmap.num_users, idmap.num_items)
    return links, idmap, catalog


def _split_from_manifest(cfg, links, idmap):
    path = Path(cfg.out) / MANIFEST
    if not path.exists():
        raise UsageError(f"{path} not found; run 'spdiff prepare' first")
    with open(path, encoding="utf-8") as fh:
        header, parts = read_manifest(fh)
    with open(Path(cfg.out) / IDMAP, encoding="utf-8") as fh:
        stored = read_idmap(fh)
    if stored.user_ids != idmap.user_ids or stored.item_ids != idmap.item_ids:
        raise UsageError("manifest was prepared from a different dataset or threshold")
    held_out = {name: idmap.from_raw(pairs) for name, pairs in parts.items()}
    probe = held_out.get("probe", LinkSet())
    removed = probe.as_set()
    known = [k for k, pair in enumerate(links) if pair not in removed]
    return links.take(known), probe, header.get("seed", "")


_SPLIT_KEYS = ("data", "delim", "min_rating", "probe_frac", "test_frac", "seed")
_GRID_KEYS = ("data", "delim", "min_rating", "probe_frac", "seeds", "theta_grid",
              "lambda_grid", "L", "rs_norm")


def cmd_prepare(cfg):
    links, idmap, _ = _load(cfg)
    spec = SplitSpec(cfg.probe_frac, cfg.test_frac, cfg.seed)
    if cfg.test_frac is None:
        train, probe = split_two(links, spec)
        parts = {"probe": probe}
    else:
        train, testing, probe = split_three(links, spec)
        parts = {"probe": probe, "testing": testing}
    header = cfg.echo(_SPLIT_KEYS)
    header.update(num_links=len(links), num_train=len(train),
                  **{f"num_{k}": len(v) for k, v in parts.items()})
    out = Path(cfg.out)
    with atomic_write(out / MANIFEST) as fh:
        write_manifest(fh, header, parts, idmap)
    with atomic_write(out / IDMAP) as fh:
        write_header(fh, cfg.echo(_SPLIT_KEYS[:3]))
        write_idmap(fh, idmap)
    print(f"{len(links)} links after filtering; "
          + ", ".join(f"{k}={v}" for k, v in header.items() if k.startswith("num_")))


def cmd_evaluate(cfg):
    links, idmap, catalog = _load(cfg)
    known, probe, seed = _split_from_manifest(cfg, links, idmap)
    g = build_graph(known, idmap.num_users, idmap.num_items)
    for algo in cfg.algo:
        params = params_for(algo, cfg.lam, cfg.theta)
        recs = recommend_all(g, params, workers=cfg.workers)
        report = evaluate(recs, probe, g, cfg.L, catalog_size=catalog)
        header = cfg.echo(("data", "delim", "min_rating", "L", "rs_norm"))
        header.update(algo=algo, resolved_lambda=params.lam, resolved_theta=params.theta)
        with atomic_write(Path(cfg.out) / f"evaluate_{algo}.csv") as fh:
            write_header(fh, header)
            fh.write(",".join(CSV_HEADER) + "\n")
            fh.write(report.csv_row(algo, params.lam, params.theta, seed) + "\n")
        print(f"[{algo}] lambda={params.lam} theta={params.theta}")
        print(report.to_text(), end="")


def _grid(cfg, thetas=None):
    return GridSpec(thetas or cfg.theta_grid, cfg.lambda_grid, cfg.seeds, cfg.L)


def cmd_sweep(cfg):
    links, idmap, catalog = _load(cfg)
    sweep = run_grid(links, idmap.num_users, idmap.num_items, _grid(cfg), cfg.probe_frac,
                     catalog, cfg.workers)
    header = cfg.echo(_GRID_KEYS)
    out = Path(cfg.out)
    with atomic_write(out / "sweep.csv") as fh:
        sweep.write_csv(fh, header)
    with atomic_write(out / "sweep_summary.csv") as fh:
        sweep.write_summary_csv(fh, header)
    for metric in ("RS", "P", "H", "N"):
        with atomic_write(out / f"heatmap_{metric}.tsv") as fh:
            sweep.write_heatmap(fh, metric, header)
    theta, lam, rs = sweep.best
    print(f"best cell: theta={theta} lambda={lam} RS={rs:.6f}")
    if 1.0 in sweep.thetas:
        _, lam1, rs1 = sweep.argmin(theta=1.0)
        print(f"best theta=1 cell (MD+HC hybrid): lambda={lam1} RS={rs1:.6f}")


def cmd_sparsity(cfg):
    links, idmap, catalog = _load(cfg)
    curve = sparsity_study(links, idmap.num_users, idmap.num_items, cfg.p_values,
                           _grid(cfg), catalog, cfg.workers)
    header = cfg.echo(_GRID_KEYS[:3] + ("p_values",) + _GRID_KEYS[4:])
    with atomic_write(Path(cfg.out) / "sparsity.csv") as fh:
        curve.write_csv(fh, header)
    trends = curve.trends()
    log.info("Spearman(theta*, p)=%.3f  Spearman(lambda*, p)=%.3f",
             trends["theta_star"], trends["lambda_star"])
    for row in curve.rows():
        print("p={:.2f} RS*_pref={:.5f} RS*_orig={:.5f} theta*={} lambda*={}".format(*row[:5]))


def cmd_tune(cfg):
    links, idmap, catalog = _load(cfg)
    test_frac = 0.1 if cfg.test_frac is None else cfg.test_frac
    grid = _grid(cfg)
    rows, per_method = [], {"hybrid": [], "hybrid-pref": []}
    for seed in cfg.seeds:
        spec = SplitSpec(cfg.probe_frac, test_frac, seed)
        for name, res in tune_compare(links, idmap.num_users, idmap.num_items, spec, grid,
                                      catalog, cfg.workers).items():
            rows.append(res.probe.csv_row(name, res.params.lam, res.params.theta, seed))
            per_method[name].append(res.probe)
    header = cfg.echo(_GRID_KEYS[:3] + ("probe_frac", "test_frac") + _GRID_KEYS[4:])
    header["test_frac"] = test_frac
    out = Path(cfg.out)
    with atomic_write(out / "tune.csv") as fh:
        write_header(fh, header)
        fh.write(",".join(CSV_HEADER) + "\n")
        fh.write("".join(r + "\n" for r in rows))
    with atomic_write(out / "comparison.csv") as fh:
        write_header(fh, header)
        fh.write("algorithm,RS,P,H,N,n_seeds\n")
        for name, reports in per_method.items():
            means = [np.mean([getattr(r, a) for r in reports])
                     for a in ("ranking_score", "precision", "hamming", "novelty")]
            fh.write(f"{name}," + ",".join(repr(float(m)) for m in means)
                     + f",{len(reports)}\n")
            print(f"{name}: RS={means[0]:.4f} P={means[1]:.4f} H={means[2]:.4f} N={means[3]:.1f}")


def cmd_synth(cfg):
    links = synth_dataset(cfg.users, cfg.items, cfg.links, cfg.seed)
    header = cfg.echo(("seed", "users", "items", "links"))
    path = Path(cfg.out) / "synthetic.data"
    with atomic_write(path) as fh:
        write_header(fh, header)
        for u, a in links:
            fh.write(f"{u + 1}\t{a + 1}\t5\n")
    print(f"wrote {len(links)} links to {path}")


COMMANDS = {
    "prepare": cmd_prepare,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "sparsity": cmd_sparsity,
    "tune": cmd_tune,
    "synth": cmd_synth,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--data", help="ratings file (user, item, rating[, timestamp])")
    common.add_argument("--delim", help="field delimiter: tab (default), space, whitespace, comma or a literal")
    common.add_argument("--min-rating", dest="min_rating", type=int)
    common.add_argument("--probe-frac", dest="probe_frac", type=float)
    common.add_argument("--test-frac", dest="test_frac", type=float)
    common.add_argument("--seed", type=int, help="split seed for prepare, generator seed for synth")
    common.add_argument("--seeds", help="comma list or lo:hi (inclusive)")
    common.add_argument("--theta", type=float)
    common.add_argument("--lambda", dest="lambda", type=float)
    common.add_argument("--theta-grid", dest="theta_grid", help="comma list or start:stop:step")
    common.add_argument("--lambda-grid", dest="lambda_grid", help="comma list or start:stop:step")
    common.add_argument("--L", type=int, help="recommendation list length")
    common.add_argument("--algo", help="comma list of " + ", ".join(ALGORITHMS))
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int)
    common.add_argument("--p-values", dest="p_values", help="training fractions for sparsity")
    common.add_argument("--rs-norm", dest="rs_norm",
                        help="ranking-score denominator: uncollected (default) or catalog")
    common.add_argument("--users", type=int, help="synth: number of users")
    common.add_argument("--items", type=int, help="synth: number of items")
    common.add_argument("--links", type=int, help="synth: number of links")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spdiff", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=func.__name__[4:])
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"spdiff: usage error: {exc}", file=sys.stderr)
        return 2
    except (SpdiffError, OSError) as exc:
        print(f"spdiff: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
