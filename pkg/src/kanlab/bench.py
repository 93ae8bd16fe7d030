"""Grid-search orchestration: enumerate (task, architecture, scheme,
seed) jobs, run them in a bounded worker pool, append rows to a results
CSV that doubles as the resume journal, and aggregate by median.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

import numpy as np

from ._perf import tune_allocator
from .initschemes import InitScheme, apply_scheme
from .network import build_network
from .optim import train_fit
from .pde import PDE_KINDS, load_reference_solution, make_problem, train_pde
from .targets import make_task

RESULT_COLUMNS = (
    "task",
    "depth",
    "width",
    "G",
    "scheme",
    "alpha",
    "beta",
    "seed",
    "final_loss",
    "rel_l2",
    "diverged",
    "wall_time_s",
)


@dataclass(frozen=True)
class ResultRow:
    task: str
    depth: int
    width: int
    G: int
    scheme: str
    alpha: float
    beta: float
    seed: int
    final_loss: float
    rel_l2: float
    diverged: bool
    wall_time_s: float

    def key(self):
        return (
            self.task,
            self.depth,
            self.width,
            self.G,
            self.scheme,
            self.alpha,
            self.beta,
            self.seed,
        )

    def setting(self):
        return (self.task, self.depth, self.width, self.G)


@dataclass
class GridSearchConfig:
    tasks: list[str]
    depths: list[int]
    widths: list[int]
    grid_sizes: list[int]
    schemes: list[InitScheme]
    seeds: list[int]
    epochs: int
    k: int = 3
    n_train: int = 4000
    pde_grid_side: int = 64
    pde_bc_each: int = 64
    lr: float = 1e-3
    reference_paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tasks", "depths", "widths", "grid_sizes", "schemes", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"empty config list: {name}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")

    def jobs(self) -> list[dict]:
        out = []
        for task in self.tasks:
            for depth in self.depths:
                for width in self.widths:
                    for G in self.grid_sizes:
                        for scheme in self.schemes:
                            for seed in self.seeds:
                                out.append(
                                    {
                                        "task": task,
                                        "depth": depth,
                                        "width": width,
                                        "G": G,
                                        "scheme_kind": scheme.kind,
                                        "alpha": scheme.alpha,
                                        "beta": scheme.beta,
                                        "seed": seed,
                                        "epochs": self.epochs,
                                        "k": self.k,
                                        "n_train": self.n_train,
                                        "pde_grid_side": self.pde_grid_side,
                                        "pde_bc_each": self.pde_bc_each,
                                        "lr": self.lr,
                                        "reference": self.reference_paths.get(task),
                                    }
                                )
        return out


def expand_schemes(
    kinds: list[str],
    alphas: tuple[float, ...],
    betas: tuple[float, ...],
) -> list[InitScheme]:
    """Power-law fans out over the exponent grid; other kinds pass through."""
    out = []
    for kind in kinds:
        if kind == "power-law":
            out.extend(
                InitScheme("power-law", a, b) for a in alphas for b in betas
            )
        else:
            out.append(InitScheme(kind))
    return out


def run_single(job: dict) -> ResultRow:
    """Train one configuration; divergence is recorded, never raised."""
    scheme = InitScheme(job["scheme_kind"], job["alpha"], job["beta"])
    seed = job["seed"]
    if job["task"] in PDE_KINDS:
        problem = make_problem(
            job["task"],
            seed=seed,
            n_grid_side=job["pde_grid_side"],
            n_bc_each=job["pde_bc_each"],
        )
        net = build_network([2, *([job["width"]] * job["depth"]), 1], G=job["G"], k=job["k"])
        apply_scheme(net, scheme, seed)
        reference = None
        if job.get("reference"):
            reference = load_reference_solution(job["reference"])
        record = train_pde(
            net, problem, job["epochs"], seed, lr=job["lr"], reference=reference
        )
    else:
        task = make_task(job["task"], n_train=job["n_train"])
        net = build_network(
            [task.input_dim, *([job["width"]] * job["depth"]), 1],
            G=job["G"],
            k=job["k"],
        )
        apply_scheme(net, scheme, seed)
        record = train_fit(net, task, job["epochs"], seed, lr=job["lr"])
    return ResultRow(
        task=job["task"],
        depth=job["depth"],
        width=job["width"],
        G=job["G"],
        scheme=scheme.kind,
        alpha=scheme.alpha,
        beta=scheme.beta,
        seed=seed,
        final_loss=float("inf") if record.diverged else record.final_loss,
        rel_l2=float("nan") if record.diverged else record.rel_l2,
        diverged=record.diverged,
        wall_time_s=record.wall_time_s,
    )


def write_rows(path: str, rows: list[ResultRow], append: bool = False) -> None:
    mode = "a" if append and os.path.exists(path) else "w"
    with open(path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.task,
                    r.depth,
                    r.width,
                    r.G,
                    r.scheme,
                    repr(r.alpha),
                    repr(r.beta),
                    r.seed,
                    repr(r.final_loss),
                    repr(r.rel_l2),
                    int(r.diverged),
                    f"{r.wall_time_s:.3f}",
                ]
            )


def read_rows(path: str) -> list[ResultRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RESULT_COLUMNS:
            raise ValueError(f"unexpected results header in {path}")
        for rec in reader:
            rows.append(
                ResultRow(
                    task=rec["task"],
                    depth=int(rec["depth"]),
                    width=int(rec["width"]),
                    G=int(rec["G"]),
                    scheme=rec["scheme"],
                    alpha=float(rec["alpha"]),
                    beta=float(rec["beta"]),
                    seed=int(rec["seed"]),
                    final_loss=float(rec["final_loss"]),
                    rel_l2=float(rec["rel_l2"]),
                    diverged=bool(int(rec["diverged"])),
                    wall_time_s=float(rec["wall_time_s"]),
                )
            )
    return rows


def worker_count() -> int:
    env = os.environ.get("KANLAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_grid(
    config: GridSearchConfig, out_path: str, max_workers: int | None = None
) -> list[ResultRow]:
    """Run every job not already present in ``out_path``.

    Rows are appended through this single process as workers finish, so
    an interrupted sweep resumes by rerunning with the same output file.
    Results are independent of worker completion order.
    """
    done: dict[tuple, ResultRow] = {}
    if os.path.exists(out_path):
        for row in read_rows(out_path):
            done[row.key()] = row
    pending = [
        job
        for job in config.jobs()
        if (
            job["task"],
            job["depth"],
            job["width"],
            job["G"],
            job["scheme_kind"],
            job["alpha"],
            job["beta"],
            job["seed"],
        )
        not in done
    ]
    if max_workers is None:
        max_workers = worker_count()
    new_rows: list[ResultRow] = []
    if pending:
        if max_workers == 1:
            for job in pending:
                row = run_single(job)
                write_rows(out_path, [row], append=True)
                new_rows.append(row)
        else:
            with ProcessPoolExecutor(
                max_workers=max_workers, initializer=tune_allocator
            ) as pool:
                futures = [pool.submit(run_single, job) for job in pending]
                for fut in as_completed(futures):
                    row = fut.result()
                    write_rows(out_path, [row], append=True)
                    new_rows.append(row)
    elif not os.path.exists(out_path):
        write_rows(out_path, [])
    return list(done.values()) + new_rows


def _lower_median(values: list[float]) -> float:
    """Median with the lower-median convention for even counts; NaN sorts
    worst (diverged/unavailable metrics never look good)."""
    vals = sorted(values, key=lambda v: (math.isnan(v), v))
    return vals[(len(vals) - 1) // 2]


def aggregate_median(rows: list[ResultRow]) -> list[ResultRow]:
    """One row per (setting, scheme, alpha, beta): component-wise medians.

    Raises:
        ValueError: if seed sets differ between configurations.
    """
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault(r.key()[:-1], []).append(r)
    seed_sets = {frozenset(r.seed for r in g) for g in groups.values()}
    if len(seed_sets) > 1:
        raise ValueError("incomplete seed set: configurations disagree on seeds")
    out = []
    for key, g in sorted(groups.items()):
        out.append(
            replace(
                g[0],
                seed=-1,
                final_loss=_lower_median([r.final_loss for r in g]),
                rel_l2=_lower_median([r.rel_l2 for r in g]),
                diverged=all(r.diverged for r in g),
                wall_time_s=float(sum(r.wall_time_s for r in g)),
            )
        )
    return out


def best_power_law(rows: list[ResultRow]) -> list[ResultRow]:
    """Keep the best (alpha, beta) per setting among power-law rows.

    Argmin of final loss; ties break by lower rel-L2, then lexicographic
    (alpha, beta).  Non-power-law rows pass through untouched.
    """
    others = [r for r in rows if r.scheme != "power-law"]
    pl: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        if r.scheme == "power-law":
            pl.setdefault(r.setting(), []).append(r)
    winners = []
    for setting, candidates in sorted(pl.items()):
        winners.append(
            min(
                candidates,
                key=lambda r: (
                    math.isnan(r.final_loss),
                    r.final_loss,
                    math.isnan(r.rel_l2),
                    r.rel_l2,
                    r.alpha,
                    r.beta,
                ),
            )
        )
    return others + winners


def compare_vs_baseline(rows: list[ResultRow]) -> dict[tuple[str, str], dict[str, float]]:
    """Percentage of settings where each scheme beats baseline (strict).

    Input should be median rows with power-law already reduced to its
    best configuration per setting.  Metrics: final loss, relative L2,
    and both simultaneously.

    Raises:
        ValueError: if any setting lacks a baseline row.
    """
    baseline: dict[tuple, ResultRow] = {}
    for r in rows:
        if r.scheme == "baseline":
            baseline[r.setting()] = r
    table: dict[tuple[str, str], dict[str, float]] = {}
    per_scheme: dict[tuple[str, str], list[ResultRow]] = {}
    for r in rows:
        if r.scheme == "baseline":
            continue
        per_scheme.setdefault((r.task, r.scheme), []).append(r)
    for (task, scheme), group in sorted(per_scheme.items()):
        n = len(group)
        wins_loss = wins_l2 = wins_both = 0
        for r in group:
            if r.setting() not in baseline:
                raise ValueError(f"missing baseline for setting {r.setting()}")
            b = baseline[r.setting()]
            better_loss = r.final_loss < b.final_loss
            better_l2 = r.rel_l2 < b.rel_l2  # False when either side is NaN
            wins_loss += better_loss
            wins_l2 += better_l2
            wins_both += better_loss and better_l2
        table[(task, scheme)] = {
            "loss_pct": 100.0 * wins_loss / n,
            "l2_pct": 100.0 * wins_l2 / n,
            "both_pct": 100.0 * wins_both / n,
        }
    return table
