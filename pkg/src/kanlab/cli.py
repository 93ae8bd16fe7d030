"""Command-line entry point: single runs, grid sweeps, NTK spectra,
and initialization reports, all emitting re-parseable CSV artifacts."""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys

import numpy as np

from ._perf import tune_allocator
from .bench import (
    GridSearchConfig,
    ResultRow,
    expand_schemes,
    run_grid,
    worker_count,
    write_rows,
)
from .initschemes import (
    POWER_LAW_EXPONENT_SET,
    InitScheme,
    apply_scheme,
    estimate_moments,
    glorot_sigma,
    lecun_sigma,
    power_law_sigma,
)
from .network import build_network, save_network
from .ntk import (
    BcResidualFn,
    PdeResidualFn,
    eigen_spectrum,
    fit_ntk,
    residual_jacobian,
    snapshot_iterations,
    subsample_indices,
    subsample_rows,
    weighted_ntk_blocks,
)
from .optim import config_fingerprint, train_fit
from .pde import PDE_KINDS, load_reference_solution, make_problem, train_pde
from .spline import build_knot_vector
from .targets import ALL_TARGET_IDS, FEYNMAN_IDS, make_task

SPECTRUM_COLUMNS = ("iteration", "block_id", "rank", "eigenvalue")


def _parse_seeds(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip() != ""]


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(s) for s in text.split(",") if s.strip() != "")


def _add_arch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, default=2, help="hidden layer count")
    p.add_argument("--width", type=int, default=8, help="hidden layer width")
    p.add_argument("--grid", type=int, default=5, help="spline grid intervals G")
    p.add_argument("--k", type=int, default=3, help="spline order")


def _add_init_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--init",
        default="baseline",
        choices=["baseline", "lecun-numerical", "lecun-normalized", "glorot", "power-law"],
    )
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--beta", type=float, default=1.75)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kanlab",
        description="Spline-network initialization benchmarks: fitting, PDEs, "
        "grid sweeps, and tangent-kernel spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("fit", "train on a target function (f1..f5 or a Feynman id)"),
        ("feynman", "train on a Feynman-subset formula"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--function", required=True)
        _add_arch_flags(p)
        _add_init_flags(p)
        p.add_argument("--epochs", type=int, default=2000)
        p.add_argument("--seeds", type=_parse_seeds, default=[0, 1, 2])
        p.add_argument("--n-train", type=int, default=4000)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--out", required=True)
        p.add_argument("--save-model", action="store_true")
        p.set_defaults(func=cmd_fit)

    p = sub.add_parser("pde", help="physics-informed training on a PDE benchmark")
    p.add_argument("--problem", required=True, choices=list(PDE_KINDS))
    _add_arch_flags(p)
    _add_init_flags(p)
    p.add_argument("--epochs", type=int, default=5000)
    p.add_argument("--seeds", type=_parse_seeds, default=[0, 1, 2])
    p.add_argument("--collocation-side", type=int, default=64)
    p.add_argument("--bc-points", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--reference", help="reference-solution CSV for the relative L2")
    p.add_argument("--out", required=True)
    p.add_argument("--save-model", action="store_true")
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("grid", help="run a (resumable) grid search from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--epochs", type=int, help="override the config epochs")
    p.add_argument("--seeds", type=_parse_seeds, help="override the config seeds")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("ntk", help="log tangent-kernel spectra along a training run")
    p.add_argument("--task", required=True)
    _add_arch_flags(p)
    _add_init_flags(p)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=128, help="kernel subsample size")
    p.add_argument("--n-train", type=int, default=4000)
    p.add_argument("--collocation-side", type=int, default=64)
    p.add_argument("--bc-points", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ntk)

    p = sub.add_parser("init-report", help="print scheme sigmas and basis moments")
    p.add_argument("--n-in", type=int, required=True)
    p.add_argument("--n-out", type=int, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument(
        "--scheme",
        required=True,
        choices=["baseline", "lecun-numerical", "lecun-normalized", "glorot", "power-law"],
    )
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--beta", type=float, default=1.75)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_init_report)

    return parser


def _write_loss_csv(path: str, history: list[float]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for i, v in enumerate(history, start=1):
            writer.writerow([i, repr(v)])


def _record_to_row(args, task_name, scheme, seed, record) -> ResultRow:
    return ResultRow(
        task=task_name,
        depth=args.depth,
        width=args.width,
        G=args.grid,
        scheme=scheme.kind,
        alpha=scheme.alpha,
        beta=scheme.beta,
        seed=seed,
        final_loss=float("inf") if record.diverged else record.final_loss,
        rel_l2=float("nan") if record.diverged else record.rel_l2,
        diverged=record.diverged,
        wall_time_s=record.wall_time_s,
    )


def cmd_fit(args) -> int:
    if args.command == "feynman" and args.function not in FEYNMAN_IDS:
        raise ValueError(
            f"{args.function!r} is not a Feynman id; known: {', '.join(FEYNMAN_IDS)}"
        )
    if args.function not in ALL_TARGET_IDS:
        raise ValueError(f"unknown target function {args.function!r}")
    os.makedirs(args.out, exist_ok=True)
    scheme = InitScheme(args.init, args.alpha, args.beta)
    fp = config_fingerprint(
        cmd="fit", fn=args.function, depth=args.depth, width=args.width,
        G=args.grid, k=args.k, scheme=scheme.label(), epochs=args.epochs,
        n_train=args.n_train, lr=args.lr,
    )
    task = make_task(args.function, n_train=args.n_train)
    rows = []
    for seed in args.seeds:
        net = build_network(
            [task.input_dim, *([args.width] * args.depth), 1], G=args.grid, k=args.k
        )
        apply_scheme(net, scheme, seed)
        record = train_fit(net, task, args.epochs, seed, lr=args.lr)
        rows.append(_record_to_row(args, args.function, scheme, seed, record))
        _write_loss_csv(
            os.path.join(args.out, f"loss_{fp}_seed{seed}.csv"), record.loss_history
        )
        if args.save_model:
            save_network(net, os.path.join(args.out, f"model_{fp}_seed{seed}.json"))
        print(
            f"{args.function} seed={seed}: final_loss={record.final_loss:.6g} "
            f"rel_l2={record.rel_l2:.6g} ({record.wall_time_s:.1f}s)"
        )
    write_rows(os.path.join(args.out, f"records_{fp}.csv"), rows, append=True)
    return 0


def cmd_pde(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    scheme = InitScheme(args.init, args.alpha, args.beta)
    fp = config_fingerprint(
        cmd="pde", problem=args.problem, depth=args.depth, width=args.width,
        G=args.grid, k=args.k, scheme=scheme.label(), epochs=args.epochs,
        side=args.collocation_side, bc=args.bc_points, lr=args.lr,
    )
    reference = load_reference_solution(args.reference) if args.reference else None
    rows = []
    for seed in args.seeds:
        problem = make_problem(
            args.problem,
            seed=seed,
            n_grid_side=args.collocation_side,
            n_bc_each=args.bc_points,
        )
        net = build_network([2, *([args.width] * args.depth), 1], G=args.grid, k=args.k)
        apply_scheme(net, scheme, seed)
        record = train_pde(
            net, problem, args.epochs, seed, lr=args.lr, reference=reference
        )
        rows.append(_record_to_row(args, args.problem, scheme, seed, record))
        _write_loss_csv(
            os.path.join(args.out, f"loss_{fp}_seed{seed}.csv"), record.loss_history
        )
        if args.save_model:
            save_network(net, os.path.join(args.out, f"model_{fp}_seed{seed}.json"))
        print(
            f"{args.problem} seed={seed}: final_loss={record.final_loss:.6g} "
            f"rel_l2={record.rel_l2:.6g} ({record.wall_time_s:.1f}s)"
        )
    write_rows(os.path.join(args.out, f"records_{fp}.csv"), rows, append=True)
    return 0


_GRID_KEYS = {
    "tasks", "depths", "widths", "grid_sizes", "schemes", "alphas", "betas",
    "seeds", "epochs", "k", "n_train", "pde_grid_side", "pde_bc_each", "lr",
}


def load_grid_config(path: str) -> GridSearchConfig:
    """Parse the INI-style sweep description (section [grid]).

    Unknown keys are rejected so typos fail fast instead of silently
    running the default sweep.
    """
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"config file not found: {path}")
    if "grid" not in parser:
        raise ValueError("config file needs a [grid] section")
    section = parser["grid"]
    unknown = set(section) - _GRID_KEYS - {k for k in section if k.startswith("reference.")}
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    references = {
        key.split(".", 1)[1]: section[key]
        for key in section
        if key.startswith("reference.")
    }

    def split(key, cast):
        return [cast(v.strip()) for v in section[key].split(",") if v.strip()]

    alphas = tuple(split("alphas", float)) if "alphas" in section else POWER_LAW_EXPONENT_SET
    betas = tuple(split("betas", float)) if "betas" in section else POWER_LAW_EXPONENT_SET
    schemes = expand_schemes(split("schemes", str), alphas, betas)
    return GridSearchConfig(
        tasks=split("tasks", str),
        depths=split("depths", int),
        widths=split("widths", int),
        grid_sizes=split("grid_sizes", int),
        schemes=schemes,
        seeds=split("seeds", int),
        epochs=section.getint("epochs"),
        k=section.getint("k", 3),
        n_train=section.getint("n_train", 4000),
        pde_grid_side=section.getint("pde_grid_side", 64),
        pde_bc_each=section.getint("pde_bc_each", 64),
        lr=section.getfloat("lr", 1e-3),
        reference_paths=references,
    )


def cmd_grid(args) -> int:
    config = load_grid_config(args.config)
    if args.epochs is not None:
        config.epochs = args.epochs
    if args.seeds is not None:
        config.seeds = args.seeds
    os.makedirs(args.out, exist_ok=True)
    fp = config_fingerprint(
        cmd="grid", tasks=",".join(config.tasks), depths=config.depths,
        widths=config.widths, grids=config.grid_sizes,
        schemes=",".join(s.label() for s in config.schemes),
        seeds=config.seeds, epochs=config.epochs,
    )
    out_csv = os.path.join(args.out, f"results_{fp}.csv")
    workers = args.workers if args.workers else worker_count()
    rows = run_grid(config, out_csv, max_workers=workers)
    print(f"{len(rows)} rows in {out_csv}")
    return 0


def _write_spectra(path: str, spectra) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPECTRUM_COLUMNS)
        for spec in spectra:
            for rank, val in enumerate(spec.eigenvalues, start=1):
                writer.writerow([spec.iteration, spec.block_id, rank, repr(float(val))])


def cmd_ntk(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    scheme = InitScheme(args.init, args.alpha, args.beta)
    fp = config_fingerprint(
        cmd="ntk", task=args.task, depth=args.depth, width=args.width,
        G=args.grid, k=args.k, scheme=scheme.label(), epochs=args.epochs,
        seed=args.seed, points=args.points,
    )
    iters = snapshot_iterations(args.epochs)
    spectra = []
    if args.task in PDE_KINDS:
        problem = make_problem(
            args.task,
            seed=args.seed,
            n_grid_side=args.collocation_side,
            n_bc_each=args.bc_points,
        )
        net = build_network([2, *([args.width] * args.depth), 1], G=args.grid, k=args.k)
        apply_scheme(net, scheme, args.seed)
        idx = subsample_indices(len(problem.x_pde), args.points, seed=args.seed)
        pts = problem.x_pde[idx]

        def snap(it, snap_net, state):
            j_pde = residual_jacobian(snap_net, PdeResidualFn(problem), pts)
            j_bc = residual_jacobian(snap_net, BcResidualFn(problem), problem.x_bc)
            sub_state = type(state)(
                gamma=state.gamma,
                eta=state.eta,
                alpha_pde=state.alpha_pde[idx],
                alpha_bc=state.alpha_bc,
            )
            blocks = weighted_ntk_blocks(j_pde, j_bc, sub_state)
            spectra.append(eigen_spectrum(blocks[("pde", "pde")], it, "pde"))
            spectra.append(eigen_spectrum(blocks[("bc", "bc")], it, "bc"))

        train_pde(
            net, problem, args.epochs, args.seed, lr=args.lr,
            snapshot_iters=iters, on_snapshot=snap,
        )
    else:
        task = make_task(args.task, n_train=args.n_train)
        net = build_network(
            [task.input_dim, *([args.width] * args.depth), 1], G=args.grid, k=args.k
        )
        apply_scheme(net, scheme, args.seed)
        x = task.sample_inputs(args.seed)
        pts = subsample_rows(x, args.points, seed=args.seed)
        from .optim import fit_arrays

        target = task.eval_target(x)[:, None]
        fit_arrays(
            net, x, target, epochs=args.epochs, lr=args.lr,
            snapshot_iters=iters,
            on_snapshot=lambda it, snap_net: spectra.append(
                eigen_spectrum(fit_ntk(snap_net, pts), it, "fit")
            ),
        )
    out_csv = os.path.join(args.out, f"spectra_{fp}.csv")
    _write_spectra(out_csv, spectra)
    print(f"{len(spectra)} spectra in {out_csv}")
    return 0


def cmd_init_report(args) -> int:
    kv = build_knot_vector(-1.0, 1.0, args.grid, args.k)
    mom = estimate_moments(kv, n_samples=args.samples, seed=args.seed)
    n_terms = kv.n_basis + 1
    if args.scheme == "baseline":
        sigma_r = float(np.sqrt(2.0 / (args.n_in + args.n_out)))
        sigma_b = 0.1
    elif args.scheme == "lecun-numerical":
        sigma_r = lecun_sigma(1 / 3, args.n_in, n_terms, mom.mu_R0)
        sigma_b = lecun_sigma(1 / 3, args.n_in, n_terms, mom.mu_B0)
    elif args.scheme == "lecun-normalized":
        sigma_r = lecun_sigma(1 / 3, args.n_in, n_terms, mom.mu_R0)
        sigma_b = lecun_sigma(1 / 3, args.n_in, n_terms, 1.0)
    elif args.scheme == "glorot":
        sigma_r = glorot_sigma(n_terms, args.n_in, args.n_out, mom.mu_R0, mom.mu_R1)
        sigma_b = glorot_sigma(n_terms, args.n_in, args.n_out, mom.mu_B0, mom.mu_B1)
    else:
        sigma_r = power_law_sigma(args.n_in, n_terms, args.alpha)
        sigma_b = power_law_sigma(args.n_in, n_terms, args.beta)
    print(f"scheme: {args.scheme}")
    print(
        f"n_in={args.n_in} n_out={args.n_out} G={args.grid} k={args.k} "
        f"(G+k+1={n_terms})"
    )
    print(
        f"mu_R0={mom.mu_R0:.8f} mu_R1={mom.mu_R1:.8f} "
        f"mu_B0={mom.mu_B0:.8f} mu_B1={mom.mu_B1:.8f}"
    )
    print(f"sigma_r={sigma_r:.10g}")
    print(f"sigma_b={sigma_b:.10g}")
    return 0


def main(argv=None) -> int:
    tune_allocator()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
