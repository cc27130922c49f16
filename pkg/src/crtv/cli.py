"""Command-line driver: solve, rates, interp-check, and dual-check pipelines emitting CSV.

Rows are deterministic functions of the configuration: levels are computed
in ascending order and floating-point values are printed with 17
significant digits, so a rerun with identical flags produces byte
identical output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import RateTable, interp_sup_norm
from .benchmarks import BenchmarkSpec, data_g, exact_primal
from .fespace import P0Function
from .flow import FlowConfig, flow_run
from .mesh import red_refine, refined_square_mesh
from .rof import RofProblem, dual_energy, dual_reconstruction, primal_energy

__all__ = ["RunConfig", "main", "solve_level", "cmd_solve", "cmd_rates",
           "cmd_interp_check", "cmd_dual_check"]

SOLVE_HEADER = "k,N,h,err_sq,eoc,energy,steps,gap"
INTERP_HEADER = "k,N,h,sup_norm,excess_over_h"
DUAL_HEADER = "k,N,h,gap,max_pihz,conformity_defect"

_ANGLE_PRESETS = {
    "0": 0.0,
    "pi/2": np.pi / 2.0,
    "-pi/2": -np.pi / 2.0,
    "pi/4": np.pi / 4.0,
    "-pi/4": -np.pi / 4.0,
    "7pi/18": 7.0 * np.pi / 18.0,
}

_MAX_LEVEL = 10


@dataclass
class RunConfig:
    """Validated run parameters shared by all subcommands."""

    command: str
    example: str = "two-disk"
    phi: float = 0.0
    shift: tuple[float, float] = (0.0, 0.0)
    alpha: float = 10.0
    r: float = 0.4
    levels: tuple[int, int] = (3, 6)
    tau: float = 1.0
    stop_factor: float = 1.0 / 20.0
    out: str = "-"
    seed: int = 0
    input_csv: str | None = None

    def __post_init__(self):
        lo, hi = self.levels
        if not (0 <= lo <= hi <= _MAX_LEVEL):
            raise ValueError(f"levels must satisfy 0 <= a <= b <= {_MAX_LEVEL}")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.stop_factor <= 0.0:
            raise ValueError("stop factor must be positive")

    def benchmark(self) -> BenchmarkSpec:
        kind = self.example.replace("-", "_")
        return BenchmarkSpec(kind=kind, r=self.r, alpha=self.alpha,
                             phi=self.phi, shift=self.shift)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def parse_angle(text: str) -> float:
    key = text.strip().replace(" ", "")
    if key in _ANGLE_PRESETS:
        return _ANGLE_PRESETS[key]
    return float(text)


def parse_levels(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    k = int(text)
    return k, k


def parse_shift(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("shift must be given as x,y")
    return float(parts[0]), float(parts[1])


def solve_level(spec: BenchmarkSpec, level: int, tau: float = 1.0,
                stop_factor: float = 1.0 / 20.0, cg_tol: float = 1e-10):
    """Run the gradient flow at one refinement level.

    Returns (err_sq, energy, steps, gap, mesh, solution); the data is
    sampled at element barycenters and the duality gap is evaluated with
    the element-wise dual reconstruction, which is feasible and satisfies
    the divergence identity exactly.
    """
    mesh = refined_square_mesh(level)
    g = P0Function(mesh, data_g(spec, mesh.barycenters))
    problem = RofProblem(mesh, spec.alpha, g, eps=mesh.h_max)
    cfg = FlowConfig(tau=tau, stop_factor=stop_factor, cg_tol=cg_tol)
    u, trace = flow_run(problem, cfg=cfg)
    err_sq = float(mesh.areas @ (exact_primal(spec, mesh.barycenters)
                                 - u.barycenter_values()) ** 2)
    gap = primal_energy(problem, u) - dual_energy(problem, dual_reconstruction(problem, u))
    return err_sq, trace.energies[-1], trace.steps, gap, mesh, u


def _emit(lines: list[str], out: str) -> None:
    text = "\n".join(lines) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii") as handle:
            handle.write(text)


def cmd_solve(cfg: RunConfig) -> int:
    spec = cfg.benchmark()
    table = RateTable()
    lines = [SOLVE_HEADER]
    lo, hi = cfg.levels
    for k in range(lo, hi + 1):
        try:
            err_sq, energy, steps, gap, mesh, _ = solve_level(
                spec, k, tau=cfg.tau, stop_factor=cfg.stop_factor)
        except Exception as err:  # flush partial results with a failure marker
            lines.append(f"{k},nan,nan,nan,nan,nan,-1,nan")
            _emit(lines, cfg.out)
            print(f"error: level {k} failed: {err}", file=sys.stderr)
            return 1
        row = table.add(k, mesh.n_vertices, mesh.h_max, err_sq, energy, steps, gap)
        lines.append(",".join([str(row.level), str(row.n_vertices)]
                              + [_fmt(v) for v in (row.h, row.err_sq, row.eoc,
                                                   row.energy)]
                              + [str(row.steps), _fmt(row.gap)]))
    _emit(lines, cfg.out)
    return 0


def _parse_solve_csv(path: str):
    with open(path, encoding="ascii") as handle:
        raw = [line.rstrip("\n") for line in handle]
    if not raw or raw[0] != SOLVE_HEADER:
        raise ValueError(f"{path}:1: expected header '{SOLVE_HEADER}'")
    rows = []
    for number, line in enumerate(raw[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}:{number}: expected 8 columns, got {len(parts)}")
        try:
            rows.append((int(parts[0]), int(parts[1]), *(float(p) for p in parts[2:6]),
                         int(parts[6]), float(parts[7])))
        except ValueError as err:
            raise ValueError(f"{path}:{number}: {err}") from None
    return rows


def cmd_rates(cfg: RunConfig) -> int:
    rows = _parse_solve_csv(cfg.input_csv)
    lines = [SOLVE_HEADER]
    previous = None
    for k, n, h, err_sq, _, energy, steps, gap in rows:
        value = np.nan
        if previous is not None and previous[1] > 0.0 and err_sq > 0.0:
            value = np.log(previous[1] / err_sq) / np.log(previous[0] / h)
        previous = (h, err_sq)
        lines.append(",".join([str(k), str(n), _fmt(h), _fmt(err_sq), _fmt(value),
                               _fmt(energy), str(steps), _fmt(gap)]))
    _emit(lines, cfg.out)
    return 0


def cmd_interp_check(cfg: RunConfig) -> int:
    spec = cfg.benchmark()
    lines = [INTERP_HEADER]
    lo, hi = cfg.levels
    mesh = refined_square_mesh(lo)
    for k in range(lo, hi + 1):
        sup, _ = interp_sup_norm(mesh, spec)
        lines.append(",".join([str(k), str(mesh.n_vertices), _fmt(mesh.h_max),
                               _fmt(sup), _fmt((sup - 1.0) / mesh.h_max)]))
        if k < hi:
            mesh = red_refine(mesh)
    _emit(lines, cfg.out)
    return 0


def cmd_dual_check(cfg: RunConfig) -> int:
    spec = cfg.benchmark()
    lines = [DUAL_HEADER]
    lo, hi = cfg.levels
    for k in range(lo, hi + 1):
        mesh = refined_square_mesh(k)
        g = P0Function(mesh, data_g(spec, mesh.barycenters))
        problem = RofProblem(mesh, spec.alpha, g, eps=mesh.h_max)
        u, _ = flow_run(problem, cfg=FlowConfig(tau=cfg.tau, stop_factor=cfg.stop_factor))
        reconstruction = dual_reconstruction(problem, u)
        means = reconstruction.barycenter_values()
        max_mean = float(np.hypot(means[:, 0], means[:, 1]).max())
        gap = primal_energy(problem, u) - dual_energy(problem, reconstruction)
        lines.append(",".join([str(k), str(mesh.n_vertices), _fmt(mesh.h_max), _fmt(gap),
                               _fmt(max_mean), _fmt(reconstruction.conformity_defect())]))
    _emit(lines, cfg.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crtv",
                                     description="Total-variation denoising benchmark runs")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_solve_params=True):
        p.add_argument("--example", choices=["two-disk", "four-disk"], default="two-disk")
        p.add_argument("--phi", type=parse_angle, default=0.0,
                       help="rotation angle in radians (presets: 0, pi/2, pi/4, -pi/4, 7pi/18)")
        p.add_argument("--shift", type=parse_shift, default=(0.0, 0.0), metavar="X,Y")
        p.add_argument("--alpha", type=float, default=10.0)
        p.add_argument("--r", type=float, default=0.4)
        p.add_argument("--levels", type=parse_levels, default=(3, 6), metavar="A..B")
        p.add_argument("--out", default="-")
        p.add_argument("--seed", type=int, default=0,
                       help="seed reserved for randomized sweeps")
        if with_solve_params:
            p.add_argument("--tau", type=float, default=1.0)
            p.add_argument("--stop-factor", type=float, default=1.0 / 20.0)

    add_common(sub.add_parser("solve", help="run the gradient flow over a level range"))
    rates = sub.add_parser("rates", help="recompute the eoc column of a solve CSV")
    rates.add_argument("input_csv")
    rates.add_argument("--out", default="-")
    add_common(sub.add_parser("interp-check",
                              help="sup norms of the interpolated exact dual"),
               with_solve_params=False)
    add_common(sub.add_parser("dual-check",
                              help="duality gap and conformity of the reconstructed dual"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    kwargs = {"command": args.command, "out": args.out}
    for name in ("example", "phi", "shift", "alpha", "r", "levels", "seed",
                 "tau", "stop_factor", "input_csv"):
        if hasattr(args, name):
            kwargs[name] = getattr(args, name)
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.command != "rates":
            cfg.benchmark()  # reject invalid parameter combinations before any work
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    handlers = {"solve": cmd_solve, "rates": cmd_rates,
                "interp-check": cmd_interp_check, "dual-check": cmd_dual_check}
    try:
        return handlers[cfg.command](cfg)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
