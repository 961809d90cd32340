"""Command-line front end.

Exit status: 0 success, 1 failed check or computation error, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import checks, files, kernel, spectral, splitter
from .config import ConfigError, RunConfig, load_config
from .model import FieldEnvelope, GridMismatch, InvalidConfig, TripodMemoryError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _workers(cfg: RunConfig, flag: int | None) -> int:
    value = flag if flag is not None else cfg.workers
    return value if value and value > 0 else (os.cpu_count() or 1)


def _g6(x) -> str:
    return f"{float(x):.6g}"


def _table(header: list[str], rows) -> str:
    cells = [header] + [[c if isinstance(c, str) else str(c) if isinstance(c, bool) else _g6(c)
                         for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def cmd_kernel(cfg: RunConfig, outdir: Path, workers: int) -> int:
    mem = cfg.validated()
    cycle = kernel.full_cycle_kernel(mem.params, mem.grid, mem.drive.omega_w1,
                                     direction=cfg.direction, workers=workers)
    meta = {
        "grid": {"T": mem.grid.duration, "L": mem.grid.length, "n_t": mem.grid.n_t,
                 "n_z": mem.grid.n_z, "stages": mem.grid.stages},
        "times": mem.grid.times,
        "time_weights": mem.grid.time_weights,
        "row_axis": cycle.row_axis,
        "col_axis": cycle.col_axis,
        "input_time_reversed": cycle.input_time_reversed,
        "direction": cfg.direction,
        "symmetry_defect": cycle.symmetry_defect(),
        "max_singular_value": float(cycle.singular_values().max(initial=0.0)),
    }
    files.write_all(outdir, {"kernel.csv": files.kernel_csv(cycle), "kernel.json": files.json_text(meta)})
    print(f"kernel {cycle.shape[0]}x{cycle.shape[1]}  symmetry defect {_g6(meta['symmetry_defect'])}  "
          f"max singular value {_g6(meta['max_singular_value'])}")
    return EXIT_OK


def cmd_modes(cfg: RunConfig, outdir: Path, workers: int) -> int:
    mem = cfg.validated()
    cycle = kernel.full_cycle_kernel(mem.params, mem.grid, mem.drive.omega_w1,
                                     direction=cfg.direction, workers=workers)
    basis = spectral.decompose(cycle)
    count = min(cfg.n_modes, len(basis))
    rows = []
    for i in range(1, len(basis) + 1):
        centre, width = spectral.temporal_centroid(basis.modes[:, i - 1], mem.grid)
        rows.append([i, basis.eigenvalues[i - 1], basis.amplitudes[i - 1], centre, width])
    shapes = np.column_stack([mem.grid.times, basis.modes[:, :count]])
    summary = {
        "eigenvalues": basis.eigenvalues[:count],
        "gram_defect": basis.gram_defect(),
        "completeness_residual": spectral.reconstruct(basis, len(basis))[1],
        "symmetry_defect": cycle.symmetry_defect(),
    }
    if len(basis) >= 2:
        summary["separation_1_2"] = spectral.mode_separation(basis, 1, 2)
    files.write_all(outdir, {
        "eigenvalues.csv": files.csv_text(["i", "lambda", "sqrt_lambda", "centroid", "width"], rows),
        "modes.csv": files.csv_text(["t"] + [f"phi_{i}" for i in range(1, count + 1)], shapes),
        "modes.json": files.json_text(summary),
    })
    print(_table(["i", "lambda", "sqrt_lambda", "centroid", "width"], rows[:count]))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, outdir: Path, workers: int) -> int:
    mem = cfg.validated()
    result = spectral.sweep(mem.params, (cfg.T_min, cfg.T_max), (cfg.L_min, cfg.L_max),
                            (cfg.n_T, cfg.n_L), n=cfg.sweep_n, workers=workers)
    best = result.best
    regime = result.regime()
    summary = {
        "n": cfg.sweep_n,
        "best": dict(zip(["T", "L", "lambda1", "lambda2", "lambda3"], best)),
        "regime": None if regime is None else dict(zip(["T", "L", "lambda1", "lambda2", "lambda3"], regime)),
    }
    files.write_all(outdir, {
        "sweep.csv": files.csv_text(["T", "L", "lambda1", "lambda2", "lambda3"], result.rows),
        "sweep.json": files.json_text(summary),
    })
    print(_table(["", "T", "L", "lambda1", "lambda2", "lambda3"],
                 [["max lambda1", *best]] + ([["regime", *regime]] if regime is not None else [])))
    return EXIT_OK


def cmd_split(cfg: RunConfig, outdir: Path, workers: int,
              mode: int | None, a1_path: str | None, a2_path: str | None) -> int:
    mem = cfg.validated()
    params, grid, drive = mem.params, mem.grid, mem.drive
    out: dict[str, str] = {}
    report: dict = {"unitary_drive": mem.unitary}

    if a1_path or a2_path:
        a1 = files.read_envelope(a1_path, grid) if a1_path else FieldEnvelope.zeros(grid)
        a2 = files.read_envelope(a2_path, grid) if a2_path else FieldEnvelope.zeros(grid)
        result = splitter.run_protocol(params, grid, drive, a1, a2, direction=cfg.direction)
        out["a_plus.csv"] = files.envelope_csv(result.a_plus)
        out["a_minus.csv"] = files.envelope_csv(result.a_minus)
        report["protocol"] = result.diagnostics
        print(_table(["quantity", "value"], [[k, v] for k, v in result.diagnostics.items()]))

    if mode is not None or not (a1_path or a2_path):
        mode = mode or cfg.mode
        cycle = kernel.full_cycle_kernel(params, grid, drive.omega_w1, direction=cfg.direction,
                                         workers=workers)
        basis = spectral.decompose(cycle)
        measured = splitter.empirical_matrix(params, grid, drive, basis, mode, direction=cfg.direction)
        angle = math.atan2(drive.omega_r2, drive.omega_r1)
        ideal = splitter.ideal_matrix(angle, min(max(measured.lambda_i, 0.0), 1.0), mode)
        comparison = splitter.compare(measured, ideal)
        report["mode"] = {
            "index": mode,
            "lambda": measured.lambda_i,
            "vacuum_budget": measured.vacuum_budget,
            "theta": measured.theta,
            "empirical": measured.entries,
            "ideal": ideal.entries,
            "row_completeness": measured.row_completeness(),
            "comparison": comparison.as_dict(),
        }
        print(f"mode {mode}: lambda = {_g6(measured.lambda_i)}")
        print(_table(["", "col 1", "col 2"],
                     [["empirical +", *measured.entries[0]], ["empirical -", *measured.entries[1]],
                      ["ideal +", *ideal.entries[0]], ["ideal -", *ideal.entries[1]]]))
        print(_table(["metric", "value"], list(map(list, comparison.as_dict().items()))))

    out["report.json"] = files.json_text(report)
    files.write_all(outdir, out)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, backend: str | None = None) -> int:
    mem = cfg.validated()
    results = checks.run_checks(mem, mode=cfg.mode, direction=cfg.direction, backend=backend)
    rows = [[r.name, "PASS" if r.passed else "FAIL", r.value, r.limit, r.detail] for r in results]
    print(_table(["check", "status", "value", "limit", "detail"], rows))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tripod-memory", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, outputs=True):
        p.add_argument("config", nargs="?", help="key = value config file (defaults if omitted)")
        if outputs:
            p.add_argument("-o", "--outdir", default=".", help="output directory")
            p.add_argument("--workers", type=int, default=None,
                           help="parallel jobs (default: config value, 0 = all cores)")
        return p

    common(sub.add_parser("kernel", help="export the full-cycle kernel"))
    common(sub.add_parser("modes", help="eigenvalues and mode shapes"))
    common(sub.add_parser("sweep", help="top eigenvalues over a (T, L) grid"))
    split = common(sub.add_parser("split", help="beam-splitter matrix or protocol run"))
    split.add_argument("--mode", type=int, default=None, help="eigenmode index (1-based)")
    split.add_argument("--a1", help="CSV envelope for input port 1 (t,re,im)")
    split.add_argument("--a2", help="CSV envelope for input port 2 (t,re,im)")
    common(sub.add_parser("validate", help="run the invariant suite"), outputs=False)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.command == "validate":
            return cmd_validate(cfg)
        workers = _workers(cfg, args.workers)
        outdir = Path(args.outdir)
        if args.command == "kernel":
            return cmd_kernel(cfg, outdir, workers)
        if args.command == "modes":
            return cmd_modes(cfg, outdir, workers)
        if args.command == "sweep":
            return cmd_sweep(cfg, outdir, workers)
        return cmd_split(cfg, outdir, workers, args.mode, args.a1, args.a2)
    except (ConfigError, InvalidConfig, GridMismatch) as exc:
        print(f"tripod-memory: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TripodMemoryError, OSError, ValueError) as exc:
        print(f"tripod-memory: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
