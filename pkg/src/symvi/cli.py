"""Command-line front end.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures. Diagnostics go to stderr; every output file is written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config as configmod
from .cases import CASES, FIG6_ALPHAS, FIG6_BASES, PARTITION_NU_PRIME, fig5_cases
from .conditions import check_convexity, verdict
from .densities import ScaleMatrix, make_bimodal_2d
from .divergences import DivergenceSpec, weight_function
from .errors import ConfigError, Diverged, NonConvergence, NonFiniteIntegrand, SymviError
from .geometry import HalfspacePartition, partition_grid
from .landscape import classify_at_mean, sweep
from .optimizer import optimize_location

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


# --------------------------------------------------------------------------- output helpers


def _num(v: float) -> str:
    return f"{v:.12g}"


def write_atomic(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _slug(name: str) -> str:
    return name.replace(".", "_").replace(" ", "_")


# --------------------------------------------------------------------------- building blocks


def _check_document(spec, p, fam) -> dict:
    v = verdict(spec, fam, p)
    doc = v.to_dict()
    return {
        "divergence": spec.to_dict(),
        "family": fam.to_dict(),
        "target": p.describe(),
        "verdict": doc["verdict"],
        "theorem": doc["theorem"],
        "reason": doc["reason"],
        "sub_reports": doc["sub_reports"],
    }


def run_sweep(name: str, spec, p, fam, sweep_cfg, out: Path, workers=None) -> dict:
    res = sweep(spec, p, fam, sweep_cfg, workers=workers)
    cls = classify_at_mean(res)
    stem = f"sweep_{_slug(name)}"
    write_atomic(out / f"{stem}.csv", _csv_text(["nu", "divergence"], ((_num(a), _num(b)) for a, b in res.rows())))
    sidecar = {"case": name, **res.meta(), "classification": cls.to_dict()}
    write_atomic(out / f"{stem}.json", _json_text(sidecar))
    return sidecar


def run_partition(nu_prime, scale: ScaleMatrix, p, n: int, lim: float, out: Path, name="partition") -> Path:
    part = HalfspacePartition(np.asarray(nu_prime, dtype=float), scale)
    rows = ((_num(x), _num(y), r, _num(d)) for x, y, r, d in partition_grid(part, p, n, lim))
    return write_atomic(out / f"{name}.csv", _csv_text(["x", "y", "region", "target_pdf"], rows))


def reproduce(which: str, out: Path, workers=None) -> list[str]:
    """Emit the data behind one figure (or ``all``); returns short summaries."""
    notes = []
    if which in ("fig2", "all"):
        d = out / "fig2"
        for name, case in CASES.items():
            spec, p, fam = case.build()
            side = run_sweep(name, spec, p, fam, None, d, workers)
            check = _check_document(spec, p, fam)
            write_atomic(d / f"check_{_slug(name)}.json", _json_text(check))
            notes.append(f"fig2 case {name}: {side['classification']['label']}, {check['verdict']}")
    if which in ("fig5", "all"):
        d = out / "fig5"
        for case in fig5_cases():
            spec, p, fam = case.build()
            side = run_sweep(case.name, spec, p, fam, None, d, workers)
            notes.append(f"fig5 {case.name}: {side['classification']['label']}")
    if which in ("fig6", "all"):
        d = out / "fig6"
        for bname, make_base in FIG6_BASES.items():
            for a in FIG6_ALPHAS:
                w = weight_function(DivergenceSpec.alpha_div(a), make_base())
                rep = check_convexity(w)
                write_atomic(d / f"convexity_{bname}_alpha{a:g}.json", _json_text(rep.to_dict()))
                notes.append(f"fig6 {bname} alpha={a:g}: {rep.verdict.value}")
    if which in ("partition-figure", "all"):
        p = make_bimodal_2d()
        path = run_partition(PARTITION_NU_PRIME, ScaleMatrix.isotropic(1.0, 2), p, 200, 6.0, out / "partition")
        notes.append(f"partition figure: {path}")
    return notes


# --------------------------------------------------------------------------- commands


def _config_from_args(args) -> configmod.ExperimentConfig:
    cfg = configmod.load(args.config) if args.config else configmod.ExperimentConfig()
    lo, hi = args.range if getattr(args, "range", None) else (None, None)
    return configmod.override(
        cfg,
        case=args.case,
        alpha=args.alpha,
        step=args.step,
        lo=lo,
        hi=hi,
        tol_eq=args.tol,
    )


def _out_dir(args, cfg) -> Path:
    return Path(args.out or cfg.out or ".")


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    spec, p, fam = cfg.build()
    side = run_sweep(cfg.case or "custom", spec, p, fam, cfg.sweep_config(), _out_dir(args, cfg), args.workers)
    print(side["classification"]["label"])
    return 0


def cmd_check(args) -> int:
    cfg = _config_from_args(args)
    spec, p, fam = cfg.build()
    doc = _check_document(spec, p, fam)
    text = _json_text(doc)
    write_atomic(_out_dir(args, cfg) / f"check_{_slug(cfg.case or 'custom')}.json", text)
    label = doc["verdict"] + (f"({doc['theorem']})" if doc["theorem"] else "")
    print(label)
    return 0


def cmd_optimize(args) -> int:
    cfg = _config_from_args(args)
    if args.nu0 is not None or args.lr is not None:
        cfg = configmod.override(cfg, nu0=args.nu0, lr=args.lr)
    spec, p, fam = cfg.build()
    out = _out_dir(args, cfg)
    stem = f"optimize_{_slug(cfg.case or 'custom')}"
    try:
        traj = optimize_location(spec, p, fam, cfg.optimizer_config())
    except Diverged as exc:
        traj = getattr(exc, "trajectory", None)
        if traj is not None:
            _write_trajectory(out / f"{stem}.csv", traj)
        raise
    _write_trajectory(out / f"{stem}.csv", traj)
    write_atomic(
        out / f"{stem}.json",
        _json_text({"reason": traj.reason.value, "iterations": len(traj.records), "final_nu": traj.final.nu, "warnings": traj.warnings}),
    )
    for w in traj.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{traj.reason.value} at nu={traj.final.nu:.6g} after {len(traj.records) - 1} steps")
    return 0


def _write_trajectory(path: Path, traj) -> None:
    rows = ((r.iteration, _num(r.nu), _num(r.divergence), _num(r.gradient)) for r in traj.records)
    write_atomic(path, _csv_text(["iter", "nu", "divergence", "gradient"], rows))


def cmd_partition(args) -> int:
    cfg = _config_from_args(args)
    if cfg.target is None and cfg.case is None:
        cfg = configmod.override(cfg, target="bimodal_2d")
    p = cfg.target_density()
    nu_prime = args.nu_prime or cfg.nu_prime or list(PARTITION_NU_PRIME)
    if args.scale_matrix:
        cfg = configmod.override(cfg, scale_matrix=args.scale_matrix)
    scale = cfg.partition_scale(p.dim)
    n = args.grid or cfg.grid_n or 200
    lim = args.lim or cfg.grid_lim or 6.0
    path = run_partition(nu_prime, scale, p, n, lim, _out_dir(args, cfg))
    print(path)
    return 0


def cmd_reproduce(args) -> int:
    out = Path(args.out or "reproduce")
    for line in reproduce(args.which, out, args.workers):
        print(line)
    return 0


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--case", choices=sorted(CASES), help="built-in case")
    common.add_argument("--alpha", type=float, help="alpha for the alpha-divergence")
    common.add_argument("--step", type=float, help="sweep grid step")
    common.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"), help="sweep range")
    common.add_argument("--tol", type=float, help="relative equality tolerance for classification")
    common.add_argument("--workers", type=int, help="worker processes (default: $SYMVI_WORKERS or 1)")

    parser = argparse.ArgumentParser(prog="symvi", description="Divergence landscapes and mean-recovery checks for location families.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="divergence landscape over nu").set_defaults(func=cmd_sweep)
    sub.add_parser("check", parents=[common], help="sufficient-condition verdict").set_defaults(func=cmd_check)
    opt = sub.add_parser("optimize", parents=[common], help="gradient descent on nu")
    opt.add_argument("--nu0", type=float, help="starting location")
    opt.add_argument("--lr", type=float, help="learning rate")
    opt.set_defaults(func=cmd_optimize)
    part = sub.add_parser("partition", parents=[common], help="halfspace partition grid")
    part.add_argument("--nu-prime", type=float, nargs="+", help="shift vector")
    part.add_argument("--scale-matrix", type=float, nargs="+", help="S, row-major")
    part.add_argument("--grid", type=int, help="points per axis")
    part.add_argument("--lim", type=float, help="grid covers [-lim, lim]^2")
    part.set_defaults(func=cmd_partition)
    rep = sub.add_parser("reproduce", parents=[common], help="emit figure data")
    rep.add_argument("which", choices=["fig2", "fig5", "fig6", "partition-figure", "all"])
    rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NonConvergence, NonFiniteIntegrand, Diverged, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, SymviError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
