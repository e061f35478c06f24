"""Command-line front end: ``symmetria detect | eval | export``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import RunConfig, resolve_config, thread_limit
from .correspondence import involution_diagnostics, read_correspondence, write_correspondence
from .errors import SymmetriaError, ValidationError
from .evaluation import (
    DatasetEntry,
    correspondence_rate,
    evaluate_dataset,
    read_ground_truth,
    write_summary_csv,
)
from .export import export_field
from .geodesics import pairwise_geodesic
from .logger import LoggedSymmetryDetector, RunLogger
from .mesh import parse_mesh
from .signatures import hks_energy, reference_time
from .spectral import assemble_operator, eigendecompose, write_basis

logger = logging.getLogger(__name__)

__all__ = ["main", "build_parser"]

MESH_SUFFIXES = (".off", ".obj")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="number of eigenpairs (default 13)")
    p.add_argument("--d-max", type=int, dest="d_max", help="maximum number of HKS feature points")
    p.add_argument("--pairs", type=int, dest="c", help="number of symmetric pairs to select")
    p.add_argument("--mu", type=float, help="weight of the pair-consistency term")
    p.add_argument("--tau-gap", type=float, dest="tau_gap", help="relative eigen-gap below which a column is excluded")
    p.add_argument("--eps-sign", type=float, dest="eps_sign", help="relative vote threshold for a parity decision")
    p.add_argument("--q-multiplier", type=float, dest="q_multiplier")
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--tol-grad", type=float, dest="tol_grad")
    p.add_argument("--hessian", choices=("fd", "analytic"))
    p.add_argument("--threads", type=int)
    p.add_argument(
        "--no-correction", dest="correction", action="store_const", const=False, default=None,
        help="skip the rotation correction",
    )
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--verbose", action="store_const", const=True, default=None)
    p.add_argument("--log-file", type=str, dest="log_file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symmetria",
        description="Intrinsic reflective symmetry detection. Vertex and eigenfunction indices are 0-based.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    det = sub.add_parser("detect", help="detect the symmetry map of a mesh")
    det.add_argument("mesh", type=Path)
    det.add_argument("--out", type=Path, help="correspondence file (default <mesh>.corr.txt)")
    det.add_argument("--report", type=Path, help="JSON run report")
    det.add_argument("--dump-basis", type=Path, dest="dump_basis", help="text dump of eigenvalues and eigenfunctions")
    _add_pipeline_flags(det)

    ev = sub.add_parser("eval", help="score a correspondence against ground truth")
    ev.add_argument("mesh", type=Path, nargs="?")
    ev.add_argument("correspondence", type=Path, nargs="?")
    ev.add_argument("ground_truth", type=Path, nargs="?")
    ev.add_argument(
        "--one-based", dest="one_based_ground_truth", action="store_const", const=True, default=None,
        help="ground truth uses 1-based vertex indices (all other files are 0-based)",
    )
    ev.add_argument("--batch", type=Path, help="directory of <name>.off|obj, <name>.corr.txt, <name>.gt.txt")
    ev.add_argument("--csv", type=Path, help="CSV summary (batch mode)")
    ev.add_argument("--report", type=Path, help="JSON report")
    ev.add_argument("--threads", type=int)
    ev.add_argument("--config", type=Path)
    ev.add_argument("--verbose", action="store_const", const=True, default=None)
    ev.add_argument("--log-file", type=str, dest="log_file")

    ex = sub.add_parser("export", help="write a colour-encoded scalar field as PLY")
    ex.add_argument("mesh", type=Path)
    ex.add_argument(
        "--field", required=True,
        help="eigenfunction:<i> | hks | correspondence-error; i is 0-based, eigenfunction:0 is the constant one",
    )
    ex.add_argument("--out", type=Path, required=True)
    ex.add_argument("--correspondence", type=Path)
    ex.add_argument("--ground-truth", type=Path, dest="ground_truth")
    ex.add_argument("--one-based", dest="one_based_ground_truth", action="store_const", const=True, default=None)
    ex.add_argument("--k", type=int)
    ex.add_argument("--config", type=Path)
    ex.add_argument("--verbose", action="store_const", const=True, default=None)
    ex.add_argument("--log-file", type=str, dest="log_file")
    return parser


_CONFIG_KEYS = {
    "k", "d_max", "c", "mu", "tau_gap", "eps_sign", "q_multiplier", "max_iter", "tol_grad",
    "hessian", "threads", "correction", "verbose", "one_based_ground_truth",
}


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key) for key in _CONFIG_KEYS if hasattr(args, key)}
    return resolve_config(overrides, getattr(args, "config", None))


# ───────────────────────────── Commands ─────────────────────────────
def cmd_detect(args: argparse.Namespace, config: RunConfig, run_logger: RunLogger) -> int:
    mesh = parse_mesh(args.mesh)
    detector = LoggedSymmetryDetector(config, run_logger=run_logger)
    result = detector.detect(mesh, mesh_id=args.mesh.name)

    out = args.out or args.mesh.with_suffix(".corr.txt")
    write_correspondence(result.symmetry, out, result.fmap.active.size)
    print(f"Correspondence written to {out}")
    if args.report:
        args.report.write_text(json.dumps(result.report(config), indent=2), encoding="utf-8")
        print(f"Report written to {args.report}")
    if args.dump_basis:
        write_basis(result.basis, args.dump_basis)
        print(f"Eigenbasis written to {args.dump_basis}")
    pairs = result.pairs.vertex_pairs(result.features)
    print(f"pairs={pairs} sign={result.fmap.sign.tolist()}")
    print(
        f"median involution error={float(np.median(result.symmetry.involution_error)):.6g} "
        f"post-eigensolve time={result.post_eigensolve_seconds:.3f}s"
    )
    return 0


def _batch_entries(directory: Path, one_based: bool) -> list[DatasetEntry]:
    if not directory.is_dir():
        raise FileNotFoundError(directory)
    entries = []
    for mesh_path in sorted(p for p in directory.iterdir() if p.suffix.lower() in MESH_SUFFIXES):
        stem = mesh_path.stem
        corr = directory / f"{stem}.corr.txt"
        gt = directory / f"{stem}.gt.txt"
        if not corr.exists() or not gt.exists():
            logger.warning("Skipping %s: missing %s", mesh_path.name, corr.name if not corr.exists() else gt.name)
            continue
        mesh = parse_mesh(mesh_path)
        entries.append(
            DatasetEntry(
                name=stem,
                mesh=mesh,
                sigma=read_correspondence(corr, mesh.n),
                ground_truth=read_ground_truth(gt, one_based, mesh.n),
            )
        )
    if not entries:
        raise ValidationError(f"no complete mesh/correspondence/ground-truth triples in {directory}")
    return entries


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    one_based = config.one_based_ground_truth
    if args.batch is not None:
        reports, rate = evaluate_dataset(_batch_entries(args.batch, one_based), thread_limit(config))
        for r in reports:
            print(f"{r.name}: corr_rate={r.corr_rate:.4f} threshold={r.threshold:.6g}")
        print(f"mesh_rate={rate:.4f}")
        if args.csv:
            write_summary_csv(reports, args.csv)
        if args.report:
            payload = {"mesh_rate": rate, "meshes": [r.to_dict() for r in reports]}
            args.report.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        return 0

    if args.mesh is None or args.correspondence is None or args.ground_truth is None:
        raise ValidationError("eval needs MESH CORRESPONDENCE GROUND_TRUTH or --batch DIR")
    mesh = parse_mesh(args.mesh)
    sigma = read_correspondence(args.correspondence, mesh.n)
    gt = read_ground_truth(args.ground_truth, one_based, mesh.n)
    report = correspondence_rate(mesh, sigma, gt, name=args.mesh.stem)
    print(f"corr_rate={report.corr_rate:.4f} threshold={report.threshold:.6g}")
    if args.report:
        args.report.write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    return 0


def _correspondence_error(args: argparse.Namespace, config: RunConfig, mesh) -> np.ndarray:
    if args.correspondence is None:
        raise ValidationError("--field correspondence-error needs --correspondence")
    sigma = read_correspondence(args.correspondence, mesh.n)
    if args.ground_truth is None:
        return involution_diagnostics(mesh, sigma)
    gt = read_ground_truth(args.ground_truth, config.one_based_ground_truth, mesh.n)
    field = np.zeros(mesh.n)
    field[gt[:, 0]] = pairwise_geodesic(mesh, gt[:, 1], sigma[gt[:, 0]])
    return field


def cmd_export(args: argparse.Namespace, config: RunConfig) -> int:
    mesh = parse_mesh(args.mesh)
    name, _, arg = args.field.partition(":")
    if name == "correspondence-error":
        values = _correspondence_error(args, config, mesh)
    elif name in ("eigenfunction", "hks"):
        basis = eigendecompose(assemble_operator(mesh), config.k)
        if name == "hks":
            values = hks_energy(basis, reference_time(basis))
        else:
            try:
                i = int(arg)
            except ValueError:
                raise ValidationError(f"expected eigenfunction:<index>, got {args.field!r}") from None
            if not 0 <= i < basis.k:
                raise ValidationError(f"eigenfunction index {i} out of range [0, {basis.k})")
            values = basis.phi[:, i]
    else:
        raise ValidationError(f"unknown field {args.field!r}")
    export_field(mesh, values, args.out, label=args.field)
    print(f"PLY written to {args.out}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config(args)
        run_logger = RunLogger(log_file=args.log_file, verbose=config.verbose)
        if args.command == "detect":
            return cmd_detect(args, config, run_logger)
        if args.command == "eval":
            return cmd_eval(args, config)
        return cmd_export(args, config)
    except SymmetriaError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"ERROR: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, OSError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
