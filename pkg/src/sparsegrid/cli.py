"""Command-line front end: pattern generation, reconstruction, and the
PSNR-vs-density sweep.

Exit codes: 0 success, 2 argument/usage errors, 3 generator errors,
4 missing dataset.  The environment variable SPARSEGRID_THREADS caps
reconstruction parallelism.
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .discrepancy import estimate_discrepancy, exact_discrepancy, metropolis_optimize, to_unit_points
from .errors import SparseGridError
from .generators import GaussParams, gen_gauss, gen_rand, gen_sobol
from .imaging import apply_mask, load_pgm, save_pgm, save_prefix_pgm
from .metrics import psnr
from .patterns import GridDims, density_to_count, parse, prefix, serialize, to_bitmap
from .reconstruction import FsrParams, LinearReconstructor, SampledImage, fsr_reconstruct

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_GENERATOR = 3
EXIT_DATASET = 4


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SPARSEGRID_THREADS", "1")))
    except ValueError:
        return 1


def _parse_dims(text: str) -> GridDims:
    try:
        w, h = text.lower().split("x")
        return GridDims(int(w), int(h))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}, expected WxH") from None


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _csv_strs(text: str) -> list[str]:
    return [v for v in text.split(",") if v]


def _csv_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _fsr_params_from(args) -> FsrParams:
    kv = {}
    if getattr(args, "fsr_config", None):
        for line in Path(args.fsr_config).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
    def pick(name, cast, default):
        if getattr(args, name, None) is not None:
            return cast(getattr(args, name))
        if name in kv:
            return cast(kv[name])
        return default
    d = FsrParams()
    return FsrParams(
        block_size=pick("block_size", int, d.block_size),
        window_size=pick("window_size", int, d.window_size),
        iterations=pick("iterations", int, d.iterations),
        rho=pick("rho", float, d.rho),
        gamma=pick("gamma", float, d.gamma),
        freq_rho=pick("freq_rho", float, d.freq_rho),
    )


def _add_fsr_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--block-size", dest="block_size", type=int)
    p.add_argument("--window-size", dest="window_size", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--freq-rho", dest="freq_rho", type=float)
    p.add_argument("--fsr-config", help="key=value file with FSR parameters")


def _generate_pattern(ptype: str, dims: GridDims, count: int, seed: int, gauss: GaussParams):
    if ptype == "rand":
        return gen_rand(dims, count, seed)
    if ptype == "sobol":
        return gen_sobol(dims, count)
    if ptype == "gauss":
        return gen_gauss(dims, count, seed, gauss)
    raise ValueError(f"unknown pattern type {ptype!r}")


# --- subcommands -------------------------------------------------------------


def cmd_generate(args) -> int:
    gauss = GaussParams(tau=args.tau, sigma_scale=args.sigma_scale, cutoff_radius=args.cutoff_radius)
    if args.type == "sobol" and args.seed_given:
        print("warning: --seed is ignored for sobol (the sequence is deterministic)", file=sys.stderr)
    try:
        pattern = _generate_pattern(args.type, args.dims, args.count, args.seed, gauss)
    except SparseGridError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_GENERATOR
    Path(args.out).write_bytes(serialize(pattern))
    return EXIT_OK


def cmd_sample(args) -> int:
    img = load_pgm(args.image)
    pattern = parse(Path(args.pattern).read_bytes())
    pfx = prefix(pattern, args.density)
    sampled = apply_mask(img, pfx)
    save_pgm(sampled.values, args.out)
    if args.out_mask:
        save_prefix_pgm(pfx, args.out_mask)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    img = load_pgm(args.image)
    pattern = parse(Path(args.pattern).read_bytes())
    pfx = prefix(pattern, args.density)
    sampled = apply_mask(img, pfx)
    if args.method == "lin":
        out = LinearReconstructor(sampled.mask)(sampled.values)
    else:
        out = fsr_reconstruct(sampled, _fsr_params_from(args), threads=_threads())
    save_pgm(out, args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ref = load_pgm(args.reference)
    cand = load_pgm(args.candidate)
    if ref.shape != cand.shape:
        print("error: image dimensions differ", file=sys.stderr)
        return EXIT_USAGE
    value = psnr(ref, cand).psnr_db
    print("psnr_db=inf" if math.isinf(value) else f"psnr_db={value:.4f}")
    return EXIT_OK


def cmd_discrepancy(args) -> int:
    pattern = parse(Path(args.pattern).read_bytes())
    pts = to_unit_points(prefix(pattern, args.density))
    report = estimate_discrepancy(pts, args.rects, args.seed)
    print(f"sup_estimate={report.sup_estimate:.6f}")
    print(f"mean_abs_deviation={report.mean_abs_deviation:.6f}")
    if args.exact:
        print(f"exact={exact_discrepancy(pts):.6f}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    pattern = parse(Path(args.pattern).read_bytes())
    optimized, meta = metropolis_optimize(
        pattern,
        args.density,
        steps=args.steps,
        t0=args.t0,
        cooling=args.cooling,
        m=args.rects,
        seed=args.seed,
    )
    Path(args.out).write_bytes(serialize(optimized))
    print(f"start_measure={meta['start_measure']:.6f}")
    print(f"best_measure={meta['best_measure']:.6f}")
    print("note: optimized patterns are not incremental (acquisition order lost)")
    return EXIT_OK


# --- sweep -------------------------------------------------------------------


def _dataset_images(dataset_dir: Path, limit: int):
    files = sorted(dataset_dir.glob("*.pgm"))
    return files[:limit]


def _sweep_config(args) -> dict:
    fsr = _fsr_params_from(args)
    return {
        "dataset": str(args.dataset),
        "patterns": args.patterns,
        "seeds": args.seeds,
        "densities": args.densities,
        "reconstructors": args.reconstructors,
        "images": args.images,
        "fsr": {
            "block_size": fsr.block_size,
            "window_size": fsr.window_size,
            "iterations": fsr.iterations,
            "rho": fsr.rho,
            "gamma": fsr.gamma,
            "delta": fsr.delta,
            "freq_rho": fsr.freq_rho,
        },
    }


def run_sweep(config: dict, out_dir: Path) -> Path:
    dataset_dir = Path(config["dataset"])
    if not dataset_dir.is_dir():
        raise FileNotFoundError(f"dataset directory {dataset_dir} not found")
    files = _dataset_images(dataset_dir, config["images"])
    if not files:
        raise FileNotFoundError(f"no .pgm images in {dataset_dir}")
    images = [load_pgm(f) for f in files]
    h, w = images[0].shape
    dims = GridDims(w, h)
    densities = config["densities"]
    if any(b <= a for a, b in zip(densities, densities[1:])):
        raise ValueError("densities must be strictly increasing")
    fsr_params = FsrParams(**config["fsr"])
    threads = _threads()
    n_max = density_to_count(max(densities), dims)

    rows = []
    for ptype in config["patterns"]:
        seeds = config["seeds"] if ptype != "sobol" else [0]
        patterns = [
            _generate_pattern(ptype, dims, n_max, seed, GaussParams()) for seed in seeds
        ]
        for recon in config["reconstructors"]:
            for density in densities:
                per_seed = []
                for pattern in patterns:
                    pfx = prefix(pattern, density)
                    mask = to_bitmap(pfx)
                    if recon == "lin":
                        lr = LinearReconstructor(mask)
                        outs = [lr(np.where(mask, img, 0.0)) for img in images]
                    else:
                        outs = [
                            fsr_reconstruct(apply_mask(img, pfx), fsr_params, threads=threads)
                            for img in images
                        ]
                    per_seed.append(
                        float(np.mean([psnr(img, out).psnr_db for img, out in zip(images, outs)]))
                    )
                rows.append(
                    {
                        "pattern": ptype,
                        "reconstructor": recon,
                        "density": density,
                        "mean_psnr_db": float(np.mean(per_seed)),
                        "per_seed_psnr_db": per_seed,
                        "images_used": len(images),
                    }
                )

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["pattern", "reconstructor", "density", "mean_psnr_db", "per_seed_psnr_db", "images_used"]
        )
        for r in rows:
            writer.writerow(
                [
                    r["pattern"],
                    r["reconstructor"],
                    f"{r['density']:.4f}",
                    f"{r['mean_psnr_db']:.4f}",
                    ";".join(f"{v:.4f}" for v in r["per_seed_psnr_db"]),
                    r["images_used"],
                ]
            )
    for recon in config["reconstructors"]:
        _write_svg(
            out_dir / f"sweep_{recon}.svg",
            {
                ptype: [
                    (r["density"], r["mean_psnr_db"])
                    for r in rows
                    if r["pattern"] == ptype and r["reconstructor"] == recon
                ]
                for ptype in config["patterns"]
            },
            title=f"mean PSNR vs sampling density ({recon})",
        )
    manifest = {
        "tool": "sparsegrid",
        "version": __version__,
        "config": config,
        "inputs": {
            f.name: hashlib.sha256(f.read_bytes()).hexdigest() for f in files
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path


_SVG_COLORS = {"rand": "#d62728", "sobol": "#1f77b4", "gauss": "#2ca02c"}


def _write_svg(path: Path, curves: dict, title: str = "") -> None:
    """Minimal SVG line chart: one polyline per pattern type."""
    width, height, margin = 640, 440, 60
    pts = [p for c in curves.values() for p in c]
    if not pts:
        return
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 16}" text-anchor="middle" font-size="12">sampling density</text>',
        f'<text x="18" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 18 {height / 2:.0f})" text-anchor="middle">mean PSNR [dB]</text>',
    ]
    for i, (name, curve) in enumerate(curves.items()):
        if not curve:
            continue
        color = _SVG_COLORS.get(name, "#777777")
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in sorted(curve))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{width - margin + 6}" y="{margin + 18 * i}" font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def cmd_sweep(args) -> int:
    if args.from_manifest:
        manifest = json.loads(Path(args.from_manifest).read_text())
        config = manifest["config"]
    else:
        config = _sweep_config(args)
    try:
        csv_path = run_sweep(config, Path(args.out))
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATASET
    print(f"wrote {csv_path}")
    return EXIT_OK


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsegrid",
        description="Incremental non-regular image sampling patterns and reconstruction.",
        epilog="Exit codes: 0 success, 2 argument errors, 3 generator errors, 4 missing dataset.",
    )
    parser.add_argument("--version", action="version", version=f"sparsegrid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a pattern and write an IMASK file")
    p.add_argument("--type", required=True, choices=["rand", "sobol", "gauss"])
    p.add_argument("--dims", required=True, type=_parse_dims)
    p.add_argument("--count", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=7.0)
    p.add_argument("--sigma-scale", dest="sigma_scale", type=float, default=2.0)
    p.add_argument("--cutoff-radius", dest="cutoff_radius", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="apply a pattern prefix to an image")
    p.add_argument("--image", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--density", required=True, type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--out-mask", dest="out_mask")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("reconstruct", help="reconstruct an image from a pattern prefix")
    p.add_argument("--image", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--density", required=True, type=float)
    p.add_argument("--method", required=True, choices=["lin", "fsr"])
    p.add_argument("--out", required=True)
    _add_fsr_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="print PSNR between two PGM images")
    p.add_argument("--reference", required=True)
    p.add_argument("--candidate", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("discrepancy", help="estimate pattern discrepancy")
    p.add_argument("--pattern", required=True)
    p.add_argument("--density", required=True, type=float)
    p.add_argument("--rects", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="also run the exact oracle (small sets only)")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("optimize", help="Metropolis swap optimization of a pattern prefix")
    p.add_argument("--pattern", required=True)
    p.add_argument("--density", required=True, type=float)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--t0", type=float)
    p.add_argument("--cooling", type=float, default=0.999)
    p.add_argument("--rects", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="run the PSNR-vs-density experiment and emit CSV + SVG")
    p.add_argument("--dataset", help="directory of .pgm images, ascending name order")
    p.add_argument("--patterns", type=_csv_strs, default=["rand", "sobol", "gauss"])
    p.add_argument("--seeds", type=_csv_ints, default=[1, 2, 3])
    p.add_argument("--densities", type=_csv_floats, default=[0.05, 0.1, 0.2, 0.3, 0.5, 0.7])
    p.add_argument("--reconstructors", type=_csv_strs, default=["lin", "fsr"])
    p.add_argument("--images", type=int, default=30, help="use the first N images")
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", dest="from_manifest", help="rerun a recorded sweep configuration")
    _add_fsr_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "generate":
        args.seed_given = "--seed" in argv
    if args.command == "sweep" and not args.from_manifest and not args.dataset:
        parser.error("sweep requires --dataset (or --from-manifest)")
    try:
        return args.func(args)
    except SparseGridError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
