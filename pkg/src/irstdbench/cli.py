"""Command-line harness wiring detectors, thresholding, and metrics.

Subcommands: synth, detect, threshold, eval pre, eval post, curve, theory,
compare, reproduce. Every command is deterministic given its inputs and
seeds. Report-producing commands write matplotlib figures next to their CSV
output (disable with --no-fig).

Exit codes: 0 success, 2 usage error, 3 data error. Diagnostics go to
stderr; stdout carries only data.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import detectors, imgcore, metrics_post, metrics_pre, pulse_theory, synthgen
from .thresholding import apply_strategy

EXIT_DATA_ERROR = 3

THEORY_K_LIST = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_map(path) -> np.ndarray:
    """Load a raster or a raw map CSV by file suffix."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return imgcore.read_map_csv(p)
    return imgcore.load_gray(p)


def _opt(args, config: dict, key: str, default):
    """Flag value if given, else config-file value, else default."""
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in config:
        return config[key]
    return default


def _out_path(path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _detector_config(args, config) -> detectors.DetectorConfig:
    se = int(_opt(args, config, "se", detectors.DEFAULT_TOPHAT_SE))
    scales = _opt(args, config, "scales", None)
    if isinstance(scales, str):
        scales = [float(s) for s in scales.split(",")]
    cells = _opt(args, config, "cells", None)
    if isinstance(cells, str):
        cells = [int(c) for c in cells.split(",")]
    return detectors.DetectorConfig(
        tophat_se=se,
        log_scales=tuple(scales) if scales else detectors.DEFAULT_LOG_SCALES,
        cell_sizes=tuple(cells) if cells else detectors.DEFAULT_CELL_SIZES,
    )


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def cmd_synth(args, config) -> int:
    out_dir = Path(_opt(args, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _opt(args, config, "seed", None)
    if args.suite:
        scenes = synthgen.standard_suite()
    else:
        spec_path = _opt(args, config, "spec", None)
        if spec_path is None:
            raise ValueError("synth needs --spec or --suite")
        spec = synthgen.SceneSpec.load(spec_path)
        if seed is not None:
            spec = _reseed(spec, int(seed))
        scenes = [synthgen.render(spec)]
    for scene in scenes:
        stem = scene.spec.name or "scene"
        quant = np.clip(np.rint(scene.image), 0, 65535)
        maxval = 255 if quant.max() <= 255 else 65535
        imgcore.write_pgm(out_dir / f"{stem}.pgm", quant, maxval=maxval)
        imgcore.write_map_csv(out_dir / f"{stem}_raw.csv", scene.image)
        scene.gt.save(out_dir / f"{stem}_gt.json")
        _log(f"wrote {stem}.pgm / {stem}_raw.csv / {stem}_gt.json")
    return 0


def _reseed(spec: synthgen.SceneSpec, seed: int) -> synthgen.SceneSpec:
    noise = spec.noise
    if noise.sigma > 0:
        noise = synthgen.NoiseSpec(sigma=noise.sigma, seed=seed)
    bg = spec.background
    if isinstance(bg, synthgen.ClutterBackground):
        bg = replace(bg, seed=seed + 1000)
    return replace(spec, noise=noise, background=bg)


def cmd_detect(args, config) -> int:
    cfg = _detector_config(args, config)
    out_dir = Path(_opt(args, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    for input_path in args.input:
        img = _load_map(input_path)
        sal = detectors.run(args.algo, img, cfg)
        stem = f"{Path(input_path).stem}_{args.algo}"
        levels, sidecar = imgcore.scale_to_levels(sal, 65535)
        imgcore.write_pgm(out_dir / f"{stem}.pgm", levels, maxval=65535)
        (out_dir / f"{stem}.json").write_text(json.dumps(sidecar, indent=1) + "\n")
        imgcore.write_map_csv(out_dir / f"{stem}.csv", sal)
        _log(f"wrote {stem}.pgm / {stem}.json / {stem}.csv")
    return 0


def cmd_threshold(args, config) -> int:
    sal = _load_map(args.input)
    outcome = apply_strategy(
        args.strategy, sal,
        t=float(_opt(args, config, "t", 0.0)),
        k=float(_opt(args, config, "k", 3.0)),
        window=int(_opt(args, config, "window", 33)),
        bins=int(_opt(args, config, "bins", 256)),
        epsilon=float(_opt(args, config, "eps", 0.5)),
    )
    out_path = _out_path(_opt(args, config, "out", "binary.pgm"))
    imgcore.save_gray(out_path, outcome.binary.astype(np.float64) * 255, maxval=255)
    if outcome.threshold_map is not None:
        map_path = out_path.with_suffix(".threshold.csv")
        imgcore.write_map_csv(map_path, outcome.threshold_map)
        info = {"strategy": outcome.strategy, "threshold_map": map_path.name}
    else:
        info = {"strategy": outcome.strategy, "threshold": outcome.threshold}
    print(json.dumps(info))
    return 0


def cmd_eval_pre(args, config) -> int:
    img = _load_map(args.input)
    sal = _load_map(args.saliency)
    gt = imgcore.GroundTruth.load(args.gt)
    ring = int(_opt(args, config, "ring", metrics_pre.DEFAULT_RING_WIDTH))
    label = _opt(args, config, "label", Path(args.saliency).stem)
    header = ["label", "target", "scr_in", "scr_out", "bsf", "scrg", "scr_global"]
    rows = []
    for i in range(len(gt.targets)):
        m = metrics_pre.evaluate(img, sal, gt, target_index=i, ring_width=ring)
        rows.append([label, i, m.scr_in, m.scr_out, m.bsf, m.scrg, m.scr_global])
    _emit_csv(args, config, header, rows)
    return 0


def cmd_eval_post(args, config) -> int:
    sal = _load_map(args.saliency)
    gt = imgcore.GroundTruth.load(args.gt)
    samples = int(_opt(args, config, "samples", metrics_post.DEFAULT_SAMPLES))
    tol = int(_opt(args, config, "tolerance", metrics_post.DEFAULT_TOLERANCE))
    label = _opt(args, config, "label", Path(args.saliency).stem)
    if gt.targets:
        curve = metrics_post.pfa_k_curve(
            sal, gt, n_samples=samples,
            combine=_opt(args, config, "combine", "min"), tolerance=tol)
        _emit_csv(args, config, ["label", "k_max", "pfa_min"],
                  [[label, curve.k_max, curve.pfa_min]])
    else:
        # target-free frame: no detection bound, report false alarms vs k
        _log("target-free ground truth; reporting false-alarm sweep")
        sweep = metrics_post.false_alarm_sweep(sal, n_samples=samples,
                                               tolerance=tol, gt=gt)
        _emit_csv(args, config, ["k", "pfa"],
                  list(zip(sweep.k_norm * sweep.k_max, sweep.pfa)))
    return 0


def _emit_csv(args, config, header, rows) -> None:
    out = _opt(args, config, "out", None)
    if out:
        imgcore.write_csv(_out_path(out), header, rows)
        _log(f"wrote {out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(
                c if isinstance(c, str)
                else str(int(c)) if isinstance(c, (int, np.integer))
                else imgcore.FLOAT_FMT % float(c)
                for c in row))


def cmd_curve(args, config) -> int:
    sal = _load_map(args.saliency)
    gt = imgcore.GroundTruth.load(args.gt)
    out_path = _out_path(_opt(args, config, "out", "curve.csv"))
    samples = int(_opt(args, config, "samples", metrics_post.DEFAULT_SAMPLES))
    tol = int(_opt(args, config, "tolerance", metrics_post.DEFAULT_TOLERANCE))
    kind = _opt(args, config, "kind", "pfa-k")
    if kind == "roc":
        levels = int(_opt(args, config, "levels", 64))
        lo, hi = float(sal.min()), float(sal.max())
        thresholds = np.linspace(hi, lo - 1e-12, levels)
        roc = metrics_post.roc_curve(sal, gt, thresholds,
                                     pd_mode=_opt(args, config, "pd_mode", "pixel"),
                                     tolerance=tol)
        imgcore.write_csv(out_path, ["pfa", "pd"], zip(roc.pfa, roc.pd))
        if not args.no_fig:
            from . import report
            report.save_roc_figure(out_path.with_suffix(".png"), roc)
    else:
        if gt.targets:
            curve = metrics_post.pfa_k_curve(
                sal, gt, n_samples=samples,
                combine=_opt(args, config, "combine", "min"), tolerance=tol)
        else:
            _log("target-free ground truth; sweeping up to the brightest pixel")
            curve = metrics_post.false_alarm_sweep(sal, n_samples=samples,
                                                   tolerance=tol, gt=gt)
        imgcore.write_csv(out_path, ["k", "pfa"], zip(curve.k_norm, curve.pfa))
        sidecar = {"k_max": curve.k_max, "pfa_min": curve.pfa_min,
                   "samples": samples}
        out_path.with_suffix(".json").write_text(
            json.dumps(sidecar, indent=1) + "\n")
        if not args.no_fig:
            from . import report
            label = _opt(args, config, "label", Path(args.saliency).stem)
            report.save_pfa_k_figure(out_path.with_suffix(".png"),
                                     [curve], [label])
    _log(f"wrote {out_path}")
    return 0


def cmd_theory(args, config) -> int:
    out_dir = Path(_opt(args, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    n = int(_opt(args, config, "n", 33))
    k_list = _opt(args, config, "k_list", None)
    if isinstance(k_list, str):
        k_list = [float(k) for k in k_list.split(",")]
    k_list = tuple(k_list) if k_list else THEORY_K_LIST
    klmax = pulse_theory.sweep_k_local_max(n)
    imgcore.write_csv(out_dir / f"klmax_n{n}.csv", ["W", "klmax"], klmax)
    ratio = pulse_theory.sweep_threshold_ratio(n, k_list)
    imgcore.write_csv(out_dir / f"threshold_ratio_n{n}.csv",
                      ["W", "k", "T_over_A"], ratio)
    if not args.no_fig:
        from . import report
        report.save_k_local_max_figure(out_dir / f"klmax_n{n}.png", klmax, n)
        report.save_threshold_ratio_figure(
            out_dir / f"threshold_ratio_n{n}.png", ratio, n)
    _log(f"wrote theory tables for n={n} to {out_dir}")
    return 0


def cmd_compare(args, config) -> int:
    if len(args.curves) != len(args.labels):
        raise ValueError("need one label per curve file")
    curves = []
    for path in args.curves:
        header, data = imgcore.read_csv(path)
        if header[:2] != ["k", "pfa"]:
            raise ValueError(f"{path}: expected a k,pfa curve CSV")
        sidecar = Path(path).with_suffix(".json")
        k_max = float("nan")
        if sidecar.exists():
            k_max = float(json.loads(sidecar.read_text()).get("k_max", "nan"))
        curves.append(metrics_post.PfaKCurve(k_max=k_max, k_norm=data[:, 0],
                                             pfa=data[:, 1]))
    comp = metrics_post.compare_curves(curves, args.labels)
    out = _out_path(_opt(args, config, "out", "comparison.csv"))
    imgcore.write_csv(out, ["label", "k_max", "pfa_min"], comp.table_rows())
    overlay = _opt(args, config, "overlay", None)
    if overlay:
        overlay = _out_path(overlay)
        header = ["k"] + [f"pfa_{lb}" for lb in comp.labels]
        imgcore.write_csv(overlay, header,
                          np.column_stack([comp.grid, comp.pfa.T]))
    if not args.no_fig:
        from . import report
        report.save_pfa_k_figure(out.with_suffix(".png"), curves, comp.labels)
    for a, b, rel in comp.relations:
        print(f"{a} vs {b}: {rel}")
    _log(f"wrote {out}")
    return 0


def cmd_reproduce(args, config) -> int:
    """Regenerate the full analytic + synthetic-suite artifact bundle."""
    out_dir = Path(_opt(args, config, "out_dir", "reproduce"))
    samples = int(_opt(args, config, "samples", metrics_post.DEFAULT_SAMPLES))
    write_figures = not args.no_fig
    theory_dir = out_dir / "theory"
    curves_dir = out_dir / "curves"
    tables_dir = out_dir / "tables"
    figures_dir = out_dir / "figures"
    for d in (theory_dir, curves_dir, tables_dir, figures_dir):
        d.mkdir(parents=True, exist_ok=True)

    if write_figures:
        from . import report

    klmax = pulse_theory.sweep_k_local_max(33)
    imgcore.write_csv(theory_dir / "klmax_n33.csv", ["W", "klmax"], klmax)
    ratio_rows = []
    for n in (33, 17):
        sweep = pulse_theory.sweep_threshold_ratio(n, THEORY_K_LIST)
        ratio_rows.extend([(float(n), w, k, t) for w, k, t in sweep])
        if write_figures:
            report.save_threshold_ratio_figure(
                figures_dir / f"theory_threshold_ratio_n{n}.png", sweep, n)
    imgcore.write_csv(theory_dir / "threshold_ratio.csv",
                      ["n", "W", "k", "T_over_A"], ratio_rows)
    if write_figures:
        report.save_k_local_max_figure(figures_dir / "theory_klmax.png",
                                       klmax, 33)

    scenes = synthgen.standard_suite()
    cfg = detectors.DetectorConfig()
    kmax_table = {algo: [] for algo in detectors.DETECTORS}
    pfamin_table = {algo: [] for algo in detectors.DETECTORS}
    for scene in scenes:
        per_scene = []
        for algo in detectors.DETECTORS:
            sal = detectors.run(algo, scene.image, cfg)
            if scene.gt.targets:
                curve = metrics_post.pfa_k_curve(sal, scene.gt,
                                                 n_samples=samples)
                kmax_table[algo].append(curve.k_max)
                pfamin_table[algo].append(curve.pfa_min)
            else:
                curve = metrics_post.false_alarm_sweep(sal, n_samples=samples,
                                                       gt=scene.gt)
                kmax_table[algo].append(float("nan"))
                pfamin_table[algo].append(float("nan"))
            imgcore.write_csv(curves_dir / f"{scene.spec.name}_{algo}.csv",
                              ["k", "pfa"], zip(curve.k_norm, curve.pfa))
            per_scene.append(curve)
        if write_figures:
            report.save_pfa_k_figure(
                figures_dir / f"{scene.spec.name}_pfa_k.png",
                per_scene, list(detectors.DETECTORS), title=scene.spec.name)
        _log(f"evaluated {scene.spec.name}")

    scene_names = [s.spec.name for s in scenes]
    imgcore.write_csv(tables_dir / "kmax.csv", ["detector"] + scene_names,
                      [[algo] + kmax_table[algo] for algo in detectors.DETECTORS])
    imgcore.write_csv(tables_dir / "pfamin.csv", ["detector"] + scene_names,
                      [[algo] + pfamin_table[algo] for algo in detectors.DETECTORS])
    _log(f"bundle complete in {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irstdbench",
        description="Small-target detection benchmark: detectors, thresholds, "
                    "and detection-ability metrics on synthetic scenes.")
    parser.add_argument("--config", help="JSON config file mirroring the flags; "
                                         "explicit flags take precedence")
    parser.add_argument("--seed", type=int, help="override scene seeds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic scene (or the suite)")
    p.add_argument("--spec", help="scene spec JSON")
    p.add_argument("--suite", action="store_true",
                   help="render the six-scene standard suite")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="run a detector over input frames")
    p.add_argument("--algo", required=True,
                   choices=list(detectors.DETECTORS) + ["identity"])
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--se", type=int, help="top-hat structuring element side")
    p.add_argument("--scales", help="comma-separated blob-filter scales")
    p.add_argument("--cells", help="comma-separated cell sizes")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("threshold", help="binarize a saliency map")
    p.add_argument("--input", required=True)
    p.add_argument("--strategy", required=True,
                   choices=["fixed", "otsu", "itermean", "global-k", "local-k"])
    p.add_argument("--t", type=float, help="fixed threshold value")
    p.add_argument("--k", type=float, help="control parameter")
    p.add_argument("--window", type=int, help="local window side")
    p.add_argument("--bins", type=int, help="histogram bins")
    p.add_argument("--eps", type=float, help="iterative-mean stop tolerance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("eval", help="compute metrics")
    esub = p.add_subparsers(dest="eval_kind", required=True)
    pe = esub.add_parser("pre", help="pre-thresholding metrics")
    pe.add_argument("--input", required=True, help="original frame")
    pe.add_argument("--saliency", required=True)
    pe.add_argument("--gt", required=True)
    pe.add_argument("--ring", type=int, help="background ring width")
    pe.add_argument("--label")
    pe.add_argument("--out")
    pe.set_defaults(func=cmd_eval_pre)
    po = esub.add_parser("post", help="post-thresholding metrics")
    po.add_argument("--saliency", required=True)
    po.add_argument("--gt", required=True)
    po.add_argument("--samples", type=int)
    po.add_argument("--tolerance", type=int)
    po.add_argument("--combine", choices=["min", "max", "mean"])
    po.add_argument("--label")
    po.add_argument("--out")
    po.set_defaults(func=cmd_eval_post)

    p = sub.add_parser("curve", help="false-alarm curve for one saliency map")
    p.add_argument("--saliency", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--kind", choices=["pfa-k", "roc"])
    p.add_argument("--samples", type=int)
    p.add_argument("--levels", type=int, help="threshold count for ROC")
    p.add_argument("--pd-mode", dest="pd_mode", choices=["pixel", "target"])
    p.add_argument("--tolerance", type=int)
    p.add_argument("--combine", choices=["min", "max", "mean"])
    p.add_argument("--label")
    p.add_argument("--out")
    p.add_argument("--no-fig", action="store_true")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("theory", help="pulse-model sweep tables")
    p.add_argument("--n", type=int, help="local window size")
    p.add_argument("--k-list", dest="k_list",
                   help="comma-separated control parameters")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--no-fig", action="store_true")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("compare", help="compare saved false-alarm curves")
    p.add_argument("--curves", nargs="+", required=True)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--out")
    p.add_argument("--overlay", help="write the overlaid curves as CSV")
    p.add_argument("--no-fig", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("reproduce",
                       help="regenerate the full deterministic artifact bundle")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--samples", type=int)
    p.add_argument("--no-fig", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _log(f"error: cannot read config: {exc}")
            return EXIT_DATA_ERROR
    try:
        return args.func(args, config)
    except (ValueError, OSError, KeyError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
