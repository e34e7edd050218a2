"""Command-line interface: evaluate, contribution, select, synth, encode."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import dataio
from .core import AccuracyTable
from .encode import (
    DEFAULT_DETECTION_CLASSES,
    DEFAULT_SKELETON,
    detection_vector,
    heatmap,
    limbs,
    write_pgm,
)
from .fixtures import FIXTURE_DATASETS, load_fixture
from .fusion import ALL_STRATEGIES, parse_strategies, sweep
from .quantify import contribution_report
from .select import ThresholdConfig, run_modselect
from .synth import Scenario, default_scenario, generate


def _tool_block() -> dict:
    return {"name": "modselect", "version": __version__}


def cmd_evaluate(args) -> int:
    bundle, digests = dataio.load_bundle(args.manifest)
    strategies = parse_strategies(args.strategies)
    table = sweep(bundle, strategies)
    base = Path(args.out)
    payload = {
        "schema": 1,
        "tool": _tool_block(),
        "config": {
            "command": "evaluate",
            "manifest": str(args.manifest),
            "strategies": [s.value for s in strategies],
        },
        "inputs": digests,
        "scale": "fraction",
        "table": table.to_dict(),
    }
    dataio.dump_json(payload, base.with_suffix(".json"))
    dataio.write_table_csv(base.with_suffix(".csv"), table)
    print(f"strategy-averaged mPCA [%] over {len(table.combinations())} combinations:")
    for combo in table.combinations():
        print(f"  {'+'.join(combo):<30s} {table.percent(combo):6.2f}")
    print(f"wrote {base.with_suffix('.json')} and {base.with_suffix('.csv')}")
    return 0


def _contribution_table(args) -> tuple[AccuracyTable, dict, dict]:
    sources = [s for s in (args.fixture, args.table, args.manifest) if s]
    if len(sources) != 1:
        raise ValueError("give exactly one of --fixture, --table, --manifest")
    if args.fixture:
        return load_fixture(args.fixture), {}, {"source": "fixture", "fixture": args.fixture}
    if args.table:
        digest = {str(args.table): dataio.sha256_file(args.table)}
        payload = dataio.load_json(args.table)
        table = AccuracyTable.from_dict(payload.get("table", payload))
        return table, digest, {"source": "table", "table": str(args.table)}
    bundle, digests = dataio.load_bundle(args.manifest)
    strategies = parse_strategies(args.strategies)
    table = sweep(bundle, strategies)
    return table, digests, {
        "source": "manifest",
        "manifest": str(args.manifest),
        "strategies": [s.value for s in strategies],
    }


def cmd_contribution(args) -> int:
    table, digests, config = _contribution_table(args)
    report = contribution_report(table)
    config["format"] = args.format
    if args.format == "json":
        payload = {
            "schema": 1,
            "tool": _tool_block(),
            "config": config,
            "inputs": digests,
            "report": report.to_dict(),
        }
        dataio.dump_json(payload, args.out)
    else:
        dataio.write_contribution_csv(args.out, report)
    print("contribution f(m) [percentage points], averaged view:")
    for name in report.modalities:
        marker = "+" if name in report.positive else "-"
        print(f"  {marker} {name:<10s} {report.averaged[name]:+8.3f}")
    print(f"positive set: {{{', '.join(sorted(report.positive))}}}")
    print(f"wrote {args.out}")
    return 0


def cmd_select(args) -> int:
    bundle, digests = dataio.load_bundle(args.manifest)
    config = ThresholdConfig(
        lam=args.lam,
        consensus=args.consensus,
        mode=args.mode,
        delta_rho=args.delta_rho,
        delta_mmd=args.delta_mmd,
        exclude_self=args.exclude_self_pairs,
        interpolate=args.interpolate_percentiles,
    )
    report = run_modselect(bundle, config)
    payload = report.to_dict()
    payload["config"]["manifest"] = str(args.manifest)
    payload["inputs"] = digests
    dataio.dump_json(payload, args.out)
    rho = report.rho_threshold
    mmd = report.mmd_threshold
    print(
        f"thresholds: correlation {rho.value if rho.value is None else format(rho.value, '.6g')}"
        f" ({rho.source}), discrepancy "
        f"{mmd.value if mmd.value is None else format(mmd.value, '.6g')} ({mmd.source})"
    )
    if report.mode == "aggregated":
        print(f"selected: {{{', '.join(report.selected)}}}")
        for decision in report.excluded:
            print(f"excluded {decision.name}: {'; '.join(decision.reasons)}")
    else:
        pairs = ", ".join("-".join(p) for p in report.selected_pairs)
        print(f"selected pairs: {{{pairs}}}")
    print(f"wrote {args.out}")
    return 0


def cmd_synth(args) -> int:
    if args.scenario:
        scenario = Scenario.from_dict(dataio.load_json(args.scenario))
    else:
        scenario = default_scenario(
            seed=args.seed,
            samples=args.samples,
            classes=args.classes,
            embedding_dim=args.dim,
        )
    bundle, planted = generate(scenario)
    manifest_path = dataio.write_bundle(
        bundle, args.out_dir, dataset=f"synthetic-seed{scenario.seed}"
    )
    sidecar = {
        "schema": 1,
        "tool": _tool_block(),
        "scenario": scenario.to_dict(),
        "planted_good": sorted(planted),
    }
    dataio.dump_json(sidecar, Path(args.out_dir) / "ground_truth.json")
    print(f"wrote bundle ({len(bundle.modalities)} modalities, {bundle.n_samples} samples)")
    print(f"manifest: {manifest_path}")
    print(f"planted good modalities: {{{', '.join(sorted(planted))}}}")
    return 0


def _load_skeleton(path) -> tuple[tuple[int, int], ...]:
    if not path:
        return DEFAULT_SKELETON
    edges = dataio.load_json(path)
    return tuple((int(a), int(b)) for a, b in edges)


def cmd_encode(args) -> int:
    if args.encoder == "heatmap":
        kp = dataio.read_keypoints_csv(args.keypoints)
        image = heatmap(kp, args.width, args.height, sigma=args.sigma, combine=args.combine)
        write_pgm(image, args.out, binary=not args.ascii)
    elif args.encoder == "limbs":
        kp = dataio.read_keypoints_csv(args.keypoints)
        image = limbs(kp, args.width, args.height, skeleton=_load_skeleton(args.skeleton))
        write_pgm(image, args.out, binary=not args.ascii)
    else:
        detections = dataio.read_detections_csv(args.detections)
        vector = detection_vector(detections, args.classes)
        if args.format == "json":
            dataio.dump_json({"schema": 1, "tool": _tool_block(), "vector": list(vector)}, args.out)
        else:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(",".join(f"v{i}" for i in range(len(vector))) + "\n")
                fh.write(",".join(repr(float(v)) for v in vector) + "\n")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modselect",
        description=(
            "Evaluate late-fusion modality combinations, quantify per-modality "
            "contributions, and select beneficial modalities without labels."
        ),
    )
    parser.add_argument("--version", action="version", version=f"modselect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    strategy_help = f"comma-separated strategies (default: {','.join(s.value for s in ALL_STRATEGIES)})"
    all_tokens = ",".join(s.value for s in ALL_STRATEGIES)

    p_eval = sub.add_parser("evaluate", help="sweep all modality combinations against ground truth")
    p_eval.add_argument("--manifest", required=True, help="bundle manifest JSON (labels required)")
    p_eval.add_argument("--out", required=True, help="output base path; writes <out>.json and <out>.csv")
    p_eval.add_argument("--strategies", default=all_tokens, help=strategy_help)
    p_eval.set_defaults(func=cmd_evaluate)

    p_contrib = sub.add_parser("contribution", help="with-without contribution per modality")
    p_contrib.add_argument("--fixture", choices=FIXTURE_DATASETS, help="use the bundled benchmark table")
    p_contrib.add_argument("--table", help="accuracy table JSON written by 'evaluate'")
    p_contrib.add_argument("--manifest", help="bundle manifest; runs the sweep first")
    p_contrib.add_argument("--strategies", default=all_tokens, help=strategy_help)
    p_contrib.add_argument("--out", required=True)
    p_contrib.add_argument("--format", choices=("json", "csv"), default="json")
    p_contrib.set_defaults(func=cmd_contribution)

    p_select = sub.add_parser("select", help="unsupervised modality selection (labels ignored)")
    p_select.add_argument("--manifest", required=True)
    p_select.add_argument("--out", required=True, help="selection report JSON path")
    p_select.add_argument("--lambda", dest="lam", type=float, default=0.2,
                          help="trust parameter for the winsorized-mean thresholds")
    p_select.add_argument("--mode", choices=("aggregated", "pairs"), default="aggregated")
    p_select.add_argument("--consensus", choices=("or", "and"), default="or")
    p_select.add_argument("--delta-rho", type=float, default=None,
                          help="override the computed correlation threshold")
    p_select.add_argument("--delta-mmd", type=float, default=None,
                          help="override the computed discrepancy threshold")
    p_select.add_argument("--exclude-self-pairs", action=argparse.BooleanOptionalAction,
                          default=True, help="omit self-pairs when aggregating (default: on)")
    p_select.add_argument("--interpolate-percentiles", action="store_true",
                          help="use the interpolated-percentile threshold variant")
    p_select.set_defaults(func=cmd_select)

    p_synth = sub.add_parser("synth", help="generate a seeded synthetic bundle with planted truth")
    p_synth.add_argument("--scenario", help="scenario JSON; overrides the flag-based default scenario")
    p_synth.add_argument("--seed", type=int, default=42)
    p_synth.add_argument("--samples", type=int, default=2000)
    p_synth.add_argument("--classes", type=int, default=10)
    p_synth.add_argument("--dim", type=int, default=32)
    p_synth.add_argument("--out-dir", required=True)
    p_synth.set_defaults(func=cmd_synth)

    p_encode = sub.add_parser("encode", help="render keypoint/detection encodings")
    enc_sub = p_encode.add_subparsers(dest="encoder", required=True)

    p_heat = enc_sub.add_parser("heatmap", help="confidence-weighted Gaussian joint maps")
    p_heat.add_argument("--keypoints", required=True, help="CSV with header x,y,confidence")
    p_heat.add_argument("--width", type=int, required=True)
    p_heat.add_argument("--height", type=int, required=True)
    p_heat.add_argument("--sigma", type=float, default=6.0)
    p_heat.add_argument("--combine", choices=("max", "sum"), default="max")
    p_heat.add_argument("--ascii", action="store_true", help="write ASCII P2 instead of binary P5")
    p_heat.add_argument("--out", required=True, help="output PGM path")
    p_heat.set_defaults(func=cmd_encode)

    p_limbs = enc_sub.add_parser("limbs", help="confidence-weighted limb rasterization")
    p_limbs.add_argument("--keypoints", required=True)
    p_limbs.add_argument("--width", type=int, required=True)
    p_limbs.add_argument("--height", type=int, required=True)
    p_limbs.add_argument("--skeleton", help="JSON list of joint-index pairs (default: 17-joint body)")
    p_limbs.add_argument("--ascii", action="store_true")
    p_limbs.add_argument("--out", required=True)
    p_limbs.set_defaults(func=cmd_encode)

    p_det = enc_sub.add_parser("detvec", help="normalized reciprocal-distance object vector")
    p_det.add_argument("--detections", required=True,
                       help="CSV with header role,class_index,x_min,y_min,x_max,y_max")
    p_det.add_argument("--classes", type=int, default=DEFAULT_DETECTION_CLASSES)
    p_det.add_argument("--format", choices=("csv", "json"), default="csv")
    p_det.add_argument("--out", required=True)
    p_det.set_defaults(func=cmd_encode)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as err:
        message = err.args[0] if err.args else err
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
