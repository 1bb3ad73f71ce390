"""Command-line front door.

Subcommands:

  simulate search|session|reversed  --config FILE --out DIR
  process  eda|ppg                  --in FILE [--out DIR]
  analyze  session                  --traces DIR [--out DIR]
  cluster  spiders                  --in FILE [--k auto|N] [--out DIR]

Every command is deterministic given its config, seed and inputs; a
manifest.json recording the config hash, seed and output hashes makes
reruns verifiable. Partial outputs are removed on failure. Exit codes:
0 ok, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import report, stats
from .config import ConfigError, RunConfig, load_run_config
from .session import (
    TraceIntegrityError,
    read_trace_rows,
    run_counterbalanced_sessions,
    run_search,
    write_search_csv,
    write_trace_csv,
)
from .signals import (
    InsufficientDataError,
    SamplingError,
    SignalFormatError,
    SignalLengthError,
    detect_pulse_peaks,
    eda_decompose,
    eda_preprocess,
    hrv_features,
    ppg_preprocess,
    ppg_windows,
    read_signal_csv,
    scl_normalize,
    scr_features,
)
from .spider import ATTRIBUTE_COLUMNS, ATTRIBUTE_MAXES
from .subjects import export_population_csv, sample_population

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class OutputTracker:
    """Collects created files so a failed run leaves no partial output."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, *parts) -> str:
        p = os.path.join(self.out_dir, *parts)
        os.makedirs(os.path.dirname(p), exist_ok=True)
        self.files.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.files:
            if os.path.exists(p):
                os.remove(p)

    def write_manifest(self, command: str, seed, config_digest: str) -> None:
        outputs = {
            os.path.relpath(p, self.out_dir): _sha256(p)
            for p in self.files if os.path.exists(p)
        }
        manifest = {
            "command": command,
            "seed": seed,
            "config_sha256": config_digest,
            "outputs": dict(sorted(outputs.items())),
        }
        path = self.path("manifest.json")
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_config(path) -> tuple[RunConfig, str]:
    cfg = load_run_config(path)
    return cfg, _sha256(path)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg, digest = _load_config(args.config)
    population_cfg = cfg.population
    protocol = cfg.protocol
    if args.kind == "reversed":
        protocol = replace(protocol, reversed_targets=True)
        raw = configparser.ConfigParser()
        raw.read(args.config)
        if not raw.has_option("subjects", "habituation"):
            # The reversed variant models repeated-exposure decline unless
            # the config explicitly disables it.
            population_cfg = replace(population_cfg, habituation_decay=0.98)
    out = OutputTracker(args.out)
    try:
        population = sample_population(population_cfg)
        export_population_csv(population, out.path("population.csv"))
        if args.kind == "search":
            outcome = run_search(cfg.experiment, population, cfg.master_seed)
            write_search_csv(outcome, out.path("search_results.csv"))
        else:
            sessions = run_counterbalanced_sessions(
                protocol, population, cfg.master_seed,
                agent_cfg=cfg.agent, rules_empty_policy=cfg.rules_empty_policy,
            )
            for idx, (trace_rl, trace_rules) in enumerate(sessions):
                write_trace_csv(trace_rl, out.path("traces", f"trace_s{idx:03d}_rl.csv"))
                write_trace_csv(trace_rules, out.path("traces", f"trace_s{idx:03d}_rules.csv"))
        out.write_manifest(f"simulate {args.kind}", cfg.master_seed, digest)
    except Exception:
        out.cleanup()
        raise
    return EXIT_OK


# ---------------------------------------------------------------------------
# process
# ---------------------------------------------------------------------------

def _parse_window(raw: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in raw.split(":"))
    except ValueError:
        raise ConfigError(f"--relax-window: expected 'start:end', got {raw!r}") from None
    if a >= b:
        raise ConfigError(f"--relax-window: start {a} must be before end {b}")
    return a, b


def cmd_process_eda(args) -> int:
    series = read_signal_csv(args.infile)
    out = OutputTracker(args.out)
    try:
        pre = eda_preprocess(series)
        decomposition = eda_decompose(pre, method=args.method, window_s=args.median_window_s)
        scl, scr = decomposition.scl, decomposition.scr
        w0, w1 = _parse_window(args.relax_window)
        t = pre.times()
        mask = (t >= w0) & (t < w1)
        if not mask.any():
            raise ConfigError(f"--relax-window {args.relax_window} covers no samples")
        relax_min = float(scl.samples[mask].min())
        if relax_min >= args.assumed_max:
            raise ConfigError(
                f"relax-window minimum {relax_min} uS not below assumed max {args.assumed_max}"
            )
        norm = scl_normalize(scl, relax_min, args.assumed_max)

        params = (
            f"method={decomposition.method} median_window_s={args.median_window_s} "
            f"relax_window={args.relax_window} relax_min_uS={relax_min!r} "
            f"assumed_max_uS={args.assumed_max!r} min_amplitude_uS={args.min_amplitude!r}"
        )
        with open(out.path("eda_series.csv"), "w", newline="") as fh:
            fh.write(f"# {params}\n")
            writer = csv.writer(fh)
            writer.writerow(["t_s", "eda_1hz", "scl", "scr", "scl_norm"])
            for i, ts in enumerate(t):
                writer.writerow([
                    repr(float(ts)), repr(float(pre.samples[i])),
                    repr(float(scl.samples[i])), repr(float(scr.samples[i])),
                    repr(float(norm.samples[i])),
                ])

        seg_len = int(args.segment_s) if args.segment_s else len(pre)
        n_segments = max(1, len(pre) // seg_len)
        with open(out.path("eda_features.csv"), "w", newline="") as fh:
            fh.write(f"# {params}\n")
            writer = csv.writer(fh)
            writer.writerow([
                "segment", "t_start_s", "n_peaks", "scr_mean_amplitude",
                "scr_max_amplitude", "scr_sum_amplitude", "scl_mean_us", "scl_norm_mean",
            ])
            for seg in range(n_segments):
                sl = slice(seg * seg_len, (seg + 1) * seg_len)
                feats = scr_features(
                    scr.with_samples(scr.samples[sl]), min_amplitude_us=args.min_amplitude
                )
                writer.writerow([
                    seg, repr(float(t[sl][0])), feats.n_peaks,
                    repr(feats.mean_amplitude), repr(feats.max_amplitude),
                    repr(feats.sum_amplitude),
                    repr(float(scl.samples[sl].mean())),
                    repr(float(norm.samples[sl].mean())),
                ])
        if not args.no_figures:
            report.render_eda_decomposition(
                t, pre.samples, scl.samples, scr.samples, norm.samples,
                out.path("eda_decomposition.png"),
            )
        out.write_manifest("process eda", None, _sha256(args.infile))
    except Exception:
        out.cleanup()
        raise
    return EXIT_OK


def cmd_process_ppg(args) -> int:
    series = read_signal_csv(args.infile)
    out = OutputTracker(args.out)
    try:
        filtered = ppg_preprocess(series)
        windows = ppg_windows(filtered, args.window_s)
        params = f"band_hz=0.5-8.0 window_s={args.window_s!r}"
        mean_nns = []
        with open(out.path("ppg_features.csv"), "w", newline="") as fh:
            fh.write(f"# {params}\n")
            writer = csv.writer(fh)
            writer.writerow([
                "window", "t_start_s", "mean_nn_ms", "sdnn_ms", "rmssd_ms",
                "pnn20", "pnn50", "lf_power", "hf_power", "lf_hf_ratio", "ln_hf",
            ])
            for i, win in enumerate(windows):
                feats = hrv_features(win)
                mean_nns.append(feats.mean_nn_ms)
                writer.writerow([
                    i, repr(float(win.start_time_s)),
                    repr(feats.mean_nn_ms), repr(feats.sdnn_ms), repr(feats.rmssd_ms),
                    repr(feats.pnn20), repr(feats.pnn50),
                    repr(feats.lf_power), repr(feats.hf_power),
                    repr(feats.lf_hf_ratio), repr(feats.ln_hf),
                ])
        if not args.no_figures:
            peaks = detect_pulse_peaks(filtered)
            t = filtered.times()
            report.render_ppg_summary(
                t, filtered.samples, t[peaks], filtered.samples[peaks],
                mean_nns, out.path("ppg_summary.png"),
            )
        out.write_manifest("process ppg", None, _sha256(args.infile))
    except Exception:
        out.cleanup()
        raise
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze / cluster
# ---------------------------------------------------------------------------

def _discover_traces(trace_dir: str) -> list[tuple[int, str, str]]:
    found = []
    for name in sorted(os.listdir(trace_dir)):
        if not (name.startswith("trace_s") and name.endswith(".csv")):
            continue
        stem = name[len("trace_s"):-len(".csv")]
        try:
            subject_part, agent = stem.split("_", 1)
            found.append((int(subject_part), agent, os.path.join(trace_dir, name)))
        except ValueError:
            raise TraceIntegrityError(f"unrecognized trace filename {name!r}") from None
    if not found:
        raise TraceIntegrityError(f"no trace_s*_*.csv files under {trace_dir}")
    return found


def cmd_analyze(args) -> int:
    low_target, high_target = (int(x) for x in args.targets.split(","))
    traces = _discover_traces(args.traces)
    out = OutputTracker(args.out)
    try:
        reports = []
        max_entries = {}
        step_series: dict[str, list[list[int]]] = {}
        for subject, agent, path in traces:
            rows = read_trace_rows(path)
            reports.append(report.subject_report(
                subject, agent, rows, low_target, high_target, args.steps_per_segment
            ))
            steps = [r.anxiety for r in rows if r.is_step]
            step_series.setdefault(agent, []).append(steps)
            _, attrs, anx = report.collect_max_anxiety(subject, rows)
            prev = max_entries.get(subject)
            if prev is None or anx > prev[2]:
                max_entries[subject] = (subject, attrs, anx)
        report.write_subject_reports(reports, out.path("report.csv"))
        report.write_aggregate_csv(report.aggregate_tests(reports), out.path("aggregate.csv"))
        report.write_max_anxiety_csv(
            [max_entries[k] for k in sorted(max_entries)], out.path("max_anxiety.csv")
        )
        if not args.no_figures:
            timeline = {
                agent: np.mean(np.asarray(series, dtype=float), axis=0)
                for agent, series in step_series.items()
            }
            report.render_session_timeline(
                timeline, args.interval_s, low_target, high_target,
                out.path("session_timeline.png"),
            )
            report.render_mse_comparison(reports, out.path("mse_comparison.png"))
        out.write_manifest("analyze session", None, "")
    except Exception:
        out.cleanup()
        raise
    return EXIT_OK


def _read_spider_points(path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(ATTRIBUTE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        points, labels = [], []
        for i, rec in enumerate(reader):
            try:
                points.append([float(rec[c]) for c in ATTRIBUTE_COLUMNS])
            except ValueError as exc:
                raise ConfigError(f"{path}: line {i + 2}: {exc}") from None
            labels.append(rec.get("subject", str(i)))
    if not points:
        raise ConfigError(f"{path}: no data rows")
    return np.asarray(points), labels


def cmd_cluster(args) -> int:
    points, labels = _read_spider_points(args.infile)
    out = OutputTracker(args.out)
    try:
        lo, hi = (int(x) for x in args.k_range.split(":"))
        ks = list(range(lo, hi + 1))
        max_k = int(np.unique(points, axis=0).shape[0])
        ks = [k for k in ks if k <= max_k]
        curve = stats.wcss_curve(points, ks, seed=args.seed)
        if args.k == "auto":
            if len(ks) < 3:
                raise ConfigError(
                    f"--k auto needs >= 3 feasible cluster counts, have {ks}"
                )
            chosen = stats.elbow_select(points, ks, seed=args.seed)
        else:
            chosen = int(args.k)
            if chosen not in ks:
                raise ConfigError(f"--k {chosen} outside feasible range {ks}")
        model = stats.kmeans(points, chosen, seed=args.seed)
        centers = stats.discretize_centers(model.centers, ATTRIBUTE_MAXES)

        with open(out.path("cluster_centers.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cluster", *ATTRIBUTE_COLUMNS, "members"])
            for c in range(model.k):
                members = int((model.assignments == c).sum())
                writer.writerow([c, *[int(v) for v in centers[c]], members])
        with open(out.path("cluster_assignments.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject", "cluster"])
            for label, c in zip(labels, model.assignments):
                writer.writerow([label, int(c)])
        with open(out.path("wcss_curve.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "wcss"])
            for k in ks:
                writer.writerow([k, repr(curve[k])])
        if not args.no_figures:
            report.render_elbow(curve, chosen, out.path("elbow.png"))
        out.write_manifest("cluster spiders", args.seed, _sha256(args.infile))
    except Exception:
        out.cleanup()
        raise
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiderlab",
        description="Adaptive virtual-spider simulation lab and biosignal analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulated experiment")
    sim.add_argument("kind", choices=["search", "session", "reversed"])
    sim.add_argument("--config", required=True, help="INI config file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    proc = sub.add_parser("process", help="process a physiological recording")
    proc_sub = proc.add_subparsers(dest="signal_kind", required=True)

    eda = proc_sub.add_parser("eda", help="EDA: filter, decompose, features")
    eda.add_argument("--in", dest="infile", required=True, help="CSV with t_s,value")
    eda.add_argument("--relax-window", default="0:120",
                     help="start:end seconds defining the relax baseline (default 0:120)")
    eda.add_argument("--method", choices=["median", "highpass"], default="median")
    eda.add_argument("--median-window-s", type=float, default=8.0)
    eda.add_argument("--assumed-max", type=float, default=20.0)
    eda.add_argument("--min-amplitude", type=float, default=0.01)
    eda.add_argument("--segment-s", type=float, default=None,
                     help="emit one feature row per segment of this length")
    eda.add_argument("--out", default="eda_out")
    eda.add_argument("--no-figures", action="store_true")
    eda.set_defaults(func=cmd_process_eda)

    ppg = proc_sub.add_parser("ppg", help="PPG: filter, window, HRV features")
    ppg.add_argument("--in", dest="infile", required=True, help="CSV with t_s,value")
    ppg.add_argument("--window-s", type=float, default=60.0)
    ppg.add_argument("--out", default="ppg_out")
    ppg.add_argument("--no-figures", action="store_true")
    ppg.set_defaults(func=cmd_process_ppg)

    ana = sub.add_parser("analyze", help="statistical report over session traces")
    ana_sub = ana.add_subparsers(dest="analyze_kind", required=True)
    ana_s = ana_sub.add_parser("session")
    ana_s.add_argument("--traces", required=True, help="directory of trace_s*_*.csv files")
    ana_s.add_argument("--targets", default="3,7", help="low,high segment targets")
    ana_s.add_argument("--steps-per-segment", type=int, default=7)
    ana_s.add_argument("--interval-s", type=int, default=20)
    ana_s.add_argument("--out", default="analysis_out")
    ana_s.add_argument("--no-figures", action="store_true")
    ana_s.set_defaults(func=cmd_analyze)

    clu = sub.add_parser("cluster", help="group max-anxiety spiders")
    clu_sub = clu.add_subparsers(dest="cluster_kind", required=True)
    clu_s = clu_sub.add_parser("spiders")
    clu_s.add_argument("--in", dest="infile", required=True,
                       help=f"CSV with columns {','.join(ATTRIBUTE_COLUMNS)}")
    clu_s.add_argument("--k", default="auto", help="'auto' (elbow) or an integer")
    clu_s.add_argument("--k-range", default="1:8", help="k range for the elbow curve")
    clu_s.add_argument("--seed", type=int, default=7)
    clu_s.add_argument("--out", default="cluster_out")
    clu_s.add_argument("--no-figures", action="store_true")
    clu_s.set_defaults(func=cmd_cluster)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SignalFormatError, SamplingError, SignalLengthError,
            InsufficientDataError, TraceIntegrityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
