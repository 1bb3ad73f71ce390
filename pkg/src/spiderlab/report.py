"""Analysis reports and figure rendering.

The report path computes per-subject segment summaries and signed-rank
tests, aggregate paired comparisons between the two adaptive methods,
and the per-subject max-anxiety spider table that feeds clustering.
Matplotlib figures are rendered next to the CSV output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import stats
from .session import (
    PHASE_HIGH,
    PHASE_LOW,
    SegmentSummary,
    TraceRow,
    max_anxiety_state,
    summarize_steps,
)
from .spider import ATTRIBUTE_COLUMNS

FIGURE_DPI = 150


@dataclass(frozen=True)
class SubjectReport:
    subject: int
    agent: str
    low: SegmentSummary
    high: SegmentSummary
    wilcoxon_p: float
    wilcoxon_r: float


def subject_report(subject: int, agent: str, rows: list[TraceRow],
                   low_target: int = 3, high_target: int = 7,
                   steps_per_segment: int = 7) -> SubjectReport:
    """Per-subject segment summary plus the within-subject signed-rank test.

    The test pairs the high-segment step anxieties with the low-segment
    ones in step order, one-sided toward higher anxiety in the high
    segment.
    """
    summaries = summarize_steps(rows, low_target, high_target, steps_per_segment)
    low_steps = [r.anxiety for r in rows if r.is_step and r.phase == PHASE_LOW]
    high_steps = [r.anxiety for r in rows if r.is_step and r.phase == PHASE_HIGH]
    try:
        w = stats.wilcoxon_signed_rank(high_steps, low_steps, alternative="greater")
        p, r = w.p_value, w.effect_r
    except stats.DegenerateInputError:
        p, r = 1.0, 0.0
    return SubjectReport(
        subject=subject,
        agent=agent,
        low=summaries[PHASE_LOW],
        high=summaries[PHASE_HIGH],
        wilcoxon_p=p,
        wilcoxon_r=r,
    )


def write_subject_reports(reports: list[SubjectReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "subject", "agent",
            "low_mean_anxiety", "high_mean_anxiety",
            "low_mse", "high_mse",
            "low_mean_reward", "high_mean_reward",
            "wilcoxon_p", "wilcoxon_r",
        ])
        for r in reports:
            writer.writerow([
                r.subject, r.agent,
                repr(r.low.mean_anxiety), repr(r.high.mean_anxiety),
                repr(r.low.mse), repr(r.high.mse),
                repr(r.low.mean_reward), repr(r.high.mean_reward),
                repr(r.wilcoxon_p), repr(r.wilcoxon_r),
            ])


def aggregate_tests(reports: list[SubjectReport],
                    significance: float = 0.01) -> list[dict]:
    """Between-method comparisons over the population.

    Includes the per-method low-versus-high signed-rank test on segment
    means, one-tailed paired t-tests on segment MSE between methods, a
    binomial test on which method tracked the high target better, and a
    two-proportion z-test on per-subject significance counts.
    """
    by_agent: dict[str, dict[int, SubjectReport]] = {}
    for r in reports:
        by_agent.setdefault(r.agent, {})[r.subject] = r
    agents = sorted(by_agent)
    rows = []
    for agent in agents:
        subj = [by_agent[agent][k] for k in sorted(by_agent[agent])]
        highs = [r.high.mean_anxiety for r in subj]
        lows = [r.low.mean_anxiety for r in subj]
        try:
            w = stats.wilcoxon_signed_rank(highs, lows, alternative="greater")
            rows.append({
                "test": f"wilcoxon_high_gt_low[{agent}]",
                "statistic": w.statistic, "p_value": w.p_value,
                "effect": w.effect_r, "n": w.n_nonzero,
            })
        except stats.DegenerateInputError:
            rows.append({"test": f"wilcoxon_high_gt_low[{agent}]",
                         "statistic": float("nan"), "p_value": 1.0,
                         "effect": 0.0, "n": 0})
    if len(agents) == 2:
        a, b = agents
        common = sorted(set(by_agent[a]) & set(by_agent[b]))
        for segment in ("low", "high"):
            mse_a = [getattr(by_agent[a][s], segment).mse for s in common]
            mse_b = [getattr(by_agent[b][s], segment).mse for s in common]
            try:
                t = stats.paired_t_test(mse_a, mse_b, alternative="less")
                rows.append({
                    "test": f"paired_t_{segment}_mse[{a}<{b}]",
                    "statistic": t.t, "p_value": t.p_value,
                    "effect": t.mean_diff, "n": len(common),
                })
            except stats.DegenerateInputError:
                pass
            better = sum(1 for x, y in zip(mse_a, mse_b) if x < y)
            ties = sum(1 for x, y in zip(mse_a, mse_b) if x == y)
            n_eff = len(common) - ties
            rows.append({
                "test": f"binomial_{segment}_mse_better[{a}<{b}]",
                "statistic": better,
                "p_value": stats.binomial_test(better, n_eff, alternative="greater"),
                "effect": better / n_eff if n_eff else float("nan"),
                "n": n_eff,
            })
        sig_a = sum(1 for s in common if by_agent[a][s].wilcoxon_p < significance)
        sig_b = sum(1 for s in common if by_agent[b][s].wilcoxon_p < significance)
        z, p = stats.two_proportion_z(sig_a, len(common), sig_b, len(common))
        rows.append({
            "test": f"two_proportion_consistency[{a}vs{b}]",
            "statistic": z, "p_value": p,
            "effect": (sig_a - sig_b) / len(common) if common else float("nan"),
            "n": len(common),
        })
    return rows


def write_aggregate_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["test", "statistic", "p_value", "effect", "n"])
        for r in rows:
            writer.writerow([r["test"], repr(float(r["statistic"])),
                             repr(float(r["p_value"])), repr(float(r["effect"])), r["n"]])


def write_max_anxiety_csv(entries: list[tuple[int, tuple, int]], path) -> None:
    """Rows of (subject, six attribute values, peak anxiety)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", *ATTRIBUTE_COLUMNS, "anxiety"])
        for subject, attrs, anxiety in entries:
            writer.writerow([subject, *attrs, anxiety])


def collect_max_anxiety(subject: int, rows: list[TraceRow]) -> tuple[int, tuple, int]:
    spider, anxiety = max_anxiety_state(rows)
    return subject, spider.as_tuple(), anxiety


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

def render_session_timeline(step_anxiety: dict[str, np.ndarray], interval_s: int,
                            low_target: int, high_target: int, path) -> None:
    """Population-mean anxiety per adaptation step, one line per agent."""
    fig, ax = plt.subplots(figsize=(8, 4))
    any_series = next(iter(step_anxiety.values()))
    t = (np.arange(any_series.shape[0]) + 1) * interval_s
    half = t[-1] / 2
    ax.axvspan(0, half, color="tab:green", alpha=0.08)
    ax.axvspan(half, t[-1], color="tab:red", alpha=0.08)
    ax.axhline(low_target, ls=":", c="tab:green", lw=1, label=f"target {low_target}")
    ax.axhline(high_target, ls=":", c="tab:red", lw=1, label=f"target {high_target}")
    for agent, series in sorted(step_anxiety.items()):
        ax.plot(t, series, marker="o", ms=3, label=agent)
    ax.set_xlabel("time in anxious block (s)")
    ax.set_ylabel("mean anxiety (0-10)")
    ax.set_ylim(0, 10)
    ax.legend(loc="upper left", fontsize=8)
    ax.set_title("Segment tracking by adaptive method")
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def render_mse_comparison(reports: list[SubjectReport], path) -> None:
    """Box plot of per-subject segment MSE for each agent and segment."""
    agents = sorted({r.agent for r in reports})
    data, labels = [], []
    for segment in ("low", "high"):
        for agent in agents:
            data.append([getattr(r, segment).mse for r in reports if r.agent == agent])
            labels.append(f"{agent}\n{segment}")
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.boxplot(data, tick_labels=labels)
    ax.set_ylabel("MSE vs segment target")
    ax.set_title("Target tracking error by method and segment")
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def render_elbow(curve: dict[int, float], chosen_k: int, path) -> None:
    ks = sorted(curve)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [curve[k] for k in ks], marker="o")
    ax.axvline(chosen_k, ls="--", c="tab:red", lw=1, label=f"chosen k = {chosen_k}")
    ax.set_xlabel("number of clusters k")
    ax.set_ylabel("within-cluster sum of squares")
    ax.set_title("Cluster count selection")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def render_eda_decomposition(times: np.ndarray, preprocessed: np.ndarray,
                             scl: np.ndarray, scr: np.ndarray,
                             scl_norm: np.ndarray, path) -> None:
    fig, axes = plt.subplots(3, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(times, preprocessed, lw=0.8)
    axes[0].set_ylabel("EDA (uS)")
    axes[0].set_title("Preprocessed signal, tonic/phasic split, normalized level")
    axes[1].plot(times, scl, lw=0.8, label="tonic (SCL)")
    axes[1].plot(times, scr, lw=0.8, label="phasic (SCR)")
    axes[1].set_ylabel("uS")
    axes[1].legend(fontsize=8)
    axes[2].plot(times, scl_norm, lw=0.8, c="tab:purple")
    axes[2].set_ylabel("anxiety (0-10)")
    axes[2].set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def render_ppg_summary(times: np.ndarray, filtered: np.ndarray,
                       peak_times: np.ndarray, peak_values: np.ndarray,
                       window_mean_nn: list[float], path) -> None:
    fig, axes = plt.subplots(2, 1, figsize=(8, 5))
    axes[0].plot(times, filtered, lw=0.6)
    axes[0].plot(peak_times, peak_values, "r.", ms=4)
    axes[0].set_xlabel("time (s)")
    axes[0].set_ylabel("PPG (a.u.)")
    axes[0].set_title("Band-passed pulse signal with detected beats")
    axes[1].bar(range(1, len(window_mean_nn) + 1), window_mean_nn, color="tab:blue")
    axes[1].set_xlabel("window")
    axes[1].set_ylabel("mean NN (ms)")
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
