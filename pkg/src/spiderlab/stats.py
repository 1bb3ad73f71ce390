"""Statistical tests, questionnaire scoring and clustering.

Conventions pinned here because they affect reproducibility:

* Wilcoxon signed-rank drops zero differences, assigns average ranks to
  tied absolute differences, enumerates the exact null distribution for
  up to 12 nonzero pairs and falls back to the normal approximation
  with continuity correction (and tie-corrected variance) above that.
  The reported statistic is W+, the sum of positive-difference ranks,
  and the effect size is r = z / sqrt(n_nonzero).
* K-means is Lloyd's algorithm with k-means++ seeding, deterministic
  under a seed; the within-cluster sum of squares is recorded per
  iteration and never increases.
* The elbow choice maximizes the discrete second difference of the
  wcss-versus-k curve, breaking ties toward smaller k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

EXACT_WILCOXON_MAX_N = 12


class DegenerateInputError(ValueError):
    """Samples carry no usable variation for the requested test."""


def _as_pairs(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("paired samples must be equal-length non-empty 1-D arrays")
    return a, b


def _check_alternative(alternative: str) -> str:
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    return alternative


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # W+ = sum of ranks of positive differences
    p_value: float
    effect_r: float
    z: float
    n_nonzero: int
    exact: bool


def wilcoxon_signed_rank(a, b, alternative: str = "two-sided") -> WilcoxonResult:
    """Paired signed-rank test of a - b."""
    _check_alternative(alternative)
    a, b = _as_pairs(a, b)
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateInputError("all paired differences are zero")
    ranks = sstats.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())

    mean_w = n * (n + 1) / 4.0
    # Tie correction: sum(t^3 - t) / 48 subtracted from the null variance.
    _, counts = np.unique(ranks, return_counts=True)
    tie_term = float(((counts ** 3) - counts).sum()) / 48.0
    var_w = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    sd_w = math.sqrt(var_w) if var_w > 0 else float("nan")

    # z with continuity correction toward the mean; used for effect size
    # even when the p-value comes from exact enumeration.
    if var_w > 0:
        shift = w_plus - mean_w
        z = (shift - 0.5 * np.sign(shift)) / sd_w if shift != 0 else 0.0
    else:
        z = 0.0

    if n <= EXACT_WILCOXON_MAX_N:
        exact = True
        p = _wilcoxon_exact_p(ranks, w_plus, alternative)
    else:
        exact = False
        if alternative == "greater":
            p = float(sstats.norm.sf((w_plus - mean_w - 0.5) / sd_w))
        elif alternative == "less":
            p = float(sstats.norm.cdf((w_plus - mean_w + 0.5) / sd_w))
        else:
            p = min(1.0, 2.0 * float(sstats.norm.sf(abs(z))))

    return WilcoxonResult(
        statistic=w_plus,
        p_value=p,
        effect_r=z / math.sqrt(n),
        z=float(z),
        n_nonzero=n,
        exact=exact,
    )


def _wilcoxon_exact_p(ranks: np.ndarray, w_obs: float, alternative: str) -> float:
    """Exact tail probability by enumerating all 2^n sign assignments.

    Average ranks are multiples of 0.5, so every subset sum is exactly
    representable and the comparisons below are safe.
    """
    n = ranks.size
    masks = np.arange(2 ** n, dtype=np.uint32)
    bits = (masks[:, None] >> np.arange(n)) & 1  # rows: which diffs are positive
    sums = bits.astype(np.float64) @ ranks
    if alternative == "greater":
        return float(np.mean(sums >= w_obs))
    if alternative == "less":
        return float(np.mean(sums <= w_obs))
    center = n * (n + 1) / 4.0
    return float(np.mean(np.abs(sums - center) >= abs(w_obs - center)))


@dataclass(frozen=True)
class PairedTResult:
    t: float
    df: int
    p_value: float
    ci_low: float
    ci_high: float
    mean_diff: float


def paired_t_test(a, b, alternative: str = "two-sided",
                  confidence: float = 0.95) -> PairedTResult:
    """Paired t-test of a - b with the matching confidence bound(s)."""
    _check_alternative(alternative)
    a, b = _as_pairs(a, b)
    d = a - b
    n = d.size
    if n < 2:
        raise DegenerateInputError("paired t-test needs at least 2 pairs")
    sd = float(d.std(ddof=1))
    if sd == 0:
        raise DegenerateInputError("paired differences have zero variance")
    mean = float(d.mean())
    se = sd / math.sqrt(n)
    t = mean / se
    df = n - 1
    dist = sstats.t(df)
    if alternative == "greater":
        p = float(dist.sf(t))
        ci = (mean - float(dist.ppf(confidence)) * se, math.inf)
    elif alternative == "less":
        p = float(dist.cdf(t))
        ci = (-math.inf, mean + float(dist.ppf(confidence)) * se)
    else:
        p = 2.0 * float(dist.sf(abs(t)))
        half = float(dist.ppf(0.5 + confidence / 2)) * se
        ci = (mean - half, mean + half)
    return PairedTResult(t=t, df=df, p_value=min(1.0, p),
                         ci_low=ci[0], ci_high=ci[1], mean_diff=mean)


def mse_vs_target(series, target: float) -> float:
    """Mean squared deviation from a fixed target level."""
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ValueError("mse needs a non-empty series")
    return float(np.mean((x - target) ** 2))


@dataclass(frozen=True)
class PearsonResult:
    r: float
    t: float
    df: int
    p_value: float
    ci_low: float
    ci_high: float


def pearson(x, y, confidence: float = 0.95) -> PearsonResult:
    """Product-moment correlation with t-based p and Fisher-z interval."""
    x, y = _as_pairs(x, y)
    n = x.size
    if n < 3:
        raise ValueError("correlation needs at least 3 pairs")
    if float(x.std()) == 0 or float(y.std()) == 0:
        raise DegenerateInputError("one of the samples has zero variance")
    r = float(np.corrcoef(x, y)[0, 1])
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        t = math.inf if r > 0 else -math.inf
        p = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p = 2.0 * float(sstats.t(df).sf(abs(t)))
    if n > 3 and abs(r) < 1.0:
        zcrit = float(sstats.norm.ppf(0.5 + confidence / 2))
        zr = math.atanh(r)
        half = zcrit / math.sqrt(n - 3)
        ci = (math.tanh(zr - half), math.tanh(zr + half))
    else:
        ci = (-1.0, 1.0)
    return PearsonResult(r=r, t=t, df=df, p_value=min(1.0, p),
                         ci_low=ci[0], ci_high=ci[1])


def binomial_test(successes: int, n: int, p0: float = 0.5,
                  alternative: str = "two-sided") -> float:
    """Exact binomial tail probability."""
    _check_alternative(alternative)
    if not 0 <= successes <= n:
        raise ValueError(f"successes {successes} outside 0..{n}")
    if n == 0:
        return 1.0
    return float(sstats.binomtest(successes, n, p0, alternative=alternative).pvalue)


def two_proportion_z(successes1: int, n1: int, successes2: int, n2: int,
                     alternative: str = "two-sided") -> tuple[float, float]:
    """Pooled z-test for two proportions; returns (z, p)."""
    _check_alternative(alternative)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples need at least one observation")
    if not (0 <= successes1 <= n1 and 0 <= successes2 <= n2):
        raise ValueError("success counts outside sample sizes")
    p1 = successes1 / n1
    p2 = successes2 / n2
    pooled = (successes1 + successes2) / (n1 + n2)
    denom = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    z = 0.0 if denom == 0 else (p1 - p2) / denom
    if alternative == "greater":
        p = float(sstats.norm.sf(z))
    elif alternative == "less":
        p = float(sstats.norm.cdf(z))
    else:
        p = min(1.0, 2.0 * float(sstats.norm.sf(abs(z))))
    return z, p


# ---------------------------------------------------------------------------
# Six-item state-anxiety scoring
# ---------------------------------------------------------------------------

STAI6_ITEMS = ("calm", "tense", "upset", "relaxed", "content", "worried")
_STAI6_REVERSED = frozenset({"calm", "relaxed", "content"})


@dataclass(frozen=True)
class Stai6Response:
    calm: int
    tense: int
    upset: int
    relaxed: int
    content: int
    worried: int

    def __post_init__(self) -> None:
        for item in STAI6_ITEMS:
            v = getattr(self, item)
            if not 1 <= v <= 4:
                raise ValueError(f"{item}={v} outside 1..4")


def stai6_score(response: Stai6Response) -> float:
    """Rescaled six-item anxiety score in [20, 80].

    Positively phrased items (calm, relaxed, content) are reverse-scored
    as 5 - v; the raw sum in [6, 24] is rescaled by /6 * 20.
    """
    total = 0
    for item in STAI6_ITEMS:
        v = getattr(response, item)
        total += (5 - v) if item in _STAI6_REVERSED else v
    return total / 6.0 * 20.0


# ---------------------------------------------------------------------------
# K-means and elbow selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterModel:
    k: int
    centers: np.ndarray        # (k, dim)
    assignments: np.ndarray    # (n,)
    wcss: float
    wcss_history: tuple[float, ...]  # one value per Lloyd iteration


def _nearest(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    return assign, d2[np.arange(points.shape[0]), assign]


def _seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding: squared-distance-weighted draws."""
    n = points.shape[0]
    centers = [points[int(rng.integers(n))]]
    for _ in range(1, k):
        d2 = ((points[:, None, :] - np.asarray(centers)[None, :, :]) ** 2).sum(axis=2)
        nearest = d2.min(axis=1)
        total = nearest.sum()
        if total == 0:
            centers.append(points[int(rng.integers(n))])
            continue
        probs = nearest / total
        centers.append(points[int(rng.choice(n, p=probs))])
    return np.asarray(centers, dtype=np.float64)


def kmeans(points, k: int, seed: int, max_iter: int = 100) -> ClusterModel:
    """Lloyd's iterations from k-means++ seeding, deterministic under seed."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty 2-D array")
    distinct = np.unique(pts, axis=0).shape[0]
    if not 1 <= k <= distinct:
        raise ValueError(f"k={k} outside 1..{distinct} distinct points")
    rng = np.random.default_rng(seed)
    centers = _seed_centers(pts, k, rng)
    assign, d2 = _nearest(pts, centers)
    history = [float(d2.sum())]
    for _ in range(max_iter):
        new_centers = centers.copy()
        for c in range(k):
            members = pts[assign == c]
            if members.shape[0] == 0:
                # Reseed an emptied cluster with the point farthest from its center.
                _, cur_d2 = _nearest(pts, new_centers)
                new_centers[c] = pts[int(cur_d2.argmax())]
            else:
                new_centers[c] = members.mean(axis=0)
        new_assign, d2 = _nearest(pts, new_centers)
        history.append(float(d2.sum()))
        converged = bool(np.array_equal(new_assign, assign))
        centers, assign = new_centers, new_assign
        if converged:
            break
    return ClusterModel(
        k=k,
        centers=centers,
        assignments=assign,
        wcss=history[-1],
        wcss_history=tuple(history),
    )


def discretize_centers(centers: np.ndarray, maxes) -> np.ndarray:
    """Round centers to the nearest ordinal value, clamped per attribute."""
    maxes = np.asarray(maxes)
    rounded = np.floor(np.asarray(centers) + 0.5).astype(int)
    return np.clip(rounded, 0, maxes)


def wcss_curve(points, k_values, seed: int, restarts: int = 4) -> dict[int, float]:
    """Best wcss over seeded restarts for each k."""
    curve = {}
    for k in k_values:
        best = math.inf
        for r in range(restarts):
            child = int(np.random.SeedSequence([seed, k, r]).generate_state(1)[0])
            best = min(best, kmeans(points, k, child).wcss)
        curve[k] = best
    return curve


def elbow_select(points, k_range, seed: int, restarts: int = 4) -> int:
    """Interior k with the largest discrete second difference of wcss(k)."""
    ks = sorted(set(int(k) for k in k_range))
    if len(ks) < 3:
        raise ValueError("elbow selection needs a range of at least 3 k values")
    curve = wcss_curve(points, ks, seed, restarts)
    best_k = None
    best_curvature = -math.inf
    for i in range(1, len(ks) - 1):
        k_prev, k, k_next = ks[i - 1], ks[i], ks[i + 1]
        curvature = curve[k_prev] - 2 * curve[k] + curve[k_next]
        if curvature > best_curvature:  # ties keep the earlier (smaller) k
            best_curvature = curvature
            best_k = k
    return best_k
