"""Multiple mean-shift breaks located by global SSR minimisation (dynamic programming)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from patentdyn.exceptions import TooShort

__all__ = ["BreakSet", "bai_perron", "segment_ssr_matrix", "min_segment_length"]


@dataclass(frozen=True)
class BreakSet:
    """Selected segmentation and the per-``m`` search results.

    A break is reported as the index (or year) of the first observation of the
    new regime, so ``breaks=[100]`` means observations ``0..99`` and
    ``100..n-1`` form the two segments.
    """

    breaks: list[int]
    break_years: list
    segment_means: list[float]
    segment_ssr: list[float]
    total_ssr: float
    n_breaks: int
    trim: float
    min_length: int
    breaks_by_m: dict[int, list[int]]
    ssr_by_m: dict[int, float]
    criterion_by_m: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "breaks": list(self.breaks),
            "break_years": [int(y) if isinstance(y, (int, np.integer)) else y for y in self.break_years],
            "segment_means": list(self.segment_means),
            "segment_ssr": list(self.segment_ssr),
            "total_ssr": self.total_ssr,
            "n_breaks": self.n_breaks,
            "trim": self.trim,
            "min_length": self.min_length,
            "breaks_by_m": {str(k): v for k, v in self.breaks_by_m.items()},
            "ssr_by_m": {str(k): v for k, v in self.ssr_by_m.items()},
            "bic_by_m": {str(k): v for k, v in self.criterion_by_m.items()},
        }


def min_segment_length(n: int, trim: float) -> int:
    return int(math.ceil(trim * n - 1e-12))


def segment_ssr_matrix(y) -> np.ndarray:
    """``S[i, j]`` = SSR of a constant fitted to ``y[i..j]`` (inclusive); ``inf`` below the diagonal."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    z = y - y.mean()
    c1 = np.r_[0.0, np.cumsum(z)]
    c2 = np.r_[0.0, np.cumsum(z * z)]
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    length = j - i + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        s1 = c1[j + 1] - c1[i]
        s2 = c2[j + 1] - c2[i]
        S = s2 - s1 * s1 / length
    S = np.where(length >= 1, np.maximum(S, 0.0), np.inf)
    return S


def _segmentation_ssr(y: np.ndarray, breaks: list[int]) -> tuple[list[float], list[float]]:
    edges = [0, *breaks, y.shape[0]]
    means, ssrs = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = y[a:b]
        m = float(seg.mean())
        means.append(m)
        ssrs.append(float(((seg - m) ** 2).sum()))
    return means, ssrs


def bai_perron(y, max_breaks: int = 5, trim: float = 0.15, years=None) -> BreakSet:
    """Estimate up to ``max_breaks`` mean shifts and pick their number by BIC.

    For every ``m <= max_breaks`` the break dates minimising the total SSR are
    found exactly by dynamic programming over segments no shorter than
    ``ceil(trim * n)``. The number of breaks minimises
    ``n log(SSR_m / n) + p_m log n`` with ``p_m = 2m + 1`` (``m + 1`` segment
    means and ``m`` break dates).

    Parameters
    ----------
    y : array_like
    max_breaks : int
        At most 5.
    trim : float
        Minimum segment length as a fraction of the sample.
    years : array_like, optional
        Labels for the observations; break years are read from it.

    Raises
    ------
    TooShort
        When the trimmed segment length is below 2 or ``max_breaks + 1``
        segments cannot fit in the sample.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if not 0 <= max_breaks <= 5:
        raise ValueError("max_breaks must lie in 0..5")
    if not 0 < trim < 0.5:
        raise ValueError("trim must lie in (0, 0.5)")
    h = min_segment_length(n, trim)
    if h < 2:
        raise TooShort(f"minimum segment length ceil({trim} * {n}) = {h} is below 2")
    if (max_breaks + 1) * h > n:
        raise TooShort(f"{max_breaks + 1} segments of length >= {h} do not fit in {n} observations")

    S = segment_ssr_matrix(y)
    INF = np.inf
    # best[m][j]: minimal SSR splitting y[0..j] into m + 1 segments
    best = np.full((max_breaks + 1, n), INF)
    arg = np.full((max_breaks + 1, n), -1, dtype=int)
    best[0, h - 1 :] = S[0, h - 1 :]
    for m in range(1, max_breaks + 1):
        for j in range((m + 1) * h - 1, n):
            # last segment is y[k+1..j]; first m segments end at k
            ks = np.arange(m * h - 1, j - h + 1)
            cand = best[m - 1, ks] + S[ks + 1, j]
            pos = int(np.argmin(cand))
            best[m, j] = cand[pos]
            arg[m, j] = ks[pos]

    breaks_by_m: dict[int, list[int]] = {}
    ssr_by_m: dict[int, float] = {}
    bic_by_m: dict[int, float] = {}
    for m in range(max_breaks + 1):
        bks = []
        j = n - 1
        for mm in range(m, 0, -1):
            k = arg[mm, j]
            bks.append(int(k + 1))
            j = k
        bks.reverse()
        _, ssrs = _segmentation_ssr(y, bks)
        total = float(sum(ssrs))
        breaks_by_m[m] = bks
        ssr_by_m[m] = total
        bic_by_m[m] = n * math.log(max(total, 1e-300) / n) + (2 * m + 1) * math.log(n)

    m_hat = min(bic_by_m, key=lambda m: (bic_by_m[m], m))
    bks = breaks_by_m[m_hat]
    means, ssrs = _segmentation_ssr(y, bks)
    labels = np.arange(n) if years is None else np.asarray(years)
    return BreakSet(
        breaks=bks,
        break_years=[labels[b].item() for b in bks],
        segment_means=means,
        segment_ssr=ssrs,
        total_ssr=float(sum(ssrs)),
        n_breaks=m_hat,
        trim=trim,
        min_length=h,
        breaks_by_m=breaks_by_m,
        ssr_by_m=ssr_by_m,
        criterion_by_m=bic_by_m,
    )
