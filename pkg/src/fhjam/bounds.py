"""Closed-form capacity quantities for the jammed FH channel.

The jammer's worst-case power split over subbands is a waterfilling
allocation: bands with noise variance below a common water level c are
filled up to c, the rest get nothing, and c is set by the total budget.
The resulting level c drives both capacity bounds:

    lower:  (1/2) log2(1 + gamma / c)        (rate with shared randomness)
    upper:  lower + log2(K)                  (Gaussian noise, J >= |active|)

`verify_rhslower` brute-forces the underlying min-max over jammer splits on
a simplex grid, as an independent witness that waterfilling minimizes the
best single-band rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InfeasibleError

ALLOC_TOL = 1e-9


@dataclass(frozen=True)
class WaterfillResult:
    """Water level c, per-band jammer allocations, and the active band set."""

    c: float
    lambda_k: np.ndarray
    active: frozenset[int]


def waterfill(sigma2, lam: float) -> WaterfillResult:
    """Split jammer power lam over bands, equalizing sigma2[k] + lambda_k.

    Solves sum_k max(0, c - sigma2[k]) = lam for the water level c by
    scanning prefixes of the sorted variances. For lam == 0 the level is
    defined as min(sigma2) and every allocation is zero.
    """
    sigma2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    if sigma2.size == 0:
        raise ContractViolation("sigma2 must be non-empty")
    if np.any(sigma2 <= 0) or not np.all(np.isfinite(sigma2)):
        raise ContractViolation("all sigma2 entries must be finite and > 0")
    if lam < 0:
        raise ContractViolation("jammer power must be >= 0")

    K = sigma2.size
    if lam == 0.0:
        c = float(sigma2.min())
        return WaterfillResult(c=c, lambda_k=np.zeros(K), active=frozenset())

    order = np.argsort(sigma2, kind="stable")
    s_sorted = sigma2[order]
    csum = np.cumsum(s_sorted)
    c = float(s_sorted[-1] + lam)  # fallback: all bands active
    for r in range(1, K + 1):
        cand = (lam + csum[r - 1]) / r
        if r == K or cand <= s_sorted[r]:
            c = float(cand)
            break
    lambda_k = np.maximum(0.0, c - sigma2)
    # rounding guard: renormalize so the allocations sum exactly to lam
    total = lambda_k.sum()
    if total > 0 and abs(total - lam) > 0:
        lambda_k *= lam / total
    active = frozenset(int(k) for k in np.flatnonzero(sigma2 < c))
    return WaterfillResult(c=c, lambda_k=lambda_k, active=active)


def cr_lower(gamma: float, lam: float, sigma2) -> float:
    """Rate guaranteed achievable with shared randomness, in bits/use."""
    if gamma < 0:
        raise ContractViolation("sender power must be >= 0")
    wf = waterfill(sigma2, lam)
    return 0.5 * math.log2(1.0 + gamma / wf.c)


def cr_upper_gaussian(gamma: float, lam: float, sigma2, J: int) -> float:
    """Upper bound for Gaussian noise; needs J to cover the active band set."""
    wf = waterfill(sigma2, lam)
    if J < len(wf.active):
        raise InfeasibleError(
            f"jammer width J={J} cannot cover the {len(wf.active)} waterfilling-active bands"
        )
    K = np.atleast_1d(np.asarray(sigma2, dtype=float)).size
    return cr_lower(gamma, lam, sigma2) + math.log2(K)


def subband_capacity(gamma: float, lam: float, sigma2_k: float) -> float:
    """Single-band AWGN rate when the jammer dumps all power on that band."""
    if sigma2_k <= 0:
        raise ContractViolation("sigma2_k must be > 0")
    if gamma < 0:
        raise ContractViolation("sender power must be >= 0")
    return 0.5 * math.log2(1.0 + gamma / (sigma2_k + lam))


@dataclass(frozen=True)
class RhsLowerCheck:
    """Grid minimum vs. waterfilling value for the jammer's min-max split."""

    brute_min: float
    waterfill_value: float
    argmin_alloc: np.ndarray


def verify_rhslower(gamma: float, lam: float, sigma2, grid_steps: int) -> RhsLowerCheck:
    """Brute-force min over simplex-grid jammer splits of the best band rate.

    Enumerates allocations (lam_1..lam_K) with sum lam on a grid with
    `grid_steps` levels per coordinate and evaluates
    max_k (1/2) log2(1 + gamma/(sigma2[k] + lam_k)) at each. The grid
    minimum can exceed the waterfilling value only by grid resolution.
    """
    if grid_steps < 2:
        raise ContractViolation("grid_steps must be >= 2")
    sigma2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    K = sigma2.size
    wf_value = cr_lower(gamma, lam, sigma2)

    best = math.inf
    best_alloc = np.zeros(K)
    unit = lam / (grid_steps - 1)
    for parts in _compositions(grid_steps - 1, K):
        alloc = unit * np.asarray(parts, dtype=float)
        value = max(
            0.5 * math.log2(1.0 + gamma / (sigma2[k] + alloc[k])) for k in range(K)
        )
        if value < best:
            best = value
            best_alloc = alloc
    return RhsLowerCheck(brute_min=best, waterfill_value=wf_value, argmin_alloc=best_alloc)


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail
