"""Mutual information on finite tables and capacity via Blahut-Arimoto.

Everything here works on explicit finite probability tables. Rates are
bits/channel use; internal computations run in nats and convert on output.

The chain-rule decomposition check splits the information carried by a
(amplitude, band) sender pair into the in-band part I(X;Y|band) and the
hopping part I(band;Y); the identity is exact whenever distinct pairs give
distinct channel inputs, which only fails when amplitude 0 is used on more
than one band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

LN2 = float(np.log(2.0))
JOINT_SUM_TOL = 1e-12
ROW_SUM_TOL = 1e-9


def mutual_information(joint: np.ndarray) -> float:
    """I(A;B) in bits from a 2-D joint table; 0*log 0 reads as 0."""
    p = np.asarray(joint, dtype=float)
    if p.ndim != 2:
        raise ContractViolation("joint must be a 2-D table")
    if np.any(p < 0):
        raise ContractViolation("joint probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > JOINT_SUM_TOL:
        raise ContractViolation(f"joint sums to {p.sum()!r}, not 1")
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    mask = p > 0
    prod = np.outer(pa, pb)[mask]
    terms = p[mask] * np.log2(p[mask] / prod)
    return float(terms.sum())


def mi_decomposition_check(joint: np.ndarray, x_values) -> tuple[float, float]:
    """Both sides of I((X,band);Y) = I(X;Y|band) + I(band;Y), in bits.

    `joint` is a (|X|, K, |Y|) table; `x_values` carries the amplitude each
    X index stands for, used only to confirm that (amplitude, band) pairs in
    the support map to distinct channel inputs.
    """
    p = np.asarray(joint, dtype=float)
    if p.ndim != 3:
        raise ContractViolation("joint must be (|X|, K, |Y|)")
    if np.any(p < 0):
        raise ContractViolation("joint probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > JOINT_SUM_TOL:
        raise ContractViolation(f"joint sums to {p.sum()!r}, not 1")
    x_values = np.asarray(x_values, dtype=float)
    if x_values.shape != (p.shape[0],):
        raise ContractViolation("x_values must label the first table axis")

    support = np.argwhere(p.sum(axis=2) > 0)
    seen: set[tuple] = set()
    for ix, k in support:
        key = ("zero",) if x_values[ix] == 0.0 else (float(x_values[ix]), int(k))
        if key in seen:
            raise ContractViolation(
                "sender inputs are not distinct on the support; "
                "amplitude 0 may be used on at most one band"
            )
        seen.add(key)

    lhs = mutual_information(p.reshape(p.shape[0] * p.shape[1], p.shape[2]))

    pk = p.sum(axis=(0, 2))
    cond = 0.0
    for k in range(p.shape[1]):
        if pk[k] > 0:
            slice_k = p[:, k, :] / pk[k]
            slice_k = slice_k / slice_k.sum()
            cond += pk[k] * mutual_information(slice_k)
    hopping = mutual_information(p.sum(axis=0))
    return lhs, cond + hopping


@dataclass(frozen=True)
class BlahutArimotoResult:
    """Capacity estimate with the certified bracket it converged under."""

    capacity: float  # bits/use
    input_dist: np.ndarray
    upper_bound: float  # bits/use, valid upper bound on the true optimum
    multiplier: float  # cost multiplier at the returned solution
    iterations: int
    converged: bool


def _kl_rows(W: np.ndarray, logW: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Per-input-row KL(W_x || q) in nats."""
    logq = np.log(np.maximum(q, 1e-300))
    return np.einsum("xy,xy->x", W, logW - logq[None, :])


def _ba_fixed_multiplier(
    W: np.ndarray,
    logW: np.ndarray,
    cost: np.ndarray | None,
    s: float,
    p: np.ndarray,
    inner_tol: float,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Maximize I(p) - s*E[cost] by multiplicative updates; returns (p, D, iters)."""
    penalty = s * cost if (cost is not None and s != 0.0) else 0.0
    D = None
    for it in range(1, max_iter + 1):
        q = p @ W
        D = _kl_rows(W, logW, q)
        score = D - penalty
        gap = float(np.max(score) - np.dot(p, score))
        if gap < inner_tol:
            return p, D, it
        z = score - np.max(score)
        p = p * np.exp(z)
        p /= p.sum()
    return p, D, max_iter


def blahut_arimoto(
    transition: np.ndarray,
    cost=None,
    budget: float | None = None,
    tol: float = 1e-6,
    max_iter: int = 200_000,
    p0: np.ndarray | None = None,
) -> BlahutArimotoResult:
    """Capacity of a discrete channel, optionally under an input-cost budget.

    `transition` is row-stochastic, rows indexed by input letters. With a
    cost vector and budget, the input distribution is constrained to
    E[cost] <= budget via a bisected cost multiplier. Terminates once the
    certified upper/lower capacity bracket is below tol (bits).
    """
    W = np.asarray(transition, dtype=float)
    if W.ndim != 2 or W.shape[0] < 1:
        raise ContractViolation("transition must be a 2-D row-stochastic table")
    if np.any(W < 0):
        raise ContractViolation("transition probabilities must be nonnegative")
    if np.any(np.abs(W.sum(axis=1) - 1.0) > ROW_SUM_TOL):
        raise ContractViolation("transition rows must each sum to 1")
    if tol <= 0:
        raise ContractViolation("tol must be > 0")
    if cost is not None:
        cost = np.asarray(cost, dtype=float)
        if cost.shape != (W.shape[0],):
            raise ContractViolation("cost must give one value per input letter")
        if budget is None:
            raise ContractViolation("a cost vector needs a budget")
        if budget < float(cost.min()):
            raise ContractViolation("budget below the cheapest input letter")

    nX = W.shape[0]
    with np.errstate(divide="ignore"):
        logW = np.where(W > 0, np.log(np.maximum(W, 1e-300)), 0.0)

    # budget exactly at the cheapest letters: only those letters are usable
    if cost is not None and budget == float(cost.min()):
        keep = np.flatnonzero(cost <= budget)
        sub = blahut_arimoto(W[keep], tol=tol, max_iter=max_iter)
        p_full = np.zeros(nX)
        p_full[keep] = sub.input_dist
        return BlahutArimotoResult(
            capacity=sub.capacity,
            input_dist=p_full,
            upper_bound=sub.upper_bound,
            multiplier=float("inf"),
            iterations=sub.iterations,
            converged=sub.converged,
        )

    p = np.full(nX, 1.0 / nX) if p0 is None else np.asarray(p0, dtype=float).copy()
    inner_tol = tol * LN2 / 4.0

    def solve(s: float, p_start: np.ndarray, iters_left: int):
        return _ba_fixed_multiplier(W, logW, cost, s, p_start, inner_tol, iters_left)

    total_iters = 0
    p, D, used = solve(0.0, p, max_iter)
    total_iters += used
    mean_cost = float(np.dot(p, cost)) if cost is not None else None
    value = float(np.dot(p, D))  # nats
    upper = float(np.max(D))  # unconstrained Arimoto upper bound

    if cost is None or mean_cost <= budget + 1e-12:
        return BlahutArimotoResult(
            capacity=value / LN2,
            input_dist=p,
            upper_bound=upper / LN2,
            multiplier=0.0,
            iterations=total_iters,
            converged=(upper - value) / LN2 < tol,
        )

    # bisection on the multiplier to meet E[cost] = budget from below
    s_lo, s_hi = 0.0, 1.0
    p_hi = p.copy()
    best_upper = np.inf
    feas: tuple[float, np.ndarray, float, float] | None = None  # (I, p, E, s)
    infeas = (value, p.copy(), mean_cost, 0.0)
    for _ in range(200):
        p_hi, D_hi, used = solve(s_hi, p_hi, max_iter)
        total_iters += used
        best_upper = min(best_upper, float(np.max(D_hi - s_hi * cost) + s_hi * budget))
        e_hi = float(np.dot(p_hi, cost))
        if e_hi <= budget:
            feas = (float(np.dot(p_hi, D_hi)), p_hi.copy(), e_hi, s_hi)
            break
        infeas = (float(np.dot(p_hi, D_hi)), p_hi.copy(), e_hi, s_hi)
        s_hi *= 2.0
    if feas is None:
        raise ContractViolation("cost multiplier search failed to find a feasible point")

    p_cur = feas[1]
    for _ in range(200):
        if feas[0] > 0 and (best_upper - feas[0]) < tol * LN2:
            break
        if s_hi - s_lo < 1e-14 * max(1.0, s_hi):
            break
        s_mid = 0.5 * (s_lo + s_hi)
        p_cur, D_mid, used = solve(s_mid, p_cur, max_iter)
        total_iters += used
        best_upper = min(
            best_upper, float(np.max(D_mid - s_mid * cost) + s_mid * budget)
        )
        e_mid = float(np.dot(p_cur, cost))
        if e_mid <= budget:
            feas = (float(np.dot(p_cur, D_mid)), p_cur.copy(), e_mid, s_mid)
            s_hi = s_mid
        else:
            infeas = (float(np.dot(p_cur, D_mid)), p_cur.copy(), e_mid, s_mid)
            s_lo = s_mid

    # close any feasibility jump by mixing toward the infeasible iterate
    value, p_best, e_best, s_best = feas
    if infeas is not None and infeas[2] > budget and e_best < budget:
        alpha = (infeas[2] - budget) / (infeas[2] - e_best)
        p_mix = alpha * p_best + (1.0 - alpha) * infeas[1]
        q = p_mix @ W
        d_mix = _kl_rows(W, logW, q)
        v_mix = float(np.dot(p_mix, d_mix))
        if v_mix > value:
            value, p_best = v_mix, p_mix

    return BlahutArimotoResult(
        capacity=value / LN2,
        input_dist=p_best,
        upper_bound=best_upper / LN2,
        multiplier=s_best,
        iterations=total_iters,
        converged=(best_upper - value) / LN2 < tol,
    )
