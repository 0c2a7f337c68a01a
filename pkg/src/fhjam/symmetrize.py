"""Symmetrizability diagnostics: when can the jammer impersonate the sender?

A symmetrizing kernel maps sender inputs to jammer inputs so that swapping
the true and spoofed inputs leaves the output distribution unchanged. Its
existence at jammer power below the sender power would kill capacity, and
the converse argument rules it out: any kernel whose means satisfy the
swap identity must spend at least the sender's full power.

Only the mean map of a candidate kernel is modeled here. The necessary
swap condition at the level of means is

    x e_k + meanZ(x', k') == x' e_k' + meanZ(x, k)

and for full-power, per-band-symmetric input distributions a Jensen
argument turns it into a power lower bound: E[||Z||^2] >= E[X^2]. The
ratio of that bound to the jammer budget certifies a positive capacity
threshold whenever the sender power exceeds the jammer power.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolation

MeanMap = Callable[[float, int], np.ndarray]

POWER_TOL = 1e-9
RESIDUAL_TOL = 1e-9


def canonical_mean_map(K: int) -> MeanMap:
    """Mean map of the codeword-mimicking kernel: (x, k) -> x e_k."""

    def mean(x: float, k: int) -> np.ndarray:
        v = np.zeros(K)
        v[k] = x
        return v

    return mean


def symmetry_mean_residual(
    pair_a: tuple[float, int],
    pair_b: tuple[float, int],
    mean_map: MeanMap,
    K: int,
) -> float:
    """Norm of the swap-identity defect between two sender inputs.

    Zero iff the necessary mean condition for symmetrization holds on this
    pair of inputs.
    """
    x, k = pair_a
    xp, kp = pair_b
    lhs = np.zeros(K)
    lhs[k] = x
    lhs = lhs + mean_map(xp, kp)
    rhs = np.zeros(K)
    rhs[kp] = xp
    rhs = rhs + mean_map(x, k)
    return float(np.linalg.norm(lhs - rhs))


@dataclass(frozen=True)
class InputDistribution:
    """Finite distribution over (amplitude, band) sender inputs."""

    K: int
    xs: np.ndarray
    ks: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ks = np.asarray(self.ks, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=float)
        if not (xs.shape == ks.shape == probs.shape) or xs.ndim != 1 or xs.size == 0:
            raise ContractViolation("xs, ks, probs must be equal-length 1-D arrays")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ContractViolation("probabilities must be nonnegative and sum to 1")
        if ks.min() < 0 or ks.max() >= self.K:
            raise ContractViolation("band indices out of range")
        for arr in (xs, ks, probs):
            arr.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "probs", probs)

    def power(self) -> float:
        return float(np.sum(self.probs * self.xs * self.xs))

    def band_marginal(self) -> np.ndarray:
        return np.bincount(self.ks, weights=self.probs, minlength=self.K)

    def is_band_symmetric(self, tol: float = 1e-9) -> bool:
        """True iff P(X = x | band k) == P(X = -x | band k) for every band."""
        for k in range(self.K):
            sel = self.ks == k
            if not np.any(sel):
                continue
            weights: dict[float, float] = {}
            for x, p in zip(self.xs[sel], self.probs[sel]):
                weights[x] = weights.get(x, 0.0) + p
            for x, p in weights.items():
                if abs(p - weights.get(-x, 0.0)) > tol:
                    return False
        return True


def jensen_power_bound(dist: InputDistribution, mean_map: MeanMap) -> float:
    """Minimum mean power of any kernel whose means satisfy the swap identity.

    Requires a per-band-symmetric input distribution; the caller certifies
    full power use by construction. The swap identity must hold exactly
    (residual 0) on every pair of support inputs. The returned value is the
    worst case over reference inputs of

        sum_k P(band k) sum_x P(x | k) (x - x' e_{k'}(k) + meanZ(x', k')(k))^2

    which the symmetry of P(.|k) pins at or above E[X^2].
    """
    if not dist.is_band_symmetric():
        raise ContractViolation("input distribution must be symmetric on every band")
    support = [(float(x), int(k)) for x, k in zip(dist.xs, dist.ks)]
    for a in support:
        for b in support:
            r = symmetry_mean_residual(a, b, mean_map, dist.K)
            if r > RESIDUAL_TOL:
                raise ContractViolation(
                    f"mean map violates the swap identity on {a} vs {b} (residual {r:.3g})"
                )
    bound = np.inf
    for xp, kp in support:
        mz = mean_map(xp, kp)
        shift = np.zeros(dist.K)
        shift[kp] = xp
        offsets = shift[dist.ks] - mz[dist.ks]  # x' e_{k'}(k) - meanZ(x', k')(k)
        total = float(np.sum(dist.probs * (dist.xs - offsets) ** 2))
        bound = min(bound, total)
    return float(bound)


def tau_lower_bound(dist: InputDistribution, mean_map: MeanMap, lam: float) -> float:
    """Normalized minimum symmetrization power: jensen bound over jammer budget."""
    if lam <= 0:
        raise ContractViolation("jammer budget must be > 0 for the ratio")
    return jensen_power_bound(dist, mean_map) / lam


def random_symmetric_full_power(
    K: int,
    gamma: float,
    rng: np.random.Generator,
    atoms_per_band: int = 3,
) -> InputDistribution:
    """Random per-band-symmetric input distribution with E[X^2] == gamma.

    Used by property tests: draws symmetric +-x pairs per band with random
    weights, then rescales amplitudes so the power is exactly gamma.
    """
    if gamma <= 0:
        raise ContractViolation("gamma must be > 0")
    xs: list[float] = []
    ks: list[int] = []
    ps: list[float] = []
    band_weights = rng.dirichlet(np.ones(K))
    for k in range(K):
        mags = rng.uniform(0.2, 2.0, size=atoms_per_band)
        w = rng.dirichlet(np.ones(atoms_per_band))
        for x, wx in zip(mags, w):
            share = band_weights[k] * wx / 2.0
            xs += [float(x), float(-x)]
            ks += [k, k]
            ps += [share, share]
    xs_arr = np.asarray(xs)
    ps_arr = np.asarray(ps)
    power = float(np.sum(ps_arr * xs_arr * xs_arr))
    xs_arr = xs_arr * np.sqrt(gamma / power)
    return InputDistribution(K=K, xs=xs_arr, ks=np.asarray(ks), probs=ps_arr)
