"""Frequency-hopped additive channel with adversarial interference.

The medium is K parallel additive-noise subbands. Per channel use the sender
puts one real amplitude into one band, the jammer adds a vector supported on
at most J bands, and every band sees independent mean-zero noise:

    y[l] = x * (l == k) + s[l] + N[l]

Bands uninvolved in either input carry pure noise. Block matrices are plain
(K, n) float ndarrays, one column per channel use; codewords, jamming blocks
and noise blocks all share that layout.

Band and message indices are 0-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

PROB_TOL = 1e-12
MOMENT_TOL = 1e-9


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a (seed, path) pair.

    Streams are derived with ``SeedSequence(seed, spawn_key=path)``, so any
    unit of work that owns its path tuple gets the same stream no matter how
    work is scheduled across threads.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=path))


@dataclass(frozen=True)
class GaussianNoise:
    """Per-band independent Gaussian noise with variances from the channel."""


@dataclass(frozen=True)
class FiniteSupportNoise:
    """Per-band finite-support noise given as (values, probabilities) pairs.

    Each band's distribution must be mean-zero with second moment equal to
    the channel's variance for that band; `FhChannel` validates this.
    """

    atoms: tuple[tuple[np.ndarray, np.ndarray], ...]

    @staticmethod
    def from_pairs(per_band: list[list[tuple[float, float]]]) -> "FiniteSupportNoise":
        atoms = []
        for pairs in per_band:
            values = np.asarray([v for v, _ in pairs], dtype=float)
            probs = np.asarray([p for _, p in pairs], dtype=float)
            values.flags.writeable = False
            probs.flags.writeable = False
            atoms.append((values, probs))
        return FiniteSupportNoise(atoms=tuple(atoms))

    def second_moments(self) -> np.ndarray:
        return np.array([float(np.sum(p * v * v)) for v, p in self.atoms])


@dataclass(frozen=True)
class FhChannel:
    """Static description of the K-subband channel.

    sigma2 holds the per-band noise variances (all positive). The noise kind
    is Gaussian by default; a finite-support kind is accepted for exact
    brute-force computations, as long as it is mean-zero and matches sigma2.
    """

    sigma2: np.ndarray
    noise: GaussianNoise | FiniteSupportNoise = field(default_factory=GaussianNoise)

    def __post_init__(self):
        sigma2 = np.atleast_1d(np.asarray(self.sigma2, dtype=float))
        if sigma2.ndim != 1 or sigma2.size == 0:
            raise ContractViolation("sigma2 must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(sigma2)) or np.any(sigma2 <= 0):
            raise ContractViolation("all noise variances must be finite and > 0")
        sigma2.flags.writeable = False
        object.__setattr__(self, "sigma2", sigma2)
        if isinstance(self.noise, FiniteSupportNoise):
            self._check_finite_support(self.noise)

    def _check_finite_support(self, noise: FiniteSupportNoise) -> None:
        if len(noise.atoms) != self.K:
            raise ContractViolation(
                f"finite-support noise has {len(noise.atoms)} bands, channel has {self.K}"
            )
        for k, (values, probs) in enumerate(noise.atoms):
            if values.shape != probs.shape or values.ndim != 1 or values.size == 0:
                raise ContractViolation(f"band {k}: malformed noise atoms")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROB_TOL:
                raise ContractViolation(f"band {k}: atom probabilities must sum to 1")
            mean = float(np.sum(probs * values))
            if abs(mean) > MOMENT_TOL:
                raise ContractViolation(f"band {k}: noise mean {mean} is not 0")
            m2 = float(np.sum(probs * values * values))
            if abs(m2 - self.sigma2[k]) > MOMENT_TOL:
                raise ContractViolation(
                    f"band {k}: second moment {m2} != sigma2 {self.sigma2[k]}"
                )

    @property
    def K(self) -> int:
        return int(self.sigma2.size)


@dataclass(frozen=True)
class SenderSymbol:
    """One sender channel use: amplitude x on band k."""

    x: float
    k: int

    def __post_init__(self):
        if not np.isfinite(self.x):
            raise ContractViolation("sender amplitude must be finite")
        if self.k < 0:
            raise ContractViolation("band index must be >= 0")

    def as_vector(self, K: int) -> np.ndarray:
        if self.k >= K:
            raise ContractViolation(f"band {self.k} out of range for K={K}")
        v = np.zeros(K)
        v[self.k] = self.x
        return v


@dataclass(frozen=True)
class JamSymbol:
    """One jammer channel use: vector s supported on a band subset."""

    bands: frozenset[int]
    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        s.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "bands", frozenset(int(b) for b in self.bands))
        if any(b < 0 or b >= s.size for b in self.bands):
            raise ContractViolation("jam band index out of range")
        outside = [l for l in range(s.size) if l not in self.bands and s[l] != 0.0]
        if outside:
            raise ContractViolation(f"jam vector nonzero outside its band set: {outside}")

    @staticmethod
    def zero(K: int) -> "JamSymbol":
        return JamSymbol(bands=frozenset(), s=np.zeros(K))

    @staticmethod
    def from_vector(s: np.ndarray) -> "JamSymbol":
        s = np.asarray(s, dtype=float)
        return JamSymbol(bands=frozenset(int(i) for i in np.flatnonzero(s)), s=s)


def transmit(
    ch: FhChannel, sym: SenderSymbol, jam: JamSymbol, noise: np.ndarray
) -> np.ndarray:
    """Single channel use: y = x e_k + s + noise, componentwise."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (ch.K,):
        raise ContractViolation(f"noise must have shape ({ch.K},), got {noise.shape}")
    if jam.s.shape != (ch.K,):
        raise ContractViolation(f"jam vector must have shape ({ch.K},), got {jam.s.shape}")
    return (sym.as_vector(ch.K) + jam.s) + noise


def sample_noise(ch: FhChannel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a (K, n) noise block: columns i.i.d., row k with variance sigma2[k]."""
    if n < 1:
        raise ContractViolation("blocklength n must be >= 1")
    if isinstance(ch.noise, FiniteSupportNoise):
        rows = [
            rng.choice(values, size=n, p=probs) for values, probs in ch.noise.atoms
        ]
        return np.stack(rows, axis=0)
    return rng.normal(size=(ch.K, n)) * np.sqrt(ch.sigma2)[:, None]


def transmit_block(
    ch: FhChannel, codeword: np.ndarray, jam: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """One block transmission: codeword + jam + fresh noise, entrywise."""
    codeword = np.asarray(codeword, dtype=float)
    jam = np.asarray(jam, dtype=float)
    if codeword.ndim != 2 or codeword.shape[0] != ch.K:
        raise ContractViolation(f"codeword must be (K, n) with K={ch.K}")
    if jam.shape != codeword.shape:
        raise ContractViolation(
            f"jam shape {jam.shape} does not match codeword shape {codeword.shape}"
        )
    return codeword + jam + sample_noise(ch, codeword.shape[1], rng)


def block_power(block: np.ndarray) -> float:
    """Sum of squared entries of a block matrix."""
    block = np.asarray(block, dtype=float)
    return float(np.sum(block * block))
