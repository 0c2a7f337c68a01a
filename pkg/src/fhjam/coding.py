"""FH codebooks: random code generation, minimum-distance decoding, and
Monte Carlo error estimation.

A codebook is M block codewords, each a (K, n) matrix with at most one
nonzero entry per column: the sender occupies exactly one band per channel
use, and the band sequence (the hopping pattern) may depend on the message.
Codewords are stored compactly as (M, n) amplitude and band arrays.

Decoding is minimum Euclidean (Frobenius) distance over the codebook, with
ties broken toward the smallest message index. The receiver never learns
the jamming strategy, so no likelihood model is assumed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import FhChannel, FiniteSupportNoise, derive_rng
from .errors import ContractViolation

POWER_SLACK = 1e-12
CODEBOOK_FORMAT_VERSION = 1

# trials per RNG chunk; fixed so results do not depend on the worker count
TRIAL_CHUNK = 512

# draw amplitudes at this fraction of the power budget, leaving headroom so
# per-codeword rescaling stays rare
AMPLITUDE_BACKOFF = 0.98


@dataclass(frozen=True)
class FixedBand:
    """No hopping: every symbol of every codeword uses band k."""

    k: int


@dataclass(frozen=True)
class UniformRandom:
    """One uniform random hop sequence, shared by all messages."""


@dataclass(frozen=True)
class MessageKeyed:
    """Independent uniform hop sequence per message (message-driven hopping)."""


HoppingPolicy = FixedBand | UniformRandom | MessageKeyed


@dataclass(frozen=True, eq=False)
class Codebook:
    """M codewords of blocklength n over K bands under power budget gamma."""

    K: int
    gamma: float
    amplitudes: np.ndarray  # (M, n) float
    bands: np.ndarray  # (M, n) int

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=float)
        bands = np.asarray(self.bands, dtype=np.int64)
        if amplitudes.ndim != 2 or amplitudes.shape != bands.shape:
            raise ContractViolation("amplitudes and bands must both be (M, n)")
        if amplitudes.shape[0] < 1 or amplitudes.shape[1] < 1:
            raise ContractViolation("codebook needs M >= 1 and n >= 1")
        if self.K < 1:
            raise ContractViolation("K must be >= 1")
        if self.gamma <= 0:
            raise ContractViolation("gamma must be > 0")
        if bands.min() < 0 or bands.max() >= self.K:
            raise ContractViolation("band indices must lie in 0..K-1")
        budget = self.n * self.gamma * (1.0 + POWER_SLACK)
        powers = np.sum(amplitudes * amplitudes, axis=1)
        if np.any(powers > budget):
            raise ContractViolation("a codeword exceeds the power constraint n*gamma")
        amplitudes.flags.writeable = False
        bands.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "bands", bands)

    @property
    def M(self) -> int:
        return int(self.amplitudes.shape[0])

    @property
    def n(self) -> int:
        return int(self.amplitudes.shape[1])

    def codeword_power(self, m: int) -> float:
        row = self.amplitudes[m]
        return float(np.sum(row * row))

    def dense(self) -> np.ndarray:
        """All codewords as a read-only (M, K, n) array."""
        cached = self.__dict__.get("_dense")
        if cached is None:
            M, n = self.amplitudes.shape
            cached = np.zeros((M, self.K, n))
            rows = np.repeat(np.arange(M), n)
            cached[rows, self.bands.ravel(), np.tile(np.arange(n), M)] = (
                self.amplitudes.ravel()
            )
            cached.flags.writeable = False
            object.__setattr__(self, "_dense", cached)
        return cached

    def __eq__(self, other) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return (
            self.K == other.K
            and self.gamma == other.gamma
            and np.array_equal(self.amplitudes, other.amplitudes)
            and np.array_equal(self.bands, other.bands)
        )


def generate_random_code(
    K: int,
    n: int,
    M: int,
    gamma: float,
    policy: HoppingPolicy,
    rng: np.random.Generator,
) -> Codebook:
    """Random Gaussian codebook under the per-codeword power constraint.

    Amplitudes are i.i.d. N(0, 0.98*gamma); any codeword whose power lands
    above n*gamma is rescaled onto the constraint boundary. Hop sequences
    follow the policy.
    """
    if K < 1 or n < 1 or M < 1:
        raise ContractViolation("K, n and M must all be >= 1")
    if gamma <= 0:
        raise ContractViolation("gamma must be > 0")
    amplitudes = rng.normal(0.0, np.sqrt(AMPLITUDE_BACKOFF * gamma), size=(M, n))
    budget = n * gamma
    powers = np.sum(amplitudes * amplitudes, axis=1)
    hot = powers > budget
    if np.any(hot):
        amplitudes[hot] *= np.sqrt(budget / powers[hot])[:, None]

    if isinstance(policy, FixedBand):
        if not 0 <= policy.k < K:
            raise ContractViolation(f"fixed band {policy.k} out of range for K={K}")
        bands = np.full((M, n), policy.k, dtype=np.int64)
    elif isinstance(policy, UniformRandom):
        bands = np.broadcast_to(rng.integers(0, K, size=n), (M, n)).copy()
    elif isinstance(policy, MessageKeyed):
        bands = rng.integers(0, K, size=(M, n))
    else:
        raise ContractViolation(f"unknown hopping policy: {policy!r}")
    return Codebook(K=K, gamma=gamma, amplitudes=amplitudes, bands=bands)


def encode(cb: Codebook, m: int) -> np.ndarray:
    """Codeword m as a read-only (K, n) block matrix."""
    if not 0 <= m < cb.M:
        raise ContractViolation(f"message {m} out of range 0..{cb.M - 1}")
    return cb.dense()[m]


def decode_min_distance(cb: Codebook, y: np.ndarray) -> int:
    """Message whose codeword is closest to y in Frobenius norm."""
    y = np.asarray(y, dtype=float)
    if y.shape != (cb.K, cb.n):
        raise ContractViolation(f"output must be ({cb.K}, {cb.n}), got {y.shape}")
    return int(decode_batch(cb, y[None, :, :])[0])


# message-block size for the blockwise distance computation; bounds the
# (trials x messages) scratch matrix
_DECODE_BLOCK = 8192


def decode_batch(cb: Codebook, outputs: np.ndarray) -> np.ndarray:
    """Minimum-distance decode a (T, K, n) batch; ties go to the lower index.

    Distances use ||y - c||^2 = ||y||^2 - 2<y, c> + ||c||^2 with the ||y||^2
    term dropped (constant per trial), computed blockwise over messages.
    """
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim != 3 or outputs.shape[1:] != (cb.K, cb.n):
        raise ContractViolation("outputs must be (T, K, n)")
    T = outputs.shape[0]
    flat_out = outputs.reshape(T, cb.K * cb.n)
    flat_code = cb.dense().reshape(cb.M, cb.K * cb.n)
    code_norm2 = np.einsum("ij,ij->i", flat_code, flat_code)

    best_val = np.full(T, np.inf)
    best_idx = np.zeros(T, dtype=np.int64)
    for lo in range(0, cb.M, _DECODE_BLOCK):
        hi = min(lo + _DECODE_BLOCK, cb.M)
        scores = flat_out @ flat_code[lo:hi].T
        scores *= -2.0
        scores += code_norm2[lo:hi]
        idx = np.argmin(scores, axis=1)
        val = scores[np.arange(T), idx]
        better = val < best_val
        best_val[better] = val[better]
        best_idx[better] = idx[better] + lo
    return best_idx


# A jam provider emits `count` jamming blocks, shape (count, K, n), from the
# supplied per-chunk generator. It never sees the transmitted messages.
JamProvider = Callable[[np.random.Generator, int], np.ndarray]


def sample_noise_batch(
    ch: FhChannel, n: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """(count, K, n) stack of independent noise blocks."""
    if isinstance(ch.noise, FiniteSupportNoise):
        rows = [
            rng.choice(values, size=(count, n), p=probs)
            for values, probs in ch.noise.atoms
        ]
        return np.stack(rows, axis=1)
    return rng.normal(size=(count, ch.K, n)) * np.sqrt(ch.sigma2)[None, :, None]


def _chunk_ranges(trials: int):
    for start in range(0, trials, TRIAL_CHUNK):
        yield start // TRIAL_CHUNK, min(TRIAL_CHUNK, trials - start)


def _run_error_chunk(
    cb: Codebook,
    ch: FhChannel,
    jam_provider: JamProvider,
    seed: int,
    path: tuple[int, ...],
    chunk_id: int,
    count: int,
) -> int:
    rng = derive_rng(seed, *path, chunk_id)
    messages = rng.integers(0, cb.M, size=count)
    jams = jam_provider(rng, count)
    noise = sample_noise_batch(ch, cb.n, count, rng)
    outputs = cb.dense()[messages] + jams + noise
    decoded = decode_batch(cb, outputs)
    return int(np.count_nonzero(decoded != messages))


def empirical_error(
    cb: Codebook,
    ch: FhChannel,
    jam_provider: JamProvider,
    trials: int,
    seed: int,
    workers: int = 1,
    path: tuple[int, ...] = (),
) -> float:
    """Monte Carlo block error rate over uniform messages.

    Trials are processed in fixed-size chunks, each with an RNG stream
    derived from (seed, path, chunk index), so the estimate is bit-identical
    for any worker count.
    """
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    if ch.K != cb.K:
        raise ContractViolation("channel and codebook disagree on K")
    chunks = list(_chunk_ranges(trials))
    if workers <= 1 or len(chunks) == 1:
        failures = sum(
            _run_error_chunk(cb, ch, jam_provider, seed, path, cid, cnt)
            for cid, cnt in chunks
        )
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_error_chunk, cb, ch, jam_provider, seed, path, cid, cnt)
                for cid, cnt in chunks
            ]
            failures = sum(f.result() for f in futures)
    return failures / trials


def save_codebook(cb: Codebook, path) -> None:
    """Write a codebook container (versioned npz: header + codeword arrays)."""
    np.savez(
        path,
        format_version=np.int64(CODEBOOK_FORMAT_VERSION),
        K=np.int64(cb.K),
        n=np.int64(cb.n),
        M=np.int64(cb.M),
        gamma=np.float64(cb.gamma),
        amplitudes=cb.amplitudes,
        bands=cb.bands,
    )


def load_codebook(path) -> Codebook:
    """Read a codebook written by `save_codebook`; round-trips exactly."""
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != CODEBOOK_FORMAT_VERSION:
            raise ContractViolation(f"unsupported codebook format version {version}")
        cb = Codebook(
            K=int(data["K"]),
            gamma=float(data["gamma"]),
            amplitudes=data["amplitudes"],
            bands=data["bands"],
        )
        if cb.M != int(data["M"]) or cb.n != int(data["n"]):
            raise ContractViolation("codebook header disagrees with array shapes")
        return cb
