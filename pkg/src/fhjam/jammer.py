"""Jamming strategies inside the power/width constraint set.

A jamming block is a (K, n) matrix whose columns each touch at most J bands
and whose total power is at most n*lambda. Two strategies matter beyond the
baselines:

* the waterfilling Gaussian jammer, which spreads independent Gaussian
  interference over the bands a waterfilling allocation marks as active;
* the codeword-mimicking attack, which transmits a legitimate codeword so
  the receiver cannot tell the real message from the spoofed one. Whenever
  the jammer can afford any codeword (gamma <= lambda), this forces an
  average error of at least 1/4 regardless of the decoder.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import waterfill
from .channel import FhChannel, derive_rng
from .coding import Codebook, JamProvider, TRIAL_CHUNK, decode_batch, sample_noise_batch
from .errors import ContractViolation, InfeasibleError

POWER_SLACK = 1e-12


@dataclass(frozen=True)
class JamBudget:
    """Total power lam and per-symbol band width J available to the jammer."""

    lam: float
    J: int

    def __post_init__(self):
        if self.lam < 0:
            raise ContractViolation("jammer power must be >= 0")
        if self.J < 1:
            raise ContractViolation("jammer band width J must be >= 1")


def check_jam_constraint(jam: np.ndarray, budget: JamBudget, n: int | None = None) -> bool:
    """True iff every column touches <= J bands and power <= n*lam."""
    jam = np.asarray(jam, dtype=float)
    if jam.ndim != 2:
        raise ContractViolation("jam block must be a (K, n) matrix")
    cols = jam.shape[1] if n is None else n
    support_ok = np.all(np.count_nonzero(jam, axis=0) <= budget.J)
    power_ok = float(np.sum(jam * jam)) <= cols * budget.lam * (1.0 + POWER_SLACK)
    return bool(support_ok and power_ok)


def jam_none(K: int, n: int) -> np.ndarray:
    """The all-zero jamming block."""
    if K < 1 or n < 1:
        raise ContractViolation("K and n must be >= 1")
    return np.zeros((K, n))


def jam_tone(K: int, n: int, k: int, budget: JamBudget) -> np.ndarray:
    """All power on band k as a constant tone; power exactly n*lam."""
    if not 0 <= k < K:
        raise ContractViolation(f"band {k} out of range for K={K}")
    jam = np.zeros((K, n))
    jam[k, :] = np.sqrt(budget.lam)
    return jam


def jam_waterfilling_gaussian(
    ch: FhChannel, budget: JamBudget, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Independent Gaussian rows with waterfilling variances on active bands.

    Requires J at least the size of the active set; the sampled block is
    rescaled onto the power boundary if it lands above n*lam (the budget is
    a hard per-block constraint, not an expectation).
    """
    return _waterfill_batch(ch, budget, n, rng, 1)[0]


def _waterfill_batch(
    ch: FhChannel, budget: JamBudget, n: int, rng: np.random.Generator, count: int
) -> np.ndarray:
    if n < 1:
        raise ContractViolation("blocklength must be >= 1")
    wf = waterfill(ch.sigma2, budget.lam)
    active = sorted(wf.active)
    if budget.J < len(active):
        raise InfeasibleError(
            f"waterfilling needs {len(active)} bands active but J={budget.J}"
        )
    jams = np.zeros((count, ch.K, n))
    if not active:
        return jams
    std = np.sqrt(wf.lambda_k[active])
    jams[:, active, :] = rng.normal(size=(count, len(active), n)) * std[None, :, None]
    powers = np.sum(jams * jams, axis=(1, 2))
    cap = n * budget.lam
    hot = powers > cap
    if np.any(hot):
        jams[hot] *= np.sqrt(cap / powers[hot])[:, None, None]
    return jams


def jam_mimic(cb: Codebook, m_prime: int, budget: JamBudget) -> np.ndarray:
    """Jam with codeword m_prime verbatim (one band per column, so J >= 1 works)."""
    if not 0 <= m_prime < cb.M:
        raise ContractViolation(f"message {m_prime} out of range 0..{cb.M - 1}")
    power = cb.codeword_power(m_prime)
    cap = cb.n * budget.lam * (1.0 + POWER_SLACK)
    if power > cap:
        raise InfeasibleError(
            f"codeword {m_prime} power {power:.6g} exceeds jammer budget n*lam={cb.n * budget.lam:.6g}"
        )
    return cb.dense()[m_prime]


def make_jam_provider(
    name: str, cb: Codebook, ch: FhChannel, budget: JamBudget, n: int
) -> JamProvider:
    """Resolve a strategy name (`none | tone:<k> | waterfill | mimic`).

    The returned provider maps (rng, count) to a (count, K, n) stack of
    jamming blocks and never observes the transmitted messages.
    """
    if name == "none":
        zero = np.zeros((ch.K, n))
        return lambda rng, count: np.broadcast_to(zero, (count, ch.K, n))
    if name.startswith("tone:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError as exc:
            raise ContractViolation(f"bad tone band in strategy {name!r}") from exc
        tone = jam_tone(ch.K, n, k, budget)
        return lambda rng, count: np.broadcast_to(tone, (count, ch.K, n))
    if name == "waterfill":
        wf = waterfill(ch.sigma2, budget.lam)
        if budget.J < len(wf.active):
            raise InfeasibleError(
                f"waterfilling needs {len(wf.active)} bands active but J={budget.J}"
            )
        return lambda rng, count: _waterfill_batch(ch, budget, n, rng, count)
    if name == "mimic":
        cap = n * budget.lam * (1.0 + POWER_SLACK)
        powers = np.sum(cb.amplitudes * cb.amplitudes, axis=1)
        if np.any(powers > cap):
            raise InfeasibleError(
                "mimic attack needs every codeword power <= n*lam (gamma <= lambda)"
            )
        dense = cb.dense()
        return lambda rng, count: dense[rng.integers(0, cb.M, size=count)]
    raise ContractViolation(f"unknown jamming strategy {name!r}")


@dataclass(frozen=True)
class AttackResult:
    """Monte Carlo estimate of the mimicking attack's error floor.

    average_error averages over uniform (message, spoofed message) pairs,
    the quantity the attack provably keeps at 1/4 or above. per_attack[m']
    conditions on the spoofed message; worst_mprime is its argmax.
    distinct_pair_error conditions on message != spoofed message.
    """

    average_error: float
    per_attack: np.ndarray
    worst_mprime: int
    worst_error: float
    distinct_pair_error: float
    trials: int

    @property
    def standard_error(self) -> float:
        e = self.average_error
        return float(np.sqrt(e * (1.0 - e) / self.trials))


def _attack_chunk(
    cb: Codebook,
    ch: FhChannel,
    seed: int,
    path: tuple[int, ...],
    chunk_id: int,
    count: int,
) -> tuple[np.ndarray, np.ndarray, int, int]:
    rng = derive_rng(seed, *path, chunk_id)
    m = rng.integers(0, cb.M, size=count)
    m_prime = rng.integers(0, cb.M, size=count)
    noise = sample_noise_batch(ch, cb.n, count, rng)
    dense = cb.dense()
    outputs = dense[m] + dense[m_prime] + noise
    wrong = decode_batch(cb, outputs) != m
    fails_by_mprime = np.bincount(m_prime[wrong], minlength=cb.M)
    count_by_mprime = np.bincount(m_prime, minlength=cb.M)
    distinct = m != m_prime
    return (
        fails_by_mprime,
        count_by_mprime,
        int(np.count_nonzero(wrong & distinct)),
        int(np.count_nonzero(distinct)),
    )


def attack_error_floor(
    cb: Codebook,
    ch: FhChannel,
    budget: JamBudget,
    trials: int,
    seed: int,
    workers: int = 1,
    path: tuple[int, ...] = (),
) -> AttackResult:
    """Estimate the average error the mimicking attack inflicts on cb.

    Per trial, a uniform message m is sent while the jammer transmits a
    uniform codeword m'; a decode failure is counted when the decoder does
    not return m. Requires at least two messages and every codeword to fit
    in the jammer budget.
    """
    if cb.M < 2:
        raise ContractViolation("the mimicking attack needs M >= 2")
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    cap = cb.n * budget.lam * (1.0 + POWER_SLACK)
    powers = np.sum(cb.amplitudes * cb.amplitudes, axis=1)
    if np.any(powers > cap):
        raise InfeasibleError("mimic attack needs every codeword power <= n*lam")

    chunks = [
        (start // TRIAL_CHUNK, min(TRIAL_CHUNK, trials - start))
        for start in range(0, trials, TRIAL_CHUNK)
    ]
    if workers <= 1 or len(chunks) == 1:
        parts = [
            _attack_chunk(cb, ch, seed, path, cid, cnt) for cid, cnt in chunks
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_attack_chunk, cb, ch, seed, path, cid, cnt)
                for cid, cnt in chunks
            ]
            parts = [f.result() for f in futures]

    fails = sum(p[0] for p in parts)
    totals = sum(p[1] for p in parts)
    distinct_fails = sum(p[2] for p in parts)
    distinct_total = sum(p[3] for p in parts)
    per_attack = np.divide(
        fails, totals, out=np.zeros(cb.M, dtype=float), where=totals > 0
    )
    worst = int(np.argmax(per_attack))
    return AttackResult(
        average_error=float(fails.sum()) / trials,
        per_attack=per_attack,
        worst_mprime=worst,
        worst_error=float(per_attack[worst]),
        distinct_pair_error=(
            distinct_fails / distinct_total if distinct_total else float("nan")
        ),
        trials=trials,
    )
