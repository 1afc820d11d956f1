"""Monte Carlo estimates of the unitary integrals over Haar-random matrices.

Samples are drawn in fixed-size shards, each with its own stream spawned
from ``SeedSequence(seed)``, so the estimate depends only on
``(inputs, samples, seed)`` and not on how many workers run the shards.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hciz_exact import RectangularData, SpectralData

__all__ = ["McEstimate", "sample_haar", "mc_estimate", "SHARD_SIZE"]

SHARD_SIZE = 8192


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - value) <= sigmas * self.stderr


def sample_haar(N: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar unitary (or a stack of ``size`` of them) from the QR decomposition
    of a complex Ginibre matrix, with R's diagonal made positive."""
    if N < 1:
        raise DomainError("N must be >= 1")
    shape = (N, N) if size is None else (size, N, N)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return q * phase[..., None, :]


def _square_values(d: SpectralData, rng, count):
    a = np.asarray(d.a, dtype=float)
    b = np.asarray(d.b, dtype=float)
    U = sample_haar(d.N, rng, count)
    # Tr(A U B U^+) = sum_ij a_i b_j |U_ij|^2
    expo = np.einsum("i,kij,j->k", a, np.abs(U) ** 2, b)
    return np.exp(d.N / d.s * expo)


def _rect_values(d: RectangularData, rng, count):
    n1, n2 = d.n1, d.n2
    sa = np.sqrt(np.asarray(d.a, dtype=float))
    sb = np.sqrt(np.asarray(d.b, dtype=float))
    U = sample_haar(n2, rng, count)
    V = sample_haar(n1, rng, count)[:, :n2, :n2]
    # A = [diag sqrt(a); 0], B = [diag sqrt(b), 0]: Tr(A U B V^+) = sum_kl sqrt(a_k b_l) U_kl conj(V_kl)
    tr = np.einsum("i,kij,j,kij->k", sa, U, sb, np.conj(V))
    return np.exp(n2 / d.s * 2 * tr.real)


def _shard(d, seq: np.random.SeedSequence, count: int):
    rng = np.random.default_rng(seq)
    vals = _rect_values(d, rng, count) if isinstance(d, RectangularData) else _square_values(d, rng, count)
    mean = float(vals.mean())
    m2 = float(((vals - mean) ** 2).sum())
    return count, mean, m2


def _merge(acc, part):
    n1, mean1, m21 = acc
    n2, mean2, m22 = part
    n = n1 + n2
    delta = mean2 - mean1
    return n, mean1 + delta * n2 / n, m21 + m22 + delta * delta * n1 * n2 / n


def mc_estimate(d: SpectralData | RectangularData, samples: int, seed: int, workers: int = 1) -> McEstimate:
    """Sample mean and standard error of the integrand over independent Haar draws."""
    if samples < 100:
        raise DomainError("need at least 100 samples")
    if not isinstance(d, (SpectralData, RectangularData)):
        raise DomainError("data must be SpectralData or RectangularData")
    counts = [SHARD_SIZE] * (samples // SHARD_SIZE)
    if samples % SHARD_SIZE:
        counts.append(samples % SHARD_SIZE)
    seqs = np.random.SeedSequence(seed).spawn(len(counts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _shard(d, *job), zip(seqs, counts)))
    else:
        parts = [_shard(d, s, c) for s, c in zip(seqs, counts)]
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    n, mean, m2 = acc
    std = math.sqrt(m2 / (n - 1))
    return McEstimate(mean, std / math.sqrt(n), n, seed)
