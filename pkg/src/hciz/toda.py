"""Tau functions as moment-matrix determinants, in exact series of ``x = 1/hbar``.

With ``exp(sum_q t_q u^q / hbar) = sum_k P_k u^k`` the moment matrix is

    M_ij = sum_m x^m / m! * P_{m-j}(t) * Pbar_{m-i}(tbar)

and ``tau_N = det(M_ij)_{0<=i,j<N}``. Every term of ``M_ij`` at index ``m``
carries at least ``x^m`` (``P_k`` is a polynomial in ``x`` with nonnegative
powers), so truncating the ``m`` sum at the requested order is exact.

Derivatives in ``t_1``/``tbar_1`` act by index shifts,
``dM_ij/dt_1 = x M_{i,j+1}`` and ``dM_ij/dtbar_1 = x M_{i+1,j}``.
Determinants are expanded along columns without any division, so no
truncation is lost.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .errors import DomainError
from .exact_algebra import TruncatedSeries, parse_rational

__all__ = [
    "TodaTimes",
    "HBAR_VAR",
    "schur_polynomials",
    "moment_entry",
    "moment_matrix",
    "tau",
    "tau_derivatives",
    "toda_check",
    "exact_det",
    "desnanot_jacobi_check",
    "spectral_times",
    "spectral_tau",
    "random_times",
]

HBAR_VAR = "1/hbar"


def _series(coeffs, order):
    return TruncatedSeries(coeffs, order, HBAR_VAR)


def _zero(order):
    return _series([Fraction(0)], order)


@dataclass(frozen=True)
class TodaTimes:
    """Finitely many nonzero times.

    ``hbar_scaled=False``: ``t_q`` are plain rationals (the exponent is ``t_q u^q x``).
    ``hbar_scaled=True``: ``t_q = hbar * c_q`` with the rationals ``c_q`` stored,
    so the exponent ``c_q u^q`` carries no power of ``x``.
    """

    t: Mapping[int, Fraction] = field(default_factory=dict)
    tbar: Mapping[int, Fraction] = field(default_factory=dict)
    hbar_scaled: bool = False

    def __post_init__(self):
        for name in ("t", "tbar"):
            raw = getattr(self, name)
            clean = {}
            for q, v in dict(raw).items():
                q = int(q)
                if q < 1:
                    raise DomainError(f"time index must be >= 1, got {q}")
                v = Fraction(v)
                if v:
                    clean[q] = v
            object.__setattr__(self, name, dict(sorted(clean.items())))

    @classmethod
    def parse(cls, text: str) -> "TodaTimes":
        """``"t1=1/3,tb1=1/5"``; ``tbN`` or ``tbarN`` for the barred side."""
        t, tb = {}, {}
        for item in filter(None, (x.strip() for x in text.split(","))):
            if "=" not in item:
                raise DomainError(f"expected name=value, got {item!r}")
            name, value = (x.strip() for x in item.split("=", 1))
            for prefix, target in (("tbar", tb), ("tb", tb), ("t", t)):
                if name.startswith(prefix) and name[len(prefix):].isdigit():
                    target[int(name[len(prefix):])] = parse_rational(value)
                    break
            else:
                raise DomainError(f"unknown time {name!r}")
        return cls(t, tb)

    def key(self):
        return (tuple(self.t.items()), tuple(self.tbar.items()), self.hbar_scaled)


def _p_sequence(times: Mapping[int, Fraction], hbar_scaled: bool, top: int, order: int):
    """``[P_0, ..., P_top]`` from ``k P_k = sum_q q w_q P_{k-q}``."""
    if hbar_scaled:
        w = {q: _series([v], order) for q, v in times.items()}
    else:
        w = {q: _series([Fraction(0), v], order) for q, v in times.items()}
    P = [_series([Fraction(1)], order)]
    for k in range(1, top + 1):
        acc = _zero(order)
        for q, wq in w.items():
            if q <= k:
                acc = acc + wq * P[k - q] * q
        P.append(acc * Fraction(1, k))
    return P


@lru_cache(maxsize=64)
def _p_cached(key, side: int, top: int, order: int):
    t, tb, scaled = key
    return tuple(_p_sequence(dict(t if side == 0 else tb), scaled, top, order))


def schur_polynomials(times: TodaTimes, top: int, order: int, bar: bool = False) -> list:
    """Elementary Schur polynomials ``P_0..P_top`` as series in ``x``."""
    return list(_p_cached(times.key(), 1 if bar else 0, top, order))


def _entry(P, Pb, i, j, order):
    coeffs = [Fraction(0)] * (order + 1)
    out = _series(coeffs, order)
    for m in range(max(i, j), order + 1):
        a, b = P[m - j], Pb[m - i]
        term = (a * b).shift(m) * Fraction(1, math.factorial(m))
        out = out + term
    return out


def moment_entry(i: int, j: int, t: TodaTimes, order: int) -> TruncatedSeries:
    """``M_ij`` through ``x^order``."""
    if i < 0 or j < 0 or order < 0:
        raise DomainError("need i, j >= 0 and order >= 0")
    P = schur_polynomials(t, order, order)
    Pb = schur_polynomials(t, order, order, bar=True)
    return _entry(P, Pb, i, j, order)


def moment_matrix(size: int, t: TodaTimes, order: int) -> list[list[TruncatedSeries]]:
    if size < 0:
        raise DomainError("size must be >= 0")
    P = schur_polynomials(t, order, order)
    Pb = schur_polynomials(t, order, order, bar=True)
    return [[_entry(P, Pb, i, j, order) for j in range(size)] for i in range(size)]


def exact_det(M: Sequence[Sequence], one=1):
    """Determinant by Laplace expansion along columns with memoized minors.

    Uses only ring operations, so it works for series and exact numbers alike.
    """
    n = len(M)
    if n == 0:
        return one
    if any(len(r) != n for r in M):
        raise DomainError("matrix must be square")
    # minors[mask] = det of the rows in mask against the first popcount(mask) columns
    minors = {0: one}
    for col in range(n):
        nxt = {}
        for mask, val in minors.items():
            for r in range(n):
                if mask >> r & 1:
                    continue
                # new inversions: rows already used that sit below r
                inversions = bin(mask >> (r + 1)).count("1")
                term = M[r][col] * val
                if inversions % 2:
                    term = -term
                new = mask | (1 << r)
                nxt[new] = nxt[new] + term if new in nxt else term
        minors = nxt
    return minors[(1 << n) - 1]


def _shifted_det(table, n, rows, cols, order):
    """``det(x^{r_i+c_j} M[i+r_i][j+c_j])`` for 0/1 shift vectors."""
    mat = [
        [table[i + rows[i]][j + cols[j]].shift(rows[i] + cols[j]).truncate(order) for j in range(n)]
        for i in range(n)
    ]
    return exact_det(mat, _series([Fraction(1)], order))


def _table(n, t, order):
    P = schur_polynomials(t, order + 1, order)
    Pb = schur_polynomials(t, order + 1, order, bar=True)
    return [[_entry(P, Pb, i, j, order) for j in range(n + 1)] for i in range(n + 1)]


def tau(N: int, t: TodaTimes, order: int) -> TruncatedSeries:
    """``tau_N`` through ``x^order``; ``tau_0 = 1``."""
    if N < 0:
        raise DomainError("N must be >= 0")
    if N == 0:
        return _series([Fraction(1)], order)
    return exact_det(moment_matrix(N, t, order), _series([Fraction(1)], order))


def tau_derivatives(N: int, t: TodaTimes, order: int):
    """``(tau, d tau, dbar tau, d dbar tau)`` with ``d = d/dt_1``, ``dbar = d/dtbar_1``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    table = _table(N, t, order)
    zero = [0] * N
    base = _shifted_det(table, N, zero, zero, order)
    d = _zero(order)
    db = _zero(order)
    ddb = _zero(order)
    for j in range(N):
        e = [1 if k == j else 0 for k in range(N)]
        d = d + _shifted_det(table, N, zero, e, order)
        db = db + _shifted_det(table, N, e, zero, order)
    for i in range(N):
        ei = [1 if k == i else 0 for k in range(N)]
        for j in range(N):
            ej = [1 if k == j else 0 for k in range(N)]
            ddb = ddb + _shifted_det(table, N, ei, ej, order)
    return base, d, db, ddb


def toda_check(n: int, t: TodaTimes, order: int) -> TruncatedSeries:
    """Residual of ``tau_{n+1} tau_{n-1} = hbar^2 (tau_n d dbar tau_n - d tau_n dbar tau_n)``.

    Returned multiplied by ``hbar^-2`` (that is, as
    ``x^2 tau_{n+1} tau_{n-1} - (tau d dbar tau - d tau dbar tau)``) so that no
    division is needed; it vanishes through ``x^order`` exactly when the
    identity holds.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if order < 0:
        raise DomainError("order must be >= 0")
    lhs = (tau(n + 1, t, order) * tau(n - 1, t, order)).shift(2).truncate(order)
    base, d, db, ddb = tau_derivatives(n, t, order)
    return lhs - (base * ddb - d * db)


def desnanot_jacobi_check(M: Sequence[Sequence]) -> bool:
    """``det M det M_core = det M_11 det M_nn - det M_1n det M_n1`` exactly,
    where ``M_ij`` deletes row ``i`` and column ``j`` (1-based) and the core
    deletes the first and last rows and columns."""
    n = len(M)
    if n < 2 or any(len(r) != n for r in M):
        raise DomainError("need a square matrix of size >= 2")
    M = [[Fraction(v) for v in r] for r in M]

    def minor(rows_out, cols_out):
        return exact_det(
            [[M[i][j] for j in range(n) if j not in cols_out] for i in range(n) if i not in rows_out],
            Fraction(1),
        )

    lhs = exact_det(M, Fraction(1)) * minor({0, n - 1}, {0, n - 1})
    rhs = minor({0}, {0}) * minor({n - 1}, {n - 1}) - minor({0}, {n - 1}) * minor({n - 1}, {0})
    return lhs == rhs


# -- spectral data ----------------------------------------------------------------

def spectral_times(a: Sequence, b: Sequence, top: int) -> TodaTimes:
    """``t_q = hbar sum_i a_i^q / q`` (and likewise for ``b``) for ``q <= top``."""
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    t = {q: sum(v ** q for v in a) / q for q in range(1, top + 1)}
    tb = {q: sum(v ** q for v in b) / q for q in range(1, top + 1)}
    return TodaTimes(t, tb, hbar_scaled=True)


def spectral_tau(a: Sequence, b: Sequence, order: int) -> TruncatedSeries:
    """``det(exp(a_i b_j x)) / (Delta(a) Delta(b))`` as an exact series in ``x``."""
    N = len(a)
    if len(b) != N:
        raise DomainError("a and b must have equal length")
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    mat = [
        [_series([(ai * bj) ** m / math.factorial(m) for m in range(order + 1)], order) for bj in b]
        for ai in a
    ]
    den = Fraction(1)
    for i in range(N):
        for j in range(i + 1, N):
            den *= (a[j] - a[i]) * (b[j] - b[i])
    if not den:
        raise DomainError("spectral tau needs distinct eigenvalues")
    return exact_det(mat, _series([Fraction(1)], order)) * (1 / den)


def random_times(rng: random.Random, qmax: int = 2, den: int = 7) -> TodaTimes:
    """Small random rational times with ``q <= qmax`` on both sides."""

    def draw():
        return {q: Fraction(rng.randint(-den, den), rng.randint(1, den)) for q in range(1, qmax + 1)}

    return TodaTimes(draw(), draw())
