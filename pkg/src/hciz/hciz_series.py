"""Character expansion of the unitary integral with a formal ``N``.

The coefficient of ``s**-n`` is

    (N^n / n!) sum_{lam |- n} dhat_lam chi_lam(A) chi_lam(B) / d_lam(N),
    chi_lam(A) = sum_alpha chihat_lam(alpha) prod_p (N theta_p)^{alpha_p} / z_alpha,

assembled exactly with :class:`RatN` coefficients. Taking the series
logarithm and reading off the ``N**2`` coefficient of every monomial gives the
planar free energy ``F_n``; this is the reference against which the
permutation enumeration in :mod:`hciz.planar_enum` is checked.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import ConsistencyError, DomainError
from .exact_algebra import GradedPolynomial, RatN, TruncatedSeries, _pmul, series_log
from .symfun import character_table, partitions, sn_dimension, z_alpha

__all__ = [
    "character_series",
    "log_series",
    "free_energy_oracle",
    "genus_expansion",
    "character_series_value",
    "series_remainder_bound",
]


def _linear(r: int):
    return (Fraction(r), Fraction(1))


@lru_cache(maxsize=None)
def _order_coefficient(n: int) -> GradedPolynomial:
    if n == 0:
        return GradedPolynomial.one(RatN.const(1))
    lams, classes, table = character_table(n)

    # common denominator prod_c (N + c)^{e_c} over all contents c
    content_counts = [Counter(j - i for i, j in lam.boxes()) for lam in lams]
    exponents: Counter = Counter()
    for cc in content_counts:
        for c, m in cc.items():
            exponents[c] = max(exponents[c], m)
    den = (Fraction(1),)
    for c, e in sorted(exponents.items()):
        for _ in range(e):
            den = _pmul(den, _linear(c))

    # dhat/d_lam = dhat * hooks / prod(N + c)  ->  numerator over the common den
    lam_nums = []
    for lam, cc in zip(lams, content_counts):
        hooks = math.prod(lam.hook(i, j) for i, j in lam.boxes())
        num = (Fraction(sn_dimension(lam) * hooks),)
        for c, e in exponents.items():
            for _ in range(e - cc.get(c, 0)):
                num = _pmul(num, _linear(c))
        lam_nums.append(num)

    terms = {}
    width = len(den)
    for ia, alpha in enumerate(classes):
        for ib, beta in enumerate(classes):
            acc = [Fraction(0)] * width
            for il in range(len(lams)):
                w = table[il][ia] * table[il][ib]
                if w:
                    for k, v in enumerate(lam_nums[il]):
                        acc[k] += w * v
            if not any(acc):
                continue
            shift = n + alpha.length + beta.length
            scale = Fraction(1, math.factorial(n) * z_alpha(alpha) * z_alpha(beta))
            num = (Fraction(0),) * shift + tuple(v * scale for v in acc)
            terms[(tuple(alpha), tuple(beta))] = RatN(num, den)
    return GradedPolynomial(terms)


def character_series(order: int) -> TruncatedSeries:
    """The integral as a series in ``1/s`` through ``s**-order``."""
    if order < 0:
        raise DomainError("order must be >= 0")
    return TruncatedSeries([_order_coefficient(n) for n in range(order + 1)], order, "1/s")


@lru_cache(maxsize=None)
def _log_series(order: int) -> TruncatedSeries:
    return series_log(character_series(order))


def log_series(order: int) -> TruncatedSeries:
    """``log I`` as a series in ``1/s``; coefficients are exact in ``N``."""
    return _log_series(order)


def free_energy_oracle(order: int) -> list[GradedPolynomial]:
    """``[F_1, ..., F_order]``: the ``N**2`` part of ``log I``.

    Raises :class:`ConsistencyError` if any coefficient grows faster than ``N**2``.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    logs = log_series(order)
    out = []
    for n in range(1, order + 1):
        coeff = logs[n]
        top = max((c.degree() for _, c in coeff.terms.items()), default=float("-inf"))
        if top != 2:
            raise ConsistencyError(f"log I at order {n} has N-degree {top}, expected 2")
        out.append(GradedPolynomial(
            (k, c.coefficient_at_infinity(2)) for k, c in coeff.terms.items()
        ))
    return out


def genus_expansion(order: int, depth: int = 4) -> list[dict]:
    """For each order, ``{monomial: {power_of_N: coefficient}}`` for the first
    ``depth`` terms of the large-``N`` expansion of the log coefficient."""
    logs = log_series(order)
    result = []
    for n in range(1, order + 1):
        per = {}
        for key, c in logs[n].terms.items():
            lau = c.laurent_at_infinity(depth + max(0, c.degree() - 2))
            per[key] = {p: v for p, v in lau.items() if p > 2 - depth}
        result.append(per)
    return result


# -- numeric evaluation ----------------------------------------------------------

def _power_sums(x: Sequence, top: int):
    return [sum(v ** p for v in x) for p in range(1, top + 1)]


def character_series_value(a: Sequence, b: Sequence, s, order: int):
    """Partial sum of the character expansion through ``s**-order`` at explicit
    eigenvalues. Works in whatever number type the inputs carry (``Fraction``
    gives an exact result)."""
    N = len(a)
    if len(b) != N:
        raise DomainError("a and b must have the same length")
    pa = _power_sums(a, order)
    pb = _power_sums(b, order)
    kappa = Fraction(N) / s if isinstance(s, (int, Fraction)) else N / s
    total = 1
    for n in range(1, order + 1):
        lams, classes, table = character_table(n)
        pa_alpha = []
        pb_alpha = []
        for alpha in classes:
            va = Fraction(1, z_alpha(alpha))
            vb = Fraction(1, z_alpha(alpha))
            for p, m in enumerate(alpha, start=1):
                if m:
                    va = va * pa[p - 1] ** m
                    vb = vb * pb[p - 1] ** m
            pa_alpha.append(va)
            pb_alpha.append(vb)
        inner = 0
        for il, lam in enumerate(lams):
            if len(lam) > N:
                continue
            chi_a = sum(table[il][j] * pa_alpha[j] for j in range(len(classes)))
            chi_b = sum(table[il][j] * pb_alpha[j] for j in range(len(classes)))
            hooks = math.prod(lam.hook(i, j) for i, j in lam.boxes())
            d_lam = Fraction(math.prod(N + j - i for i, j in lam.boxes()), hooks)
            inner = inner + sn_dimension(lam) * chi_a * chi_b / d_lam
        total = total + inner * kappa ** n / math.factorial(n)
    return total


def series_remainder_bound(a: Sequence, b: Sequence, s, order: int) -> float:
    """Bound on ``|I - partial sum|``: with ``X = N^2 max|a_i b_j| / s`` the
    exponent satisfies ``|N Tr(AUBU^+)/s| <= X``, so the tail is at most
    ``X^{order+1} e^X / (order+1)!``."""
    N = len(a)
    X = N * N * max(abs(float(x) * float(y)) for x in a for y in b) / float(s)
    return X ** (order + 1) * math.exp(X) / math.factorial(order + 1)
