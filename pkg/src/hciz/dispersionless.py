"""Large-N closed forms: the psi fixed point, Lagrange-inversion series and the
one-sided spectral curve.

One-sided data means ``thetabar = (thetabar_1 = 1, 0, ...)`` with general
``theta_1..theta_n``. Writing ``g_q = (-1)^{q+1} C(2q, q) theta_q``,

    psi = 1 + sum_q g_q psi^{2q+1}

and both ``psi`` and ``F`` expand as multi-index sums over ``alpha``. In
polynomial form the power ``thetabar_1^{sum q alpha_q}`` is restored so that
the result is graded.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConvergenceError, DomainError
from .exact_algebra import GradedPolynomial, TruncatedSeries

__all__ = [
    "OneSidedData",
    "CurveData",
    "InconsistentPsiError",
    "psi_one_sided",
    "psi_one_sided_series",
    "psi_one_sided_closed",
    "free_energy_one_sided",
    "free_energy_one_sided_value",
    "diagonal_series",
    "build_curve",
]


class InconsistentPsiError(DomainError):
    """``psi`` does not satisfy the fixed-point equation for the given moments."""


@dataclass(frozen=True)
class OneSidedData:
    theta: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(self.theta))

    @classmethod
    def from_mapping(cls, theta: Mapping[int, object]) -> "OneSidedData":
        n = max(theta, default=0)
        return cls(tuple(theta.get(q, 0) for q in range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.theta)

    def g(self, q: int):
        return (-1) ** (q + 1) * math.comb(2 * q, q) * self.theta[q - 1]


def _g_coeff(q: int) -> int:
    return (-1) ** (q + 1) * math.comb(2 * q, q)


def _multi_indices(n: int, max_weight: int):
    """All ``alpha`` in ``N^n`` with ``sum q alpha_q <= max_weight``."""
    ranges = [range(max_weight // q + 1) for q in range(1, n + 1)]
    for alpha in itertools.product(*ranges):
        if sum(q * a for q, a in enumerate(alpha, start=1)) <= max_weight:
            yield alpha


def _monomial(alpha):
    weight = sum(q * a for q, a in enumerate(alpha, start=1))
    return tuple(alpha), ((weight,) if weight else ())


def _g_power(alpha) -> Fraction:
    out = Fraction(1)
    for q, a in enumerate(alpha, start=1):
        if a:
            out *= Fraction(_g_coeff(q) ** a, math.factorial(a))
    return out


def psi_one_sided_closed(n: int, order: int) -> GradedPolynomial:
    """Lagrange-inversion sum for ``psi`` through weight ``order``."""
    terms = []
    for alpha in _multi_indices(n, order):
        num = sum((2 * q + 1) * a for q, a in enumerate(alpha, start=1))
        den = sum(2 * q * a for q, a in enumerate(alpha, start=1)) + 1
        terms.append((_monomial(alpha), Fraction(math.factorial(num), math.factorial(den)) * _g_power(alpha)))
    return GradedPolynomial(terms)


def _truncate(p: GradedPolynomial, order: int) -> GradedPolynomial:
    return p.select(lambda k: p.weights(k)[0] <= order)


def psi_one_sided_series(n: int, order: int) -> GradedPolynomial:
    """``psi`` by fixed-point iteration in the ring of polynomials truncated at weight ``order``."""
    if n < 1 or order < 0:
        raise DomainError("need n >= 1 and order >= 0")
    g = [
        GradedPolynomial.theta(q, Fraction(_g_coeff(q))) * GradedPolynomial.thetabar(1) ** q
        for q in range(1, n + 1)
    ]
    psi = GradedPolynomial.one()
    for _ in range(order + 1):
        new = GradedPolynomial.one()
        for q in range(1, n + 1):
            if q > order:
                break
            power = GradedPolynomial.one()
            for _ in range(2 * q + 1):
                power = _truncate(power * psi, order - q)
            new = new + _truncate(g[q - 1] * power, order)
        if new == psi:
            break
        psi = new
    return psi


def psi_one_sided(d: OneSidedData, order: int | None = None, tol: float = 1e-14,
                  max_iter: int = 200):
    """``psi`` on the branch through 1 at zero coupling.

    With ``order`` given, returns the series (a :class:`GradedPolynomial`) for
    the first ``d.n`` moments; otherwise solves numerically by damped Newton
    from ``psi = 1``.
    """
    if order is not None:
        return psi_one_sided_series(max(d.n, 1), order)
    gs = [float(d.g(q)) for q in range(1, d.n + 1)]

    def f(x):
        return x - 1 - sum(g * x ** (2 * q + 1) for q, g in enumerate(gs, start=1))

    def fp(x):
        return 1 - sum((2 * q + 1) * g * x ** (2 * q) for q, g in enumerate(gs, start=1))

    x = 1.0
    fx = f(x)
    for _ in range(max_iter):
        if abs(fx) <= tol:
            return x
        slope = fp(x)
        if slope == 0:
            break
        step = fx / slope
        lam = 1.0
        while lam > 1e-6:
            cand = x - lam * step
            fc = f(cand)
            if abs(fc) < abs(fx):
                break
            lam /= 2
        else:
            break
        x, fx = cand, fc
    if abs(fx) <= tol:
        return x
    raise ConvergenceError(f"Newton iteration for psi did not converge (residual {fx:.3g})")


def free_energy_one_sided(n: int, order: int) -> GradedPolynomial:
    """Lagrange-inversion sum for ``F`` with ``thetabar = (thetabar_1)``, through weight ``order``."""
    if order < 1 or n < 1:
        raise DomainError("need n >= 1 and order >= 1")
    terms = []
    for alpha in _multi_indices(n, order):
        if not any(alpha):
            continue
        num = sum((2 * q + 1) * a for q, a in enumerate(alpha, start=1)) - 3
        den = sum(2 * q * a for q, a in enumerate(alpha, start=1))
        terms.append((_monomial(alpha), Fraction(math.factorial(num), math.factorial(den)) * _g_power(alpha)))
    return GradedPolynomial(terms)


def _indices_on(support, max_weight):
    """Multi-indices on the increasing index list ``support`` with weight <= max_weight."""
    if not support:
        yield {}
        return
    q, rest = support[0], support[1:]
    for a in range(max_weight // q + 1):
        for tail in _indices_on(rest, max_weight - q * a):
            out = dict(tail)
            if a:
                out[q] = a
            yield out


def free_energy_one_sided_value(theta: Sequence[float], max_weight: int = 40, derivative: int | None = None):
    """Numeric ``F`` (or ``dF/dtheta_q`` for ``derivative=q``) at ``thetabar_1 = 1``.

    ``theta[q-1]`` is ``theta_q``; moments beyond ``len(theta)`` are zero.
    """
    support = sorted({q for q, v in enumerate(theta, start=1) if v} | ({derivative} if derivative else set()))
    total = 0.0
    for alpha in _indices_on(support, max_weight):
        if not alpha:
            continue
        if derivative is not None and not alpha.get(derivative):
            continue
        num = sum((2 * q + 1) * a for q, a in alpha.items()) - 3
        den = sum(2 * q * a for q, a in alpha.items())
        c = Fraction(math.factorial(num), math.factorial(den))
        for q, a in alpha.items():
            c *= Fraction(_g_coeff(q) ** a, math.factorial(a))
        v = float(c)
        for q, a in alpha.items():
            k = a - (1 if derivative == q else 0)
            if k:
                v *= (theta[q - 1] if q <= len(theta) else 0.0) ** k
        if derivative is not None:
            v *= alpha[derivative]
        total += v
    return total


def diagonal_series(n: int, order: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``(psi, F)`` as series in ``x = theta_n thetabar_n`` through ``x^order``."""
    if n < 1 or order < 1:
        raise DomainError("need n >= 1 and order >= 1")
    psi = [
        Fraction((n + 1) ** k * math.factorial((n + 2) * k),
                 math.factorial((n + 1) * k + 1) * math.factorial(k))
        for k in range(order + 1)
    ]
    F = [Fraction(0)] + [
        Fraction((n + 1) ** k * math.factorial((n + 2) * k - 3),
                 math.factorial((n + 1) * k) * math.factorial(k))
        for k in range(1, order + 1)
    ]
    return TruncatedSeries(psi, order, "x"), TruncatedSeries(F, order, "x")


# -- spectral curve ------------------------------------------------------------

def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _sqrt(x):
    return x.sqrt() if hasattr(x, "sqrt") else math.sqrt(x)


def _half_binom(k: int) -> Fraction:
    """``C(1/2, k)``."""
    out = Fraction(1)
    for i in range(k):
        out *= (Fraction(1, 2) - i) / (i + 1)
    return out


@dataclass(frozen=True)
class CurveData:
    psi: object
    theta: tuple
    Q: tuple

    @property
    def n(self) -> int:
        return len(self.theta)

    def T_coefficients(self) -> list:
        """``ell + theta_1 ell^2 + ... + theta_n ell^{n+1}``."""
        return [0, 1, *self.theta]

    def T(self, ell):
        return sum(c * ell ** k for k, c in enumerate(self.T_coefficients()))

    def Q_value(self, ell):
        return sum(c * ell ** k for k, c in enumerate(self.Q))

    def b(self, ell):
        return (self.T(ell) + _sqrt(ell * (1 + ell / (4 * self.psi ** 2))) * self.Q_value(ell)) / 2

    def discriminant_coefficients(self) -> list:
        """``ell (1 + ell / 4 psi^2) Q(ell)^2``."""
        return _poly_mul([0, 1, 1 / (4 * self.psi ** 2)], _poly_mul(self.Q, self.Q))

    def P_coefficients(self) -> list:
        """``P`` from ``T^2 + 4 ell P = discriminant``; exact division by ``ell``."""
        D = self.discriminant_coefficients()
        T2 = _poly_mul(self.T_coefficients(), self.T_coefficients())
        size = max(len(D), len(T2))
        D += [0] * (size - len(D))
        T2 += [0] * (size - len(T2))
        diff = [D[k] - T2[k] for k in range(size)]
        return [c / 4 for c in diff[1:]]

    def P(self, ell):
        return sum(c * ell ** k for k, c in enumerate(self.P_coefficients()))

    def quadratic_residual(self, ell):
        """``b^2 - b T - ell P`` at ``ell``; zero on the curve."""
        bv = self.b(ell)
        return bv * bv - bv * self.T(ell) - ell * self.P(ell)

    def m_expansion(self, terms: int) -> dict:
        """Large-``ell`` coefficients of ``m = b / ell``: ``{power: coefficient}``
        for powers ``n, ..., 0, -1, ..., -terms``."""
        psi = self.psi
        # sqrt(1 + 4 psi^2/ell) = sum_k C(1/2,k) (4 psi^2)^k ell^-k
        e = [_half_binom(k) * (4 * psi ** 2) ** k for k in range(terms + self.n + 1)]
        out = {}
        for p in range(self.n, -terms - 1, -1):
            v = 0
            if p == 0:
                v += Fraction(1, 2)
            if p >= 1:
                v += self.theta[p - 1] / 2
            # Q(ell) sqrt(...) / (4 psi): ell^j * ell^-k contributes to power j-k
            acc = 0
            for j, qj in enumerate(self.Q):
                k = j - p
                if 0 <= k < len(e):
                    acc += qj * e[k]
            out[p] = v + acc / (4 * psi)
        return out


def build_curve(d: OneSidedData, psi, tol: float = 1e-10) -> CurveData:
    """Curve with ``Q`` the polynomial part of ``2 psi (1 + sum theta_q ell^q) / sqrt(1 + 4 psi^2 / ell)``.

    Raises :class:`InconsistentPsiError` unless ``Q(0) = 2`` within ``tol``.
    """
    theta = (1, *d.theta)  # theta_0 = 1
    n = d.n
    # (1 + y)^{-1/2} with y = 4 psi^2 / ell: coefficient (-1)^k C(2k,k) psi^{2k} of ell^-k
    c = [(-1) ** k * math.comb(2 * k, k) * psi ** (2 * k) for k in range(n + 1)]
    Q = tuple(2 * psi * sum(theta[q] * c[q - j] for q in range(j, n + 1)) for j in range(n + 1))
    if abs(Q[0] - 2) > tol:
        raise InconsistentPsiError(f"Q(0) = {Q[0]} != 2: psi = {psi} is inconsistent with theta")
    return CurveData(psi, tuple(d.theta), Q)
