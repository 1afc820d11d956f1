"""Finite-N determinant formulas for the unitary, rectangular and chain integrals.

All three share the shape ``const * det phi(x_i y_j) / (Delta(x) Delta(y))``
for a power series ``phi(z) = sum_m c_m z^m``. Two evaluation paths exist:

* ``generic``: evaluate ``phi`` entrywise and divide by the Vandermondes.
* ``confluent``: the same ratio written with divided differences,
  ``det_{ij} sum_m c_m h_{m-i}(x_0..x_i) h_{m-j}(y_0..y_j)``, which stays
  well conditioned (and defined) when eigenvalues coalesce.

Values come back as :class:`Estimate`; the error is the disagreement between
two working precisions plus any series truncation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .errors import DomainError, PrecisionError

__all__ = [
    "SpectralData",
    "RectangularData",
    "PrecisionPolicy",
    "Estimate",
    "bessel_i",
    "eval_unitary_integral",
    "eval_rectangular",
    "eval_chain",
]


def _mp(v):
    """mpf from int/float/Fraction/mpf at the current working precision."""
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _check_finite(values, name):
    for v in values:
        if not math.isfinite(float(v)):
            raise DomainError(f"{name} contains a non-finite value: {v}")


@dataclass(frozen=True)
class SpectralData:
    a: tuple
    b: tuple
    s: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        if len(self.a) != len(self.b) or not self.a:
            raise DomainError("a and b must be nonempty and of equal length")
        _check_finite(self.a, "a")
        _check_finite(self.b, "b")
        _check_finite([self.s], "s")
        if not self.s > 0:
            raise DomainError("coupling s must be positive")

    @property
    def N(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class RectangularData:
    """``a``, ``b``: the ``N2`` eigenvalues of ``A^+A`` and ``BB^+``."""

    a: tuple
    b: tuple
    s: float
    n1: int
    n2: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        if self.n2 < 1 or self.n1 < self.n2:
            raise DomainError("need n1 >= n2 >= 1")
        if len(self.a) != self.n2 or len(self.b) != self.n2:
            raise DomainError(f"a and b must have n2={self.n2} entries")
        _check_finite(self.a, "a")
        _check_finite(self.b, "b")
        _check_finite([self.s], "s")
        if any(v < 0 for v in self.a) or any(v < 0 for v in self.b):
            raise DomainError("rectangular eigenvalues must be nonnegative")
        if not self.s > 0:
            raise DomainError("coupling s must be positive")

    @property
    def nu(self) -> int:
        return self.n1 - self.n2


@dataclass(frozen=True)
class PrecisionPolicy:
    bits: int = 128
    rel_tol: float = 1e-15
    max_bits: int = 4096

    def __post_init__(self):
        if self.bits < 53:
            raise DomainError("working precision must be at least 53 bits")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_bits < self.bits:
            raise DomainError("max_bits must be at least bits")


@dataclass(frozen=True)
class Estimate:
    value: mpmath.mpf
    error: mpmath.mpf
    method: str = "generic"
    bits: int = 0

    def __float__(self):
        return float(self.value)

    @property
    def rel_error(self) -> float:
        return float(self.error / abs(self.value)) if self.value else float(self.error)


# -- special functions ------------------------------------------------------------

def bessel_i(nu: int, z, bits: int = 128):
    """Modified Bessel ``I_nu(z)`` (integer ``nu >= 0``) from its power series.

    Returns ``(value, tail_bound)``. Once the term ratio drops below 1/2 the
    remaining sum is bounded by twice the next term.
    """
    if nu < 0:
        raise DomainError("nu must be >= 0")
    with mpmath.workprec(bits + 16):
        z = _mp(z)
        half_sq = (z / 2) ** 2
        term = (z / 2) ** nu / mpmath.factorial(nu)
        total = mpmath.mpf(0)
        eps = mpmath.mpf(2) ** (-bits - 8)
        n = 0
        while True:
            total += term
            ratio = half_sq / ((n + 1) * (n + 1 + nu))
            nxt = term * ratio
            if ratio < 0.5 and abs(nxt) <= eps * abs(total):
                return +total, abs(nxt) * 2
            if total == 0 and term == 0:
                return total, mpmath.mpf(0)
            term = nxt
            n += 1


# -- shared determinant machinery -----------------------------------------------------

def _vandermonde(x):
    out = mpmath.mpf(1)
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            out *= x[j] - x[i]
    return out


def _min_gap(x):
    if len(x) < 2:
        return math.inf
    xs = sorted(x)
    return min(xs[i + 1] - xs[i] for i in range(len(xs) - 1))


def _needs_confluent(x, bits: int) -> bool:
    scale = max((abs(v) for v in x), default=0) or 1.0
    return _min_gap([float(v) for v in x]) < 2.0 ** (-bits / 4) * float(scale)


def _complete_homogeneous(x, top: int):
    """``H[i][k] = h_k(x_0, ..., x_i)`` for ``k <= top``."""
    H = []
    prev = None
    for i, xi in enumerate(x):
        row = [mpmath.mpf(1)] * (top + 1)
        for k in range(1, top + 1):
            row[k] = (prev[k] if prev is not None else 0) + xi * row[k - 1]
        H.append(row)
        prev = row
    return H


def _divided_difference_det(x, y, coeff: Callable[[int], mpmath.mpf], bits: int):
    """``det phi(x_i y_j) / (Delta(x) Delta(y))`` via divided differences.

    Returns ``(value, truncation_bound)``.
    """
    N = len(x)
    X = max(max(abs(v) for v in x), 1)
    Y = max(max(abs(v) for v in y), 1)
    eps = mpmath.mpf(2) ** (-bits - 8)
    # bound on |entry term m|: |c_m| C(m+N-1, N-1)^2 (XY)^m
    bounds = []
    m = 0
    peak = mpmath.mpf(0)
    while True:
        b = abs(coeff(m)) * mpmath.binomial(m + N - 1, N - 1) ** 2 * (X * Y) ** m
        bounds.append(b)
        peak = max(peak, b)
        if m > N and b <= eps * peak and (bounds[-2] == 0 or b / bounds[-2] < 0.5):
            break
        m += 1
        if m > 100000:
            raise PrecisionError("divided-difference series did not converge")
    top = m
    Hx = _complete_homogeneous(x, top)
    Hy = _complete_homogeneous(y, top)
    cs = [coeff(k) for k in range(top + 1)]
    M = mpmath.matrix(N, N)
    for i in range(N):
        for j in range(N):
            M[i, j] = mpmath.fsum(
                cs[k] * Hx[i][k - i] * Hy[j][k - j] for k in range(max(i, j), top + 1)
            )
    tail = 2 * bounds[-1]
    value = mpmath.det(M)
    # first-order propagation of an entrywise error
    scale = max(abs(M[i, j]) for i in range(N) for j in range(N)) or 1
    return value, tail * N * scale ** max(N - 1, 0) * math.factorial(N)


def _refine(compute: Callable[[int], tuple], policy: PrecisionPolicy, method: str) -> Estimate:
    """Run ``compute(bits) -> (value, bound)`` at two precisions, raising the
    working precision until the relative disagreement meets ``policy.rel_tol``."""
    bits = policy.bits
    while True:
        with mpmath.workprec(bits):
            v1, b1 = compute(bits)
        with mpmath.workprec(bits + 64):
            v2, b2 = compute(bits + 64)
        with mpmath.workprec(bits + 64):
            err = abs(v2 - v1) + abs(b1) + abs(b2)
            if v2 == 0 and err == 0:
                return Estimate(v2, err, method, bits + 64)
            if v2 != 0 and err <= policy.rel_tol * abs(v2):
                return Estimate(+v2, err, method, bits + 64)
        if bits * 2 > policy.max_bits:
            raise PrecisionError(
                f"relative error {float(err / abs(v2)) if v2 else float(err):.3g} exceeds "
                f"{policy.rel_tol:g} at {bits} bits"
            )
        bits *= 2


def _choose(method: str, a, b, bits: int) -> str:
    if method not in ("auto", "generic", "confluent"):
        raise DomainError(f"unknown method {method!r}")
    if method != "auto":
        return method
    return "confluent" if _needs_confluent(a, bits) or _needs_confluent(b, bits) else "generic"


# -- the three integrals ------------------------------------------------------------------

def eval_unitary_integral(d: SpectralData, p: PrecisionPolicy = PrecisionPolicy(),
                          method: str = "auto") -> Estimate:
    """``int dU exp((N/s) Tr A U B U^+)`` over Haar ``U(N)``:

    ``prod_{p<N} p! (N/s)^{-N(N-1)/2} det(exp((N/s) a_i b_j)) / (Delta(a) Delta(b))``.
    """
    N = d.N
    method = _choose(method, d.a, d.b, p.bits)

    def compute(bits):
        a = [_mp(v) for v in d.a]
        b = [_mp(v) for v in d.b]
        kappa = mpmath.mpf(N) / _mp(d.s)
        pref = mpmath.mpf(math.prod(math.factorial(k) for k in range(1, N))) * kappa ** (-(N * (N - 1)) // 2)
        if method == "generic":
            M = mpmath.matrix([[mpmath.exp(kappa * ai * bj) for bj in b] for ai in a])
            den = _vandermonde(a) * _vandermonde(b)
            if den == 0:
                raise DomainError("coincident eigenvalues need the confluent method")
            return pref * mpmath.det(M) / den, mpmath.mpf(0)
        val, bound = _divided_difference_det(a, b, lambda m: kappa ** m / mpmath.factorial(m), bits)
        return pref * val, pref * bound

    return _refine(compute, p, method)


def eval_rectangular(d: RectangularData, p: PrecisionPolicy = PrecisionPolicy(),
                     method: str = "auto") -> Estimate:
    """Two-sided integral over ``U(N2) x U(N1)`` of ``exp((N/s) Tr(A U B V^+ + h.c.))``."""
    n1, n2, nu = d.n1, d.n2, d.nu
    N = n2
    method = _choose(method, d.a, d.b, p.bits)
    if method == "generic" and nu > 0 and (0 in d.a or 0 in d.b):
        method = "confluent" if method == "auto" else method
    facs = (math.prod(math.factorial(k) for k in range(1, n2))
            * math.prod(math.factorial(k) for k in range(1, n1)))
    facs_den = math.prod(math.factorial(k) for k in range(1, nu))

    def compute(bits):
        a = [_mp(v) for v in d.a]
        b = [_mp(v) for v in d.b]
        s = _mp(d.s)
        kappa = mpmath.mpf(N) / s
        pref = mpmath.mpf(facs) / facs_den * (s / N) ** (n2 * (n1 - 1))
        if method == "generic":
            bound = mpmath.mpf(0)
            M = mpmath.matrix(N, N)
            for i in range(N):
                for j in range(N):
                    val, tail = bessel_i(nu, 2 * N * mpmath.sqrt(a[i] * b[j]) / s, bits)
                    M[i, j] = val
                    bound = max(bound, tail)
            den = _vandermonde(a) * _vandermonde(b) * mpmath.fprod((a[i] * b[i]) ** (mpmath.mpf(nu) / 2)
                                                                  for i in range(N))
            if den == 0:
                raise DomainError("degenerate eigenvalues need the confluent method")
            det = mpmath.det(M)
            scale = max(abs(M[i, j]) for i in range(N) for j in range(N)) or 1
            err = bound * N * math.factorial(N) * scale ** (N - 1)
            return pref * det / den, abs(pref * err / den)
        # I_nu(2 kappa sqrt(z)) / z^{nu/2} = kappa^nu sum_n kappa^{2n} z^n / (n! (n+nu)!)
        val, bound = _divided_difference_det(
            a, b, lambda m: kappa ** (2 * m) / (mpmath.factorial(m) * mpmath.factorial(m + nu)), bits)
        scale = pref * kappa ** (nu * N)
        return scale * val, scale * bound

    return _refine(compute, p, method)


def eval_chain(K: int, sizes: Sequence[int], a: Sequence, b: Sequence, s,
               p: PrecisionPolicy = PrecisionPolicy(), method: str = "auto") -> Estimate:
    """K-matrix chain integral ``const * det phi(a_i b_j (N/s)^K) / (Delta(a) Delta(b))``,
    ``phi(x) = sum_n x^n / prod_k (n + N_k - N)!``, ``N = min N_k``.

    The constant is fixed so that the integral tends to 1 as all ``a_i -> 0``.
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    sizes = [int(n) for n in sizes]
    if len(sizes) != K:
        raise DomainError(f"expected {K} sizes, got {len(sizes)}")
    N = min(sizes)
    if N < 1 or len(a) != N or len(b) != N:
        raise DomainError(f"a and b must have min(sizes)={N} entries")
    _check_finite(a, "a")
    _check_finite(b, "b")
    if not float(s) > 0:
        raise DomainError("coupling s must be positive")
    offsets = [n - N for n in sizes]
    method = _choose(method, a, b, p.bits)

    def c(m):
        return 1 / mpmath.fprod(mpmath.factorial(m + o) for o in offsets)

    def compute(bits):
        x = [_mp(v) for v in a]
        y = [_mp(v) for v in b]
        kappa = (mpmath.mpf(N) / _mp(s)) ** K
        const = 1 / mpmath.fprod(c(j) * kappa ** j for j in range(N))
        if method == "generic":
            bound = mpmath.mpf(0)

            def phi(z):
                nonlocal bound
                total = mpmath.mpf(0)
                term_max = mpmath.mpf(0)
                n = 0
                eps = mpmath.mpf(2) ** (-bits - 8)
                while True:
                    t = c(n) * z ** n
                    total += t
                    term_max = max(term_max, abs(t))
                    nxt = abs(c(n + 1) * z ** (n + 1))
                    if n > abs(z) and nxt <= eps * term_max:
                        bound = max(bound, 2 * nxt)
                        return total
                    n += 1

            M = mpmath.matrix([[phi(kappa * xi * yj) for yj in y] for xi in x])
            den = _vandermonde(x) * _vandermonde(y)
            if den == 0:
                raise DomainError("coincident eigenvalues need the confluent method")
            scale = max(abs(M[i, j]) for i in range(N) for j in range(N)) or 1
            err = bound * N * math.factorial(N) * scale ** (N - 1)
            return const * mpmath.det(M) / den, abs(const * err / den)
        val, bound = _divided_difference_det(x, y, lambda m: c(m) * kappa ** m, bits)
        return const * val, const * bound

    return _refine(compute, p, method)
