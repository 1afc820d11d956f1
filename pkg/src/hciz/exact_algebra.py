"""Exact arithmetic: rationals, rational functions of a formal ``N``,
polynomials in the moment alphabets and truncated power series.

Rationals are :class:`fractions.Fraction`; everything else is built on top.
Values are immutable once constructed.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from numbers import Rational as _RationalABC
from typing import Callable, Iterable, Iterator, Mapping

from .errors import DomainError

Rational = Fraction

__all__ = [
    "Rational",
    "parse_rational",
    "format_rational",
    "RatN",
    "GradedPolynomial",
    "TruncatedSeries",
    "series_log",
    "series_exp",
    "shift_moments",
    "monomial_key_text",
    "parse_monomial_key",
]


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; decimals are rejected to keep inputs exact."""
    text = text.strip()
    if not text or any(ch in text for ch in ".eE"):
        raise DomainError(f"not an exact rational: {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not an exact rational: {text!r}") from exc


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# dense univariate polynomials over Q, coefficient tuples low -> high degree
# ---------------------------------------------------------------------------

def _trim(c):
    c = list(c)
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def _padd(p, q):
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, v in enumerate(q):
        out[i] += v
    return _trim(out)


def _pneg(p):
    return tuple(-v for v in p)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, u in enumerate(p):
        if not u:
            continue
        for j, v in enumerate(q):
            out[i + j] += u * v
    return _trim(out)


def _pscale(p, c):
    if not c:
        return ()
    return tuple(v * c for v in p)


def _pdivmod(p, q):
    """Polynomial long division over Q."""
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = [Fraction(v) for v in p]
    dq = len(q) - 1
    lead = Fraction(q[-1])
    if len(r) <= dq:
        return (), _trim(r)
    quo = [Fraction(0)] * (len(r) - dq)
    for k in range(len(r) - 1, dq - 1, -1):
        c = r[k] / lead
        if c:
            quo[k - dq] = c
            for i in range(dq + 1):
                r[k - dq + i] -= c * q[i]
    return _trim(quo), _trim(r[:dq])


def _pmonic(p):
    lead = Fraction(p[-1])
    return tuple(Fraction(v) / lead for v in p)


def _pgcd(p, q):
    while q:
        _, r = _pdivmod(p, q)
        p, q = q, r
    return _pmonic(p) if p else ()


def _peval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


class RatN:
    """Rational function of a formal size parameter ``N`` over Q.

    Stored reduced, with a monic denominator; the sign lives in the numerator.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=(), den=(1,), *, _reduced=False):
        if isinstance(num, (int, Fraction)):
            num = (num,)
        if isinstance(den, (int, Fraction)):
            den = (den,)
        num = _trim(Fraction(v) for v in num)
        den = _trim(Fraction(v) for v in den)
        if not den:
            raise ZeroDivisionError("RatN with zero denominator")
        if not _reduced:
            if not num:
                den = (Fraction(1),)
            else:
                if len(den) > 1:
                    g = _pgcd(num, den)
                    if len(g) > 1:
                        num, _ = _pdivmod(num, g)
                        den, _ = _pdivmod(den, g)
                lead = den[-1]
                if lead != 1:
                    num = tuple(v / lead for v in num)
                    den = tuple(v / lead for v in den)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def N(cls) -> "RatN":
        return cls((0, 1), _reduced=True)

    @classmethod
    def const(cls, c) -> "RatN":
        return cls((Fraction(c),), _reduced=True)

    @classmethod
    def from_factors(cls, num_roots: Iterable[int], den_roots: Iterable[int], scale=1) -> "RatN":
        """``scale * prod(N + r for r in num_roots) / prod(N + r for r in den_roots)``."""
        num = (Fraction(scale),)
        for r in num_roots:
            num = _pmul(num, (Fraction(r), Fraction(1)))
        den = (Fraction(1),)
        for r in den_roots:
            den = _pmul(den, (Fraction(r), Fraction(1)))
        return cls(num, den)

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, RatN):
            return other
        if isinstance(other, (int, Fraction)):
            return RatN((Fraction(other),), _reduced=True)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return RatN(_padd(self.num, other.num), self.den)
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return RatN(num, _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RatN(_pneg(self.num), self.den, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RatN()
            return RatN(_pscale(self.num, Fraction(other)), self.den, _reduced=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return RatN()
        if len(self.den) == 1 and len(other.den) == 1:
            return RatN(_pmul(self.num, other.num), (Fraction(1),), _reduced=True)
        return RatN(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "RatN":
        if not self.num:
            raise ZeroDivisionError("inverse of zero RatN")
        return RatN(self.den, self.num)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = RatN.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- comparison / hashing --------------------------------------------
    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return bool(self.num)

    # -- analysis ---------------------------------------------------------
    def degree(self) -> int:
        """Degree at infinity: ``deg num - deg den`` (``-inf`` for zero)."""
        if not self.num:
            return float("-inf")
        return len(self.num) - len(self.den)

    def coefficient_at_infinity(self, k: int) -> Fraction:
        """Coefficient of ``N**k`` in the Laurent expansion at ``N = oo``."""
        return self.laurent_at_infinity(self.degree() - k + 1)[k] if self.degree() >= k else Fraction(0)

    def laurent_at_infinity(self, terms: int) -> dict[int, Fraction]:
        """First ``terms`` coefficients of the expansion in descending powers of ``N``."""
        if not self.num:
            return {}
        top = self.degree()
        # work in u = 1/N: num(N)/den(N) = u^{-top} * rnum(u)/rden(u)
        rnum = tuple(reversed(self.num))
        rden = tuple(reversed(self.den))
        out = {}
        rem = list(rnum) + [Fraction(0)] * terms
        for i in range(terms):
            c = rem[i] / rden[0]
            out[top - i] = c
            if c:
                for j, d in enumerate(rden):
                    if i + j < len(rem):
                        rem[i + j] -= c * d
        return out

    def __call__(self, x):
        d = _peval(self.den, x)
        if not d:
            raise ZeroDivisionError(f"RatN has a pole at N={x}")
        return _peval(self.num, x) / d

    def reflect(self) -> "RatN":
        """``f(-N)``."""
        num = tuple(v if i % 2 == 0 else -v for i, v in enumerate(self.num))
        den = tuple(v if i % 2 == 0 else -v for i, v in enumerate(self.den))
        return RatN(num, den)

    def __repr__(self):
        def show(p):
            parts = []
            for i, c in enumerate(p):
                if not c:
                    continue
                mono = "" if i == 0 else ("N" if i == 1 else f"N^{i}")
                cs = format_rational(c)
                if mono and c == 1:
                    parts.append(mono)
                elif mono:
                    parts.append(f"{cs}*{mono}")
                else:
                    parts.append(cs)
            return " + ".join(parts) if parts else "0"

        if self.den == (1,):
            return f"RatN({show(self.num)})"
        return f"RatN(({show(self.num)}) / ({show(self.den)}))"


# ---------------------------------------------------------------------------
# polynomials in theta_p, thetabar_p
# ---------------------------------------------------------------------------

def _trim_exps(e) -> tuple:
    e = list(e)
    while e and e[-1] == 0:
        e.pop()
    return tuple(e)


def _add_exps(e, f) -> tuple:
    if len(e) < len(f):
        e, f = f, e
    out = list(e)
    for i, v in enumerate(f):
        out[i] += v
    return tuple(out)


def _weight(e) -> int:
    return sum((p + 1) * k for p, k in enumerate(e))


def _sort_key(key):
    ta, tb = key
    return (sum(ta) + sum(tb), ta, tb)


def monomial_key_text(key) -> str:
    """Canonical text for a monomial key, e.g. ``"t2^1*t3^2|tb1^1"``."""
    ta, tb = key
    a = "*".join(f"t{p + 1}^{k}" for p, k in enumerate(ta) if k)
    b = "*".join(f"tb{p + 1}^{k}" for p, k in enumerate(tb) if k)
    return f"{a}|{b}"


def parse_monomial_key(text: str):
    try:
        a, b = text.split("|")
    except ValueError:
        raise DomainError(f"bad monomial key {text!r}") from None

    def part(s, prefix):
        exps: dict[int, int] = {}
        if not s:
            return ()
        for factor in s.split("*"):
            name, _, k = factor.partition("^")
            if not name.startswith(prefix) or not name[len(prefix):].isdigit() or not k.isdigit():
                raise DomainError(f"bad monomial factor {factor!r} in {text!r}")
            p = int(name[len(prefix):])
            if p < 1 or int(k) < 1 or p in exps:
                raise DomainError(f"bad monomial factor {factor!r} in {text!r}")
            exps[p] = int(k)
        vec = [0] * max(exps)
        for p, k in exps.items():
            vec[p - 1] = k
        return tuple(vec)

    if b.startswith("t") and not b.startswith("tb"):
        raise DomainError(f"bad monomial key {text!r}")
    return part(a, "t"), part(b, "tb")


class GradedPolynomial:
    """Polynomial in the moments ``theta_p`` and ``thetabar_q``.

    Monomials are keyed by a pair of exponent tuples ``(ta, tb)`` where
    ``ta[p-1]`` is the exponent of ``theta_p``; trailing zeros are trimmed.
    Coefficients live in any commutative ring accepting ``int``/``Fraction``
    scalars (``Fraction`` or :class:`RatN` in practice). Zero coefficients are
    never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict = {}
        for (ta, tb), c in items:
            key = (_trim_exps(ta), _trim_exps(tb))
            if key in clean:
                c = clean[key] + c
            if c:
                clean[key] = c
            else:
                clean.pop(key, None)
        self.terms = clean

    @classmethod
    def _raw(cls, terms: dict) -> "GradedPolynomial":
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls):
        return cls._raw({})

    @classmethod
    def one(cls, c=Fraction(1)):
        return cls._raw({((), ()): c} if c else {})

    @classmethod
    def monomial(cls, ta=(), tb=(), c=Fraction(1)):
        return cls({(tuple(ta), tuple(tb)): c})

    @classmethod
    def theta(cls, p: int, c=Fraction(1)):
        return cls.monomial((0,) * (p - 1) + (1,), (), c)

    @classmethod
    def thetabar(cls, q: int, c=Fraction(1)):
        return cls.monomial((), (0,) * (q - 1) + (1,), c)

    # -- container protocol --------------------------------------------
    def __iter__(self) -> Iterator:
        return iter(self.items())

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0]))

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, ta=(), tb=()):
        return self.terms.get((_trim_exps(ta), _trim_exps(tb)), Fraction(0))

    def __getitem__(self, key):
        return self.coefficient(*key)

    # -- arithmetic -----------------------------------------------------
    @staticmethod
    def _lift(other):
        if isinstance(other, GradedPolynomial):
            return other
        if isinstance(other, (int, Fraction, RatN)):
            return GradedPolynomial.one(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out[k] + c if k in out else c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return GradedPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPolynomial._raw({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RatN)):
            if not other:
                return GradedPolynomial.zero()
            return GradedPolynomial._raw({k: c * other for k, c in self.terms.items()})
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        out: dict = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (_add_exps(a1, a2), _add_exps(b1, b2))
                v = c1 * c2
                if k in out:
                    v = out[k] + v
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return GradedPolynomial._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c)) if isinstance(c, (int, Fraction)) else self * c.inverse()

    def __pow__(self, k: int):
        out = GradedPolynomial.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- structure --------------------------------------------------------
    def weights(self, key) -> tuple[int, int]:
        ta, tb = key
        return _weight(ta), _weight(tb)

    def is_graded(self, n: int | None = None) -> bool:
        """True when every monomial has a-weight == b-weight (== ``n`` if given)."""
        for key in self.terms:
            wa, wb = self.weights(key)
            if wa != wb or (n is not None and wa != n):
                return False
        return True

    def map_coefficients(self, fn: Callable) -> "GradedPolynomial":
        return GradedPolynomial((k, fn(c)) for k, c in self.terms.items())

    def swap(self) -> "GradedPolynomial":
        """Exchange the roles of ``theta`` and ``thetabar``."""
        return GradedPolynomial._raw({(tb, ta): c for (ta, tb), c in self.terms.items()})

    def select(self, pred: Callable) -> "GradedPolynomial":
        return GradedPolynomial._raw({k: c for k, c in self.terms.items() if pred(k)})

    def derivative(self, p: int, bar: bool = False) -> "GradedPolynomial":
        """Partial derivative in ``theta_p`` (``thetabar_p`` if ``bar``)."""
        out = []
        for (ta, tb), c in self.terms.items():
            e = tb if bar else ta
            if len(e) < p or e[p - 1] == 0:
                continue
            k = e[p - 1]
            e2 = e[: p - 1] + (k - 1,) + e[p:]
            out.append(((ta, e2) if bar else (e2, tb), c * k))
        return GradedPolynomial(out)

    def substitute(self, theta: Mapping | None = None, thetabar: Mapping | None = None) -> "GradedPolynomial":
        """Replace ``theta_p`` by ``theta[p]`` (a polynomial or scalar); unmapped variables stay."""
        theta = theta or {}
        thetabar = thetabar or {}
        cache: dict = {}

        def power(side, p, k, repl):
            key = (side, p, k)
            if key not in cache:
                cache[key] = GradedPolynomial._lift(repl) ** k
            return cache[key]

        total = GradedPolynomial.zero()
        for (ta, tb), c in self.terms.items():
            keep_a = [0] * len(ta)
            keep_b = [0] * len(tb)
            term = GradedPolynomial.one(c)
            for p, k in enumerate(ta, start=1):
                if not k:
                    continue
                if p in theta:
                    term = term * power("a", p, k, theta[p])
                else:
                    keep_a[p - 1] = k
            for q, k in enumerate(tb, start=1):
                if not k:
                    continue
                if q in thetabar:
                    term = term * power("b", q, k, thetabar[q])
                else:
                    keep_b[q - 1] = k
            total = total + term * GradedPolynomial.monomial(keep_a, keep_b)
        return total

    def evaluate(self, theta: Mapping, thetabar: Mapping):
        """Numeric value for moment values given as ``{p: value}`` (missing -> 0)."""
        total = 0
        for (ta, tb), c in self.terms.items():
            v = c
            for p, k in enumerate(ta, start=1):
                if k:
                    v = v * theta.get(p, 0) ** k
            for q, k in enumerate(tb, start=1):
                if k:
                    v = v * thetabar.get(q, 0) ** k
            total = total + v
        return total

    def to_text_terms(self) -> list[tuple[str, str]]:
        return [(monomial_key_text(k), format_rational(c)) for k, c in self.items()]

    @classmethod
    def from_text_terms(cls, pairs) -> "GradedPolynomial":
        return cls((parse_monomial_key(k), parse_rational(v)) for k, v in pairs)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.items():
            mono = monomial_key_text(key).replace("|", " ").strip().replace(" ", "*") or "1"
            parts.append(f"({c})*{mono}" if not isinstance(c, Fraction) else f"{format_rational(c)}*{mono}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# truncated series
# ---------------------------------------------------------------------------

def _zero_like(c):
    return c * 0


class TruncatedSeries:
    """Power series ``sum_k c_k x^k`` known through ``x^order``."""

    __slots__ = ("coeffs", "order", "var")

    def __init__(self, coeffs, order: int | None = None, var: str = "1/s"):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise DomainError("truncation order must be >= 0")
        if not coeffs:
            coeffs = [Fraction(0)]
        zero = _zero_like(coeffs[0])
        coeffs = coeffs[: order + 1] + [zero] * (order + 1 - len(coeffs))
        self.coeffs = tuple(coeffs)
        self.order = order
        self.var = var

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            return False
        if other.var != self.var:
            raise DomainError(f"series in different variables: {self.var} vs {other.var}")
        return True

    def __add__(self, other):
        if not self._check(other):
            return TruncatedSeries([self.coeffs[0] + other, *self.coeffs[1:]], self.order, self.var)
        m = min(self.order, other.order)
        return TruncatedSeries([self.coeffs[k] + other.coeffs[k] for k in range(m + 1)], m, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.order, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not self._check(other):
            return TruncatedSeries([c * other for c in self.coeffs], self.order, self.var)
        m = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for n in range(m + 1):
            acc = None
            for k in range(n + 1):
                if not a[k] or not b[n - k]:
                    continue
                t = a[k] * b[n - k]
                acc = t if acc is None else acc + t
            out.append(acc if acc is not None else _zero_like(a[0]))
        return TruncatedSeries(out, m, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = TruncatedSeries([self.coeffs[0] * 0 + 1], self.order, self.var)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``x**k``; negative ``k`` requires the dropped coefficients to vanish."""
        zero = _zero_like(self.coeffs[0])
        if k >= 0:
            return TruncatedSeries([zero] * k + list(self.coeffs), self.order, self.var)
        if any(self.coeffs[: -k]):
            raise DomainError(f"cannot divide by x^{-k}: low coefficients are nonzero")
        return TruncatedSeries(self.coeffs[-k:], self.order + k, self.var)

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs[: order + 1], min(order, self.order), self.var)

    def valuation(self):
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.var == other.var and self.order == other.order and all(
            a == b for a, b in zip(self.coeffs, other.coeffs)
        )

    def __repr__(self):
        return f"TruncatedSeries({list(self.coeffs)!r}, order={self.order}, var={self.var!r})"


def series_exp(x: TruncatedSeries) -> TruncatedSeries:
    """``exp(x)`` for a series with vanishing constant term."""
    if x.coeffs[0]:
        raise DomainError("series_exp needs a zero constant term")
    one = _zero_like(x.coeffs[0]) + 1
    e = [one]
    for n in range(1, x.order + 1):
        acc = _zero_like(x.coeffs[0])
        for k in range(1, n + 1):
            if x.coeffs[k] and e[n - k]:
                acc = acc + x.coeffs[k] * e[n - k] * k
        e.append(acc * Fraction(1, n))
    return TruncatedSeries(e, x.order, x.var)


def series_log(x: TruncatedSeries) -> TruncatedSeries:
    """``log(x)`` for a series with constant term 1, to the same order.

    Uses ``n L_n = n X_n - sum_{k<n} k L_k X_{n-k}``.
    """
    if not x.coeffs[0] == 1:
        raise DomainError("series_log needs constant term 1")
    zero = _zero_like(x.coeffs[0])
    logs = [zero]
    for n in range(1, x.order + 1):
        acc = x.coeffs[n] * n
        for k in range(1, n):
            if logs[k] and x.coeffs[n - k]:
                acc = acc - logs[k] * x.coeffs[n - k] * k
        logs.append(acc * Fraction(1, n))
    return TruncatedSeries(logs, x.order, x.var)


def _shift_image(p: int, var, shift, bar: bool) -> GradedPolynomial:
    """Moment ``p`` of ``A - c I`` in terms of the moments of ``A``."""
    make = GradedPolynomial.thetabar if bar else GradedPolynomial.theta
    c = make(1) if shift is None else GradedPolynomial.one(Fraction(shift))
    out = GradedPolynomial.zero()
    for q in range(p + 1):
        base = GradedPolynomial.one() if q == 0 else make(q)
        out = out + base * ((-c) ** (p - q)) * comb(p, q)
    return out


def shift_moments(poly: GradedPolynomial, shift=None, shift_bar=None) -> GradedPolynomial:
    """Substitute ``theta_p -> sum_q C(p,q) theta_q (-c)^{p-q}`` (``theta_0 = 1``).

    ``shift=None`` uses the symbolic ``theta_1`` as ``c`` (the traceless shift,
    which sends ``theta_1`` to 0); a number shifts by that constant. Same for
    the barred side with ``shift_bar``.
    """
    top_a = max((len(ta) for ta, _ in poly.terms), default=0)
    top_b = max((len(tb) for _, tb in poly.terms), default=0)
    theta = {p: _shift_image(p, None, shift, False) for p in range(1, top_a + 1)}
    thetabar = {q: _shift_image(q, None, shift_bar, True) for q in range(1, top_b + 1)}
    return poly.substitute(theta, thetabar)
