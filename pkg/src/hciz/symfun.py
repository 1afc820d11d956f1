"""Partitions, symmetric-group characters, GL(N) dimensions and free cumulants.

Partitions use weakly decreasing rows. Conjugacy classes of S_n are given
as multiplicity vectors (:class:`ClassVector`), ``mult[p-1]`` being the number
of ``p``-cycles.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Iterable, Sequence

from .errors import DomainError
from .exact_algebra import RatN

__all__ = [
    "Partition",
    "ClassVector",
    "partitions",
    "sn_character",
    "sn_dimension",
    "gl_dimension",
    "z_alpha",
    "class_size",
    "character_table",
    "moments_to_free_cumulants",
    "to_increasing",
    "schur_numeric",
]


class Partition(tuple):
    """Integer partition with weakly decreasing positive rows."""

    def __new__(cls, rows: Iterable[int] = ()):
        rows = tuple(int(r) for r in rows)
        if any(r <= 0 for r in rows) or any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise DomainError(f"not a partition (decreasing positive rows): {rows}")
        return super().__new__(cls, rows)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip()
        return cls(int(x) for x in text.split(",")) if text else cls()

    @property
    def n(self) -> int:
        return sum(self)

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition(sum(1 for r in self if r > j) for j in range(self[0]))

    def boxes(self):
        for i, r in enumerate(self):
            for j in range(r):
                yield i, j

    def hook(self, i: int, j: int) -> int:
        conj = self.conjugate()
        return (self[i] - j) + (conj[j] - i) - 1

    def to_class(self) -> "ClassVector":
        """Read the partition as a cycle type."""
        return ClassVector.from_cycle_type(self)

    def __str__(self):
        return ",".join(map(str, self))

    def __repr__(self):
        return f"Partition({tuple(self)})"


class ClassVector(tuple):
    """Cycle type as multiplicities ``[1^{a_1} 2^{a_2} ...]``, trailing zeros trimmed."""

    def __new__(cls, mult: Iterable[int] = ()):
        mult = list(int(m) for m in mult)
        if any(m < 0 for m in mult):
            raise DomainError(f"negative multiplicity in class vector {mult}")
        while mult and mult[-1] == 0:
            mult.pop()
        return super().__new__(cls, mult)

    @classmethod
    def from_cycle_type(cls, lengths: Iterable[int]) -> "ClassVector":
        lengths = list(lengths)
        if any(ell <= 0 for ell in lengths):
            raise DomainError(f"cycle lengths must be positive: {lengths}")
        mult = [0] * (max(lengths) if lengths else 0)
        for ell in lengths:
            mult[ell - 1] += 1
        return cls(mult)

    @property
    def mult(self) -> tuple:
        return tuple(self)

    @property
    def n(self) -> int:
        return sum((p + 1) * m for p, m in enumerate(self))

    @property
    def length(self) -> int:
        """Number of cycles."""
        return sum(self)

    def cycle_type(self) -> Partition:
        out = []
        for p in range(len(self), 0, -1):
            out.extend([p] * self[p - 1])
        return Partition(out)

    def __repr__(self):
        body = " ".join(f"{p + 1}^{m}" for p, m in enumerate(self) if m)
        return f"ClassVector[{body}]"


def partitions(n: int) -> list[Partition]:
    """All partitions of ``n`` in reverse lexicographic order: ``(n)`` first, ``(1^n)`` last."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return [Partition(p) for p in _partitions(n, n)]


@lru_cache(maxsize=None)
def _partitions(n: int, largest: int) -> tuple:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def z_alpha(alpha: ClassVector) -> int:
    """Centralizer order ``prod_p p^{a_p} a_p!``."""
    return prod((p + 1) ** m * factorial(m) for p, m in enumerate(alpha))


def class_size(alpha: ClassVector) -> int:
    return factorial(alpha.n) // z_alpha(alpha)


# -- Murnaghan-Nakayama -----------------------------------------------------

@lru_cache(maxsize=None)
def _mn(beta: tuple, cycles: tuple) -> int:
    """Character via beta-sets: ``beta`` is a strictly decreasing tuple of
    first-column hook lengths; ``cycles`` is decreasing, largest removed first."""
    if not cycles:
        return 1
    k, rest = cycles[0], cycles[1:]
    members = set(beta)
    total = 0
    for idx, b in enumerate(beta):
        target = b - k
        if target < 0 or target in members:
            continue
        # rim hook height = number of beads jumped over
        height = sum(1 for c in beta if target < c < b)
        new = tuple(sorted((c if c != b else target for c in beta), reverse=True))
        sign = -1 if height % 2 else 1
        total += sign * _mn(new, rest)
    return total


def _beta_set(lam: Sequence[int]) -> tuple:
    ell = len(lam)
    return tuple(lam[i] + ell - 1 - i for i in range(ell))


def sn_character(lam: Partition, alpha: ClassVector) -> int:
    """Irreducible character of S_n for ``lam`` on the class ``alpha``."""
    lam = Partition(lam)
    if not isinstance(alpha, ClassVector):
        alpha = ClassVector(alpha)
    if lam.n != alpha.n:
        raise DomainError(f"|lambda| = {lam.n} but class has n = {alpha.n}")
    return _mn(_beta_set(lam), tuple(alpha.cycle_type()))


def sn_dimension(lam: Partition) -> int:
    """Hook length formula."""
    lam = Partition(lam)
    hooks = prod(lam.hook(i, j) for i, j in lam.boxes())
    return factorial(lam.n) // hooks


def gl_dimension(lam: Partition) -> RatN:
    """``prod_boxes (N + content) / hook`` as a polynomial in the formal ``N``."""
    lam = Partition(lam)
    hooks = prod(lam.hook(i, j) for i, j in lam.boxes())
    return RatN.from_factors([j - i for i, j in lam.boxes()], [], Fraction(1, hooks))


@lru_cache(maxsize=None)
def character_table(n: int) -> tuple[tuple[Partition, ...], tuple[ClassVector, ...], tuple[tuple[int, ...], ...]]:
    """``(lambdas, classes, table)`` with ``table[i][j] = chi_{lambdas[i]}(classes[j])``."""
    lams = tuple(partitions(n))
    classes = tuple(p.to_class() for p in lams)
    table = tuple(tuple(sn_character(lam, a) for a in classes) for lam in lams)
    return lams, classes, table


# -- conventions for the bialternant formula ---------------------------------

def to_increasing(lam: Partition, N: int) -> tuple[int, ...]:
    """Rows padded with zeros to length ``N`` and listed increasingly."""
    lam = Partition(lam)
    if len(lam) > N:
        raise DomainError(f"partition {lam} has more than N={N} rows")
    return tuple(reversed(tuple(lam) + (0,) * (N - len(lam))))


def _det(rows):
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


def schur_numeric(lam: Partition, a: Sequence) -> Fraction:
    """GL(N) character ``det(a_i^{l_j + j - 1}) / det(a_i^{j - 1})`` at distinct eigenvalues."""
    N = len(a)
    inc = to_increasing(lam, N)
    num = _det([[ai ** (inc[j] + j) for j in range(N)] for ai in a])
    den = _det([[ai ** j for j in range(N)] for ai in a])
    if not den:
        raise DomainError("bialternant needs distinct eigenvalues")
    return num / den


# -- free cumulants ------------------------------------------------------------

def _class_vectors(q: int):
    for p in partitions(q):
        yield p.to_class()


def moments_to_free_cumulants(moments: Sequence, Q: int) -> list:
    """Free cumulants ``phi_1..phi_Q`` from moments ``theta_1..theta_Q``.

    ``phi_q = -sum_{alpha |- q} (q + |alpha| - 2)!/(q-1)! prod_i (-theta_i)^{a_i}/a_i!``.
    Moments may be numbers or polynomials; ``moments[i]`` is ``theta_{i+1}``.
    """
    if len(moments) < Q:
        raise DomainError(f"need {Q} moments, got {len(moments)}")
    out = []
    for q in range(1, Q + 1):
        acc = 0
        for alpha in _class_vectors(q):
            term = Fraction(factorial(q + alpha.length - 2), factorial(q - 1))
            for i, m in enumerate(alpha, start=1):
                if m:
                    term = term * (-moments[i - 1]) ** m * Fraction(1, factorial(m))
            acc = acc - term
        out.append(acc)
    return out
