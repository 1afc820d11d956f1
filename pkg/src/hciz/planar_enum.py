"""Planar free energy from pairs of permutations.

``F_n = (1/n!) sum gamma(sigma tau, Pi_sigma v Pi_tau) tr_{C_sigma} A tr_{C_tau} B``
over pairs ``(sigma, tau)`` in ``S_n`` whose bicolored map is planar
(``#cyc(sigma) + #cyc(tau) + #cyc(sigma tau) - n = 2 * #components``).

The product is composed left to right: ``(sigma tau)(x) = tau(sigma(x))``.
Permutations are tuples of images on ``{0, ..., n-1}``; the cycle-notation
helpers accept and print 1-based labels.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .errors import DomainError
from .exact_algebra import GradedPolynomial
from .symfun import ClassVector, Partition, class_size, partitions

__all__ = [
    "PermPair",
    "MapStats",
    "SetPartition",
    "perm_from_cycles",
    "perm_cycles",
    "w_coefficient",
    "map_stats",
    "gamma_coefficient",
    "free_energy_enum",
]


# -- permutations ----------------------------------------------------------------

def perm_from_cycles(cycles, n: int) -> tuple[int, ...]:
    """Build a permutation of ``{0..n-1}`` from 1-based cycles (string or nested lists)."""
    if isinstance(cycles, str):
        cycles = [[int(x) for x in grp.split()] for grp in re.findall(r"\(([^)]*)\)", cycles)]
    img = list(range(n))
    seen = set()
    for cyc in cycles:
        for k, x in enumerate(cyc):
            if not 1 <= x <= n or x in seen:
                raise DomainError(f"bad cycle element {x} for n={n}")
            seen.add(x)
            img[x - 1] = cyc[(k + 1) % len(cyc)] - 1
    return tuple(img)


def perm_cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycles as 1-based tuples, each starting at its smallest element."""
    n = len(perm)
    seen = [False] * n
    out = []
    for start in range(n):
        if seen[start]:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x + 1)
            x = perm[x]
        out.append(tuple(cyc))
    return out


def compose(sigma: Sequence[int], tau: Sequence[int]) -> tuple[int, ...]:
    """``sigma tau``: apply ``sigma`` first, then ``tau``."""
    return tuple(tau[sigma[x]] for x in range(len(sigma)))


def _cycle_type(perm: Sequence[int]) -> Partition:
    return Partition(sorted((len(c) for c in perm_cycles(perm)), reverse=True))


@dataclass(frozen=True)
class PermPair:
    sigma: tuple
    tau: tuple

    def __post_init__(self):
        n = len(self.sigma)
        if len(self.tau) != n:
            raise DomainError("sigma and tau act on sets of different sizes")
        for p in (self.sigma, self.tau):
            if sorted(p) != list(range(n)):
                raise DomainError(f"not a permutation of 0..{n - 1}: {p}")

    @property
    def n(self) -> int:
        return len(self.sigma)

    @classmethod
    def from_cycles(cls, sigma, tau, n: int) -> "PermPair":
        return cls(perm_from_cycles(sigma, n), perm_from_cycles(tau, n))


@dataclass(frozen=True)
class SetPartition:
    """Partition of a finite ground set into disjoint nonempty blocks."""

    blocks: frozenset

    def __init__(self, blocks: Iterable[Iterable]):
        bl = [frozenset(b) for b in blocks]
        if any(not b for b in bl):
            raise DomainError("empty block in set partition")
        if sum(len(b) for b in bl) != len(frozenset().union(*bl)):
            raise DomainError("blocks of a set partition must be disjoint")
        object.__setattr__(self, "blocks", frozenset(bl))

    @classmethod
    def of_permutation(cls, perm: Sequence[int]) -> "SetPartition":
        return cls(frozenset(x - 1 for x in c) for c in perm_cycles(perm))

    @property
    def ground(self) -> frozenset:
        return frozenset().union(*self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __le__(self, other: "SetPartition") -> bool:
        return all(any(b <= c for c in other.blocks) for b in self.blocks)

    def join(self, other: "SetPartition") -> "SetPartition":
        if self.ground != other.ground:
            raise DomainError("join of set partitions on different ground sets")
        parent = {x: x for x in self.ground}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for part in (self, other):
            for b in part.blocks:
                it = iter(b)
                root = find(next(it))
                for x in it:
                    parent[find(x)] = root
        groups: dict = {}
        for x in self.ground:
            groups.setdefault(find(x), set()).add(x)
        return SetPartition(groups.values())

    __or__ = join


@dataclass(frozen=True)
class MapStats:
    n: int
    sigma_type: Partition
    tau_type: Partition
    product_type: Partition
    product_cycles: tuple
    n_sigma: int
    n_tau: int
    n_product: int
    components: int

    @property
    def euler(self) -> int:
        return self.n_sigma + self.n_tau + self.n_product - self.n

    @property
    def planar(self) -> bool:
        return self.euler == 2 * self.components


# -- weights ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def _w(mult: tuple) -> Fraction:
    n = sum((p + 1) * m for p, m in enumerate(mult))
    if n < 1:
        raise DomainError("W needs n >= 1")
    ncyc = sum(mult)
    w = Fraction((-1) ** n * math.factorial(2 * n + ncyc - 3), math.factorial(2 * n))
    for p, m in enumerate(mult, start=1):
        if m:
            w *= Fraction(-math.factorial(2 * p), math.factorial(p) * math.factorial(p - 1)) ** m
    return w


def w_coefficient(alpha: ClassVector) -> Fraction:
    """Large-N vertex weight ``W_alpha`` of the unitary 'external field' integral."""
    return _w(tuple(ClassVector(alpha)))


def _w_of_lengths(lengths: Iterable[int]) -> Fraction:
    return _w(tuple(ClassVector.from_cycle_type(lengths)))


def map_stats(pair: PermPair) -> MapStats:
    sigma, tau = pair.sigma, pair.tau
    rho = compose(sigma, tau)
    comps = SetPartition.of_permutation(sigma).join(SetPartition.of_permutation(tau))
    return MapStats(
        n=pair.n,
        sigma_type=_cycle_type(sigma),
        tau_type=_cycle_type(tau),
        product_type=_cycle_type(rho),
        product_cycles=tuple(perm_cycles(rho)),
        n_sigma=len(perm_cycles(sigma)),
        n_tau=len(perm_cycles(tau)),
        n_product=len(perm_cycles(rho)),
        components=len(comps),
    )


# -- gamma -------------------------------------------------------------------------

def _set_partitions_into(k: int, blocks: int):
    """Restricted growth strings of length ``k`` using exactly ``blocks`` labels."""
    if blocks < 1 or blocks > k:
        return
    rgs = [0] * k

    def rec(i, used):
        if k - i < blocks - used:
            return
        if i == k:
            if used == blocks:
                yield tuple(rgs)
            return
        for v in range(min(used + 1, blocks)):
            rgs[i] = v
            yield from rec(i + 1, max(used, v + 1))

    yield from rec(0, 0)


def _gamma_items(lengths: Sequence[int], touches: Sequence[frozenset], n_pi: int) -> Fraction:
    """Sum over groupings of the rho-cycles; cycle ``i`` has length ``lengths[i]``
    and meets the Pi-blocks ``touches[i]`` (labelled ``0..n_pi-1``)."""
    k = len(lengths)
    target = k - n_pi + 1
    total = Fraction(0)
    for rgs in _set_partitions_into(k, target):
        parent = list(range(n_pi))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        groups: list[list[int]] = [[] for _ in range(target)]
        for i, g in enumerate(rgs):
            groups[g].append(i)
        for members in groups:
            blocks = [b for i in members for b in touches[i]]
            r = find(blocks[0])
            for b in blocks[1:]:
                parent[find(b)] = r
        for cyc_touch in touches:
            blocks = list(cyc_touch)
            r = find(blocks[0])
            for b in blocks[1:]:
                parent[find(b)] = r
        if len({find(x) for x in range(n_pi)}) != 1:
            continue
        term = Fraction(1)
        for members in groups:
            term *= _w_of_lengths(lengths[i] for i in members)
        total += term
    return total


@lru_cache(maxsize=None)
def _gamma_from_key(key: tuple) -> Fraction:
    """``key``: per Pi-block, the sorted lengths of the rho-cycles inside it."""
    lengths, touches = [], []
    for b, block in enumerate(key):
        for ell in block:
            lengths.append(ell)
            touches.append(frozenset((b,)))
    return _gamma_items(lengths, touches, len(key))


def gamma_coefficient(rho_cycles: SetPartition, pi: SetPartition) -> Fraction:
    """Connected-tree weight ``gamma(rho, Pi)``.

    ``rho_cycles`` is the orbit partition of ``rho`` (block sizes are the cycle
    lengths). Sums, over groupings ``Pi'`` of the cycles with
    ``#(Pi v Pi') = 1`` and ``#Pi_rho - #Pi' = #Pi - 1``, the product of
    ``W`` over the cycle types of the groups.
    """
    if rho_cycles.ground != pi.ground:
        raise DomainError("rho and Pi act on different ground sets")
    pi_blocks = sorted(pi.blocks, key=lambda b: sorted(b))
    index = {x: i for i, b in enumerate(pi_blocks) for x in b}
    cycles = sorted(rho_cycles.blocks, key=lambda b: sorted(b))
    if rho_cycles <= pi:
        per_block: list[list[int]] = [[] for _ in pi_blocks]
        for c in cycles:
            per_block[index[next(iter(c))]].append(len(c))
        key = tuple(sorted(tuple(sorted(b)) for b in per_block))
        return _gamma_from_key(key)
    lengths = [len(c) for c in cycles]
    touches = [frozenset(index[x] for x in c) for c in cycles]
    return _gamma_items(lengths, touches, len(pi_blocks))


# -- enumeration -------------------------------------------------------------------

def _class_representative(lam: Partition) -> tuple[int, ...]:
    img = []
    start = 0
    for ell in lam:
        img.extend(start + (k + 1) % ell for k in range(ell))
        start += ell
    return tuple(img)


def _scan(sigma: tuple, first: int | None) -> Counter:
    """Count planar pairs ``(sigma, tau)`` by ``(type(tau), gamma key)``.

    ``first`` restricts ``tau`` to ``tau(0) == first`` (for sharding)."""
    n = len(sigma)
    n_sigma = len(perm_cycles(sigma))
    counts: Counter = Counter()
    if first is None:
        taus = itertools.permutations(range(n))
    else:
        rest = [x for x in range(n) if x != first]
        taus = ((first,) + p for p in itertools.permutations(rest))
    comp = [0] * n
    seen = [False] * n
    rng = range(n)
    for tau in taus:
        # components of <sigma, tau>
        for x in rng:
            comp[x] = -1
        ncomp = 0
        for start in rng:
            if comp[start] < 0:
                comp[start] = ncomp
                stack = [start]
                while stack:
                    x = stack.pop()
                    y = sigma[x]
                    if comp[y] < 0:
                        comp[y] = ncomp
                        stack.append(y)
                    y = tau[x]
                    if comp[y] < 0:
                        comp[y] = ncomp
                        stack.append(y)
                ncomp += 1
        # cycles of tau
        for x in rng:
            seen[x] = False
        tau_lengths = []
        for start in rng:
            if not seen[start]:
                ell = 0
                x = start
                while not seen[x]:
                    seen[x] = True
                    x = tau[x]
                    ell += 1
                tau_lengths.append(ell)
        # cycles of rho = tau o sigma
        for x in rng:
            seen[x] = False
        rho = []
        for start in rng:
            if not seen[start]:
                ell = 0
                x = start
                while not seen[x]:
                    seen[x] = True
                    x = tau[sigma[x]]
                    ell += 1
                rho.append((comp[start], ell))
        if n_sigma + len(tau_lengths) + len(rho) - n != 2 * ncomp:
            continue
        per_block: list[list[int]] = [[] for _ in range(ncomp)]
        for c, ell in rho:
            per_block[c].append(ell)
        key = tuple(sorted(tuple(sorted(b)) for b in per_block))
        counts[(tuple(sorted(tau_lengths, reverse=True)), key)] += 1
    return counts


def _scan_task(args):
    sigma, first = args
    return _scan(sigma, first)


def _order_from_counts(n: int, per_class: dict) -> GradedPolynomial:
    terms: dict = {}
    nfact = math.factorial(n)
    for lam, counts in per_class.items():
        alpha = tuple(lam.to_class())
        weight = Fraction(class_size(lam.to_class()), nfact)
        for (tau_type, key), cnt in counts.items():
            g = _gamma_from_key(key)
            if not g:
                continue
            mono = (alpha, tuple(ClassVector.from_cycle_type(tau_type)))
            terms[mono] = terms.get(mono, Fraction(0)) + weight * cnt * g
    return GradedPolynomial(terms)


def free_energy_order(n: int, workers: int = 1, progress: Callable[[int], None] | None = None) -> GradedPolynomial:
    """``F_n`` from the permutation sum, one ``sigma`` per conjugacy class."""
    if n < 1:
        raise DomainError("order must be >= 1")
    lams = partitions(n)
    shards = [(lam, None) for lam in lams] if n < 5 or workers <= 1 else [
        (lam, f) for lam in lams for f in range(n)
    ]
    per_class: dict = {lam: Counter() for lam in lams}
    tasks = [(_class_representative(lam), first) for lam, first in shards]
    shard_size = math.factorial(n) if n < 5 or workers <= 1 else math.factorial(n - 1)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_scan_task, tasks, chunksize=1)
            for (lam, _), res in zip(shards, results):
                per_class[lam].update(res)
                if progress:
                    progress(shard_size)
    else:
        for (lam, _), task in zip(shards, tasks):
            per_class[lam].update(_scan_task(task))
            if progress:
                progress(shard_size)
    return _order_from_counts(n, per_class)


def free_energy_enum(order: int, workers: int = 1,
                     progress: Callable[[int], None] | None = None) -> list[GradedPolynomial]:
    """``[F_1, ..., F_order]`` by planar permutation-pair enumeration."""
    if order < 1:
        raise DomainError("order must be >= 1")
    return [free_energy_order(n, workers, progress) for n in range(1, order + 1)]
