import itertools
import math
from fractions import Fraction

import pytest

from hciz.errors import DomainError
from hciz.exact_algebra import GradedPolynomial
from hciz.hciz_series import free_energy_oracle
from hciz.planar_enum import (
    PermPair,
    SetPartition,
    compose,
    free_energy_enum,
    free_energy_order,
    gamma_coefficient,
    map_stats,
    perm_cycles,
    perm_from_cycles,
    w_coefficient,
)
from hciz.symfun import ClassVector, partitions


def test_w_examples():
    assert w_coefficient(ClassVector((1,))) == 1
    assert w_coefficient(ClassVector((0, 1))) == -1
    assert w_coefficient(ClassVector((2,))) == 1
    with pytest.raises(DomainError):
        w_coefficient(ClassVector(()))


@pytest.mark.parametrize("n", range(1, 11))
def test_w_is_integral(n):
    for lam in partitions(n):
        assert w_coefficient(lam.to_class()).denominator == 1


def test_w_multivertex_values():
    # p one-cycles: 2^p (3p-3)! / (2p)!
    for p in range(1, 7):
        w = w_coefficient(ClassVector((p,)))
        assert w == Fraction(math.factorial(3 * p - 3) * 2 ** p, math.factorial(2 * p))


def test_figure_map_statistics():
    sigma = perm_from_cycles("(1 2 11)(3 4 5)(6 7 10)(8 9)", 11)
    tau = perm_from_cycles("(1)(2 3 6)(4 5)(7 8)(9 11 10)", 11)
    st = map_stats(PermPair(sigma, tau))
    assert sorted(st.product_cycles) == sorted([(1, 3, 5, 6, 8, 11), (2, 10), (4,), (7, 9)])
    assert (st.n_sigma, st.n_tau, st.n_product) == (4, 5, 4)
    assert st.components == 1
    assert st.euler == 2 and st.planar


def test_small_map_statistics():
    st = map_stats(PermPair((0,), (0,)))
    assert (st.n_sigma, st.n_tau, st.n_product, st.euler) == (1, 1, 1, 2)
    assert st.planar
    swap = perm_from_cycles("(1 2)", 2)
    st = map_stats(PermPair(swap, swap))
    assert st.product_cycles == ((1,), (2,))
    assert (st.n_sigma, st.n_tau, st.n_product) == (1, 1, 2)
    assert st.planar


def test_nonplanar_map_detected():
    # sigma = tau = (1 2 3 4) gives rho = (1 3)(2 4): chi = 1 + 1 + 2 - 4 = 0, a torus
    c = perm_from_cycles("(1 2 3 4)", 4)
    st = map_stats(PermPair(c, c))
    assert st.euler == 0 and not st.planar


@pytest.mark.parametrize("n", range(1, 6))
def test_euler_bound_and_parity(n):
    perms = list(itertools.permutations(range(n)))
    for sigma in perms:
        for tau in perms:
            st = map_stats(PermPair(sigma, tau))
            assert st.euler <= 2 * st.components
            assert st.euler % 2 == 0


def test_perm_helpers():
    p = perm_from_cycles([[1, 3], [2]], 3)
    assert p == (2, 1, 0)
    assert perm_cycles(p) == [(1, 3), (2,)]
    assert compose(p, p) == (0, 1, 2)
    with pytest.raises(DomainError):
        perm_from_cycles([[1, 1]], 2)
    with pytest.raises(DomainError):
        PermPair((0, 1), (0,))
    with pytest.raises(DomainError):
        PermPair((0, 0), (0, 1))


def test_set_partition_lattice():
    a = SetPartition([{1, 2}, {3}, {4}])
    b = SetPartition([{2, 3}, {1}, {4}])
    assert a.join(b) == SetPartition([{1, 2, 3}, {4}])
    assert a <= a.join(b) and not a.join(b) <= a
    with pytest.raises(DomainError):
        SetPartition([{1}, {1, 2}])
    with pytest.raises(DomainError):
        a.join(SetPartition([{1, 2, 3}]))


def test_gamma_examples():
    rho = SetPartition([{1}, {2}])
    assert gamma_coefficient(rho, SetPartition([{1, 2}])) == 1
    assert gamma_coefficient(rho, rho) == w_coefficient(ClassVector((2,)))
    pair = SetPartition([{1, 2}])
    assert gamma_coefficient(pair, pair) == -1
    with pytest.raises(DomainError):
        gamma_coefficient(rho, SetPartition([{1, 3}]))


@pytest.mark.parametrize("cycles", [[{1, 2, 3}], [{1, 2}, {3}], [{1}, {2}, {3}], [{1, 2}, {3, 4}], [{1}, {2, 3, 4}]])
def test_gamma_on_own_partition_is_w(cycles):
    rho = SetPartition(cycles)
    lengths = [len(c) for c in cycles]
    assert gamma_coefficient(rho, rho) == w_coefficient(ClassVector.from_cycle_type(lengths))


def test_low_order_free_energy():
    F = free_energy_enum(2)
    assert F[0] == GradedPolynomial.theta(1) * GradedPolynomial.thetabar(1)
    assert F[1].coefficient((0, 1), (0, 1)) == Fraction(1, 2)


def test_theta2_thetabar2_powers():
    F = free_energy_enum(6)
    for k, expected in ((1, Fraction(1, 2)), (2, Fraction(3, 4)), (3, Fraction(9, 2))):
        assert F[2 * k - 1].coefficient((0, k), (0, k)) == expected


def test_multivertex_coefficients():
    F = free_energy_enum(6)
    for p in range(1, 7):
        expected = Fraction(2 ** p * math.factorial(3 * p - 3), math.factorial(p) * math.factorial(2 * p))
        assert F[p - 1].coefficient((p,), (p,)) == expected


@pytest.mark.parametrize("n", range(1, 7))
def test_enum_matches_oracle(n):
    assert free_energy_order(n) == free_energy_oracle(n)[n - 1]


@pytest.mark.slow
@pytest.mark.parametrize("n", [7, 8])
def test_enum_matches_oracle_long(n):
    assert free_energy_order(n, workers=4) == free_energy_oracle(n)[n - 1]


@pytest.mark.parametrize("n", range(1, 7))
def test_n_times_F_is_integral(n):
    F = free_energy_order(n)
    assert all((n * c).denominator == 1 for c in F.terms.values())


def test_sharded_run_is_deterministic():
    seen = []
    serial = free_energy_order(5)
    parallel = free_energy_order(5, workers=2, progress=seen.append)
    assert serial == parallel
    # one sigma per class, every tau in S_5
    assert sum(seen) == len(partitions(5)) * math.factorial(5)


def test_enum_rejects_bad_order():
    with pytest.raises(DomainError):
        free_energy_enum(0)
