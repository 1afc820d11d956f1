import math

import mpmath
import numpy as np
import pytest

from hciz.errors import DomainError
from hciz.haar_mc import SHARD_SIZE, mc_estimate, sample_haar
from hciz.hciz_exact import RectangularData, SpectralData, eval_rectangular, eval_unitary_integral


def mean_within(values, target, sigmas):
    values = np.asarray(values)
    err = values.std(ddof=1) / math.sqrt(len(values))
    return abs(values.mean() - target) <= sigmas * err


def test_u1_is_uniform_on_the_circle():
    u = sample_haar(1, np.random.default_rng(1), 50000)[:, 0, 0]
    assert np.allclose(np.abs(u), 1, atol=1e-14)
    for k in (1, 2, 3):
        assert mean_within((u ** k).real, 0, 4)
        assert mean_within((u ** k).imag, 0, 4)


@pytest.mark.parametrize("N", [2, 3, 5])
def test_samples_are_unitary(N):
    U = sample_haar(N, np.random.default_rng(N), 2000)
    gram = np.conj(np.transpose(U, (0, 2, 1))) @ U
    assert np.max(np.abs(gram - np.eye(N))) < 1e-12
    single = sample_haar(N, np.random.default_rng(0))
    assert single.shape == (N, N)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_entry_moments(N):
    U = sample_haar(N, np.random.default_rng(10 + N), 100000)
    p = np.abs(U[:, 0, 0]) ** 2
    assert mean_within(p, 1 / N, 4)
    assert mean_within(p ** 2, 2 / (N * (N + 1)), 4)


@pytest.mark.parametrize("N", [2, 3])
def test_trace_moments(N):
    # E|Tr U|^2 = 1 and E|Tr U|^4 = 2 for N >= 2; these fail without the phase correction
    U = sample_haar(N, np.random.default_rng(20 + N), 100000)
    tr = np.abs(np.trace(U, axis1=1, axis2=2)) ** 2
    assert mean_within(tr, 1, 4)
    assert mean_within(tr ** 2, 2, 4)


def test_sample_haar_rejects_bad_size():
    with pytest.raises(DomainError):
        sample_haar(0, np.random.default_rng(0))


def test_two_by_two_example():
    est = mc_estimate(SpectralData((0, 1), (0, 1), 2), 100000, seed=7)
    assert est.within(math.e - 1)
    assert est.samples == 100000 and est.seed == 7


def test_constant_integrand():
    est = mc_estimate(SpectralData((0.5, 1.5), (0, 0), 1), 1000, seed=1)
    assert est.mean == 1 and est.stderr == 0


def test_rectangular_examples():
    est = mc_estimate(RectangularData((1.0,), (1.0,), 1.0, 1, 1), 100000, seed=3)
    assert est.within(float(mpmath.besseli(0, 2)))
    d = RectangularData((0.5, 1.0), (1.0, 0.25), 2.0, 3, 2)
    est = mc_estimate(d, 100000, seed=4)
    assert est.within(float(eval_rectangular(d).value))


def test_three_by_three_against_exact():
    d = SpectralData((0.2, -0.5, 1.0), (0.3, 0.8, -0.4), 1.5)
    est = mc_estimate(d, 100000, seed=5)
    assert est.within(float(eval_unitary_integral(d).value))


def test_seed_determinism_and_workers():
    d = SpectralData((0.1, 0.7), (0.4, -0.2), 1.0)
    samples = 3 * SHARD_SIZE + 17
    a = mc_estimate(d, samples, seed=11)
    b = mc_estimate(d, samples, seed=11)
    c = mc_estimate(d, samples, seed=11, workers=3)
    assert a == b
    assert a.mean == c.mean and a.stderr == c.stderr
    assert mc_estimate(d, samples, seed=12).mean != a.mean


def test_invariance_under_permutation_and_swap():
    a, b, s = (0.3, 1.1, -0.6), (0.9, -0.2, 0.5), 1.2
    base = mc_estimate(SpectralData(a, b, s), 60000, seed=1)
    for aa, bb in ((a[::-1], b), (a, (b[1], b[2], b[0])), (b, a)):
        other = mc_estimate(SpectralData(aa, bb, s), 60000, seed=2)
        assert abs(base.mean - other.mean) <= 3 * math.hypot(base.stderr, other.stderr)


def test_mc_rejects_bad_input():
    with pytest.raises(DomainError):
        mc_estimate(SpectralData((0,), (0,), 1), 10, seed=0)
    with pytest.raises(DomainError):
        mc_estimate(((0,), (0,)), 1000, seed=0)
