import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from ptrmt import analytic
from ptrmt.core import Bounded, BoundedExponents, ExponentTriple, InvalidParameterError, Unbounded
from ptrmt.sampling import (
    CHUNK_SIZE,
    RngStream,
    gamma_variate,
    rejection_batch,
    sample_batch,
    sample_bounded,
    sample_bounded_rejection,
    sample_unbounded,
    stream_key,
)
from ptrmt.verify import ks_critical_value

try:
    from ptrmt import _kernels  # noqa: F401

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

BACKENDS = ["python"] + (["compiled"] if HAVE_COMPILED else [])


def _gamma_batch(shape, count, seed=11, backend=None):
    rng = RngStream(seed, backend=backend)
    return rng.kernels.gamma_grid(rng.key("gamma"), 0, count, [shape], 1.0)[:, 0]


@pytest.mark.parametrize("shape,mean", [(1.0, 1.0), (0.5, 0.5), (3.7, 3.7), (0.1, 0.1)])
def test_gamma_mean(shape, mean):
    g = _gamma_batch(shape, 1_000_000)
    assert abs(g.mean() - mean) < 0.003 * max(1.0, shape)
    assert g.min() > 0


@pytest.mark.parametrize("shape", [0.3, 0.5, 1.5, 7.25])
def test_gamma_ks(shape):
    g = np.sort(_gamma_batch(shape, 200_000, seed=5))
    d = stats.kstest(g, stats.gamma(shape).cdf).statistic
    assert d < ks_critical_value(g.size)


def test_gamma_variate_replay_and_cursor():
    a = RngStream(3, 9)
    b = RngStream(3, 9)
    xs = [gamma_variate(1.5, 2.0, a) for _ in range(5)]
    ys = [gamma_variate(1.5, 2.0, b) for _ in range(5)]
    assert xs == ys
    assert a.position == 5
    assert len(set(xs)) == 5
    with pytest.raises(ValueError):
        gamma_variate(0.0, 1.0, a)
    with pytest.raises(ValueError):
        gamma_variate(1.0, -1.0, a)


def test_streams_distinct():
    assert stream_key(1, 0, "gamma") != stream_key(1, 1, "gamma")
    assert stream_key(1, 0, "gamma") != stream_key(2, 0, "gamma")
    assert stream_key(1, 0, "gamma") != stream_key(1, 0, "bounded")
    u = _gamma_batch(1.0, 100_000, seed=1)
    v = _gamma_batch(1.0, 100_000, seed=2)
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.02


def test_unbounded_moments():
    p = sample_batch(Unbounded(1.0, (0, 0, 0)), 1_000_000, seed=21).params
    assert abs(np.mean(p[:, 0] ** 2) - 0.5) < 0.002
    se = p[:, 0].std() / math.sqrt(len(p))
    assert abs(p[:, 0].mean()) < 3 * se
    p = sample_batch(Unbounded(1.0, (0, 0, 1)), 1_000_000, seed=22).params
    assert abs(np.mean(p[:, 1] ** 2) - 1.5) < 0.004


@pytest.mark.parametrize("t,alpha", [((1, 0, 1), 1.0), ((1, 1, 2), 0.5)])
def test_unbounded_marginals(t, alpha):
    spec = Unbounded(alpha, t)
    p = sample_batch(spec, 1_000_000, seed=4).params
    crit = ks_critical_value(len(p))
    for col, k in enumerate(spec.exponents.half_exponents):
        x = np.sort(np.abs(p[:, col]))
        d = stats.kstest(x, lambda v: special.gammainc(k + 0.5, alpha * v * v)).statistic
        assert d < crit


def test_scalar_samplers_follow_the_stream():
    rng = RngStream(8)
    a = sample_unbounded(1.0, ExponentTriple(0, 0, 0), rng)
    b = sample_unbounded(1.0, ExponentTriple(0, 0, 0), rng)
    assert a != b and rng.position == 2
    rng2 = RngStream(8)
    assert sample_unbounded(1.0, ExponentTriple(0, 0, 0), rng2) == a
    q = sample_bounded(BoundedExponents(0, 0, 0), RngStream(8))
    assert q.x1**2 + q.y1**2 + q.x2**2 + q.y2**2 <= 1


def test_bounded_support_and_mean():
    p = sample_batch(Bounded((0, 0, 0)), 1_000_000, seed=6).params
    r2 = np.sum(p * p, axis=1)
    assert np.all(r2 <= 1.0 + 1e-15) and np.all(p >= 0)
    assert abs(r2.mean() - 2 / 3) < 0.002


@pytest.mark.parametrize("lam", [(0.5, 1.5, 0.25), (-0.5, -0.4, 0.5)])
def test_bounded_x1_marginal_against_quadrature(lam):
    b = BoundedExponents(*lam)
    a1 = b.alphas[0]
    # the marginal of x1^2 under the Dirichlet construction is Beta(a1/2, rest/2 + 1)
    rest = sum(b.alphas[1:])
    x = np.sort(sample_batch(Bounded(b), 200_000, seed=9).params[:, 0])
    d = stats.kstest(x, lambda v: special.betainc(a1 / 2, rest / 2 + 1, v * v)).statistic
    assert d < ks_critical_value(x.size)


def test_bounded_marginal_density_by_cubature():
    # beta marginal of x1 against a direct triple integral of pdf_bounded
    b = BoundedExponents(0.5, 1.5, 0.25)
    a1 = b.alphas[0]
    rest = sum(b.alphas[1:])
    v = 0.5
    inner = lambda x2, y1, y2: analytic.pdf_bounded(np.array([v, y1, x2, y2]), b)  # noqa: E731
    dens, _ = integrate.tplquad(
        inner, 0, math.sqrt(1 - v * v),
        lambda y2: 0, lambda y2: math.sqrt(max(0.0, 1 - v * v - y2 * y2)),
        lambda y2, y1: 0, lambda y2, y1: math.sqrt(max(0.0, 1 - v * v - y2 * y2 - y1 * y1)),
        epsabs=1e-6, epsrel=1e-6,
    )
    beta_pdf = stats.beta(a1 / 2, rest / 2 + 1).pdf(v * v) * 2 * v
    assert dens == pytest.approx(beta_pdf, rel=1e-4)


def test_rejection_acceptance_rate():
    params, proposals = rejection_batch(BoundedExponents(0, 0, 0), 200_000, seed=1)
    rate = len(params) / proposals
    assert abs(rate - math.pi**2 / 32) < 0.002


@pytest.mark.parametrize("lam", [(0, 0, 0), (1, 1, 1), (1, 2, 0), (2, 2, 1)])
def test_rejection_vs_composition(lam):
    b = BoundedExponents(*lam)
    assert min(b.alphas) >= 1
    rej, _ = rejection_batch(b, 100_000, seed=3)
    comp = sample_batch(Bounded(b), 100_000, seed=3).params
    n = 100_000
    # 16 comparisons over the grid: family-wise 1% level via Bonferroni
    level = 0.01 / 16
    crit = math.sqrt(-math.log(level / 2) / 2) * math.sqrt(2 / n)
    for c in range(4):
        assert stats.ks_2samp(rej[:, c], comp[:, c]).statistic < crit


def test_rejection_requires_alphas_at_least_one():
    with pytest.raises(InvalidParameterError):
        sample_bounded_rejection(BoundedExponents(-0.5, 0, 0), RngStream(1))
    p = sample_bounded_rejection(BoundedExponents(0, 0, 0), RngStream(1))
    assert p == sample_bounded_rejection(BoundedExponents(0, 0, 0), RngStream(1))


def test_batch_worker_independence_and_empty():
    spec = Unbounded(1.0, (1, 0, 1))
    n = 3 * CHUNK_SIZE + 17
    a = sample_batch(spec, n, seed=5, workers=1).params
    b = sample_batch(spec, n, seed=5, workers=8).params
    assert a.tobytes() == b.tobytes()
    assert len(sample_batch(spec, 0, seed=5)) == 0
    # a prefix of a larger batch is the smaller batch
    c = sample_batch(spec, CHUNK_SIZE + 5, seed=5).params
    assert np.array_equal(c, a[: CHUNK_SIZE + 5])


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")
@pytest.mark.parametrize("spec", [Unbounded(1.0, (0, 0, 0)), Unbounded(0.5, (1, 1, 2)), Bounded((0.5, 1.5, 0.25))])
def test_backends_agree(spec):
    a = sample_batch(spec, 50_000, seed=77, backend="python").params
    b = sample_batch(spec, 50_000, seed=77, backend="compiled").params
    # same uniforms and same algorithm; only libm rounding may differ
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(1, 300))
def test_replay_property(backend, seed, count):
    spec = Bounded((0.2, 1.0, 0.7))
    a = sample_batch(spec, count, seed, backend=backend).params
    b = sample_batch(spec, count, seed, backend=backend).params
    assert a.tobytes() == b.tobytes()
    assert np.all(np.sum(a * a, axis=1) <= 1 + 1e-12)


def test_bad_seed():
    with pytest.raises(ValueError):
        RngStream(2**64)
    with pytest.raises(ValueError):
        sample_batch(Unbounded(1.0, (0, 0, 0)), -1, 1)
