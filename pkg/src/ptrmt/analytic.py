"""Closed-form densities, normalisation constants and repulsion exponents.

Every function that takes a point accepts either a :class:`MatrixParams` or
an array whose last axis holds ``(x1, y1, x2, y2)``; spacing densities accept
scalars or arrays. Gamma and beta factors are evaluated through ``lgamma``
and exponentiated once at the end.
"""

from __future__ import annotations

import math

import numpy as np

from ptrmt.core import (
    Bounded,
    BoundedExponents,
    EnsembleSpec,
    ExponentTriple,
    InvalidParameterError,
    MatrixParams,
    Unbounded,
)

_LOG_PI = math.log(math.pi)


def _coords(p) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(p, MatrixParams):
        return tuple(np.float64(v) for v in p.as_tuple())
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 4:
        raise ValueError(f"expected last axis of length 4, got shape {arr.shape}")
    return arr[..., 0], arr[..., 1], arr[..., 2], arr[..., 3]


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidParameterError(f"alpha > 0 violated (alpha={alpha})")


def log_double_factorial(k: int) -> float:
    if k < -1:
        raise ValueError(f"double factorial undefined for k={k} < -1")
    if k <= 0:
        return 0.0
    if k % 2 == 0:
        # (2j)!! = 2^j j!
        j = k // 2
        return j * math.log(2.0) + math.lgamma(j + 1)
    # (2j-1)!! = 2^j Gamma(j + 1/2) / sqrt(pi)
    j = (k + 1) // 2
    return j * math.log(2.0) + math.lgamma(j + 0.5) - 0.5 * _LOG_PI


def double_factorial(k: int) -> float:
    """``k!!`` as a float, with ``(-1)!! = 0!! = 1``."""
    if k != int(k):
        raise ValueError(f"double factorial needs an integer, got {k!r}")
    k = int(k)
    if k < -1:
        raise ValueError(f"double factorial undefined for k={k} < -1")
    if k > 20:
        return math.exp(log_double_factorial(k))
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return float(out)


def _log_norm_unbounded(alpha: float, t: ExponentTriple) -> float:
    l, n, m = t.l, t.n, t.m
    log_xi = (
        log_double_factorial(2 * l - 1)
        + log_double_factorial(2 * n - 1)
        + log_double_factorial(2 * m - 2 * n - 1)
        + log_double_factorial(2 * m - 2 * l - 1)
    )
    return 2 * m * math.log(2.0) + (2 * m + 2) * math.log(alpha) - 2 * _LOG_PI - log_xi


def norm_constant_unbounded(alpha: float, t: ExponentTriple) -> float:
    """``2^(2m) alpha^(2m+2) / (pi^2 xi)``, with ``xi`` a product of four double factorials."""
    _check_alpha(alpha)
    return math.exp(_log_norm_unbounded(alpha, t))


def pdf_unbounded(p, alpha: float, t: ExponentTriple):
    """Power law times Gaussian weight, as a density on R^4."""
    _check_alpha(alpha)
    x1, y1, x2, y2 = _coords(p)
    k1, k2, k3, k4 = t.half_exponents
    power = (
        np.power(x1, 2 * k1) * np.power(y1, 2 * k2) * np.power(x2, 2 * k3) * np.power(y2, 2 * k4)
    )
    r2 = x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2
    out = norm_constant_unbounded(alpha, t) * power * np.exp(-alpha * r2)
    return _scalar_or_array(out)


def _log_norm_bounded(b: BoundedExponents) -> float:
    a = b.alphas
    return (
        math.log(16.0)
        + math.lgamma(1.0 + sum(a) / 2.0)
        - sum(math.lgamma(ai / 2.0) for ai in a)
    )


def norm_constant_bounded(b: BoundedExponents) -> float:
    """``16 Gamma(1 + sum(a)/2) / prod Gamma(a_i/2)`` (Liouville integral over the orthant ball)."""
    return math.exp(_log_norm_bounded(b))


def pdf_bounded(p, b: BoundedExponents):
    """Density on the positive-orthant unit 4-ball; ``y1``, ``y2`` play the roles of x3, x4."""
    x1, y1, x2, y2 = _coords(p)
    a1, a2, a3, a4 = b.alphas
    inside = (
        (x1 >= 0) & (y1 >= 0) & (x2 >= 0) & (y2 >= 0)
        & (x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 <= 1.0)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        power = (
            np.power(x1, a1 - 1.0)
            * np.power(x2, a2 - 1.0)
            * np.power(y1, a3 - 1.0)
            * np.power(y2, a4 - 1.0)
        )
        out = np.where(inside, norm_constant_bounded(b) * power, 0.0)
    return _scalar_or_array(out)


def _as_sigma(sigma):
    s = np.asarray(sigma, dtype=float)
    if np.any(np.isnan(s)):
        raise ValueError("sigma must not be NaN")
    return s


def spacing_prefactor_unbounded(alpha: float, t: ExponentTriple) -> float:
    """``C`` in ``p(sigma) = C sigma^(2q) exp(-alpha sigma^2 / 4)``."""
    _check_alpha(alpha)
    q = t.spacing_order
    return math.exp(math.log(2.0) - math.lgamma(q + 0.5) + (q + 0.5) * math.log(alpha / 4.0))


def spacing_pdf_unbounded(sigma, alpha: float, t: ExponentTriple):
    """Normalised spacing density of the Gaussian-weighted ensemble.

    ``(2 / Gamma(q + 1/2)) (alpha/4)^(q + 1/2) sigma^(2q) exp(-alpha sigma^2/4)``
    with ``q = 2m - l + 1``. Independent of ``n``.
    """
    s = _as_sigma(sigma)
    if np.any(s < 0):
        raise ValueError("sigma >= 0 required")
    q = t.spacing_order
    log_c = math.log(spacing_prefactor_unbounded(alpha, t))
    with np.errstate(divide="ignore"):
        logp = log_c + 2 * q * np.log(s) - alpha * s * s / 4.0
    return _scalar_or_array(np.exp(logp))


def published_spacing_pdf_unbounded(sigma, alpha: float, t: ExponentTriple):
    """Unbounded spacing density with the prefactor as originally printed.

    ``(1/2) alpha^(q+1/2) / (sqrt(pi) (q - 1/2)) (sigma^2/2)^q exp(-alpha sigma^2/4)``.
    Integrates to ``(2q - 3)!!``; agrees with :func:`spacing_pdf_unbounded`
    only for ``q`` in {1, 2}.
    """
    _check_alpha(alpha)
    s = _as_sigma(sigma)
    q = t.spacing_order
    pref = 0.5 * alpha ** (q + 0.5) / (math.sqrt(math.pi) * (q - 0.5))
    return _scalar_or_array(pref * (s * s / 2.0) ** q * np.exp(-alpha * s * s / 4.0))


def _log_angular_factor(b: BoundedExponents) -> float:
    # integral of prod u_i^(a_i - 1) over the positive octant of S^2, i = 2, 3, 4:
    # B(a3/2, a4/2)/2 * B(a2/2, (a3 + a4)/2)/2
    _, a2, a3, a4 = b.alphas
    lg = math.lgamma
    log_b1 = lg(a3 / 2) + lg(a4 / 2) - lg((a3 + a4) / 2)
    log_b2 = lg(a2 / 2) + lg((a3 + a4) / 2) - lg((a2 + a3 + a4) / 2)
    return log_b1 + log_b2 - 2 * math.log(2.0)


def spacing_pdf_bounded(sigma, b: BoundedExponents):
    """Spacing density of the unit-ball ensemble, supported on ``[0, 2]``.

    With ``xi = arcsin(sigma/2)`` the density is

        (A/2) (sigma/2)^(sum(a) - 1) cot(xi)^a1 / a1 * B(a3/2, a4/2)/2 * B(a2/2, (a3+a4)/2)/2

    which is evaluated here in the equivalent form
    ``(sigma/2)^(a2+a3+a4-1) (1 - sigma^2/4)^(a1/2)``.
    """
    s = _as_sigma(sigma)
    a1, a2, a3, a4 = b.alphas
    nu = a2 + a3 + a4 - 1.0
    log_c = _log_norm_bounded(b) - math.log(2.0) + _log_angular_factor(b) - math.log(a1)
    inside = (s > 0) & (s < 2)
    sc = np.where(inside, s, 1.0)
    logp = log_c + nu * np.log(sc / 2.0) + 0.5 * a1 * np.log1p(-sc * sc / 4.0)
    out = np.where(inside, np.exp(logp), 0.0)
    at_zero = s == 0
    if np.any(at_zero):
        if nu == 0:
            limit = math.exp(log_c)
        else:
            limit = 0.0 if nu > 0 else math.inf
        out = np.where(at_zero, limit, out)
    return _scalar_or_array(out)


def published_spacing_pdf_bounded(sigma, b: BoundedExponents):
    """Unit-ball spacing density in its originally printed form (not normalised).

    ``4 Gamma(lambda2 + 3) / Gamma(lambda2 - lambda3/2 + 3/2) (4 - sigma^2)/(lambda3 + 1)
    (sigma/2)^(2 lambda2 + 1)`` on ``(0, 2)``.
    """
    s = _as_sigma(sigma)
    l0, l2, l3 = b.lambda0, b.lambda2, b.lambda3
    log_pref = math.log(4.0) + math.lgamma(l2 + 3.0) - math.lgamma(l2 - l3 / 2.0 + 1.5)
    inside = (s > 0) & (s < 2)
    sc = np.where(inside, s, 1.0)
    val = math.exp(log_pref) * (4.0 - sc * sc) / (l3 + 1.0) * (sc / 2.0) ** (2 * l2 + 1)
    return _scalar_or_array(np.where(inside, val, 0.0))


def spacing_pdf(sigma, spec: EnsembleSpec):
    if isinstance(spec, Unbounded):
        return spacing_pdf_unbounded(sigma, spec.alpha, spec.exponents)
    return spacing_pdf_bounded(sigma, spec.exponents)


def repulsion_exponent(spec: EnsembleSpec) -> float:
    """Small-spacing exponent ``nu`` in ``p(sigma) ~ C sigma^nu``."""
    if isinstance(spec, Unbounded):
        return float(2 * spec.exponents.spacing_order)
    b = spec.exponents
    return 2.0 * b.lambda2 + 2.0 - b.lambda3


class SpacingDensity:
    """Callable spacing density bound to one ensemble."""

    def __init__(self, spec: EnsembleSpec):
        self.spec = spec

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, math.inf) if isinstance(self.spec, Unbounded) else (0.0, 2.0)

    @property
    def exponent(self) -> float:
        return repulsion_exponent(self.spec)

    def __call__(self, sigma):
        return spacing_pdf(sigma, self.spec)

    def __repr__(self) -> str:
        return f"SpacingDensity({self.spec!r})"


def _log_homogeneous_part(x: float, y: float, px: int, py: int) -> float:
    return px * math.log(abs(x)) + py * math.log(abs(y))


def invariance_residual(p: MatrixParams, t: ExponentTriple, alpha: float, epsilon: float) -> float:
    """Departure from invariance under the infinitesimal rotation ``Q = [[1, -eps], [eps, 1]]``.

    The rotation moves ``|z1|^2`` by ``+4 eps y1 y2`` and ``|z2|^2`` by the
    same amount downward. The single-variable densities are
    ``f1 = x1^(2l) y1^(2(m-l)) exp(-alpha |z1|^2)`` and
    ``f2 = x2^(2(m-n)) y2^(2n) exp(-alpha |z2|^2)``; their first-order response
    is ``+/- 8 eps y1 y2`` times the Euler operator ``x d/dx + y d/dy``, which
    for the power-law parts is a dilation of ``z1`` by ``1 + 8 eps y1 y2`` and
    of ``z2`` by ``1 - 8 eps y1 y2``. The Gaussian parts only see
    ``|z1|^2 + |z2|^2``, which the shift preserves. Returns
    ``|f1' f2' / (f1 f2) - 1|``; second order in ``eps``.
    """
    _check_alpha(alpha)
    if not abs(epsilon) <= 1e-2:
        raise ValueError(f"epsilon must satisfy |epsilon| <= 1e-2, got {epsilon}")
    shift = 4.0 * epsilon * p.y1 * p.y2
    if shift == 0.0:
        # the rotation leaves both arguments unchanged
        return 0.0
    k1, k2, k3, k4 = t.half_exponents
    pairs = ((p.x1, k1), (p.y1, k2), (p.x2, k3), (p.y2, k4))
    for value, k in pairs:
        if k > 0 and value == 0.0:
            raise ValueError("point lies on a zero of the power law; ratio undefined")
    dilation = 2.0 * shift
    s1 = p.x1 * p.x1 + p.y1 * p.y1
    s2 = p.x2 * p.x2 + p.y2 * p.y2

    def log_f1(x, y, s):
        return _log_homogeneous_part(x, y, 2 * k1, 2 * k2) - alpha * s

    def log_f2(x, y, s):
        return _log_homogeneous_part(x, y, 2 * k3, 2 * k4) - alpha * s

    g1, g2 = 1.0 + dilation, 1.0 - dilation
    # zero-exponent factors contribute log|.|*0; guard log(0) for those
    x1, y1 = (p.x1 or 1.0), (p.y1 or 1.0)
    x2, y2 = (p.x2 or 1.0), (p.y2 or 1.0)
    delta = (
        log_f1(g1 * x1, g1 * y1, s1 + shift)
        + log_f2(g2 * x2, g2 * y2, s2 - shift)
        - log_f1(x1, y1, s1)
        - log_f2(x2, y2, s2)
    )
    return abs(math.expm1(delta))
