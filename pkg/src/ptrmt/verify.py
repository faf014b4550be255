"""Independent numerical oracles for the closed forms in :mod:`ptrmt.analytic`.

Quadrature, Monte Carlo integration, Kolmogorov-Smirnov distances and
small-spacing exponent fits, plus :func:`verify_ensemble`, which bundles
them into one report per check.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from ptrmt import analytic
from ptrmt.core import (
    Bounded,
    EnsembleSpec,
    InvalidParameterError,
    Unbounded,
    describe_spec,
)
from ptrmt.sampling import RngStream, normals, sample_batch, uniforms

BALL_ORTHANT_VOLUME = math.pi**2 / 32.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its tolerance."""


class InsufficientDataError(ValueError):
    """Too few samples or histogram bins for an exponent fit."""


class DegenerateEstimateWarning(UserWarning):
    """Monte Carlo weights have zero variance; the standard error is meaningless."""


# ---------------------------------------------------------------- quadrature


def quadrature_integrate_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    limit: int = 500,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``; ``b`` may be ``inf``.

    Raises :class:`QuadratureError` instead of returning a value whose error
    estimate exceeds ``tol``.
    """
    value, err, _info, *message = integrate.quad(
        f, a, b, epsabs=tol, epsrel=tol, limit=limit, full_output=True
    )
    # quad appends a message only when it flags a problem
    if message or err > max(tol, tol * abs(value)):
        raise QuadratureError(
            f"no convergence on [{a}, {b}]: value={value!r}, error={err!r}"
        )
    return value, err


# ------------------------------------------------------------------ monte carlo


class MCEstimate(NamedTuple):
    estimate: float
    stderr: float


def mc_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    domain: str,
    n: int,
    rng: RngStream,
    scale=None,
) -> MCEstimate:
    """Importance-sampled integral of a vectorised ``f`` over ``R4`` or ``V``.

    ``domain="R4"``: independent normal proposal per coordinate with standard
    deviations ``scale`` (default ``1/sqrt(2)``).
    ``domain="V"``: uniform proposal on the positive-orthant unit 4-ball.
    ``domain="cube"``: uniform proposal on ``[0, 1]^4`` (hit-or-miss over V).
    """
    if n < 1000:
        raise ValueError("mc_integrate needs n >= 1000")
    if domain == "R4":
        s = np.broadcast_to(np.asarray(1 / math.sqrt(2) if scale is None else scale, float), (4,))
        x = normals(rng, n, 4) * s
        log_g = -0.5 * np.sum((x / s) ** 2, axis=1) - 2 * math.log(2 * math.pi) - np.sum(np.log(s))
        w = f(x) / np.exp(log_g)
    elif domain == "V":
        # direction: |normal| normalised; radius: U^(1/4)
        z = np.abs(normals(rng, n, 4))
        r = uniforms(rng, n, 1)[:, 0] ** 0.25
        x = z / np.linalg.norm(z, axis=1, keepdims=True) * r[:, None]
        w = f(x) * BALL_ORTHANT_VOLUME
    elif domain == "cube":
        x = uniforms(rng, n, 4)
        w = f(x)
    else:
        raise ValueError(f"unknown domain {domain!r}")
    w = np.asarray(w, dtype=float)
    sd = float(np.std(w, ddof=1))
    if np.ptp(w) == 0.0:
        warnings.warn("zero-variance Monte Carlo weights", DegenerateEstimateWarning, stacklevel=2)
    return MCEstimate(float(np.mean(w)), sd / math.sqrt(n))


def proposal_scale(spec: Unbounded, widen: float = 1.25) -> np.ndarray:
    """Proposal widths: ``widen`` times the RMS of each coordinate's marginal.

    Any ``widen >= 1`` keeps the weight variance finite; ``widen > 1`` also
    keeps the proposal distinct from the target when all exponents vanish.
    """
    k = np.array(spec.exponents.half_exponents, dtype=float)
    return widen * np.sqrt((k + 0.5) / spec.alpha)


# --------------------------------------------------------- goodness of fit


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup distance between the empirical CDF of sorted ``samples`` and ``cdf``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must be a non-empty 1-d array")
    if np.any(np.diff(x) < 0):
        raise ValueError("samples must be sorted ascending")
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_critical_value(n: int, level: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value ``c(level) / sqrt(n)``."""
    coeff = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63, 0.001: 1.95}
    return coeff[level] / math.sqrt(n)


class SpacingCDF:
    """Cumulative of a spacing density, tabulated once by adaptive quadrature.

    Panel integrals are accumulated on a grid that is uniform in the bulk and
    geometric toward the support edges; between nodes the CDF is a cubic
    Hermite interpolant whose slopes are the density itself. The first and
    last panels use the known power-law edge behaviour. Values are clipped
    to ``[0, total]``.
    """

    def __init__(
        self,
        density: Callable,
        spec: EnsembleSpec,
        nodes: int = 1024,
        edge_nodes: int = 512,
        tol: float = 1e-12,
    ):
        self.density = density
        self.spec = spec
        self.exponent = analytic.repulsion_exponent(spec)
        if isinstance(spec, Unbounded):
            q = spec.exponents.spacing_order
            # Gamma(q + 1/2) tail of alpha*sigma^2/4 is < 1e-17 beyond this point
            x = q + 0.5 + 45.0 + 12.0 * math.sqrt(q + 0.5)
            self.upper = 2.0 * math.sqrt(x / spec.alpha)
            self.edge_exponent = None
        else:
            self.upper = 2.0
            self.edge_exponent = spec.exponents.alphas[0] / 2.0 + 1.0
        hi = self.upper
        bulk = np.linspace(0.0, hi, nodes + 1)[1:-1]
        # edge densities behave like |sigma - edge|^p with possibly fractional p
        edge = np.geomspace(1e-10, 0.05, edge_nodes)
        grid = [hi * edge, bulk]
        if self.edge_exponent is not None:
            grid.append(hi - hi * edge)
        self.nodes = np.unique(np.concatenate(grid))
        f = lambda s: float(density(s))  # noqa: E731
        panels = [
            quadrature_integrate_1d(f, a, b, tol=tol)[0]
            for a, b in zip(self.nodes[:-1], self.nodes[1:])
        ]
        first = quadrature_integrate_1d(f, 0.0, self.nodes[0], tol=tol)[0]
        last = quadrature_integrate_1d(f, self.nodes[-1], hi, tol=tol)[0]
        self.values = first + np.concatenate([[0.0], np.cumsum(panels)])
        self.total = float(self.values[-1] + last)
        slopes = np.asarray(density(self.nodes), dtype=float)
        self._spline = CubicHermiteSpline(self.nodes, self.values, slopes)

    def __call__(self, sigma) -> np.ndarray:
        s = np.asarray(sigma, dtype=float)
        out = np.asarray(self._spline(np.clip(s, self.nodes[0], self.nodes[-1])), dtype=float)
        lo = s < self.nodes[0]
        if np.any(lo):
            ratio = np.clip(s[lo], 0.0, None) / self.nodes[0]
            out[lo] = self.values[0] * ratio ** (self.exponent + 1.0)
        hi = s > self.nodes[-1]
        if np.any(hi):
            if self.edge_exponent is None:
                out[hi] = self.total
            else:
                tail = self.total - self.values[-1]
                frac = np.clip((self.upper - s[hi]) / (self.upper - self.nodes[-1]), 0.0, 1.0)
                out[hi] = self.total - tail * frac**self.edge_exponent
        out = np.clip(out, 0.0, self.total)
        return out if out.ndim else float(out)


# ------------------------------------------------------------- exponent fits


@dataclass(frozen=True)
class ExponentFit:
    nu_hat: float
    std_error: float
    window: tuple[float, float]
    bins: int
    n: int
    nu_plain: float
    nu_cdf: float

    def __post_init__(self) -> None:
        if not self.window[0] < self.window[1]:
            raise ValueError("window must satisfy lo < hi")
        if not math.isfinite(self.nu_hat):
            raise ValueError("nu_hat must be finite")


def _wls(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A = X.T @ (X * w[:, None])
    beta = np.linalg.solve(A, X.T @ (w * y))
    resid = y - X @ beta
    dof = max(len(y) - X.shape[1], 1)
    s2 = float(np.sum(w * resid * resid)) / dof
    return beta, np.sqrt(np.diag(s2 * np.linalg.inv(A)))


def fit_exponent(
    spacings,
    window_quantile: float = 0.05,
    bins: int = 24,
    min_samples: int = 100_000,
) -> ExponentFit:
    """Estimate ``nu`` in ``p(sigma) ~ C sigma^nu`` from the smallest spacings.

    Counts in log-spaced bins below the ``window_quantile`` empirical
    quantile are regressed (weighted by count, empty bins dropped) on
    ``[1, log sigma, sigma^2]``. The ``sigma^2`` column absorbs the leading
    Gaussian/boundary correction ``exp(-c sigma^2)``; without it the slope is
    biased low by roughly ``c * sigma_hi^2``. ``nu_plain`` is the uncorrected
    slope and ``nu_cdf`` the same regression on the log empirical CDF minus 1.
    """
    s = np.sort(np.asarray(spacings, dtype=float))
    n = s.size
    if n < min_samples:
        raise InsufficientDataError(f"need at least {min_samples} spacings, got {n}")
    if not 0 < window_quantile <= 0.1:
        raise ValueError("window_quantile must lie in (0, 0.1]")
    positive = s[s > 0]
    hi = float(np.quantile(s, window_quantile))
    lo = float(max(np.quantile(s, window_quantile * 1e-3), positive[0] if positive.size else 0.0))
    if not 0 < lo < hi:
        raise InsufficientDataError("degenerate fit window")
    edges = np.geomspace(lo, hi, bins + 1)
    counts = np.diff(np.searchsorted(s, edges, side="right"))
    widths = np.diff(edges)
    centres = np.sqrt(edges[1:] * edges[:-1])
    keep = counts > 0
    if keep.sum() < 4:
        raise InsufficientDataError(f"only {int(keep.sum())} non-empty bins; need at least 4")
    c = counts[keep].astype(float)
    x = np.log(centres[keep])
    y = np.log(c / (n * widths[keep]))
    X = np.column_stack([np.ones_like(x), x, centres[keep] ** 2])
    beta, se = _wls(X, y, c)
    plain, _ = _wls(X[:, :2], y, c)

    cum = np.searchsorted(s, edges[1:], side="right").astype(float)
    ok = cum > 0
    xc = np.log(edges[1:][ok])
    Xc = np.column_stack([np.ones_like(xc), xc, edges[1:][ok] ** 2])
    cdf_beta, _ = _wls(Xc, np.log(cum[ok] / n), cum[ok])

    return ExponentFit(
        nu_hat=float(beta[1]),
        std_error=float(se[1]),
        window=(lo, hi),
        bins=bins,
        n=n,
        nu_plain=float(plain[1]),
        nu_cdf=float(cdf_beta[1] - 1.0),
    )


# ------------------------------------------------------------------ reports


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``kind="estimate"`` passes iff ``|estimate - reference| <= max(3 stderr, threshold)``;
    ``kind="statistic"`` passes iff ``statistic <= threshold``.
    """

    check: str
    kind: str
    estimate: float | None = None
    stderr: float | None = None
    reference: float | None = None
    statistic: float | None = None
    threshold: float | None = None
    n: int | None = None
    detail: str = ""
    verdict: str = field(init=False)

    def __post_init__(self) -> None:
        self.verdict = "pass" if self._passes() else "fail"

    def _passes(self) -> bool:
        if self.kind == "estimate":
            if None in (self.estimate, self.reference):
                return False
            band = max(3.0 * (self.stderr or 0.0), self.threshold or 0.0)
            return abs(self.estimate - self.reference) <= band
        if self.kind == "statistic":
            if None in (self.statistic, self.threshold):
                return False
            return self.statistic <= self.threshold
        return False

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = asdict(self)
        out = {k: d[k] for k in ("check", "estimate", "stderr", "reference", "statistic", "threshold", "verdict", "n")}
        for k, v in out.items():
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = None
        out["detail"] = self.detail
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def _failed(check: str, detail: str) -> VerificationReport:
    return VerificationReport(check=check, kind="failed", detail=detail)


@dataclass(frozen=True)
class VerifyConfig:
    """Thresholds for :func:`verify_ensemble`; every report carries the raw numbers."""

    mc_abs_tol: float = 1e-2
    rounding_floor: float = 1e-12
    spacing_norm_tol: float = 1e-8
    ks_level: float = 0.01
    exponent_tol_floor: float = 0.2
    exponent_tol_per_unit: float = 0.075
    published_rtol: float = 1e-12
    closed_form_rtol: float = 1e-8
    geometric_atol: float = 1e-10
    window_quantile: float = 0.05
    bins: int = 24
    min_fit_samples: int = 100_000

    def exponent_tolerance(self, nu: float) -> float:
        # 0.2 at nu = 2, 0.3 at nu = 4
        return max(self.exponent_tol_floor, self.exponent_tol_per_unit * nu)


def geometric_spacing_pdf(sigma):
    """Spacing density of the uniform law on the orthant ball: ``(2 sigma^2 / pi) sqrt(1 - sigma^2/4)``."""
    s = np.asarray(sigma, dtype=float)
    inside = (s >= 0) & (s <= 2)
    sc = np.where(inside, s, 0.0)
    return np.where(inside, 2.0 * sc * sc / math.pi * np.sqrt(np.clip(1.0 - sc * sc / 4.0, 0, None)), 0.0)


def bounded_spacing_by_quadrature(sigma: float, b) -> float:
    """Bounded spacing density with the polar-angle integral done numerically.

    Only the two beta-type angular factors stay closed form; the
    ``phi1``-integral of ``cos^(a1-1) sin^(-a1-1)`` from ``arcsin(sigma/2)``
    to ``pi/2`` is integrated by quadrature.
    """
    if not 0 < sigma < 2:
        return 0.0
    a1, a2, a3, a4 = b.alphas
    xi = math.asin(sigma / 2.0)
    phi_int, _ = quadrature_integrate_1d(
        lambda p: math.cos(p) ** (a1 - 1.0) * math.sin(p) ** (-a1 - 1.0), xi, math.pi / 2, tol=1e-13
    )
    theta_int, _ = quadrature_integrate_1d(
        lambda t: math.sin(t) ** (a3 - 1.0) * math.cos(t) ** (a4 - 1.0), 0.0, math.pi / 2, tol=1e-13
    )
    phi2_int, _ = quadrature_integrate_1d(
        lambda p: math.cos(p) ** (a2 - 1.0) * math.sin(p) ** (a3 + a4 - 1.0), 0.0, math.pi / 2, tol=1e-13
    )
    A = analytic.norm_constant_bounded(b)
    return 0.5 * A * (sigma / 2.0) ** (sum(b.alphas) - 1.0) * phi_int * theta_int * phi2_int


def _reference_density(spec: EnsembleSpec, published: bool) -> Callable:
    if isinstance(spec, Unbounded):
        fn = analytic.published_spacing_pdf_unbounded if published else analytic.spacing_pdf_unbounded
        return lambda s: fn(s, spec.alpha, spec.exponents)
    fn = analytic.published_spacing_pdf_bounded if published else analytic.spacing_pdf_bounded
    return lambda s: fn(s, spec.exponents)


def _check_normalization(spec: EnsembleSpec, n: int, seed: int, cfg: VerifyConfig) -> VerificationReport:
    rng = RngStream(seed, stream_id=1 << 40)
    detail = "Monte Carlo integral of the matrix-element density over its domain"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateEstimateWarning)
        if isinstance(spec, Unbounded):
            est = mc_integrate(
                lambda x: analytic.pdf_unbounded(x, spec.alpha, spec.exponents),
                "R4", n, rng, scale=proposal_scale(spec),
            )
        else:
            est = mc_integrate(lambda x: analytic.pdf_bounded(x, spec.exponents), "V", n, rng)
    if caught:
        detail += " (proposal equals target: zero-variance weights)"
    report = VerificationReport(
        check="density_normalization",
        kind="estimate",
        estimate=est.estimate,
        stderr=est.stderr,
        reference=1.0,
        threshold=cfg.rounding_floor,
        n=n,
        detail=detail,
    )
    # both the 3-sigma band and the absolute bound must hold
    if report.passed and abs(est.estimate - 1.0) >= cfg.mc_abs_tol:
        report.verdict = "fail"
    return report


def _check_spacing_normalization(spec, density, cfg: VerifyConfig) -> VerificationReport:
    hi = math.inf if isinstance(spec, Unbounded) else 2.0
    value, err = quadrature_integrate_1d(lambda s: float(density(s)), 0.0, hi, tol=1e-11)
    return VerificationReport(
        check="spacing_normalization",
        kind="estimate",
        estimate=value,
        stderr=0.0,
        reference=1.0,
        threshold=cfg.spacing_norm_tol,
        n=None,
        detail=f"adaptive quadrature, error bound {err:.3g}",
    )


def _check_ks(spec, density, spacing_values: np.ndarray, cfg: VerifyConfig) -> VerificationReport:
    cdf = SpacingCDF(density, spec)
    x = np.sort(spacing_values)
    d = ks_statistic(x, cdf)
    return VerificationReport(
        check="spacing_ks",
        kind="statistic",
        statistic=d,
        threshold=ks_critical_value(x.size, cfg.ks_level),
        n=int(x.size),
        detail=f"KS distance at the {cfg.ks_level:g} level",
    )


def _check_exponent(spec, spacing_values: np.ndarray, cfg: VerifyConfig) -> VerificationReport:
    nu = analytic.repulsion_exponent(spec)
    fit = fit_exponent(spacing_values, cfg.window_quantile, cfg.bins, cfg.min_fit_samples)
    return VerificationReport(
        check="repulsion_exponent",
        kind="estimate",
        estimate=fit.nu_hat,
        stderr=0.0,
        reference=nu,
        threshold=cfg.exponent_tolerance(nu),
        n=fit.n,
        detail=(
            f"window=({fit.window[0]:.4g}, {fit.window[1]:.4g}), std_error={fit.std_error:.3g}, "
            f"nu_plain={fit.nu_plain:.3f}, nu_cdf={fit.nu_cdf:.3f}"
        ),
    )


def _check_closed_form(spec, cfg: VerifyConfig, published: bool) -> VerificationReport:
    if isinstance(spec, Unbounded):
        t = spec.exponents
        q = t.spacing_order
        expected = analytic.double_factorial(2 * q - 3)
        if published:
            value, err = quadrature_integrate_1d(
                lambda s: float(analytic.published_spacing_pdf_unbounded(s, spec.alpha, t)),
                0.0, math.inf, tol=1e-11,
            )
            return VerificationReport(
                check="published_formula",
                kind="estimate",
                estimate=value,
                stderr=0.0,
                reference=1.0,
                threshold=cfg.spacing_norm_tol,
                detail=f"integral of the printed spacing density; expected (2q-3)!! = {expected:g} for q={q}",
            )
        ratio = float(
            analytic.published_spacing_pdf_unbounded(1.0, spec.alpha, t)
            / analytic.spacing_pdf_unbounded(1.0, spec.alpha, t)
        )
        return VerificationReport(
            check="published_formula",
            kind="estimate",
            estimate=ratio,
            stderr=0.0,
            reference=expected,
            threshold=cfg.published_rtol * expected,
            detail=f"printed/implemented prefactor ratio vs (2q-3)!! for q={q}",
        )

    b = spec.exponents
    if published:
        value, err = quadrature_integrate_1d(
            lambda s: float(analytic.published_spacing_pdf_bounded(s, b)), 0.0, 2.0, tol=1e-11
        )
        return VerificationReport(
            check="published_formula",
            kind="estimate",
            estimate=value,
            stderr=0.0,
            reference=1.0,
            threshold=cfg.spacing_norm_tol,
            detail="integral of the printed unit-ball spacing density",
        )
    grid = np.linspace(0.02, 1.98, 50)
    closed = analytic.spacing_pdf_bounded(grid, b)
    numeric = np.array([bounded_spacing_by_quadrature(s, b) for s in grid])
    rel = float(np.max(np.abs(closed - numeric) / np.maximum(np.abs(numeric), 1e-300)))
    detail = "closed form vs numerically integrated polar angle, max relative difference"
    geo = 0.0
    if b.alphas == (1.0, 1.0, 1.0, 1.0):
        geo = float(np.max(np.abs(closed - geometric_spacing_pdf(grid))))
        detail += f"; geometric oracle max abs difference {geo:.3g}"
    report = VerificationReport(
        check="published_formula",
        kind="statistic",
        statistic=rel,
        threshold=cfg.closed_form_rtol,
        n=grid.size,
        detail=detail,
    )
    if geo > cfg.geometric_atol:
        report.verdict = "fail"
    return report


def verify_ensemble(
    spec,
    n: int,
    seed: int,
    config: VerifyConfig | None = None,
    workers: int = 1,
    published_reference: bool = False,
) -> list[VerificationReport]:
    """Run the five standard checks on one ensemble.

    Failures of individual oracles become failed reports; an invalid spec
    yields a single failed ``validation`` report.
    """
    cfg = config or VerifyConfig()
    if not isinstance(spec, (Unbounded, Bounded)):
        return [_failed("validation", f"not an ensemble spec: {spec!r}")]
    density = _reference_density(spec, published_reference)
    reports: list[VerificationReport] = []

    def guarded(name, fn, *args):
        try:
            reports.append(fn(*args))
        except (QuadratureError, InsufficientDataError, InvalidParameterError, ValueError) as exc:
            reports.append(_failed(name, f"{type(exc).__name__}: {exc}"))

    guarded("density_normalization", _check_normalization, spec, max(n, 1000), seed, cfg)
    guarded("spacing_normalization", _check_spacing_normalization, spec, density, cfg)
    batch = sample_batch(spec, n, seed, workers=workers)
    sp = batch.spacings
    if sp.size:
        guarded("spacing_ks", _check_ks, spec, density, sp, cfg)
    else:
        reports.append(_failed("spacing_ks", "no samples"))
    guarded("repulsion_exponent", _check_exponent, spec, sp, cfg)
    guarded("published_formula", _check_closed_form, spec, cfg, published_reference)
    for r in reports:
        r.detail = (r.detail + "; " if r.detail else "") + json.dumps(describe_spec(spec))
    return reports
