"""Domain types and exact 2x2 linear algebra for the SU(2)-like ensemble.

A member of the ensemble is fixed by four reals ``(x1, y1, x2, y2)`` with
``z1 = x1 + i y1`` and ``z2 = x2 + i y2``; the matrix is

    H = [[ z1,        z2      ],
         [ -conj(z2), conj(z1) ]]

All types here are frozen dataclasses and validate eagerly, so code further
down the stack can assume finite, admissible parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class InvalidParameterError(ValueError):
    """An ensemble or matrix parameter violates its admissibility constraint."""


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class MatrixParams:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _require_finite(x1=self.x1, y1=self.y1, x2=self.x2, y2=self.y2)

    @property
    def z1(self) -> complex:
        return complex(self.x1, self.y1)

    @property
    def z2(self) -> complex:
        return complex(self.x2, self.y2)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    @classmethod
    def from_sequence(cls, values) -> MatrixParams:
        x1, y1, x2, y2 = values
        return cls(x1, y1, x2, y2)


@dataclass(frozen=True)
class SuTwoLikeMatrix:
    """Row-major entries ``(a, b, c, d)`` of ``[[a, b], [c, d]]``.

    Construction checks ``c == -conj(b)`` and ``d == conj(a)``.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        if self.c != -self.b.conjugate() or self.d != self.a.conjugate():
            raise InvalidParameterError(
                "entries do not have the [[z1, z2], [-conj(z2), conj(z1)]] structure"
            )

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def determinant(self) -> float:
        # |z1|^2 + |z2|^2; real by construction
        return (self.a * self.d - self.b * self.c).real


@dataclass(frozen=True)
class EigenPair:
    e_plus: complex
    e_minus: complex
    spacing: float


@dataclass(frozen=True)
class ExponentTriple:
    """Integer exponents ``(l, n, m)`` of the Gaussian-weighted ensemble."""

    l: int  # noqa: E741
    n: int
    m: int

    def __post_init__(self) -> None:
        for name in ("l", "n", "m"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} >= 0 violated ({name}={value})")
        if self.m < max(self.l, self.n):
            raise InvalidParameterError(
                f"m >= max(l,n) violated (l={self.l}, n={self.n}, m={self.m})"
            )

    @property
    def half_exponents(self) -> tuple[int, int, int, int]:
        """Half of the power on x1, y1, x2, y2 in the matrix-element density."""
        return (self.l, self.m - self.l, self.m - self.n, self.n)

    @property
    def spacing_order(self) -> int:
        """q = 2m - l + 1; the spacing density goes like sigma**(2q)."""
        return 2 * self.m - self.l + 1


@dataclass(frozen=True)
class BoundedExponents:
    """Real separation constants of the unit-ball ensemble.

    The density is proportional to
    ``x1**(a1-1) * x2**(a2-1) * y1**(a3-1) * y2**(a4-1)`` with
    ``a1 = lambda3 + 1``, ``a2 = lambda2 - lambda0 + 1``,
    ``a3 = lambda2 - lambda3 + 1``, ``a4 = lambda0 + 1``.
    """

    lambda0: float
    lambda2: float
    lambda3: float

    def __post_init__(self) -> None:
        for name in ("lambda0", "lambda2", "lambda3"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _require_finite(lambda0=self.lambda0, lambda2=self.lambda2, lambda3=self.lambda3)
        checks = (
            (self.lambda0 > -1, "lambda0 > -1"),
            (self.lambda3 > -1, "lambda3 > -1"),
            (self.lambda2 - self.lambda0 > -1, "lambda2 - lambda0 > -1"),
            (self.lambda2 - self.lambda3 > -1, "lambda2 - lambda3 > -1"),
        )
        for ok, text in checks:
            if not ok:
                raise InvalidParameterError(
                    f"{text} violated (lambda0={self.lambda0}, lambda2={self.lambda2}, "
                    f"lambda3={self.lambda3})"
                )

    @property
    def alphas(self) -> tuple[float, float, float, float]:
        return (
            self.lambda3 + 1.0,
            self.lambda2 - self.lambda0 + 1.0,
            self.lambda2 - self.lambda3 + 1.0,
            self.lambda0 + 1.0,
        )


@dataclass(frozen=True)
class Unbounded:
    alpha: float
    exponents: ExponentTriple

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", float(self.alpha))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidParameterError(f"alpha > 0 violated (alpha={self.alpha})")
        if not isinstance(self.exponents, ExponentTriple):
            object.__setattr__(self, "exponents", ExponentTriple(*self.exponents))


@dataclass(frozen=True)
class Bounded:
    exponents: BoundedExponents

    def __post_init__(self) -> None:
        if not isinstance(self.exponents, BoundedExponents):
            object.__setattr__(self, "exponents", BoundedExponents(*self.exponents))


EnsembleSpec = Union[Unbounded, Bounded]


def describe_spec(spec: EnsembleSpec) -> dict:
    if isinstance(spec, Unbounded):
        t = spec.exponents
        return {"ensemble": "unbounded", "alpha": spec.alpha, "l": t.l, "n": t.n, "m": t.m}
    b = spec.exponents
    return {"ensemble": "bounded", "lambda0": b.lambda0, "lambda2": b.lambda2, "lambda3": b.lambda3}


def build_matrix(p: MatrixParams) -> SuTwoLikeMatrix:
    z1, z2 = p.z1, p.z2
    return SuTwoLikeMatrix(z1, z2, -z2.conjugate(), z1.conjugate())


def eigenvalues(p: MatrixParams) -> EigenPair:
    """Closed-form eigenvalues ``x1 +/- i sqrt(y1^2 + y2^2 + x2^2)``."""
    half = math.sqrt(p.y1 * p.y1 + p.y2 * p.y2 + p.x2 * p.x2)
    return EigenPair(complex(p.x1, half), complex(p.x1, -half), 2.0 * half)


def spacings(params: np.ndarray) -> np.ndarray:
    """Vectorised spacing for an ``(n, 4)`` array of ``(x1, y1, x2, y2)`` rows."""
    params = np.asarray(params, dtype=float)
    y1, x2, y2 = params[..., 1], params[..., 2], params[..., 3]
    return 2.0 * np.sqrt(y1 * y1 + y2 * y2 + x2 * x2)


def normality_residual(M: SuTwoLikeMatrix) -> float:
    """Max-abs entry of ``H^dagger H - det(H) I``."""
    h = M.to_array()
    r = h.conj().T @ h - M.determinant * np.eye(2)
    return float(np.max(np.abs(r)))
