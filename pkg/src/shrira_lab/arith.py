"""Dirichlet approximation, quadratic Weyl sums and a Poisson summation check.

Continued fractions are run on the exact binary rational behind the float
``alpha`` (``fractions.Fraction``), so every convergent and every validity
check is exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .cutoffs import psi0

__all__ = [
    "RationalApprox",
    "RealQuadratic",
    "PreconditionError",
    "dirichlet_approx",
    "dirichlet_exhaustive",
    "convergents",
    "weyl_sum",
    "weyl_bound",
    "weyl_bound_rhs",
    "PoissonResult",
    "poisson_check",
]


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class RationalApprox:
    """a/q with 1 <= q <= Q and |alpha - a/q| < 1/(q Q)."""

    a: int
    q: int
    alpha: float
    Q: float

    @property
    def error(self) -> float:
        return float(abs(Fraction(self.alpha) - Fraction(self.a, self.q)))

    def is_valid(self) -> bool:
        return _valid(Fraction(self.alpha), Fraction(self.Q), self.a, self.q)

    def as_row(self) -> dict:
        return {"alpha": self.alpha, "Q": self.Q, "a": self.a, "q": self.q, "error": self.error}


@dataclass(frozen=True)
class RealQuadratic:
    """f(z) = alpha z^2 + beta z."""

    alpha: float
    beta: float = 0.0

    def __call__(self, z):
        return self.alpha * z * z + self.beta * z


def _valid(alpha: Fraction, Q: Fraction, a: int, q: int) -> bool:
    if not (1 <= q <= Q):
        return False
    if a != 0 and math.gcd(abs(a), q) != 1:
        return False
    return abs(alpha - Fraction(a, q)) * q * Q < 1


def convergents(alpha: float | Fraction, max_q: float | None = None):
    """Yield continued-fraction convergents (p, q) of ``alpha`` in order.

    Stops after the expansion terminates or once the next denominator
    would exceed ``max_q``.
    """
    x = Fraction(alpha)
    p_prev, p = 1, math.floor(x)
    q_prev, q = 0, 1
    yield p, q
    rem = x - math.floor(x)
    while rem != 0:
        x = 1 / rem
        a = math.floor(x)
        rem = x - a
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if max_q is not None and q > max_q:
            return
        yield p, q


def dirichlet_exhaustive(alpha: float, Q: float) -> RationalApprox | None:
    """Smallest-q valid approximant by direct search over q <= Q."""
    fa, fQ = Fraction(alpha), Fraction(Q)
    for q in range(1, math.floor(Q) + 1):
        a0 = math.floor(fa * q)
        for a in (a0, a0 + 1):
            if _valid(fa, fQ, a, q):
                return RationalApprox(a, q, float(alpha), float(Q))
    return None


def dirichlet_approx(alpha: float, Q: float) -> RationalApprox:
    """a/q with 1 <= q <= Q, |alpha - a/q| < 1/(qQ), gcd(a, q) = 1 when a != 0.

    Returns the last continued-fraction convergent with denominator <= Q;
    exhaustive search is the fallback should that ever fail validation.
    """
    if not Q >= 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    best = None
    for p, q in convergents(alpha, max_q=Q):
        best = (p, q)
    a, q = best
    out = RationalApprox(int(a), int(q), float(alpha), float(Q))
    if out.is_valid():
        return out
    if Q <= 1e4:
        fallback = dirichlet_exhaustive(alpha, Q)
        if fallback is not None:
            return fallback
    raise ArithmeticError(f"no Dirichlet approximant found for alpha={alpha!r}, Q={Q!r}")


_SPLIT_BITS = 27


def _frac_times(x: float, k: np.ndarray) -> np.ndarray:
    """frac(x * k) for integer k >= 0 with absolute error near 1e-16.

    x is split as x_hi + x_lo with x_hi = A / 2^27; the product A * k is then
    reduced mod 2^27 in exact integer arithmetic and only the small x_lo * k
    goes through floating point.
    """
    x = x - math.floor(x)
    scale = 1 << _SPLIT_BITS
    A = math.floor(x * scale)
    lo = x - A / scale
    head = (A * (k % scale)) % scale
    return np.mod(head / scale + lo * k.astype(np.float64), 1.0)


def weyl_sum(f: RealQuadratic, N: int) -> complex:
    """S(f) = sum_{n=1}^{N} exp(2 pi i f(n)), summed with math.fsum."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if N == 0:
        return 0j
    n = np.arange(1, N + 1, dtype=np.int64)
    phase = np.mod(_frac_times(f.alpha, n * n) + _frac_times(f.beta, n), 1.0)
    theta = 2.0 * np.pi * phase
    return complex(math.fsum(np.cos(theta)), math.fsum(np.sin(theta)))


def weyl_bound(N: int, q: int, eps: float) -> float:
    """N^(1+eps) (1/N + 1/q + q/N^2)^(1/2): the k = 2 bound with unit constant."""
    return N ** (1.0 + eps) * math.sqrt(1.0 / N + 1.0 / q + q / (N * N))


def weyl_bound_rhs(f: RealQuadratic, N: int, eps: float, Q_for_dirichlet: float) -> float:
    """Weyl bound with q taken from ``dirichlet_approx(f.alpha, Q_for_dirichlet)``."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    ra = dirichlet_approx(f.alpha, Q_for_dirichlet)
    if abs(Fraction(f.alpha) - Fraction(ra.a, ra.q)) * ra.q * ra.q > 1:
        raise PreconditionError(
            f"|alpha - a/q| > 1/q^2 for a/q = {ra.a}/{ra.q}; enlarge Q_for_dirichlet"
        )
    return weyl_bound(N, ra.q, eps)


@dataclass(frozen=True)
class PoissonResult:
    lhs: float
    rhs: float
    tail_bound: float

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)


def _gaussian_sides(sigma: float, T: int) -> PoissonResult:
    # f(x) = exp(-x^2 / (2 sigma^2)),  fhat(xi) = int f(x) e^{-i x xi} dx
    #      = sigma sqrt(2 pi) exp(-sigma^2 xi^2 / 2),  evaluated at xi = 2 pi m.
    m = np.arange(-T, T + 1, dtype=np.float64)
    rhs = math.fsum(np.exp(-m * m / (2.0 * sigma * sigma)))
    lhs = math.fsum(sigma * math.sqrt(2 * math.pi) * np.exp(-2.0 * math.pi**2 * sigma**2 * m * m))
    # Sum over |m| > T of each side, bounded by the matching integral.
    tail_f = sigma * math.sqrt(2 * math.pi) * special.erfc(T / (sigma * math.sqrt(2.0)))
    c = math.sqrt(2.0) * math.pi * sigma
    tail_fhat = sigma * math.sqrt(2 * math.pi) * math.sqrt(math.pi) / c * special.erfc(c * T)
    return PoissonResult(lhs, rhs, float(tail_f + tail_fhat))


def _bump_sides(sigma: float, T: int) -> PoissonResult:
    # f(x) = psi0(x / sigma)^2, supported in [-2 sigma, 2 sigma]; fhat by quadrature.
    def f(x):
        return psi0(np.asarray(x) / sigma) ** 2

    L = 2.0 * sigma
    m_sup = min(math.floor(L), T)
    rhs = math.fsum(f(np.arange(-m_sup, m_sup + 1, dtype=float)))
    # f <= 1 and vanishes for |m| >= L, so the omitted f-terms number at most this.
    tail_f = 2.0 * max(0, math.ceil(L) - 1 - T)
    vals = []
    for m in range(-T, T + 1):
        # f is even, so fhat(2 pi m) = 2 int_0^L f(x) cos(2 pi m x) dx.
        if m == 0:
            v, _ = integrate.quad(lambda x: float(f(x)), 0.0, L, limit=400)
        else:
            v, _ = integrate.quad(lambda x: float(f(x)), 0.0, L, weight="cos", wvar=2 * math.pi * m, limit=400)
        vals.append(2.0 * v)
    lhs = math.fsum(vals)
    # Tail: |fhat(xi)| <= ||f''''||_1 / xi^4 summed over |m| > T (estimated numerically).
    d4 = _bump_fourth_derivative_l1(sigma)
    tail = 2.0 * d4 / (2 * math.pi) ** 4 * sum(1.0 / k**4 for k in range(T + 1, T + 10_000))
    return PoissonResult(lhs, rhs, tail + tail_f)


def _bump_fourth_derivative_l1(sigma: float) -> float:
    x = np.linspace(-2 * sigma, 2 * sigma, 40001)
    y = psi0(x / sigma) ** 2
    h = x[1] - x[0]
    d4 = (y[4:] - 4 * y[3:-1] + 6 * y[2:-2] - 4 * y[1:-3] + y[:-4]) / h**4
    return float(np.sum(np.abs(d4)) * h)


def poisson_check(family: str, truncation: int, sigma: float = 1.0) -> PoissonResult:
    """Both truncated sides of sum_m fhat(2 pi m) = sum_m f(m), |m| <= truncation.

    ``fhat(xi) = int f(x) exp(-i x xi) dx``, so fhat(2 pi m) is the m-th
    Fourier coefficient of the 1-periodization of f.  Families:
    ``"gaussian"`` (exp(-x^2 / 2 sigma^2)) and ``"bump"`` (psi0(x / sigma)^2).
    """
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if family == "gaussian":
        return _gaussian_sides(sigma, int(truncation))
    if family == "bump":
        return _bump_sides(sigma, int(truncation))
    raise ValueError(f"unknown family {family!r}; expected 'gaussian' or 'bump'")
