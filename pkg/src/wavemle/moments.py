"""Closed-form moments and information quantities of the mode system.

Mode k of the field is an undamped stochastic oscillator

    du_k = v_k dt,    dv_k = -lam k^2 u_k dt + sigma dw_k,    u_k(0) = v_k(0) = 0,

with angular frequency ell = sqrt(lam) * k and solution

    u_k(t) = (sigma / ell) int_0^t sin(ell (t - s)) dw_k(s),
    v_k(t) =  sigma        int_0^t cos(ell (t - s)) dw_k(s).

Every second moment here follows from the Ito isometry:

    E u_k(t)^2        = sigma^2 / ell^2 * (t/2 - sin(2 ell t) / (4 ell))
    E v_k(t)^2        = sigma^2 * (t/2 + sin(2 ell t) / (4 ell))
    E u_k(t) u_k(s)   = sigma^2/(2 ell^2) * [t cos(ell (t-s))
                         + (sin(ell (s-t)) - sin(ell (s+t))) / (2 ell)],  t <= s
    int_0^T E u_k^2   = sigma^2 / ell^2 * (T^2/4 - sin(ell T)^2 / (4 ell^2))

The expected information about the wave-speed parameter carried by the first
N modes over [0, T] is (1/sigma^2) * sum_k k^4 int_0^T E u_k^2 dt, which grows
like N^3 T^2 / (12 lam); the constant sqrt(T^2 / (12 lam)) normalizes the
estimation error in the central limit regime.

These closed forms feed the estimator normalizations and act as oracles for
the samplers.  The test suite checks each of them against adaptive quadrature
of its defining integral to 1e-10 relative.

Numerical policy: every expression of the form (smooth - smooth)/x^p switches
to its convergent power series for |x| < 0.5.  Direct evaluation loses about
eps/x^2 of relative precision to cancellation, which would already breach the
1e-12 oracle tolerance near x ~ 3e-3; inside the series radius the truncated
expansions converge to full double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_SERIES_RADIUS = 0.5
_SERIES_EPS = 1e-17


def _shape_uu(x: float) -> float:
    """(x/2 - sin(2x)/4) / x^3, the displacement-variance shape factor.

    Series: 1/3 - x^2/15 + 2 x^4/315 - ...;  tends to 1/3 as x -> 0.
    """
    if abs(x) < _SERIES_RADIUS:
        term = 1.0 / 3.0
        total = term
        n = 1
        x2 = x * x
        while True:
            term *= -4.0 * x2 / ((2 * n + 2) * (2 * n + 3))
            total += term
            n += 1
            if abs(term) < _SERIES_EPS * abs(total):
                return total
    return (x / 2.0 - math.sin(2.0 * x) / 4.0) / (x * x * x)


def _shape_det(x: float) -> float:
    """(x^2 - sin(x)^2) / x^4, shape of the step-covariance determinant.

    Series: 1/3 - 2 x^2/45 + x^4/315 - ...;  tends to 1/3 as x -> 0.
    """
    if abs(x) < _SERIES_RADIUS:
        term = 1.0 / 3.0
        total = term
        n = 2
        x2 = x * x
        while True:
            term *= -4.0 * x2 / ((2 * n + 1) * (2 * n + 2))
            total += term
            n += 1
            if abs(term) < _SERIES_EPS * abs(total):
                return total
    s = math.sin(x)
    return (x * x - s * s) / (x * x * x * x)


def _shape_cross(x: float) -> float:
    """(sin(x)/x - cos(x)) / x^2, mixed shape in the two-time covariance.

    Series: 1/3 - x^2/30 + x^4/840 - ...;  tends to 1/3 as x -> 0.
    """
    if abs(x) < _SERIES_RADIUS:
        term = 1.0 / 3.0
        total = term
        n = 1
        x2 = x * x
        while True:
            term *= -x2 / (2 * n * (2 * n + 3))
            total += term
            n += 1
            if abs(term) < _SERIES_EPS * abs(total):
                return total
    return (math.sin(x) / x - math.cos(x)) / (x * x)


def _require_finite_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class ModeContext:
    """One mode's physical parameters; ``ell`` is the angular frequency."""

    k: int
    lam: float
    sigma: float
    ell: float = field(init=False)

    def __post_init__(self) -> None:
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        _require_finite_positive("lam", self.lam)
        _require_finite_positive("sigma", self.sigma)
        object.__setattr__(self, "ell", math.sqrt(self.lam) * self.k)


def _check_time(name: str, t: float) -> None:
    if not math.isfinite(t) or t < 0.0:
        raise ValueError(f"{name} must be finite and >= 0, got {t!r}")


def mean_square_u(ctx: ModeContext, t: float) -> float:
    """E u_k(t)^2 = sigma^2/ell^2 * (t/2 - sin(2 ell t)/(4 ell))."""
    _check_time("t", t)
    if t == 0.0:
        return 0.0
    x = ctx.ell * t
    return ctx.sigma * ctx.sigma * t * t * t * _shape_uu(x)


def mean_square_v(ctx: ModeContext, t: float) -> float:
    """E v_k(t)^2 = sigma^2 * (t/2 + sin(2 ell t)/(4 ell)).

    Sum of two like-signed terms up to the bounded sinc factor, so the direct
    form is stable for every argument.
    """
    _check_time("t", t)
    if t == 0.0:
        return 0.0
    x = ctx.ell * t
    return ctx.sigma * ctx.sigma * t * (0.5 + math.sin(2.0 * x) / (4.0 * x))


def cov_u(ctx: ModeContext, t: float, s: float) -> float:
    """E u_k(t) u_k(s), symmetric in (t, s); equals mean_square_u on the diagonal.

    Evaluated as sigma^2 tmin/(2 ell^2) * [sin(ell tmax) sin(ell tmin)
    - (ell tmin)^2 shape_cross(ell tmin) cos(ell tmax)], an algebraically
    equivalent form of the product-moment formula that avoids the small-angle
    cancellation of the printed one.
    """
    _check_time("t", t)
    _check_time("s", s)
    tmin, tmax = (t, s) if t <= s else (s, t)
    if tmin == 0.0:
        return 0.0
    ell = ctx.ell
    x = ell * tmin
    bracket = math.sin(ell * tmax) * math.sin(x) - x * x * _shape_cross(x) * math.cos(ell * tmax)
    return ctx.sigma * ctx.sigma * tmin / (2.0 * ell * ell) * bracket


def integrated_mean_square_u(ctx: ModeContext, t_final: float) -> float:
    """int_0^T E u_k(t)^2 dt = sigma^2/ell^2 * (T^2/4 - sin(ell T)^2/(4 ell^2))."""
    _check_time("t_final", t_final)
    if t_final == 0.0:
        return 0.0
    y = ctx.ell * t_final
    sig2 = ctx.sigma * ctx.sigma
    return sig2 * t_final ** 4 * _shape_det(y) / 4.0


def fisher_exact(n_modes: int, t_final: float, lam: float, sigma: float) -> float:
    """Expected information of the first ``n_modes`` modes over [0, t_final].

    Equals (1/sigma^2) sum_k k^4 int_0^T E u_k^2 dt; the noise intensity
    cancels, leaving (T^2 / (4 lam)) sum_k k^2 (1 - sin(ell_k T)^2/(ell_k T)^2).
    Positive and nondecreasing in ``n_modes``.
    """
    if not (isinstance(n_modes, int) and n_modes >= 1):
        raise ValueError(f"n_modes must be an integer >= 1, got {n_modes!r}")
    _require_finite_positive("t_final", t_final)
    _require_finite_positive("lam", lam)
    _require_finite_positive("sigma", sigma)
    sqrt_lam = math.sqrt(lam)
    acc = 0.0
    for k in range(1, n_modes + 1):
        y = sqrt_lam * k * t_final
        acc += k * k * y * y * _shape_det(y)
    return acc * t_final * t_final / (4.0 * lam)


def fisher_asymptotic(n_modes: int, t_final: float, lam: float) -> float:
    """Large-N information growth: n_modes^3 t_final^2 / (12 lam)."""
    if not (isinstance(n_modes, int) and n_modes >= 1):
        raise ValueError(f"n_modes must be an integer >= 1, got {n_modes!r}")
    _require_finite_positive("t_final", t_final)
    _require_finite_positive("lam", lam)
    return n_modes ** 3 * t_final * t_final / (12.0 * lam)


def upsilon(t_final: float, lam: float) -> float:
    """Normalization constant sqrt(t_final^2 / (12 lam))."""
    _require_finite_positive("t_final", t_final)
    _require_finite_positive("lam", lam)
    return t_final / math.sqrt(12.0 * lam)
