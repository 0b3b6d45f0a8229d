"""Genus-one quantities for the two-band spectrum [b - 2a, b + 2a] U [-1, 1].

Most objects live in the z-plane of the right Joukovski map lambda = (z + 1/z) / 2.
The unit disk is the upper sheet, the left band becomes the cut I = [q1, q] and
its reflection [1/q, 1/q1], and the gap becomes J = (-1, q1).

Branch conventions used throughout:

* ``R4(s)`` is the square root of (s - q)(s - q1)(s - 1/q)(s - 1/q1) with
  R4(0) = 1, analytic off the two cuts; R4 < 0 on J, R4 > 0 on (q, 0), and on I
  the boundary values are +i|R4| from above and -i|R4| from below.
* dlambda / R^(1/2) = 2 ds / R4(s), with R^(1/2) = +sqrt(P) > 0 on the gap of the
  upper sheet and R^(1/2) ~ -lambda^2 at infinity.
* The "+" side of I and J (both oriented right to left) is the lower side.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .quadrature import (chebyshev_quad, converge, one_sided_quad, phi_of,
                         segment_quad, sin2_quad)


def joukowski_z(lam, a: float = 0.5, b: float = 0.0):
    """Inverse Joukovski map with |z| <= 1; on the band the value for Im lambda = +0."""
    w = (np.asarray(lam, dtype=complex) - b) / (2.0 * a)
    return w - np.sqrt(w - 1.0) * np.sqrt(w + 1.0)


def joukowski_lambda(z, a: float = 0.5, b: float = 0.0):
    z = np.asarray(z)
    return b + a * (z + 1.0 / z)


@dataclass(frozen=True)
class TwoBandSpectrum:
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("a must be positive")
        if not self.b + 2 * self.a < -1:
            raise ValueError("need b + 2a < -1 (left band strictly left of [-1, 1])")

    @property
    def band_left(self):
        return (self.b - 2 * self.a, self.b + 2 * self.a)

    @property
    def band_right(self):
        return (-1.0, 1.0)

    @property
    def gap(self):
        return (self.b + 2 * self.a, -1.0)

    @property
    def q(self) -> float:
        return float(joukowski_z(self.b - 2 * self.a).real)

    @property
    def q1(self) -> float:
        return float(joukowski_z(self.b + 2 * self.a).real)

    def P(self, lam):
        """(lambda^2 - 1)((lambda - b)^2 - 4 a^2)."""
        lam = np.asarray(lam)
        return (lam * lam - 1.0) * ((lam - self.b) ** 2 - 4 * self.a ** 2)

    def R4(self, s):
        s = np.asarray(s, dtype=complex)
        q, q1 = self.q, self.q1
        return ((s - q1) * np.sqrt((s - q) / (s - q1))
                * (s - 1 / q) * np.sqrt((s - 1 / q1) / (s - 1 / q)))

    def R4_squared_coeffs(self) -> np.ndarray:
        """Ascending coefficients of R4(s)^2 = (s^2 - 2(b-2a)s + 1)(s^2 - 2(b+2a)s + 1)."""
        lo, hi = self.band_left
        return P.polymul([1.0, -2.0 * lo, 1.0], [1.0, -2.0 * hi, 1.0])

    def R4_abs(self, s):
        s = np.asarray(s, dtype=float)
        q, q1 = self.q, self.q1
        return np.sqrt(np.abs((s - q) * (s - q1) * (s - 1 / q) * (s - 1 / q1)))

    def R4_boundary(self, s, side: str):
        """Boundary value of R4 on I from 'above' or 'below'."""
        sign = {"above": 1.0, "below": -1.0}[side]
        return sign * 1j * self.R4_abs(s)


def _side_sign(side):
    if side is None:
        return None
    return {"above": 1.0, "below": -1.0, "+": -1.0, "-": 1.0}[side]


def cycle_quadrature(g, segment: str, spectrum: TwoBandSpectrum, rtol: float = 1e-12):
    """Integral of g(lambda) dlambda / sqrt(|P(lambda)|) over a real segment.

    ``segment`` is one of 'band_left', 'band_right', 'gap' or 'tail'; 'tail' is the
    half line (-inf, b - 2a), mapped to (0, 1] by lambda = b - 2a + 1 - 1/u.
    The endpoint square-root factors are absorbed by the node placement.
    """
    a, b = spectrum.a, spectrum.b
    el, er = b - 2 * a, b + 2 * a
    if segment == "band_right":
        def rule(n):
            return chebyshev_quad(
                lambda x: g(x) / np.sqrt((x - b) ** 2 - 4 * a * a), -1.0, 1.0, n)
    elif segment == "band_left":
        def rule(n):
            return chebyshev_quad(lambda x: g(x) / np.sqrt(x * x - 1.0), el, er, n)
    elif segment == "gap":
        def rule(n):
            return sin2_quad(lambda x: g(x) / np.sqrt((1.0 - x) * (x - el)), er, -1.0, n)
    elif segment == "tail":
        def f(u, d):
            # d = 1 - u, so el - lam = d / u exactly
            lam = el + 1.0 - 1.0 / u
            rest = (lam * lam - 1.0) * (er - lam)
            return g(lam) / (u * u * np.sqrt(rest * d / u))

        def rule(n):
            return one_sided_quad(f, 0.0, 1.0, n, singular_at="hi", pass_offset=True)
    else:
        raise ValueError(f"unknown segment {segment!r}")
    return converge(rule, n0=32, rtol=rtol)


def gammas(spectrum: TwoBandSpectrum):
    """Ratios of gap integrals of lambda^2 and lambda to that of 1 against dlambda/R^(1/2)."""
    i0 = cycle_quadrature(lambda x: np.ones_like(x), "gap", spectrum)
    i1 = cycle_quadrature(lambda x: x, "gap", spectrum)
    i2 = cycle_quadrature(lambda x: x * x, "gap", spectrum)
    return i2 / i0, i1 / i0


@dataclass(frozen=True)
class SurfaceContext:
    spectrum: TwoBandSpectrum
    gamma1: float
    gamma2: float
    zeta_norm: float
    tau_im: float
    U_im: float
    Lam_im: float
    cap: float
    A_inf: float
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def tau(self) -> complex:
        return 1j * self.tau_im

    @property
    def U(self) -> complex:
        return 1j * self.U_im

    @property
    def Lam(self) -> complex:
        return 1j * self.Lam_im

    @property
    def q(self):
        return self.spectrum.q

    @property
    def q1(self):
        return self.spectrum.q1

    def numerator(self, s, xi):
        """N(s; xi) = prod_k (s - y_k)(s - 1/y_k) with y_k = z(mu_k(xi)).

        Written through Vieta's relations, so it is exactly linear in xi.
        """
        b = self.spectrum.b
        s = np.asarray(s)
        s1 = s * s + 1.0
        return s1 * s1 - 2.0 * (b - xi) * s * s1 + 4.0 * ((b - xi) * self.gamma2 - self.gamma1) * s * s

    def h(self, s, xi):
        """Density of g in the z-plane: dg = h ds, h ~ 1/(2 s^2) + xi / s at 0."""
        s = np.asarray(s, dtype=complex)
        return self.numerator(s, xi) / (2.0 * s * s * self.spectrum.R4(s))

    def h1(self, s):
        """xi-derivative of h; the normalized third-kind differential in z."""
        s = np.asarray(s, dtype=complex)
        return (s * s + 1.0 - 2.0 * self.gamma2 * s) / (s * self.spectrum.R4(s))

    def numerator_coeffs(self, xi) -> np.ndarray:
        b, g1, g2 = self.spectrum.b, self.gamma1, self.gamma2
        c = b - xi
        return np.array([1.0, -2.0 * c, 2.0 + 4.0 * (c * g2 - g1), -2.0 * c, 1.0])

    def _small(self, s):
        return np.abs(s) < 0.5 * abs(self.q)

    def r(self, s, xi):
        """h minus its principal part at 0; analytic off the cuts.

        Near s = 0 the difference is rationalized with the polynomial R4^2 so
        that the removable singularity is cancelled exactly in coefficient space.
        """
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self.h(s, xi) - 0.5 / (s * s) - xi / s
        m = self._small(s)
        if np.any(m):
            sm = s[m]
            N = self.numerator_coeffs(xi)
            lin = np.array([1.0, 2.0 * xi])
            top = P.polysub(P.polymul(N, N),
                            P.polymul(self.spectrum.R4_squared_coeffs(), P.polymul(lin, lin)))
            R = self.spectrum.R4(sm)
            den = 2.0 * R * (P.polyval(sm, N) + R * P.polyval(sm, lin))
            out[m] = P.polyval(sm, top[2:]) / den
        return out

    def rho1(self, s):
        """h1 - 1/s, analytic near 0 (rationalized there as in :meth:`r`)."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self.h1(s) - 1.0 / s
        m = self._small(s)
        if np.any(m):
            sm = s[m]
            M = np.array([1.0, -2.0 * self.gamma2, 1.0])
            top = P.polysub(P.polymul(M, M), self.spectrum.R4_squared_coeffs())
            R = self.spectrum.R4(sm)
            out[m] = P.polyval(sm, top[1:]) / (R * (P.polyval(sm, M) + R))
        return out

    def summary(self) -> dict:
        xa, x0 = sector_bounds(self)
        return {
            "a": self.spectrum.a, "b": self.spectrum.b,
            "q": self.q, "q1": self.q1,
            "Gamma1": self.gamma1, "Gamma2": self.gamma2,
            "zeta_norm": self.zeta_norm, "tau_im": self.tau_im,
            "U_im": self.U_im, "Lambda_im": self.Lam_im,
            "capacity": self.cap, "A_inf": self.A_inf,
            "xi_left": xa, "xi_right": x0,
        }


def surface_context(a: float, b: float) -> SurfaceContext:
    spec = TwoBandSpectrum(float(a), float(b))
    g1, g2 = gammas(spec)
    i0 = cycle_quadrature(lambda x: np.ones_like(x), "gap", spec)
    c = 1.0 / (2.0 * i0)
    q, q1 = spec.q, spec.q1

    def on_I(fun):
        # integral over I = [q1, q] of fun(s) / |R4(s)|
        return converge(lambda n: chebyshev_quad(
            lambda s: fun(s) / np.sqrt((s - 1 / q) * (s - 1 / q1)), q1, q, n), rtol=1e-13)

    tau_im = 4.0 * c * on_I(np.ones_like)
    # counterclockwise loop around I of f = N/(2 s^2 R4) equals i * int_I N/(s^2 |R4|)
    b_ = spec.b
    n0 = lambda s: (s * s + 1) ** 2 - 2 * b_ * s * (s * s + 1) + 4 * (b_ * g2 - g1) * s * s
    n1 = lambda s: 2 * s * (s * s + 1) - 4 * g2 * s * s
    U_im = on_I(lambda s: n0(s) / (s * s))
    # the loop around I alone misses the residue 1 of h1 at s = 0
    Lam_im = on_I(lambda s: n1(s) / (s * s)) + 2.0 * np.pi
    A_inf = c * cycle_quadrature(lambda x: np.ones_like(x), "tail", spec)
    ctx = SurfaceContext(spec, g1, g2, c, tau_im, U_im, Lam_im, 1.0, A_inf)
    cap, _ = capacity(ctx)
    return SurfaceContext(spec, g1, g2, c, tau_im, U_im, Lam_im, cap, A_inf)


def mu_pair(xi: float, ctx: SurfaceContext):
    b = ctx.spectrum.b
    disc = (b - xi) ** 2 + 4.0 * (ctx.gamma1 + (xi - b) * ctx.gamma2)
    if disc < 0:
        raise ValueError(f"negative discriminant at xi={xi}: outside the region")
    d = math.sqrt(disc)
    return 0.5 * (b - xi - d), 0.5 * (b - xi + d)


def sector_bounds(ctx: SurfaceContext):
    """(xi_left, xi_right): mu_2 hits -1 at the left end, mu_1 hits b + 2a at the right end."""
    b, a = ctx.spectrum.b, ctx.spectrum.a
    g1, g2 = ctx.gamma1, ctx.gamma2
    return b + (1.0 - g1) / (1.0 + g2), b + (g1 - (b + 2 * a) ** 2) / (b + 2 * a - g2)


def _gap_partial(ctx, fun, lo, hi, n=160):
    """int_lo^hi fun(lambda) dlambda / sqrt(P) for lo <= hi inside the gap."""
    spec = ctx.spectrum
    e1, e2 = spec.gap
    el = spec.band_left[0]
    return sin2_quad(lambda x: fun(x) / np.sqrt((1.0 - x) * (x - el)), e1, e2, n,
                     phi_lo=phi_of(lo, e1, e2), phi_hi=phi_of(hi, e1, e2))


def mu_zero(xi: float, ctx: SurfaceContext) -> float:
    """Root in (mu_1, mu_2) of int_{mu0}^{-1} (l - mu_1)(l - mu_2) dl / R^(1/2)."""
    xa, x0 = sector_bounds(ctx)
    if xi >= x0:
        return ctx.spectrum.gap[0]
    if xi <= xa:
        return -1.0
    m1, m2 = mu_pair(xi, ctx)
    f = lambda m: _gap_partial(ctx, lambda x: (x - m1) * (x - m2), m, -1.0)
    lo, hi = max(m1, ctx.spectrum.gap[0]), min(m2, -1.0)
    return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def _path_integral(fun, z0, z, sigma, n=160):
    """int_{z0}^{z} fun ds along z0 -> m -> z with m in the half plane of sign sigma."""
    m = 0.5 * (z0 + z) + 1j * sigma * 0.5 * abs(z - z0)
    return segment_quad(fun, z0, m, n) + segment_quad(fun, m, z, n, cluster_end=True)


def _on_negative_axis(z):
    return z.imag == 0.0 and z.real < 0.0


def g_eval(z, xi: float, ctx: SurfaceContext, side: str | None = None, n: int = 160):
    """g(z, xi) = 1/2 - 1/(2z) + xi Log z + int_1^z r(s) ds, principal Log.

    For real negative z (on the Log cut and possibly on I or I*) a ``side`` must be
    given: 'above'/'below', or '+'/'-' meaning below/above.
    """
    z = complex(z)
    if z == 0:
        raise ValueError("g has a pole at z = 0")
    if _on_negative_axis(z):
        sigma = _side_sign(side)
        if sigma is None:
            raise ValueError("path-crosses-cut: real negative z needs side='above'/'below'")
        log_z = math.log(-z.real) + 1j * math.pi * sigma
    else:
        sigma = 1.0 if z.imag >= 0 else -1.0
        log_z = np.log(z)
    if z == 1:
        return 0j
    integral = _path_integral(lambda s: ctx.r(s, xi), 1.0 + 0j, z, sigma, n)
    return 0.5 - 0.5 / z + xi * log_z + integral


def periods(ctx: SurfaceContext, xi: float = 0.0, n_check: int = 20):
    """(Lambda, U, jump_check); jump_check = max over J of |g_+ - g_- + U + xi Lambda|."""
    q1 = ctx.q1
    xs = -1.0 + (q1 + 1.0) * (np.arange(1, n_check + 1) / (n_check + 1))
    target = ctx.U + xi * ctx.Lam
    err = 0.0
    for x in xs:
        jump = g_eval(x, xi, ctx, side="+") - g_eval(x, xi, ctx, side="-")
        err = max(err, abs(jump + target))
    return ctx.Lam, ctx.U, err


def abel_map(lam: float, sheet: str, ctx: SurfaceContext) -> complex:
    """Abel map of a gap point based at b - 2a, modulo the lattice (1, tau).

    A(b + 2a) = -tau/2 and the gap of the upper sheet contributes +F(lambda);
    A(p*) = -A(p).
    """
    F = abel_integral_gap(lam, ctx)
    if sheet in ("U", "upper"):
        return -0.5 * ctx.tau + F
    if sheet in ("L", "lower"):
        return -0.5 * ctx.tau - F
    raise ValueError("sheet must be 'U' or 'L'")


def abel_integral_gap(lam: float, ctx: SurfaceContext, n: int = 160) -> float:
    """F(lambda) = c int_{b+2a}^{lambda} dlambda / sqrt(P) on the upper sheet; F(-1) = 1/2."""
    e1 = ctx.spectrum.gap[0]
    return ctx.zeta_norm * _gap_partial(ctx, np.ones_like, e1, lam, n)


def abel_map_z(z, ctx: SurfaceContext, side: str | None = None, n: int = 160) -> complex:
    """2c int_q^z ds / R4 for z in the unit disk (upper sheet), via infinity_+ (z = 0)."""
    z = complex(z)
    if z == 0:
        return complex(ctx.A_inf)
    q = ctx.q
    on_cut = z.imag == 0.0 and z.real < q
    sigma = _side_sign(side) if on_cut else (1.0 if z.imag >= 0 else -1.0)
    if sigma is None:
        raise ValueError("points left of q on the real axis need a side")
    f = lambda s: 2.0 * ctx.zeta_norm / ctx.spectrum.R4(s)
    return ctx.A_inf + _path_integral(f, 0j, z, sigma, n)


def inverse_abel_gap(s: float, ctx: SurfaceContext):
    """Point (lambda, sheet) of the a-cycle with F-parameter s (mod 1).

    s in [0, 1/2] runs over the gap of the upper sheet from b + 2a to -1, and
    s in [1/2, 1) returns along the lower sheet.
    """
    s = s % 1.0
    upper = s <= 0.5
    f = s if upper else 1.0 - s
    e1, e2 = ctx.spectrum.gap
    if f <= 0.0:
        return e1, "U" if upper else "L"
    if f >= 0.5:
        return e2, "U" if upper else "L"
    el = ctx.spectrum.band_left[0]
    g = lambda x: np.ones_like(x) / np.sqrt((1.0 - x) * (x - el))
    F = lambda phi: ctx.zeta_norm * sin2_quad(g, e1, e2, 96, phi_hi=phi)
    phi = brentq(lambda p: F(p) - f, 0.0, 0.5 * np.pi, xtol=1e-15, rtol=1e-15)
    return e1 + (e2 - e1) * math.sin(phi) ** 2, "U" if upper else "L"


def capacity(ctx: SurfaceContext):
    """Logarithmic capacity from the pole of G(z) = exp(-int_q^z h1 ds) at z = 0.

    z G(z) -> q exp(-int_q^0 (h1 - 1/s) ds) = -1/(2 cap); also returns the next
    coefficient b_t of z G(z) = z G(0) (1 + 2 b_t z + O(z^2)).
    """
    q = ctx.q
    J = converge(lambda n: one_sided_quad(lambda s: ctx.rho1(s).real, q, 0.0, n,
                                          singular_at="lo"), rtol=1e-11)
    cap = -math.exp(J) / (2.0 * q)
    # h1 - 1/s = 2 (b - Gamma2) + O(s) since R4(s) = 1 - 2 b s + O(s^2)
    b_t = ctx.gamma2 - ctx.spectrum.b
    return cap, b_t


def G_eval(z, ctx: SurfaceContext) -> complex:
    """G(z) = exp(-int_q^z h1 ds) for z in the disk off the real half line (-1, q]."""
    z = complex(z)
    q = ctx.q
    # split off the logarithm: int_q^z h1 = log(z/q) + int_q^z (h1 - 1/s)
    sigma = 1.0 if z.imag >= 0 else -1.0
    inner = one_sided_quad(lambda s: ctx.rho1(s), q, 0.0, 160, singular_at="lo")
    tail = _path_integral(ctx.rho1, 0j, z, sigma)
    return (q / z) * np.exp(-(inner + tail))


def capacity_from_K(ctx: SurfaceContext) -> float:
    """Capacity implied by dK/dxi = -log(2 cap)."""
    dK = K_const(1.0, ctx) - K_const(0.0, ctx)
    return 0.5 * math.exp(-dK)


def K_const(xi: float, ctx: SurfaceContext) -> float:
    """K(xi) = lim_{z->0} (Phi(z) - g(z)), Phi = (z - 1/z)/2 + xi log z.

    Phi - g = z/2 - 1/2 - int_1^z r, so K = -1/2 + int_0^1 r(s) ds with r real on (0, 1).
    """
    val = converge(lambda n: one_sided_quad(lambda s: ctx.r(s, xi).real, 0.0, 1.0, n,
                                            singular_at="lo"), rtol=1e-11)
    return -0.5 + val


def xi_partition(ctx: SurfaceContext, eigen_lambdas, eps: float = 0.0):
    """Sector boundaries xi_1 > ... > xi_N solving mu_0(xi_j) = lambda_j, and trimmed sectors.

    ``eigen_lambdas`` are gap eigenvalues; returns (xis, intervals) where xis runs from
    xi_0 (right end) down to the left end, and intervals[j-1] = [xi_j + eps, xi_{j-1} - eps].
    """
    xa, x0 = sector_bounds(ctx)
    lams = sorted(float(l) for l in eigen_lambdas)  # ascending lambda = descending z
    inner = []
    for lam in lams:
        if not ctx.spectrum.gap[0] < lam < -1.0:
            raise ValueError(f"{lam} is not a gap eigenvalue")
        inner.append(brentq(lambda x: mu_zero(x, ctx) - lam, xa, x0, xtol=1e-14))
    xis = [x0] + inner + [xa]
    intervals = []
    for j in range(1, len(xis)):
        lo, hi = xis[j] + eps, xis[j - 1] - eps
        if lo >= hi:
            raise ValueError(f"sector {j} is empty for eps={eps}")
        intervals.append((lo, hi))
    return xis, intervals
