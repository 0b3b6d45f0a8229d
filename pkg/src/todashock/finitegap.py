"""Two-band (genus one) theta-function solution of the Toda lattice.

Points of the a-cycle are labelled by the parameter s = int_{b+2a}^{p} zeta in
[0, 1): s in [0, 1/2] runs over the gap of the upper sheet from b + 2a to -1 and
s in [1/2, 1) comes back along the lower sheet.  With A(b+2a) = -tau/2 the Abel
map of such a point is -tau/2 + s (mod 1).

The Dirichlet divisor moves as s(n, t) = s0 - n Lam/(2 pi i) - t U/(2 pi i), and
the theta argument becomes Z(n, t) = A_inf - 1/2 - s(n, t), which is real.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .quadrature import gauss_legendre01
from .surface import SurfaceContext, abel_map, surface_context

THETA_TAIL = 1e-14


class ThetaVanishes(ArithmeticError):
    pass


def theta_order(tau_im: float, tail: float = THETA_TAIL) -> int:
    """Smallest M with exp(-pi Im(tau) M^2) < tail."""
    return max(1, math.ceil(math.sqrt(-math.log(tail) / (math.pi * tau_im)) + 1e-12))


def theta(v, tau: complex, M: int | None = None):
    """Jacobi theta function sum_m exp(pi i m^2 tau + 2 pi i m v), |m| <= M."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("Im tau must be positive")
    if M is None:
        M = theta_order(tau.imag)
    v = np.asarray(v, dtype=complex)
    m = np.arange(-M, M + 1)
    terms = np.exp(1j * np.pi * m * m * tau + 2j * np.pi * np.multiply.outer(v, m))
    return terms.sum(axis=-1)


def theta_real(x, tau_im: float, M: int | None = None):
    """theta(x) for real x and purely imaginary tau, as a real cosine series."""
    if M is None:
        M = theta_order(tau_im)
    x = np.asarray(x, dtype=float)
    m = np.arange(1, M + 1)
    w = np.exp(-np.pi * tau_im * m * m)
    return 1.0 + 2.0 * np.cos(2 * np.pi * np.multiply.outer(x, m)) @ w


class ACycle:
    """Vectorized conversion between the a-cycle parameter s and (lambda, sheet)."""

    def __init__(self, ctx: SurfaceContext, n: int = 96):
        self.ctx = ctx
        self.e1, self.e2 = ctx.spectrum.gap
        self.el = ctx.spectrum.band_left[0]
        self.c = ctx.zeta_norm
        self.u, self.w = gauss_legendre01(n)

    def _x(self, phi):
        return self.e1 + (self.e2 - self.e1) * np.sin(phi) ** 2

    def _g(self, x):
        return 1.0 / np.sqrt((1.0 - x) * (x - self.el))

    def F_phi(self, phi):
        """c int_{b+2a}^{x(phi)} dlambda / sqrt(P) with x = e1 + (e2 - e1) sin^2 phi."""
        phi = np.asarray(phi, dtype=float)
        nodes = np.multiply.outer(phi, self.u)
        return 2.0 * self.c * phi * (self._g(self._x(nodes)) @ self.w)

    def F(self, lam):
        r = (np.asarray(lam, dtype=float) - self.e1) / (self.e2 - self.e1)
        return self.F_phi(np.arcsin(np.sqrt(np.clip(r, 0.0, 1.0))))

    def lam_of(self, s):
        """lambda(s) and an upper-sheet mask for parameters s (taken mod 1)."""
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        upper = s <= 0.5
        f = np.where(upper, s, 1.0 - s)
        # Newton in phi; dF/dphi = 2 c g(x(phi)) is smooth and positive
        phi = f * np.pi
        for _ in range(60):
            step = (self.F_phi(phi) - f) / (2.0 * self.c * self._g(self._x(phi)))
            phi = np.clip(phi - step, 0.0, 0.5 * np.pi)
            if np.all(np.abs(step) < 1e-15):
                break
        return self._x(phi), upper

    def s_of(self, lam, sheet: str) -> float:
        F = float(self.F(lam))
        return F if sheet in ("U", "upper") else (1.0 - F) % 1.0


def jacobi_invert(delta: float, ctx: SurfaceContext, cycle: ACycle | None = None):
    """Divisor point p0 with int_{b+2a}^{p0} zeta = -delta/(2 pi) (mod 1).

    Returns (s0, lambda0, sheet).
    """
    cycle = cycle or ACycle(ctx)
    s0 = (-delta / (2.0 * math.pi)) % 1.0
    lam, upper = cycle.lam_of(s0)
    return s0, float(lam), "U" if bool(upper) else "L"


@dataclass(frozen=True)
class FiniteGapParams:
    ctx: SurfaceContext
    delta: float
    s0: float
    p0: tuple[float, str]
    M_theta: int

    @property
    def lam_frac(self) -> float:
        return self.ctx.Lam_im / (2.0 * math.pi)

    @property
    def U_frac(self) -> float:
        return self.ctx.U_im / (2.0 * math.pi)


def finite_gap_params(ctx: SurfaceContext, delta: float,
                      tail: float = THETA_TAIL) -> FiniteGapParams:
    s0, lam0, sheet = jacobi_invert(delta, ctx)
    return FiniteGapParams(ctx, float(delta), s0, (lam0, sheet), theta_order(ctx.tau_im, tail))


def divisor_parameter(n, t, params: FiniteGapParams):
    """s(n, t) = s0 - n Lam/(2 pi i) - t U/(2 pi i), not reduced mod 1."""
    n = np.asarray(n, dtype=float)
    t = np.asarray(t, dtype=float)
    return params.s0 - n * params.lam_frac - t * params.U_frac


def dirichlet_eigenvalue(n, t, params: FiniteGapParams, cycle: ACycle | None = None):
    """(lambda(n, t), upper-sheet mask) of the Dirichlet divisor."""
    cycle = cycle or ACycle(params.ctx)
    return cycle.lam_of(divisor_parameter(n, t, params))


def theta_argument(n, t, params: FiniteGapParams):
    """Z(n, t) = A(inf_+) - A(p0) + n Lam/(2 pi i) + t U/(2 pi i) - (tau + 1)/2, real."""
    return params.ctx.A_inf - 0.5 - divisor_parameter(n, t, params)


def theta_at_divisor(n: int, t: float, params: FiniteGapParams) -> complex:
    """theta(A(p(n,t)) - A(p0) + n Lam/(2 pi i) + t U/(2 pi i) - Xi) with the complex evaluator.

    The Abel map of the divisor point is recomputed by quadrature, so a vanishing
    value checks inversion and Abel map against each other.
    """
    ctx = params.ctx
    lam, upper = dirichlet_eigenvalue(n, t, params)
    A_p = abel_map(float(lam), "U" if bool(upper) else "L", ctx)
    A_p0 = -0.5 * ctx.tau + params.s0
    v = A_p - A_p0 + n * params.lam_frac + t * params.U_frac - (0.5 * ctx.tau + 0.5)
    return complex(theta(v, ctx.tau, params.M_theta))


def finite_gap_solution(n, t, params: FiniteGapParams, cycle: ACycle | None = None,
                        guard: float = 1e-13):
    """(a_hat, b_hat) at integer sites n and times t (broadcast together)."""
    ctx = params.ctx
    cycle = cycle or ACycle(ctx)
    n, t = np.broadcast_arrays(np.asarray(n, dtype=float), np.asarray(t, dtype=float))
    th = [theta_real(theta_argument(n + k, t, params), ctx.tau_im, params.M_theta)
          for k in (-1, 0, 1)]
    if np.any(np.abs(th[1]) < guard):
        raise ThetaVanishes("theta vanished at a real argument")
    ratio = th[0] * th[2] / (th[1] * th[1])
    if np.any(ratio <= 0):
        raise ThetaVanishes("theta ratio is not positive")
    a_hat = ctx.cap * np.sqrt(ratio)
    lam, _ = cycle.lam_of(divisor_parameter(n, t, params))
    b_hat = ctx.spectrum.b - lam
    return a_hat, b_hat


def solution_grid(ns, ts, params: FiniteGapParams):
    """Arrays (t, n, a_hat, b_hat) over the product grid ts x ns, t-major."""
    T, N = np.meshgrid(np.asarray(ts, float), np.asarray(ns, int), indexing="ij")
    a_hat, b_hat = finite_gap_solution(N, T, params)
    return T.ravel(), N.ravel(), a_hat.ravel(), b_hat.ravel()


def toda_residual(params: FiniteGapParams, ns, ts, h: float = 1e-4) -> float:
    """Max central-difference residual of a' = a (b(n+1) - b(n)), b' = 2 (a(n)^2 - a(n-1)^2)."""
    N, T = np.meshgrid(np.asarray(ns, float), np.asarray(ts, float), indexing="ij")
    cycle = ACycle(params.ctx)
    sol = lambda dn, dt: finite_gap_solution(N + dn, T + dt, params, cycle)
    ap, bp = sol(0, h)
    am, bm = sol(0, -h)
    a0, b0 = sol(0, 0)
    a_prev, _ = sol(-1, 0)
    _, b_next = sol(1, 0)
    ra = (ap - am) / (2 * h) - a0 * (b_next - b0)
    rb = (bp - bm) / (2 * h) - 2.0 * (a0 ** 2 - a_prev ** 2)
    return float(max(np.max(np.abs(ra)), np.max(np.abs(rb))))


def periodic_jacobi_spectrum(params: FiniteGapParams, t: float, period_cells: int):
    """Eigenvalues of the periodic Jacobi matrix built from (a_hat, b_hat) at time t.

    Only meaningful when the solution is periodic in n with a period dividing
    ``period_cells`` (e.g. the equal-band case, period 2).
    """
    n = np.arange(period_cells)
    a, b = finite_gap_solution(n, np.full(n.shape, t), params)
    L = np.diag(b)
    idx = np.arange(period_cells)
    L[idx, (idx + 1) % period_cells] += a
    L[(idx + 1) % period_cells, idx] += a
    return np.linalg.eigvalsh(L)


__all__ = [
    "ACycle", "FiniteGapParams", "ThetaVanishes", "dirichlet_eigenvalue",
    "divisor_parameter", "finite_gap_params", "finite_gap_solution", "jacobi_invert",
    "periodic_jacobi_spectrum", "solution_grid", "surface_context", "theta",
    "theta_argument", "theta_at_divisor", "theta_order", "theta_real", "toda_residual",
]
