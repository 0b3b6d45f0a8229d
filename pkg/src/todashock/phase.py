"""Phase constants of the two-band asymptotics in each sector.

On I = [q1, q] the phase of sector j is

    Delta_j = (1/D) int_I log(|Q|^-2 Pi_j^-2 |chi|)(s) ds / |R4(s)| + ell pi,
    D = int_{-1}^{q1} ds / |R4(s)|,

where |Q|^-2 = |Q^4|^(-1/2) cancels the endpoint behaviour of |chi|.  The sign is
fixed by requiring that the Szegő-type function F built from the same data is
bounded at z = 0 (see :func:`szego_S0`).
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
import json
import math

import numpy as np

from .quadrature import chebyshev_nodes, chebyshev_points, sin2_quad
from .surface import SurfaceContext

NEG_SIDE = {"below": -1.0, "+": -1.0, "above": 1.0, "-": 1.0}


class PhaseError(RuntimeError):
    pass


@dataclass
class PhaseInputs:
    ctx: SurfaceContext
    chi_nodes: np.ndarray  # Chebyshev points of I
    chi_abs: np.ndarray
    gap_z: list  # decreasing: z_1 closest to q1
    below_z: list = field(default_factory=list)  # eigenvalues in (q, 0)
    resonant_q: bool = False
    resonant_q1: bool = False

    def __post_init__(self):
        self.chi_nodes = np.asarray(self.chi_nodes, dtype=float)
        self.chi_abs = np.asarray(self.chi_abs, dtype=float)
        if np.any(self.chi_abs <= 0):
            raise PhaseError("|chi| must be positive on the interior of I")
        n = len(self.chi_nodes)
        expected = chebyshev_points(self.ctx.q1, self.ctx.q, n)
        if not np.allclose(self.chi_nodes, expected, rtol=0, atol=1e-13):
            raise PhaseError("|chi| must be sampled at the Chebyshev points of I")
        self.gap_z = sorted((float(z) for z in self.gap_z), reverse=True)
        self.below_z = [float(z) for z in self.below_z]

    @property
    def ell(self) -> int:
        if self.resonant_q and self.resonant_q1:
            return 1
        if not self.resonant_q and not self.resonant_q1:
            return -1
        return 0

    @property
    def n_sectors(self) -> int:
        return len(self.gap_z) + 1

    def factors(self, j: int) -> list:
        """Eigenvalues in the Blaschke product of sector j (1-based, j = 1 next to xi_0)."""
        if not 1 <= j <= self.n_sectors:
            raise IndexError(f"sector {j} out of range 1..{self.n_sectors}")
        return self.gap_z[: j - 1] + self.below_z

    @classmethod
    def from_scattering(cls, ctx: SurfaceContext, sd) -> "PhaseInputs":
        below = [e["z"] for e in sd.eigen if e["kind"] == "below"]
        return cls(ctx, sd.chi_nodes, sd.chi_abs, sd.gap_z, below,
                   sd.resonant_q, sd.resonant_q1)


def blaschke(z, zs):
    """prod_k |z_k| (z - 1/z_k) / (z - z_k); 1 for an empty list."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for zk in zs:
        out = out * abs(zk) * (z - 1.0 / zk) / (z - zk)
    return out


def q4(z, q: float, q1: float, resonant_q: bool, resonant_q1: bool):
    """Q^4(z) for the four resonance cases."""
    z = np.asarray(z, dtype=complex)
    fq = (z - q) / (z * q - 1.0)
    fq1 = (z - q1) / (z * q1 - 1.0)
    return (1.0 / fq if resonant_q else fq) * (1.0 / fq1 if resonant_q1 else fq1)


def q_factor(z, q: float, q1: float, resonant_q: bool = False, resonant_q1: bool = False,
             side: str | None = None, n_track: int = 400) -> complex:
    """Fourth root of Q^4 continued from Q(1) = 1 along a path avoiding the real axis.

    Real negative z on a cut needs ``side``.
    """
    z = complex(z)
    if z == 1:
        return 1.0 + 0j
    if z.imag == 0.0 and z.real < 0.0:
        if side not in NEG_SIDE:
            raise ValueError("real negative z needs side='above'/'below'")
        sigma = NEG_SIDE[side]
    else:
        sigma = 1.0 if z.imag >= 0 else -1.0
    m = 0.5 * (1.0 + z) + 1j * sigma * 0.5 * abs(z - 1.0)
    u = np.linspace(0.0, 1.0, n_track + 1)
    path = np.concatenate([1.0 + (m - 1.0) * u, m + (z - m) * u[1:]])
    vals = q4(path, q, q1, resonant_q, resonant_q1)
    arg = np.unwrap(np.angle(vals))
    arg -= arg[0]  # Q^4(1) = 1
    return complex(abs(vals[-1]) ** 0.25 * np.exp(0.25j * arg[-1]))


def _r_I(s, ctx):
    """1 / sqrt((s - 1/q)(s - 1/q1)), smooth near I; |R4| = sqrt((s - q1)(q - s)) / r."""
    s = np.asarray(s)
    return 1.0 / np.sqrt((s - 1.0 / ctx.q) * (s - 1.0 / ctx.q1))


def J_denominator(ctx: SurfaceContext) -> float:
    """D = int_{-1}^{q1} ds / |R4(s)| = 1 / (4 c)."""
    return 0.25 / ctx.zeta_norm


def log_density(inputs: PhaseInputs, j: int) -> np.ndarray:
    """log(|Q^4|^(-1/2) Pi_j^-2 |chi|) at the Chebyshev points of I."""
    s = inputs.chi_nodes
    ctx = inputs.ctx
    Q4 = np.abs(q4(s, ctx.q, ctx.q1, inputs.resonant_q, inputs.resonant_q1))
    Pi = np.abs(blaschke(s, inputs.factors(j)))
    return np.log(inputs.chi_abs) - 0.5 * np.log(Q4) - 2.0 * np.log(Pi)


def delta_tilde(inputs: PhaseInputs, j: int) -> float:
    """The phase without the ell pi term."""
    ctx = inputs.ctx
    phi = log_density(inputs, j)
    n = len(phi)
    # Gauss-Chebyshev: nodes of I are exactly the sample points
    integral = np.pi / n * np.sum(phi * _r_I(inputs.chi_nodes, ctx))
    return float(integral / J_denominator(ctx))


def wrap(x: float) -> float:
    """Reduce to (-pi, pi]."""
    y = math.fmod(x + math.pi, 2 * math.pi)
    if y <= 0:
        y += 2 * math.pi
    return y - math.pi


def delta_j(j: int, inputs: PhaseInputs) -> float:
    """Delta_j reduced mod 2 pi to (-pi, pi]."""
    return wrap(delta_tilde(inputs, j) + inputs.ell * math.pi)


def delta_jump(z_j: float, ctx: SurfaceContext) -> float:
    """Closed-form phase jump 2 int_I log|(z_j s - 1)/(s - z_j)| ds/|R4| / int_J ds/|R4|.

    Evaluated with QUADPACK algebraic-weight rules, independently of the
    Chebyshev route used by :func:`delta_j`.
    """
    from scipy.integrate import quad

    q, q1 = ctx.q, ctx.q1
    g = lambda s: 2.0 * math.log(abs((z_j * s - 1.0) / (s - z_j))) / math.sqrt(
        (s - 1.0 / q) * (s - 1.0 / q1))
    num, _ = quad(g, q1, q, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-13)
    h = lambda s: 1.0 / math.sqrt((q - s) * (s - 1.0 / q1) * (s - 1.0 / q))
    den, _ = quad(h, -1.0, q1, weight="alg", wvar=(0.0, -0.5), epsabs=1e-14, epsrel=1e-13)
    return num / den


def jump_integrand_sign(z_j: float, ctx: SurfaceContext, n: int = 64) -> int:
    """Common sign of log|(z_j s - 1)/(s - z_j)| on I (0 if it changes sign)."""
    s = chebyshev_points(ctx.q1, ctx.q, n)
    v = np.log(np.abs((z_j * s - 1.0) / (s - z_j)))
    if np.all(v > 0):
        return 1
    if np.all(v < 0):
        return -1
    return 0


def sector_of(xi: float, xis) -> int:
    """Sector index j with xi in (xi_j, xi_{j-1}); xis = [xi_0, xi_1, ..., xi_left]."""
    for j in range(1, len(xis)):
        if xis[j] < xi < xis[j - 1]:
            return j
    raise ValueError(f"xi={xi} outside the region or on a boundary")


def delta_of_xi(xi: float, inputs: PhaseInputs, xis) -> float:
    return delta_j(sector_of(xi, xis), inputs)


def phase_report(inputs: PhaseInputs) -> dict:
    ctx = inputs.ctx
    rows = []
    for j in range(1, inputs.n_sectors + 1):
        row = {"sector": j, "delta": delta_j(j, inputs),
               "delta_tilde": delta_tilde(inputs, j), "ell": inputs.ell}
        if j < inputs.n_sectors:
            zj = inputs.gap_z[j - 1]
            via_sectors = delta_tilde(inputs, j) - delta_tilde(inputs, j + 1)
            closed = delta_jump(zj, ctx)
            row.update({"z_j": zj, "jump_sectors": via_sectors, "jump_closed_form": closed,
                        "jump_residual": abs(wrap(via_sectors - closed))})
        rows.append(row)
    return {"q": ctx.q, "q1": ctx.q1, "sectors": rows}


def phase_report_json(inputs: PhaseInputs) -> str:
    return json.dumps(phase_report(inputs), indent=1, sort_keys=True)


# -- Szegő-type function, validation only -------------------------------------------------


class SzegoFunction:
    """F = exp(P S) Q with S the symmetric Cauchy transform of the phase density.

    S(z) = C(z) - C(1), C(z) = (1/2 pi i) int f(s) ds / (s - z) over the contour
    q -> q1 -> -1 -> 1/q1 -> 1/q, where f = log(|Q|^-2 Pi^-2 |chi|)/P_+ on I,
    f = i Delta~/P on J and f(s) = f(1/s) on the reflected pieces.  The "+" side
    is the left of this orientation, i.e. below the axis.
    """

    def __init__(self, inputs: PhaseInputs, j: int, n_far: int = 256):
        self.inputs = inputs
        self.ctx = inputs.ctx
        self.j = j
        self.dt = delta_tilde(inputs, j)
        self.phi = log_density(inputs, j)
        self.nodes = inputs.chi_nodes
        self.n_far = n_far
        n = len(self.nodes)
        # Chebyshev coefficients of phi on I (nodes are the first-kind points)
        k = np.arange(n)
        theta = np.arccos(chebyshev_nodes(n))
        self._coef = 2.0 / n * np.cos(np.outer(k, theta)) @ self.phi
        self._coef[0] *= 0.5
        self._C1 = self.cauchy(1.0 + 0j)

    def phi_at(self, z):
        """Chebyshev interpolant of phi continued off I."""
        ctx = self.ctx
        x = (2.0 * np.asarray(z, dtype=complex) - (ctx.q1 + ctx.q)) / (ctx.q - ctx.q1)
        return np.polynomial.chebyshev.chebval(x, self._coef)

    def _psi(self, s):
        # on I: f(s) = i s phi(s) r(s) / sqrt((s - q1)(q - s)), with psi = s phi r
        return s * self.phi_at(s) * _r_I(np.asarray(s, dtype=complex), self.ctx)

    def cauchy(self, z: complex) -> complex:
        ctx = self.ctx
        q, q1 = ctx.q, ctx.q1
        z = complex(z)
        n = len(self.nodes)
        # I, oriented q -> q1: int f/(s - z) = -i int_{q1}^{q} w psi/(s - z)
        s = self.nodes
        psi_s = s * self.phi * _r_I(s, ctx)
        if abs(z.imag) < 1e-3 and q1 < z.real < q:
            # near I: subtract the continued density, integrate the weight exactly
            psi_z = complex(self._psi(z))
            K = -np.pi / (np.sqrt(z - q1 + 0j) * np.sqrt(z - q + 0j))
            part_I = -1j * (np.pi / n * np.sum((psi_s - psi_z) / (s - z)) + psi_z * K)
        else:
            part_I = -1j * np.pi / n * np.sum(psi_s / (s - z))
        # I*, oriented 1/q1 -> 1/q; with s = 1/u this is -i int_{q1}^{q} w phi r / (1 - z u)
        part_Is = -1j * np.pi / n * np.sum(self.phi * _r_I(s, ctx) / (1.0 - z * s))
        # J and J*, oriented q1 -> -1 -> 1/q1: f = i Delta~ |s| / |R4|
        lo, hi = 1.0 / q1, q1
        fJ = lambda x: 1j * self.dt * np.abs(x) / np.sqrt((q - x) * (x - 1.0 / q))
        if abs(z.imag) < 1e-3 and lo < z.real < hi:
            # near J: subtract the analytic continuation of the density
            g = lambda x: (fJ(x) - self._fJ_cont(z)) / (x - z)
            rest = self._fJ_cont(z) * self._J_weight_cauchy(z)
        else:
            g = lambda x: fJ(x) / (x - z)
            rest = 0.0
        part_J = -(sin2_quad(g, lo, hi, self.n_far) + rest)
        return (part_I + part_Is + part_J) / (2j * np.pi)

    def _fJ_cont(self, z):
        """Continuation of i Delta~ |s| / sqrt((s-q)(s-1/q)) from J∪J* (s<0 there)."""
        q = self.ctx.q
        return 1j * self.dt * (-z) / np.sqrt((q - z) * (z - 1.0 / q))

    def _J_weight_cauchy(self, z):
        """int_{1/q1}^{q1} dx / (sqrt((x - 1/q1)(q1 - x)) (x - z))."""
        lo, hi = 1.0 / self.ctx.q1, self.ctx.q1
        return -np.pi / (np.sqrt(z - lo + 0j) * np.sqrt(z - hi + 0j))

    def S(self, z) -> complex:
        return self.cauchy(z) - self._C1

    def P(self, z) -> complex:
        z = complex(z)
        return complex(self.ctx.spectrum.R4(np.array([z]))[0]) / z

    def __call__(self, z, side: str | None = None) -> complex:
        z = complex(z)
        inp = self.inputs
        Q = q_factor(z, self.ctx.q, self.ctx.q1, inp.resonant_q, inp.resonant_q1, side=side)
        return complex(np.exp(self.P(z) * self.S(z)) * Q)

    def boundary(self, s: float, side: str, delta: float = 1e-12) -> complex:
        """Boundary value at real s from below ('+') or above ('-')."""
        z = s + 1j * NEG_SIDE[side] * delta
        return self(z)


def szego_S0(inputs: PhaseInputs, j: int) -> complex:
    """S(0) = C(0) - C(1); vanishes exactly when the phase has the right sign."""
    return SzegoFunction(inputs, j).S(0j)


def szego_F(z, inputs: PhaseInputs, j: int, side: str | None = None) -> complex:
    return SzegoFunction(inputs, j)(z, side)


__all__ = [
    "PhaseError", "PhaseInputs", "SzegoFunction", "blaschke", "delta_j", "delta_jump",
    "delta_of_xi", "delta_tilde", "J_denominator", "jump_integrand_sign", "log_density",
    "phase_report", "phase_report_json", "q4", "q_factor", "sector_of", "szego_F",
    "szego_S0", "wrap",
]
