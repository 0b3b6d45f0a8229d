"""Direct scattering for steplike Jacobi operators.

Jost solutions are stored in scaled form psi(n) = m(n) exp(L(n)) with a real log
scale L, so that free exponents like z^n with n of several hundred neither
underflow nor overflow.  Right solutions are computed by backward recursion from
the right background, left ones by forward recursion from the left background.

Band boundary values are evaluated exactly rather than by offsets: for real z in I
the left Joukovski variable is taken as zeta = exp(-i theta), which is the limit
from z - i0.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np
from scipy.optimize import brentq

from .lattice import SteplikeLattice, gap_eigenvalues_matrix, jacobi_matrix_eigenvalues
from .quadrature import chebyshev_points
from .surface import joukowski_z


class ScatteringError(RuntimeError):
    pass


@dataclass
class JostSolution:
    """psi(n) = mant * exp(logscale) on sites n_first .. n_first + len - 1 (per z row)."""
    n_first: int
    mant: np.ndarray  # (nz, nsites) complex
    logscale: np.ndarray  # (nz, nsites) real

    def index(self, n):
        return np.asarray(n) - self.n_first

    def values(self, n=None):
        if n is None:
            return self.mant * np.exp(self.logscale)
        i = self.index(n)
        return self.mant[:, i] * np.exp(self.logscale[:, i])

    def log_abs(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mant)) + self.logscale


def _lambda_of(z, lat: SteplikeLattice):
    ap, bp = lat.bg_right
    return bp + ap * (z + 1.0 / z)


def left_zeta(z, lat: SteplikeLattice):
    """Left Joukovski variable with |zeta| <= 1, boundary value from z - i0 on I."""
    lam = _lambda_of(np.asarray(z, dtype=complex), lat)
    am, bm = lat.bg_left
    return joukowski_z(lam, am, bm)


def _seed(base, n0):
    """(mantissa, log scale) of base**n0 with base != 0."""
    return np.exp(1j * n0 * np.angle(base)), n0 * np.log(np.abs(base))


def jost_right(z, lat: SteplikeLattice) -> JostSolution:
    """psi with psi(n) z^(-n) -> 1 as n -> +infinity, on sites n_min-1 .. n_max+1."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z == 0):
        raise ScatteringError("z = 0 is not admissible")
    lam = _lambda_of(z, lat)
    n_lo, n_hi = lat.n_min - 1, lat.n_max + 1
    size = n_hi - n_lo + 1
    mant = np.empty((len(z), size), dtype=complex)
    logs = np.empty((len(z), size))
    m_cur, L = _seed(z, n_hi)  # psi(n_hi) = z^n_hi
    m_next = m_cur * z  # psi(n_hi + 1), same scale
    mant[:, -1], logs[:, -1] = m_cur, L
    ns = np.arange(n_lo, n_hi + 1)
    a_all = lat.a_at(np.arange(n_lo - 1, n_hi + 1))  # a(n) for n = n_lo-1 .. n_hi
    b_all = lat.b_at(ns)
    for k in range(size - 1, 0, -1):
        n = ns[k]
        a_n, a_nm1 = a_all[n - n_lo + 1], a_all[n - n_lo]
        m_prev = ((lam - b_all[k]) * m_cur - a_n * m_next) / a_nm1
        scale = np.maximum(np.abs(m_prev), np.abs(m_cur))
        scale = np.where(scale > 0, scale, 1.0)
        m_prev, m_cur = m_prev / scale, m_cur / scale
        L = L + np.log(scale)
        mant[:, k - 1], logs[:, k - 1] = m_prev, L
        m_next = m_cur
        m_cur = m_prev
    return JostSolution(n_lo, mant, logs)


def jost_left(z, lat: SteplikeLattice, zeta=None) -> JostSolution:
    """psi_left with zeta^n psi_left(n) -> 1 as n -> -infinity, sites n_min-1 .. n_max+1."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lam = _lambda_of(z, lat)
    zeta = left_zeta(z, lat) if zeta is None else np.atleast_1d(np.asarray(zeta, complex))
    n_lo, n_hi = lat.n_min - 1, lat.n_max + 1
    size = n_hi - n_lo + 1
    mant = np.empty((len(z), size), dtype=complex)
    logs = np.empty((len(z), size))
    inv = 1.0 / zeta
    m_prev, L = _seed(inv, n_lo - 1)  # psi(n_lo - 1) = zeta^-(n_lo-1)
    m_cur = m_prev * inv  # psi(n_lo) with the same scale
    mant[:, 0], logs[:, 0] = m_cur, L
    ns = np.arange(n_lo, n_hi + 1)
    a_all = lat.a_at(np.arange(n_lo - 1, n_hi + 1))
    b_all = lat.b_at(ns)
    for k in range(0, size - 1):
        n = ns[k]
        a_n, a_nm1 = a_all[n - n_lo + 1], a_all[n - n_lo]
        m_next = ((lam - b_all[k]) * m_cur - a_nm1 * m_prev) / a_n
        scale = np.maximum(np.abs(m_next), np.abs(m_cur))
        scale = np.where(scale > 0, scale, 1.0)
        m_next, m_cur = m_next / scale, m_cur / scale
        L = L + np.log(scale)
        mant[:, k + 1], logs[:, k + 1] = m_next, L
        m_prev = m_cur
        m_cur = m_next
    return JostSolution(n_lo, mant, logs)


def wronskian_of(f: JostSolution, g: JostSolution, lat: SteplikeLattice, n: int = 0):
    """a(n-1) (f(n-1) g(n) - g(n-1) f(n)), evaluated with common log scaling."""
    i, j = f.index(n - 1), f.index(n)
    e1 = f.logscale[:, i] + g.logscale[:, j]
    e2 = g.logscale[:, i] + f.logscale[:, j]
    E = np.maximum(e1, e2)
    t1 = f.mant[:, i] * g.mant[:, j] * np.exp(e1 - E)
    t2 = g.mant[:, i] * f.mant[:, j] * np.exp(e2 - E)
    return float(lat.a_at(np.array([n - 1]))[0]) * (t1 - t2) * np.exp(E)


def wronskian(z, lat: SteplikeLattice, n: int = 0, zeta=None):
    """W(z) = a(n-1)(psi_left(n-1) psi(n) - psi(n-1) psi_left(n)); independent of n."""
    return wronskian_of(jost_left(z, lat, zeta), jost_right(z, lat), lat, n)


def wronskian_sites(z, lat: SteplikeLattice, sites):
    """W evaluated at several sites n (columns), for site-independence checks."""
    L, R = jost_left(z, lat), jost_right(z, lat)
    return np.stack([wronskian_of(L, R, lat, n) for n in sites], axis=-1)


@dataclass
class Eigenvalue:
    z: float
    lam: float
    lam_matrix: float
    kind: str  # 'gap', 'below' (left of the left band) or 'above' (right of [-1,1])


def _real_w(lat):
    return lambda x: float(wronskian(np.array([x]), lat)[0].real)


def _refine(lat, z0, lo, hi):
    """Wronskian zero near z0 inside (lo, hi), by bracketing and Brent's method."""
    f = _real_w(lat)
    f0 = f(z0)
    if f0 == 0.0:
        return z0
    d = 1e-10
    while d < 0.5 * (hi - lo):
        a_, b_ = max(lo, z0 - d), min(hi, z0 + d)
        fa, fb = f(a_), f(b_)
        if fa * fb <= 0:
            return brentq(f, a_, b_, xtol=1e-15, rtol=1e-15, maxiter=200)
        d *= 4.0
    raise ScatteringError(f"unresolved Wronskian zero near z={z0}")


def eigenvalues(lat: SteplikeLattice):
    """Discrete spectrum: matrix eigensolve, then refinement as Wronskian zeros.

    Gap eigenvalues come first, in the order -1 < z_N < ... < z_1 < q1 reversed,
    i.e. z decreasing (lambda increasing); others are flagged by ``kind``.
    """
    (am, bm), (ap, bp) = lat.bg_left, lat.bg_right
    lo_gap, hi_gap = bm + 2 * am, bp - 2 * ap
    ev = jacobi_matrix_eigenvalues(lat)
    out = []
    kinds = [("gap", (ev > lo_gap) & (ev < hi_gap)),
             ("below", ev < bm - 2 * am),
             ("above", ev > bp + 2 * ap)]
    for kind, mask in kinds:
        for lam_m in np.sort(ev[mask]):
            z0 = float(joukowski_z(lam_m, ap, bp).real)
            if kind == "gap":
                zlo, zhi = -1.0, float(joukowski_z(lo_gap, ap, bp).real)
            elif kind == "below":
                zlo, zhi = float(joukowski_z(bm - 2 * am, ap, bp).real), 0.0
            else:
                zlo, zhi = 0.0, 1.0
            zj = _refine(lat, z0, zlo, zhi)
            lam = bp + ap * (zj + 1.0 / zj)
            out.append(Eigenvalue(float(zj), float(lam), float(lam_m), kind))
    return out


def gap_sign_changes(lat: SteplikeLattice, n_grid: int = 2000):
    """Number of sign changes of W on a grid of the gap image (-1, q1); independent check."""
    ap, bp = lat.bg_right
    am, bm = lat.bg_left
    q1 = float(joukowski_z(bm + 2 * am, ap, bp).real)
    x = np.linspace(-1.0, q1, n_grid + 2)[1:-1]
    w = wronskian(x, lat).real
    return int(np.sum(np.sign(w[1:]) != np.sign(w[:-1])))


def eigenfunction(z_j: float, lat: SteplikeLattice, n_match: int = 0):
    """Right-normalized eigenfunction at a real eigenvalue, as (sites, mantissa, logscale).

    Backward recursion of psi is unstable left of the localization region (the
    growing solution takes over), so for n < n_match the left Jost solution,
    rescaled to agree with psi at n_match, is used instead.
    """
    z = np.array([z_j], dtype=complex)
    R = jost_right(z, lat)
    zeta = left_zeta(z, lat)
    L = jost_left(z, lat, zeta=zeta)
    n_match = min(max(n_match, lat.n_min), lat.n_max)
    k = R.index(n_match)
    # psi = c psi_left with c = psi(k) / psi_left(k), kept as log|c| and sign
    c_mant = R.mant[0, k] / L.mant[0, k]
    c_log = R.logscale[0, k] - L.logscale[0, k]
    mant = R.mant[0].real.copy()
    logs = R.logscale[0].copy()
    mant[:k] = (c_mant * L.mant[0, :k]).real
    logs[:k] = c_log + L.logscale[0, :k]
    return R.n_first, mant, logs, zeta[0].real


def norming_constant(z_j: float, lat: SteplikeLattice, n_match: int = 0) -> float:
    """gamma_j = (sum_n psi(z_j, n)^2)^(-1) for the right-normalized eigenfunction.

    The background tails outside the window are summed in closed form.
    """
    n_first, mant, logs, zeta = eigenfunction(z_j, lat, n_match)
    E = np.max(2 * logs + np.log(np.maximum(np.abs(mant), 1e-300) ** 2))
    s = np.sum(mant ** 2 * np.exp(2 * logs - E))
    # right tail n >= n_max + 2: psi = z^n
    n_r = lat.n_max + 2
    s += math.exp(2 * n_r * math.log(abs(z_j)) - E) / (1.0 - z_j * z_j)
    # left tail n <= n_min - 2: psi(n) = psi(n_min - 1) zeta^(n_min - 1 - n)
    s += mant[0] ** 2 * math.exp(2 * logs[0] - E) * zeta ** 2 / (1.0 - zeta ** 2)
    return float(math.exp(-E) / s)


def chi_values(s, lat: SteplikeLattice):
    """chi(s) = a_+ a_- (s - 1/s)(1/zeta - zeta)(s - i0) / |W(s)|^2 for real s in I.

    This is -conj(T_-) T_+ with both transmission coefficients written through W;
    the background product a_+ a_- enters through W(conj psi, psi) on each side.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    zeta = left_zeta(s.astype(complex), lat)
    W = wronskian(s.astype(complex), lat, zeta=zeta)
    return _aa(lat) * (s - 1.0 / s) * (1.0 / zeta - zeta) / np.abs(W) ** 2


def _aa(lat):
    return lat.bg_right[0] * lat.bg_left[0]


def chi_abs(s, lat: SteplikeLattice):
    """|chi(s)| = a_+ a_- |s - 1/s| 2|sin theta| / |W(s)|^2 on the interior of I."""
    return np.abs(chi_values(s, lat))


def chi_abs_offset(s, lat: SteplikeLattice, deltas=(1e-4, 1e-5, 1e-6)):
    """|chi| from Wronskians at s - i delta, polynomially extrapolated to delta = 0."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    vals = []
    for d in deltas:
        z = s - 1j * d
        zeta = left_zeta(z, lat)
        W = wronskian(z, lat, zeta=zeta)
        vals.append(_aa(lat) * np.abs((z - 1 / z) * (1 / zeta - zeta)) / np.abs(W) ** 2)
    # Lagrange interpolation in delta, evaluated at delta = 0
    out = np.zeros_like(s)
    for i, di in enumerate(deltas):
        w = 1.0
        for j, dj in enumerate(deltas):
            if j != i:
                w *= dj / (dj - di)
        out += w * vals[i]
    return out


def reflection(z, lat: SteplikeLattice):
    """Right reflection coefficient on |z| = 1: R = -W(psi_left, conj psi) / W(psi_left, psi)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    L = jost_left(z, lat)
    Rt = jost_right(z, lat)
    Rc = jost_right(np.conj(z), lat)
    return -wronskian_of(L, Rc, lat) / wronskian_of(L, Rt, lat)


def transmission(z, lat: SteplikeLattice):
    """T = W(conj psi, psi) / W(psi_left, psi) on |z| = 1."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    L = jost_left(z, lat)
    Rt = jost_right(z, lat)
    Rc = jost_right(np.conj(z), lat)
    return wronskian_of(Rc, Rt, lat) / wronskian_of(L, Rt, lat)


def resonance_classify(lat: SteplikeLattice, tol_res: float = 1e-6):
    """Flags for q and q1 (True = resonant) and ell; raises if indeterminate."""
    ap, bp = lat.bg_right
    am, bm = lat.bg_left
    flags = []
    for lam in (bm - 2 * am, bm + 2 * am):
        z = joukowski_z(lam, ap, bp).real
        zeta = -1.0 if lam < bm else 1.0
        w = abs(wronskian(np.array([z + 0j]), lat, zeta=np.array([zeta + 0j]))[0])
        if tol_res <= w <= 10 * tol_res:
            raise ScatteringError(f"indeterminate resonance at lambda={lam}: |W|={w:.3e}")
        flags.append(bool(w < tol_res))
    return flags[0], flags[1], ell_from_flags(*flags)


def ell_from_flags(res_q: bool, res_q1: bool) -> int:
    if res_q and res_q1:
        return 1
    if not res_q and not res_q1:
        return -1
    return 0


@dataclass
class ScatteringData:
    eigen: list  # list of Eigenvalue as dicts
    gamma: list
    chi_nodes: list
    chi_abs: list
    resonant_q: bool
    resonant_q1: bool
    ell: int
    R_samples: list = field(default_factory=list)  # [theta, Re R, Im R]

    @property
    def gap_z(self):
        """Gap eigenvalues z_j, decreasing (z_1 closest to q1)."""
        return sorted((e["z"] for e in self.eigen if e["kind"] == "gap"), reverse=True)

    @property
    def all_z(self):
        return [e["z"] for e in self.eigen]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScatteringData":
        return cls(**json.loads(text))


def scattering_data(lat: SteplikeLattice, n_chi: int = 256, n_R: int = 64,
                    tol_res: float = 1e-6) -> ScatteringData:
    """Assemble the scattering data; |chi| is sampled at Chebyshev nodes of I."""
    ap, bp = lat.bg_right
    am, bm = lat.bg_left
    q = float(joukowski_z(bm - 2 * am, ap, bp).real)
    q1 = float(joukowski_z(bm + 2 * am, ap, bp).real)
    eig = eigenvalues(lat)
    gam = [norming_constant(e.z, lat) for e in eig]
    nodes = chebyshev_points(q1, q, n_chi)
    chi = chi_abs(nodes, lat)
    rq, rq1, ell = resonance_classify(lat, tol_res)
    th = np.linspace(0, np.pi, n_R + 2)[1:-1]
    R = reflection(np.exp(1j * th), lat)
    return ScatteringData(
        eigen=[asdict(e) for e in eig], gamma=gam,
        chi_nodes=nodes.tolist(), chi_abs=chi.tolist(),
        resonant_q=rq, resonant_q1=rq1, ell=ell,
        R_samples=[[float(t), float(r.real), float(r.imag)] for t, r in zip(th, R)],
    )


__all__ = [
    "JostSolution", "jost_right", "jost_left", "wronskian", "wronskian_of",
    "wronskian_sites", "eigenvalues", "norming_constant", "chi_abs", "chi_values",
    "chi_abs_offset", "eigenfunction", "reflection", "transmission", "resonance_classify",
    "ell_from_flags", "ScatteringData", "scattering_data", "gap_sign_changes",
    "gap_eigenvalues_matrix", "left_zeta", "Eigenvalue",
]
