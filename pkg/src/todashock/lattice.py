"""Direct evolution of the Toda lattice on a finite window with steplike backgrounds.

Convention: for n >= 0 the coefficients sit on the right background, for n < 0 on
the left one, unless overridden.  Outside the stored window they are frozen at the
background constants.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np


class WindowTooSmall(RuntimeError):
    """Edge values drifted off the background: the front reached the boundary."""


class LatticeInstability(RuntimeError):
    """Some a(n) became non-positive during time stepping."""


@dataclass(frozen=True)
class SteplikeLattice:
    n_min: int
    a: np.ndarray
    b: np.ndarray
    bg_left: tuple[float, float]
    bg_right: tuple[float, float]
    rho: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be 1-d arrays of equal length")
        if np.any(a <= 0):
            raise ValueError("Jacobi coefficients a(n) must be positive")
        if self.bg_left[0] <= 0 or self.bg_right[0] <= 0:
            raise ValueError("background a must be positive")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.a) - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def index(self, n: int) -> int:
        return n - self.n_min

    def a_at(self, n):
        """a(n) for arbitrary integers n, background outside the window."""
        n = np.asarray(n)
        i = n - self.n_min
        inside = (i >= 0) & (i < len(self.a))
        out = np.where(n < self.n_min, self.bg_left[0], self.bg_right[0]).astype(float)
        out[inside] = self.a[i[inside]]
        return out

    def b_at(self, n):
        n = np.asarray(n)
        i = n - self.n_min
        inside = (i >= 0) & (i < len(self.b))
        out = np.where(n < self.n_min, self.bg_left[1], self.bg_right[1]).astype(float)
        out[inside] = self.b[i[inside]]
        return out

    def edge_drift(self) -> float:
        al, bl = self.bg_left
        ar, br = self.bg_right
        left = abs(self.a[0] - al) + abs(self.b[0] - bl)
        right = abs(self.a[-1] - ar) + abs(self.b[-1] - br)
        return max(left, right)

    def with_coefficients(self, a, b) -> "SteplikeLattice":
        return replace(self, a=np.asarray(a, float), b=np.asarray(b, float))


def step_profile(n_min, n_max, bg_left, bg_right, overrides=None, rho=1.0):
    """Pure step (left background for n < 0, right for n >= 0) plus pointwise overrides.

    ``overrides`` maps n to either a number (sets b(n)) or a pair (a(n), b(n)).
    """
    if n_min > -1 or n_max < 0:
        raise ValueError("window must contain the step at n = 0")
    n = np.arange(n_min, n_max + 1)
    a = np.where(n < 0, bg_left[0], bg_right[0]).astype(float)
    b = np.where(n < 0, bg_left[1], bg_right[1]).astype(float)
    for k, v in (overrides or {}).items():
        i = int(k) - n_min
        if not 0 <= i < len(n):
            raise ValueError(f"override at n={k} lies outside the window")
        if np.ndim(v) == 0:
            b[i] = float(v)
        else:
            a[i], b[i] = float(v[0]), float(v[1])
    return SteplikeLattice(n_min, a, b, tuple(map(float, bg_left)),
                           tuple(map(float, bg_right)), rho)


FRONT_SPEED_FACTOR = 2.5


def window_for(t_end: float, a_left: float, margin: int = 100,
               speed_factor: float = FRONT_SPEED_FACTOR) -> int:
    """Window width n_max - n_min keeping fronts away from the edges.

    The outermost disturbances of a shock travel faster than the linear group
    velocity max(1, 2 a_-); for the fig. 1 datum they move about 2.13 sites per
    unit time, hence the safety factor.
    """
    return 2 * math.ceil(speed_factor * max(1.0, 2.0 * a_left) * t_end) + margin


def fig1_lattice(t_end: float = 200.0) -> SteplikeLattice:
    """Step 1/2,-4 | 1/2,0 with the single-site perturbation b(0) = -1.7."""
    half = window_for(t_end, 0.5) // 2 + 1
    return step_profile(-half, half, (0.5, -4.0), (0.5, 0.0), {0: -1.7})


def normalize(lat: SteplikeLattice):
    """Rescale so that the right background becomes a = 1/2, b = 0.

    Returns the normalized lattice, the time scale s = 2 a_+ and the energy shift b_+.
    If (a, b)(n, t) solves the original system then
    ((a, (b - b_+)) / s)(n, t / s) solves the normalized one.
    """
    (am, bm), (ap, bp) = lat.bg_left, lat.bg_right
    if not bm + 2 * am < bp - 2 * ap:
        raise ValueError("backgrounds must satisfy b_- + 2 a_- < b_+ - 2 a_+")
    s = 2.0 * ap
    out = SteplikeLattice(
        lat.n_min, lat.a / s, (lat.b - bp) / s,
        (am / s, (bm - bp) / s), (0.5, 0.0), lat.rho,
    )
    return out, s, bp


def toda_rhs(a: np.ndarray, b: np.ndarray, bg_left, bg_right):
    """Right-hand side of  a' = a (b(n+1) - b(n)),  b' = 2 (a(n)^2 - a(n-1)^2)."""
    b_next = np.empty_like(b)
    b_next[:-1] = b[1:]
    b_next[-1] = bg_right[1]
    a_prev = np.empty_like(a)
    a_prev[1:] = a[:-1]
    a_prev[0] = bg_left[0]
    return a * (b_next - b), 2.0 * (a * a - a_prev * a_prev)


@dataclass
class Trajectory:
    times: np.ndarray
    a: np.ndarray  # (len(times), N)
    b: np.ndarray
    n_min: int
    bg_left: tuple[float, float]
    bg_right: tuple[float, float]
    meta: dict = field(default_factory=dict)

    @property
    def sites(self):
        return np.arange(self.n_min, self.n_min + self.a.shape[1])

    def state(self, k: int) -> SteplikeLattice:
        return SteplikeLattice(self.n_min, self.a[k], self.b[k], self.bg_left, self.bg_right)

    def at_time(self, t: float, tol: float = 1e-9) -> SteplikeLattice:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol:
            raise KeyError(f"no snapshot at t={t}")
        return self.state(k)


def rk4_step(a, b, dt, bg_left, bg_right):
    k1a, k1b = toda_rhs(a, b, bg_left, bg_right)
    k2a, k2b = toda_rhs(a + 0.5 * dt * k1a, b + 0.5 * dt * k1b, bg_left, bg_right)
    k3a, k3b = toda_rhs(a + 0.5 * dt * k2a, b + 0.5 * dt * k2b, bg_left, bg_right)
    k4a, k4b = toda_rhs(a + dt * k3a, b + dt * k3b, bg_left, bg_right)
    a = a + dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
    b = b + dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b)
    return a, b


def evolve(state: SteplikeLattice, t_end: float, dt: float = 0.005,
           snapshot_stride: int | None = None, times=None,
           clamp_tol: float = 1e-10, check_every: int = 50) -> Trajectory:
    """Classical RK4 with fixed step.

    Snapshots are taken every ``snapshot_stride`` steps, or at the requested ``times``
    (rounded to the step grid).  t = 0 and t_end are always stored.
    """
    n_steps = int(round(t_end / dt))
    if n_steps < 0 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be a non-negative multiple of dt")
    keep = {0, n_steps}
    if snapshot_stride:
        keep.update(range(0, n_steps + 1, int(snapshot_stride)))
    if times is not None:
        for t in times:
            k = int(round(t / dt))
            if not 0 <= k <= n_steps or abs(k * dt - t) > 1e-9 * max(1.0, t):
                raise ValueError(f"requested time {t} is not on the step grid")
            keep.add(k)
    bl, br = state.bg_left, state.bg_right
    a, b = state.a.copy(), state.b.copy()
    snaps_t, snaps_a, snaps_b = [], [], []

    def guard(k):
        drift = max(abs(a[0] - bl[0]) + abs(b[0] - bl[1]),
                    abs(a[-1] - br[0]) + abs(b[-1] - br[1]))
        if drift > clamp_tol:
            raise WindowTooSmall(f"edge drift {drift:.3e} at t={k * dt:.6g}")
        if np.any(a <= 0):
            raise LatticeInstability(f"a(n) <= 0 at t={k * dt:.6g}")

    for k in range(n_steps + 1):
        if k in keep:
            snaps_t.append(k * dt)
            snaps_a.append(a.copy())
            snaps_b.append(b.copy())
        if k == n_steps:
            break
        a, b = rk4_step(a, b, dt, bl, br)
        if (k + 1) % check_every == 0 or k + 1 == n_steps:
            guard(k + 1)
    return Trajectory(np.array(snaps_t), np.array(snaps_a), np.array(snaps_b),
                      state.n_min, bl, br, {"dt": dt})


def jacobi_matrix_eigenvalues(state: SteplikeLattice) -> np.ndarray:
    """Eigenvalues of the truncated tridiagonal Jacobi matrix."""
    from scipy.linalg import eigh_tridiagonal

    return eigh_tridiagonal(state.b, state.a[:-1], eigvals_only=True)


def conserved_diagnostics(state: SteplikeLattice, reference: SteplikeLattice | None = None,
                          n_extreme: int = 10):
    """Sum of b deviations from the step background, and drift of extreme eigenvalues.

    Eigenvalues of the truncated matrix lying in the spectral gap (isolated ones) are
    compared first; the remaining slots are filled with the most extreme eigenvalues.
    """
    n = state.sites
    bg = np.where(n < 0, state.bg_left[1], state.bg_right[1])
    sum_dev = float(np.sum(state.b - bg))
    if reference is None:
        return sum_dev, 0.0
    ev = _extreme(jacobi_matrix_eigenvalues(state), n_extreme)
    ev0 = _extreme(jacobi_matrix_eigenvalues(reference), n_extreme)
    m = min(len(ev), len(ev0))
    return sum_dev, float(np.max(np.abs(ev[:m] - ev0[:m]))) if m else 0.0


def _extreme(ev, k):
    ev = np.sort(ev)
    k = min(k, len(ev) // 2)
    return np.concatenate([ev[:k], ev[-k:]])


def gap_eigenvalues_matrix(state: SteplikeLattice, lo: float, hi: float) -> np.ndarray:
    """Truncated-matrix eigenvalues strictly inside (lo, hi)."""
    ev = jacobi_matrix_eigenvalues(state)
    return np.sort(ev[(ev > lo) & (ev < hi)])
