"""Quadrature rules for integrands with inverse square-root endpoint singularities."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def gauss_legendre01(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=64)
def chebyshev_nodes(n: int):
    """Gauss-Chebyshev (first kind) nodes on [-1, 1], ordered increasingly."""
    k = np.arange(n, 0, -1)
    return np.cos((2 * k - 1) * np.pi / (2 * n))


def chebyshev_points(lo: float, hi: float, n: int) -> np.ndarray:
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * chebyshev_nodes(n)


def chebyshev_quad(g, lo: float, hi: float, n: int = 128):
    """Integral of g(x) / sqrt((x - lo)(hi - x)) over [lo, hi]."""
    return np.pi / n * np.sum(g(chebyshev_points(lo, hi, n)), axis=-1)


def sin2_quad(g, lo: float, hi: float, n: int = 128, phi_lo: float = 0.0,
              phi_hi: float = np.pi / 2):
    """Same integral as :func:`chebyshev_quad`, via x = lo + (hi - lo) sin^2(phi).

    The substitution turns the weight into 2 dphi, so partial ranges
    phi in [phi_lo, phi_hi] are handled as well.
    """
    u, w = gauss_legendre01(n)
    phi = phi_lo + (phi_hi - phi_lo) * u
    x = lo + (hi - lo) * np.sin(phi) ** 2
    return 2.0 * (phi_hi - phi_lo) * np.sum(w * g(x), axis=-1)


def phi_of(x: float, lo: float, hi: float) -> float:
    """Inverse of the sin^2 substitution."""
    r = (x - lo) / (hi - lo)
    return float(np.arcsin(np.sqrt(min(max(r, 0.0), 1.0))))


def one_sided_quad(f, lo: float, hi: float, n: int = 128, singular_at: str = "hi",
                   pass_offset: bool = False):
    """Integral of f over [lo, hi] where f ~ |x - e|^(-1/2) at one end e.

    Uses x = e -/+ (hi - lo) v^2 which cancels the singularity.  With
    ``pass_offset`` f is called as f(x, d) where d = |x - e| is computed without
    cancellation.
    """
    v, w = gauss_legendre01(n)
    L = hi - lo
    d = L * v * v
    x = hi - d if singular_at == "hi" else lo + d
    vals = f(x, d) if pass_offset else f(x)
    return np.sum(w * vals * 2.0 * L * v, axis=-1)


def segment_quad(f, z0: complex, z1: complex, n: int = 160, cluster_end: bool = False):
    """Complex line integral of f along the straight segment z0 -> z1.

    With ``cluster_end`` the nodes accumulate at z1 as z1 - (z1 - z0) v^2, which
    absorbs an inverse square-root singularity there.
    """
    v, w = gauss_legendre01(n)
    d = z1 - z0
    if cluster_end:
        s = z1 - d * v * v
        ds = d * 2.0 * v
    else:
        s = z0 + d * v
        ds = d * np.ones_like(v)
    return np.sum(w * f(s) * ds)


def converge(rule, n0: int = 32, rtol: float = 1e-12, atol: float = 1e-15,
             n_max: int = 4096):
    """Evaluate rule(n) for doubling n until two successive values agree."""
    prev = rule(n0)
    n = n0
    while n < n_max:
        n *= 2
        cur = rule(n)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur) + atol):
            return cur
        prev = cur
    raise QuadratureError(f"no convergence up to n={n_max}")
