"""Adaptive Gauss-Legendre quadrature for piecewise-smooth integrands.

All momentum integrals in this library are of the form
``(1/2pi) * int_{-pi}^{pi} dk g(|sin k|, n(k))`` where ``g`` is smooth except
for kinks at a known, finite set of critical velocities (where a ballistic
light cone crosses the subsystem size).  Splitting the domain at those kinks
restores spectral convergence of fixed-order Gauss-Legendre panels; panels
that still disagree after bisection are subdivided until the requested
tolerance is met.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_TINY = 1e-300


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel order, target relative tolerance and kink handling."""

    nodes: int = 24
    rtol: float = 1e-10
    split_kinks: bool = True
    max_depth: int = 40

    def __post_init__(self):
        if self.nodes < 8:
            raise ValueError("quadrature needs at least 8 nodes per panel")
        if self.rtol <= 0:
            raise ValueError("relative tolerance must be positive")


DEFAULT_CONFIG = QuadratureConfig()


@lru_cache(maxsize=32)
def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_value(f, a, b, n):
    x, w = _gauss_legendre(n)
    y = 0.5 * (b - a) * x + 0.5 * (a + b)
    values = np.asarray(f(y), dtype=float)
    return 0.5 * (b - a) * float(np.dot(w, values)), float(np.max(np.abs(values)))


def _adaptive_panel(f, a, b, abs_tol, floor_density, config, depth=0):
    coarse, _ = _panel_value(f, a, b, config.nodes)
    mid = 0.5 * (a + b)
    left0, _ = _panel_value(f, a, mid, config.nodes)
    right0, _ = _panel_value(f, mid, b, config.nodes)
    fine = left0 + right0
    err = abs(fine - coarse)
    # floor_density * width is the floating-point noise budget of this panel;
    # residuals below it cannot be reduced by further subdivision.
    if err <= max(abs_tol, floor_density * (b - a), config.rtol * abs(fine)):
        return fine, err
    if depth >= config.max_depth:
        raise QuadratureError(
            f"panel [{a}, {b}] did not converge (residual {err:.3e})", achieved=err
        )
    left, el = _adaptive_panel(f, a, mid, 0.5 * abs_tol, floor_density, config, depth + 1)
    right, er = _adaptive_panel(f, mid, b, 0.5 * abs_tol, floor_density, config, depth + 1)
    return left + right, el + er


def integrate(f, a, b, kinks=(), config=DEFAULT_CONFIG):
    """Integrate vectorised ``f`` over [a, b].

    Returns ``(value, error_estimate)``.  ``kinks`` are interior points where
    the integrand is continuous but not smooth; they become panel boundaries.
    """
    if b <= a:
        return 0.0, 0.0
    points = [a, b]
    if config.split_kinks:
        points += [p for p in kinks if a < p < b]
    points = sorted(set(points))
    panels = list(zip(points[:-1], points[1:]))

    # Coarse pass fixes the tolerance scales; exact zeros stay exact.  The
    # noise floor keys on the pointwise integrand magnitude so that panels
    # whose residual is floating-point cancellation noise are accepted.
    scale = 0.0
    peak = 0.0
    for pa, pb in panels:
        value, panel_peak = _panel_value(f, pa, pb, config.nodes)
        scale += abs(value)
        peak = max(peak, panel_peak)
    abs_tol = config.rtol * max(scale, _TINY)
    floor_density = 30.0 * np.finfo(float).eps * peak

    total = 0.0
    err = 0.0
    width = b - a
    for pa, pb in panels:
        value, perr = _adaptive_panel(
            f, pa, pb, abs_tol * (pb - pa) / width, floor_density, config
        )
        total += value
        err += perr
    return total, err


def velocity_kinks(critical_velocities):
    """Momenta in (-pi, pi) where |sin k| crosses one of the given values.

    Values outside (0, 1) produce no kink for the cosine band.  k = 0 is
    always included (|sin k| itself is non-smooth there).
    """
    ks = {0.0}
    for c in critical_velocities:
        if 0.0 < c < 1.0:
            k0 = math.asin(c)
            ks.update((k0, math.pi - k0, -k0, -(math.pi - k0)))
    return sorted(ks)


def momentum_integral(g, kinks=(), config=DEFAULT_CONFIG):
    """(value, err) of ``(1/2pi) int_{-pi}^{pi} g(k) dk`` with kink splitting."""
    value, err = integrate(g, -math.pi, math.pi, kinks=kinks, config=config)
    return value / (2.0 * math.pi), err / (2.0 * math.pi)
