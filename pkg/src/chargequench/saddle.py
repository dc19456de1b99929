"""Saddle-point solvers for the measurement-outcome Lagrange multipliers.

Each projective charge measurement contributes one multiplier lambda; the
entropy corrections are pair entropies of occupation functions tilted by the
(suffix-summed) multipliers.  For charge-eigenstate ("symmetric") initial
states a solution exists only when each outcome lies inside the ballistic
light cone of the previous one; for squeezed states the first measurement is
unrestricted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityError, RegimeError
from .fluctuations import variance_saturated, variance_squeezed, variance_symmetric
from .quadrature import DEFAULT_CONFIG, momentum_integral, velocity_kinks
from .states import OccupationFunction, Pairing

_LAMBDA_BRACKET = 50.0


@dataclass(frozen=True)
class SaddleSolution:
    """Multipliers (one per measurement), feasibility and provenance tags."""

    lambdas: tuple[float, ...]
    feasible: bool
    mode: str
    regime: str

    def suffix_sums(self) -> tuple[float, ...]:
        """Lambda_l = sum_{s=l}^{m} lambda_s, the tilt applied from step l on."""
        out = []
        acc = 0.0
        for lam in reversed(self.lambdas):
            acc += lam
            out.append(acc)
        return tuple(reversed(out))

    def to_json(self) -> str:
        return json.dumps(
            {
                "lambdas": list(self.lambdas),
                "feasible": self.feasible,
                "mode": self.mode,
                "regime": self.regime,
            }
        )


# ---------------------------------------------------------------------------
# Feasibility (time delay)
# ---------------------------------------------------------------------------


def light_cone_charge_bound(tau: float, config=DEFAULT_CONFIG) -> float:
    """Largest charge deviation transportable in time tau: tau/(2pi) int dk |v_k|.

    Equals 2 tau / pi for the tight-binding band.
    """
    value, _ = momentum_integral(lambda k: tau * np.abs(np.sin(k)), config=config)
    return value


def charge_window(tau: float, ell: float, occ=None, config=DEFAULT_CONFIG) -> float:
    """Exact saddle domain: |dq| < (1/2) (1/2pi) int dk min(2|v_k| tau, ell)."""
    kinks = velocity_kinks([ell / (2 * tau)] if tau > 0 else [])
    value, _ = momentum_integral(
        lambda k: 0.5 * np.minimum(2 * np.abs(np.sin(k)) * tau, ell), kinks=kinks, config=config
    )
    return value


def feasibility(dq_seq, tau: float, pairing: Pairing, config=DEFAULT_CONFIG):
    """Per-step flags for a sequence of charge differences.

    Symmetric states: every |dq_i| must fit in the light cone of one period.
    Squeezed states: the first step always succeeds; the rest obey the same
    bound (the first projection pins the subsystem charge).
    """
    if tau <= 0:
        raise ValueError("feasibility needs tau > 0")
    bound = light_cone_charge_bound(tau, config=config)
    flags = []
    for i, dq in enumerate(dq_seq):
        if pairing is Pairing.SQUEEZED_PAIR and i == 0:
            flags.append(True)
        else:
            flags.append(abs(dq) <= bound)
    return tuple(flags)


# ---------------------------------------------------------------------------
# Tilted occupations
# ---------------------------------------------------------------------------


def modified_occupation(n, lam: float, weight: int = 1):
    """Occupation tilted by a multiplier: ``n e^{w lam} / (n e^{w lam} + 1 - n)``.

    weight = 2 applies to pairs both of whose members were measured
    (squeezed states only).  Positive lam enriches the occupation.
    """
    n = np.asarray(n, dtype=float)
    x = weight * lam
    if x >= 0:
        return n / (n + (1.0 - n) * np.exp(-x))
    return n * np.exp(x) / (n * np.exp(x) + (1.0 - n))


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------


def _window_integrand(occ, tau, ell):
    def g(lam, k):
        weight = np.minimum(2 * np.abs(np.sin(k)) * tau, ell)
        return weight * (modified_occupation(occ.evaluate(k), lam) - 0.5)

    return g


def solve_saddle_symmetric_single(
    dq, tau, ell, occ: OccupationFunction, mode: str = "exact", config=DEFAULT_CONFIG
) -> SaddleSolution:
    """Single-measurement multiplier for a symmetric state.

    Exact mode solves the monotone scalar equation
    ``dq = (1/2pi) int dk min(2|v_k| tau, ell) (n_lam(k) - 1/2)`` by bracketed
    bisection plus two Newton polish steps; linearized mode returns
    ``dq / sigma_tau^2``.
    """
    if occ.pairing is not Pairing.SYMMETRIC_PARTICLE_HOLE:
        raise ValueError("use solve_saddle_squeezed for squeezed-pair states")
    window = charge_window(tau, ell, config=config)
    if abs(dq) >= window:
        raise FeasibilityError(
            f"outcome deviation |dq| = {abs(dq):g} exceeds the time-delay window {window:g}",
            step=1,
        )
    regime = "symmetric-single"
    if window > 0 and abs(dq) > 0.99 * window:
        regime += ";saddle-unreliable"  # approximation degrades near the light cone
    sigma2 = variance_symmetric(tau, ell, occ, config=config)
    if mode == "linearized":
        return SaddleSolution((dq / sigma2,), True, "linearized", regime)
    if mode != "exact":
        raise ValueError("mode must be 'exact' or 'linearized'")
    if dq == 0.0:
        return SaddleSolution((0.0,), True, "exact", regime)

    kinks = velocity_kinks([ell / (2 * tau)] if tau > 0 else [])
    g = _window_integrand(occ, tau, ell)

    def residual(lam):
        value, _ = momentum_integral(lambda k: g(lam, k), kinks=kinks, config=config)
        return value - dq

    lo, hi = -_LAMBDA_BRACKET, _LAMBDA_BRACKET
    flo, fhi = residual(lo), residual(hi)
    if flo > 0 or fhi < 0:
        raise RegimeError(
            "saddle point not bracketed within |lambda| <= 50; the outcome sits "
            "too close to the light-cone boundary for a reliable saddle"
        )
    for _ in range(64):  # bisection to interval width 1e-12
        mid = 0.5 * (lo + hi)
        if residual(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    lam = 0.5 * (lo + hi)

    def slope(lam):
        def integrand(k):
            weight = np.minimum(2 * np.abs(np.sin(k)) * tau, ell)
            nl = modified_occupation(occ.evaluate(k), lam)
            return weight * nl * (1.0 - nl)

        value, _ = momentum_integral(integrand, kinks=kinks, config=config)
        return value

    for _ in range(2):  # Newton polish to machine accuracy
        d = slope(lam)
        if d <= 0:
            break
        lam -= residual(lam) / d
    return SaddleSolution((lam,), True, "exact", regime)


def solve_saddle_symmetric_multi(
    dq_seq, tau, ell, occ: OccupationFunction, config=DEFAULT_CONFIG
) -> SaddleSolution:
    """Multiplier chain for m periodic measurements on a symmetric state.

    The suffix sums satisfy ``sum_{s=l}^m lambda_s = dq_l / (sigma_{l tau}^2 -
    sigma_{(l-1) tau}^2)``; inside the light cone every denominator is
    ``2 D tau``.
    """
    if occ.pairing is not Pairing.SYMMETRIC_PARTICLE_HOLE:
        raise ValueError("use solve_saddle_squeezed for squeezed-pair states")
    m = len(dq_seq)
    window = charge_window(tau, ell, config=config)
    for i, dq in enumerate(dq_seq):
        if abs(dq) >= window:
            raise FeasibilityError(
                f"measurement {i + 1}: |dq| = {abs(dq):g} exceeds the window {window:g}",
                step=i + 1,
            )
    sigmas = [variance_symmetric(l * tau, ell, occ, config=config) for l in range(m + 1)]
    suffix = []
    for l in range(1, m + 1):
        denom = sigmas[l] - sigmas[l - 1]
        if denom <= 1e-14:
            raise RegimeError(
                f"charge variance saturated between measurements {l - 1} and {l}; "
                "the linearized multiplier chain is singular"
            )
        suffix.append(dq_seq[l - 1] / denom)
    lambdas = [suffix[l] - (suffix[l + 1] if l + 1 < m else 0.0) for l in range(m)]
    return SaddleSolution(tuple(lambdas), True, "linearized", "symmetric-multi")


def solve_saddle_squeezed(
    q_seq, tau, ell, occ: OccupationFunction, config=DEFAULT_CONFIG
) -> SaddleSolution:
    """Multipliers for one or two measurements on a squeezed-pair state.

    m = 1 is always feasible: lambda = (q - qbar)/sigma_tau^2 with the
    squeezed variance.  m = 2 solves

        q1 - qbar = lambda_1 sigma_tau^2 + lambda_2 sigma_{2tau}^2,
        q2 - q1   = lambda_1 (2 sigma_tau^2 - sigma_inf^2),

    where sigma_inf^2 = ell (1/2pi) int dk n(1-n) is the saturated variance.
    Larger m is not supported (no closed multiplier system is known).
    """
    if occ.pairing is not Pairing.SQUEEZED_PAIR:
        raise ValueError("use the symmetric solvers for particle-hole states")
    m = len(q_seq)
    if m not in (1, 2):
        raise RegimeError("squeezed saddles are implemented for m in {1, 2} only")
    qbar = ell * _mean_density(occ, config)
    sigma_tau2 = variance_squeezed(tau, ell, occ, config=config)
    if m == 1:
        if sigma_tau2 <= 1e-14:
            raise RegimeError("squeezed variance vanished; no fluctuations to measure")
        return SaddleSolution(((q_seq[0] - qbar) / sigma_tau2,), True, "linearized", "squeezed-single")
    dq2 = q_seq[1] - q_seq[0]
    bound = light_cone_charge_bound(tau, config=config)
    if abs(dq2) > bound:
        raise FeasibilityError(
            f"second outcome jump |dq| = {abs(dq2):g} exceeds the window {bound:g}", step=2
        )
    sigma_2tau2 = variance_squeezed(2 * tau, ell, occ, config=config)
    sigma_inf2 = variance_saturated(ell, occ, config=config)
    denom = 2 * sigma_tau2 - sigma_inf2
    if abs(denom) <= 1e-12 or sigma_2tau2 <= 1e-14:
        raise RegimeError("singular squeezed two-measurement system")
    lam1 = dq2 / denom
    lam2 = (q_seq[0] - qbar - lam1 * sigma_tau2) / sigma_2tau2
    return SaddleSolution((lam1, lam2), True, "linearized", "squeezed-double")


def _mean_density(occ, config):
    value, _ = momentum_integral(occ.evaluate, config=config)
    return value
