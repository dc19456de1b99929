"""Charge-fluctuation functionals: variances, Drude self weight, number
entropy and the short-time entanglement asymmetry."""

from __future__ import annotations

import math

import numpy as np

from .quadrature import DEFAULT_CONFIG, momentum_integral, velocity_kinks
from .states import OccupationFunction, Pairing

#: Returned by `asymmetry` when the state carries no charge fluctuations.
ASYMMETRY_REGIME_EXCEEDED = -math.inf


def _nn(occ, k):
    n = np.asarray(occ.evaluate(k), dtype=float)
    return n * (1.0 - n)


def variance_symmetric(tau, ell, occ: OccupationFunction, config=DEFAULT_CONFIG, return_error=False):
    """Subsystem charge variance of a charge-eigenstate quench at time tau.

    sigma_tau^2 = (1/2pi) int dk min(2|v_k| tau, ell) n(k)[1 - n(k)].
    Grows as ``2 D tau`` inside the light cone and saturates for
    tau >= ell/2.
    """
    if tau < 0 or ell <= 0:
        raise ValueError("need tau >= 0 and ell > 0")
    kinks = velocity_kinks([ell / (2 * tau)] if tau > 0 else [])

    def integrand(k):
        return np.minimum(2 * np.abs(np.sin(k)) * tau, ell) * _nn(occ, k)

    value, err = momentum_integral(integrand, kinks=kinks, config=config)
    return (value, err) if return_error else value


def variance_squeezed(tau, ell, occ: OccupationFunction, config=DEFAULT_CONFIG, return_error=False):
    """Subsystem charge variance of a squeezed-pair quench at time tau.

    sigma_tau^2 = (1/2pi) int dk [2 ell - min(2|v_k| tau, ell)] n(1-n):
    extensive at tau = 0 and non-increasing, saturating to half its initial
    value once every pair is broken across the boundary.
    """
    if tau < 0 or ell <= 0:
        raise ValueError("need tau >= 0 and ell > 0")
    kinks = velocity_kinks([ell / (2 * tau)] if tau > 0 else [])

    def integrand(k):
        return (2 * ell - np.minimum(2 * np.abs(np.sin(k)) * tau, ell)) * _nn(occ, k)

    value, err = momentum_integral(integrand, kinks=kinks, config=config)
    return (value, err) if return_error else value


def variance_saturated(ell, occ: OccupationFunction, config=DEFAULT_CONFIG):
    """Long-time variance ``ell * (1/2pi) int dk n(1-n)`` (either pairing)."""
    value, _ = momentum_integral(lambda k: ell * _nn(occ, k), config=config)
    return value


def drude_weight(occ: OccupationFunction, config=DEFAULT_CONFIG, return_error=False):
    """Drude self weight D = (1/2pi) int dk |v_k| n(1-n)."""
    value, err = momentum_integral(lambda k: np.abs(np.sin(k)) * _nn(occ, k), config=config)
    return (value, err) if return_error else value


def number_entropy(variance: float) -> float:
    """Shannon entropy of a Gaussian charge distribution, (1/2) log(2 pi e s^2)."""
    if variance <= 0:
        raise ValueError("number entropy needs a positive variance")
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


def asymmetry(tau, ell, occ: OccupationFunction, config=DEFAULT_CONFIG):
    """Short-time entanglement asymmetry of a squeezed-pair state.

    Delta S_A(tau) = (1/2) log(2 pi e X_tau) with
    X_tau = 2 (1/2pi) int dk [ell - min(2|v_k| tau, ell)] n(1-n).
    Returns `ASYMMETRY_REGIME_EXCEEDED` when X_tau vanishes (no
    fluctuations left to symmetrise over).
    """
    if occ.pairing is not Pairing.SQUEEZED_PAIR:
        raise ValueError("entanglement asymmetry is defined for squeezed-pair states")
    kinks = velocity_kinks([ell / (2 * tau)] if tau > 0 else [])

    def integrand(k):
        return 2.0 * (ell - np.minimum(2 * np.abs(np.sin(k)) * tau, ell)) * _nn(occ, k)

    chi_tau, _ = momentum_integral(integrand, kinks=kinks, config=config)
    if chi_tau <= 1e-300:
        return ASYMMETRY_REGIME_EXCEEDED
    return 0.5 * math.log(2.0 * math.pi * math.e * chi_tau)
