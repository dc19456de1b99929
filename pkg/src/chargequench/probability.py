"""Measurement-outcome statistics: saddle-point Gaussians, the exact
half-filled distribution, deterministic sampling and Monte-Carlo averages.

Charges are physically integers; sampling therefore rounds Gaussian draws
and rejects outcomes outside the ballistic feasibility window, preserving
the relative weights inside it.  All sampling is deterministic given the
seed.  Parallel users should derive per-chunk streams with
``numpy.random.SeedSequence(seed).spawn(...)`` keyed by a fixed chunk index,
never by worker count, so results are reproducible regardless of the pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counting import MeasurementProtocol
from .entropy import EntropyReport, log_n_correction, unmeasured_entropy
from .errors import FeasibilityError, RegimeError
from .fluctuations import drude_weight, variance_squeezed, variance_symmetric
from .neel_exact import neel_charged_moment, neel_exact_pdf_logweight
from .quadrature import DEFAULT_CONFIG, integrate, momentum_integral
from .saddle import light_cone_charge_bound
from .states import OccupationFunction, Pairing

KIND_GAUSSIAN_SINGLE = "gaussian-single"
KIND_GAUSSIAN_CHAIN = "gaussian-chain"
KIND_NEEL_EXACT = "neel-exact"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Distribution over one or more measurement outcomes.

    For the chain kind each step is a Gaussian centred on the previous
    outcome with variance equal to the charge variance freshly accumulated
    during that period.  ``window`` is the per-step feasibility half-width
    (None = unrestricted first step for squeezed states).
    """

    kind: str
    center: float
    step_variances: tuple[float, ...]
    tau: float
    ell: float
    window: float | None
    first_step_unrestricted: bool = False

    @property
    def m(self) -> int:
        return len(self.step_variances)

    def step_window(self, step: int) -> float | None:
        if self.window is None or (step == 0 and self.first_step_unrestricted):
            return None
        return self.window


def symmetric_single_distribution(tau, ell, occ, config=DEFAULT_CONFIG):
    var = variance_symmetric(tau, ell, occ, config=config)
    window = light_cone_charge_bound(tau, config=config)
    return OutcomeDistribution(KIND_GAUSSIAN_SINGLE, ell / 2.0, (var,), tau, ell, window)


def squeezed_single_distribution(tau, ell, occ, qbar, config=DEFAULT_CONFIG):
    var = variance_squeezed(tau, ell, occ, config=config)
    return OutcomeDistribution(
        KIND_GAUSSIAN_SINGLE, qbar, (var,), tau, ell, None, first_step_unrestricted=True
    )


def chain_distribution(tau, m, ell, occ, config=DEFAULT_CONFIG):
    sigmas = [variance_symmetric(l * tau, ell, occ, config=config) for l in range(m + 1)]
    steps = tuple(sigmas[l] - sigmas[l - 1] for l in range(1, m + 1))
    if any(s <= 0 for s in steps):
        raise RegimeError("saturated charge variance: chain steps are degenerate")
    window = light_cone_charge_bound(tau, config=config)
    return OutcomeDistribution(KIND_GAUSSIAN_CHAIN, ell / 2.0, steps, tau, ell, window)


def neel_exact_distribution(tau, ell, m: int = 1):
    """Exact outcome distribution of the half-filled state (per step)."""
    window = 2.0 * tau / math.pi
    return OutcomeDistribution(KIND_NEEL_EXACT, ell / 2.0, (tau / math.pi,) * m, tau, ell, window)


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def _gaussian_pdf(x, var):
    return np.exp(-0.5 * x * x / var) / math.sqrt(2.0 * math.pi * var)


def _neel_norm(dist) -> float:
    a = dist.window
    value, _ = integrate(
        lambda dq: np.exp(neel_exact_pdf_logweight(dq, dist.tau)), -a, a, kinks=(0.0,)
    )
    return value


def outcome_pdf(dist: OutcomeDistribution, q) -> float:
    """Probability density of an outcome (scalar) or outcome sequence.

    Chain densities factorise over the steps, each centred on the previous
    outcome.  The exact half-filled density vanishes outside the open
    feasibility window (the closed form's logarithms are undefined there).
    """
    if dist.kind == KIND_NEEL_EXACT:
        qs = np.atleast_1d(np.asarray(q, dtype=float))
        if len(qs) != dist.m:
            raise ValueError("outcome sequence length mismatch")
        norm = _neel_norm(dist)
        density = 1.0
        prev = dist.center
        for step, qi in enumerate(qs):
            logw = neel_exact_pdf_logweight(qi - prev, dist.tau)
            density *= 0.0 if np.isneginf(logw) else math.exp(float(logw)) / norm
            prev = qi
        return float(density)
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    if len(qs) != dist.m:
        raise ValueError("outcome sequence length mismatch")
    density = 1.0
    prev = dist.center
    for step, qi in enumerate(qs):
        dq = qi - prev
        window = dist.step_window(step)
        if window is not None and abs(dq) > window:
            return 0.0
        density *= float(_gaussian_pdf(dq, dist.step_variances[step]))
        prev = qi
    return float(density)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _integer_support(dist: OutcomeDistribution):
    """Integer increments and their exact weights for the half-filled law."""
    a = dist.window
    dqs = np.arange(-math.floor(a - 1e-12), math.floor(a - 1e-12) + 1)
    weights = np.array([neel_charged_moment(dq, dist.tau) for dq in dqs])
    return dqs, weights / weights.sum()


def sample_outcomes(seed, dist: OutcomeDistribution, m: int | None = None):
    """One outcome sequence; returns ``(q_seq, rejections)``."""
    seqs, rejections = sample_many(seed, dist, 1, m=m)
    return tuple(seqs[0]), rejections


def sample_many(seed, dist: OutcomeDistribution, n: int, m: int | None = None, max_rejections=10**6):
    """Deterministic batch sampling: ``(array (n, m) of integer outcomes, rejections)``."""
    m = dist.m if m is None else m
    if m != dist.m:
        raise ValueError("requested m does not match the distribution")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = np.empty((n, m), dtype=np.int64)
    rejections = 0
    if dist.kind == KIND_NEEL_EXACT:
        dqs, pmf = _integer_support(dist)
        steps = rng.choice(dqs, size=(n, m), p=pmf)
        out = np.cumsum(steps, axis=1) + int(round(dist.center))
        return out, 0

    prev = np.full(n, dist.center)
    for step in range(m):
        sigma = math.sqrt(dist.step_variances[step])
        window = dist.step_window(step)
        pending = np.arange(n)
        draws = np.empty(n)
        while pending.size:
            cand = np.round(prev[pending] + sigma * rng.standard_normal(pending.size))
            ok = (cand >= 0) & (cand <= dist.ell)
            if window is not None:
                ok &= np.abs(cand - prev[pending]) <= window
            draws[pending[ok]] = cand[ok]
            rejections += int(np.sum(~ok))
            if rejections > max_rejections:
                raise FeasibilityError(
                    "sampling rejected more than 10^6 draws; parameters are pathological"
                )
            pending = pending[~ok]
        out[:, step] = draws.astype(np.int64)
        prev = draws
    return out, rejections


# ---------------------------------------------------------------------------
# Monte-Carlo averaging
# ---------------------------------------------------------------------------


def monte_carlo_average(
    protocol: MeasurementProtocol,
    occ: OccupationFunction,
    samples: int,
    seed: int,
    mode: str = "exact",
    distribution: OutcomeDistribution | None = None,
    config=DEFAULT_CONFIG,
):
    """Outcome-averaged total entropy: ``(mean, stderr)``.

    Outcomes are integers, so per-outcome entropies are memoised; the cost
    is one report per distinct outcome value, not per sample.  Symmetric
    multi-measurement corrections are additive over steps with each step
    depending only on its own charge increment, which keeps the cache small.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if occ.pairing is Pairing.SYMMETRIC_PARTICLE_HOLE:
        return _mc_symmetric(protocol, occ, samples, seed, mode, distribution, config)
    return _mc_squeezed(protocol, occ, samples, seed, distribution, config)


def _mc_symmetric(protocol, occ, samples, seed, mode, distribution, config):
    from .entropy import _quantum_integral, _single_kinks, single_measurement_chis_vec
    from .quadrature import velocity_kinks
    from .saddle import solve_saddle_symmetric_multi, solve_saddle_symmetric_single

    t, tau, ell, m = protocol.t, protocol.tau, protocol.ell, protocol.m
    dist = distribution or chain_distribution(tau, m, ell, occ, config=config)
    seqs, rejections = sample_many(seed, dist, samples)
    if rejections > 0.01 * samples * m:
        raise FeasibilityError(
            f"more than 1% of draws were infeasible ({rejections} rejections)"
        )
    baseline = unmeasured_entropy(1.0, t, ell, occ, config=config)
    classical, tag = log_n_correction(t, tau, ell, occ, m=m, config=config)
    if classical is None:
        raise RegimeError(f"no log-prefactor convention for this regime ({tag})")

    increments = np.diff(np.hstack([np.full((samples, 1), ell / 2.0), seqs]), axis=1)
    light_cone = 2 * t <= ell

    cache: dict = {}

    def step_correction(l, dq):
        key = (l if not light_cone else 0, float(dq))
        if key not in cache:
            if m == 1:
                sol = solve_saddle_symmetric_single(dq, tau, ell, occ, mode=mode, config=config)
                lam = sol.lambdas[0]
            else:
                dq_probe = [0.0] * m
                dq_probe[l - 1] = dq
                sol = solve_saddle_symmetric_multi(dq_probe, tau, ell, occ, config=config)
                lam = sol.suffix_sums()[l - 1]
            if light_cone:
                chi = lambda k: 2 * np.abs(np.sin(k)) * tau
                kinks = velocity_kinks([])
            elif m == 1:
                chi = lambda k: single_measurement_chis_vec(k, tau, t, ell)
                kinks = _single_kinks(tau, t, ell)
            else:
                from .entropy import _multi_kinks, _suffix_chi_vectorised

                chi = _suffix_chi_vectorised(l, protocol)
                kinks = _multi_kinks(protocol)
            value, _ = _quantum_integral(chi, lam, 1, occ, kinks, config)
            cache[key] = value
        return cache[key]

    totals = np.full(samples, baseline + classical)
    for l in range(1, m + 1):
        unique = np.unique(increments[:, l - 1])
        lookup = {dq: step_correction(l, dq) for dq in unique}
        totals += np.array([lookup[dq] for dq in increments[:, l - 1]])
    mean = float(np.mean(totals))
    stderr = float(np.std(totals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, stderr


def _mc_squeezed(protocol, occ, samples, seed, distribution, config):
    from .entropy import entropy_squeezed_double, entropy_squeezed_single

    t, tau, ell, m = protocol.t, protocol.tau, protocol.ell, protocol.m
    if m not in (1, 2):
        raise RegimeError("squeezed Monte-Carlo supports m in {1, 2}")
    qbar = ell * momentum_integral(occ.evaluate, config=config)[0]
    if distribution is None:
        if m == 1:
            distribution = squeezed_single_distribution(tau, ell, occ, qbar, config=config)
        else:
            var1 = variance_squeezed(tau, ell, occ, config=config)
            bound = light_cone_charge_bound(tau, config=config)
            # after the first projection the subsystem charge is pinned, so the
            # second increment carries the ballistic (symmetric-like) variance
            step2 = 2.0 * tau * drude_weight(occ, config=config)
            distribution = OutcomeDistribution(
                KIND_GAUSSIAN_CHAIN,
                qbar,
                (var1, step2),
                tau,
                ell,
                bound,
                first_step_unrestricted=True,
            )
    seqs, rejections = sample_many(seed, distribution, samples)
    if rejections > 0.01 * samples * m:
        raise FeasibilityError(
            f"more than 1% of draws were infeasible ({rejections} rejections)"
        )
    cache: dict[tuple, float] = {}
    totals = np.empty(samples)
    for i, row in enumerate(map(tuple, seqs)):
        if row not in cache:
            if m == 1:
                report = entropy_squeezed_single(t, tau, ell, row[0], occ, config=config)
            else:
                report = entropy_squeezed_double(t, tau, ell, row[0], row[1], occ, config=config)
            cache[row] = report.total
        totals[i] = cache[row]
    mean = float(np.mean(totals))
    stderr = float(np.std(totals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, stderr


def degenerate_report(protocol, occ, outcome_seq, config=DEFAULT_CONFIG) -> EntropyReport:
    """Single-outcome report used by the zero-variance consistency check."""
    from .entropy import entropy_symmetric_multi, entropy_symmetric_single

    if protocol.m == 1:
        return entropy_symmetric_single(
            protocol.t, protocol.tau, protocol.ell, outcome_seq[0], occ, config=config
        )
    return entropy_symmetric_multi(
        protocol.t, protocol.tau, protocol.ell, list(outcome_seq), occ, config=config
    )
