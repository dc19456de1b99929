import math

import numpy as np
import pytest

from chargequench.ed_oracle import (
    FockVector,
    build_state,
    charge_commutator_norm,
    charge_distribution,
    entropy_decomposition,
    evolve,
    project_charge,
    run_protocol,
)
from chargequench.errors import ForbiddenOutcomeError


def test_build_neel():
    st = build_state("neel", 4)
    # |0101> with site 1 as the least significant bit: even sites occupied
    mask = (1 << 1) | (1 << 3)
    assert st.amplitudes[mask] == 1.0
    assert np.count_nonzero(st.amplitudes) == 1


def test_build_dimer():
    st = build_state("dimer", 2)
    # (|10> - |01>)/sqrt(2): occupy site 1 with +, site 2 with -
    assert st.amplitudes[0b01] == pytest.approx(1 / math.sqrt(2))
    assert st.amplitudes[0b10] == pytest.approx(-1 / math.sqrt(2))


def test_build_tilted():
    st = build_state(f"tilted:{math.pi / 2}", 2)
    assert np.allclose(np.abs(st.amplitudes), 0.5)
    with pytest.raises(ValueError):
        build_state("neel", 16)
    with pytest.raises(KeyError):
        build_state("other", 4)


def test_evolution_unitarity_and_identity():
    st = build_state("dimer", 8)
    assert np.allclose(evolve(st, 0.0).amplitudes, st.amplitudes)
    moved = evolve(st, 100.0)
    assert moved.norm == pytest.approx(1.0, abs=1e-12)


def test_single_particle_dispersion():
    # oracle: diagonalize the L x L hopping matrix directly
    L = 8
    hop = np.zeros((L, L))
    for x in range(L):
        hop[x, (x + 1) % L] = hop[(x + 1) % L, x] = -0.5
    energies, modes = np.linalg.eigh(hop)
    t = 3.7
    for mode_index in (0, 3, 5):
        amp = np.zeros(2**L, dtype=complex)
        for x in range(L):
            amp[1 << x] = modes[x, mode_index]
        out = evolve(FockVector(L, amp), t)
        expected = amp * np.exp(-1j * energies[mode_index] * t)
        assert np.max(np.abs(out.amplitudes - expected)) < 1e-12
    # a momentum eigenstate acquires the phase e^{+i cos(k) t}
    k = 2 * math.pi * 2 / L
    amp = np.zeros(2**L, dtype=complex)
    for x in range(1, L + 1):
        amp[1 << (x - 1)] = np.exp(1j * k * x) / math.sqrt(L)
    out = evolve(FockVector(L, amp), t)
    assert np.max(np.abs(out.amplitudes - amp * np.exp(1j * math.cos(k) * t))) < 1e-12


def test_projection_basics():
    st = build_state("neel", 8)
    sites = range(1, 5)
    projected, prob = project_charge(st, sites, 2)
    assert prob == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(projected.amplitudes, st.amplitudes)
    with pytest.raises(ForbiddenOutcomeError):
        project_charge(st, sites, 3)
    # completeness at a generic time
    moved = evolve(st, 1.3)
    dist = charge_distribution(moved, sites)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    probs = []
    for q in range(5):
        if dist[q] > 1e-14:
            _, p = project_charge(moved, sites, q)
            probs.append(p)
            assert p == pytest.approx(dist[q], abs=1e-12)
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)


def test_entropy_decomposition_identity_random_states():
    rng = np.random.default_rng(6)
    for L, ell in ((6, 2), (8, 3), (8, 4)):
        amp = rng.normal(size=2**L) + 1j * rng.normal(size=2**L)
        state = FockVector(L, amp / np.linalg.norm(amp))
        s_a, s_num, s_conf, delta_s = entropy_decomposition(state, ell)
        assert s_a == pytest.approx(s_num + s_conf - delta_s, abs=1e-10)
        assert delta_s >= -1e-12


def test_symmetric_trajectory_properties():
    st = evolve(build_state("neel", 10), 2.1)
    assert charge_commutator_norm(st, 4) < 1e-10
    s_a, s_num, s_conf, delta_s = entropy_decomposition(st, 4)
    assert abs(delta_s) < 1e-10


def test_tilted_number_entropy_equals_asymmetry_at_zero_time():
    st = build_state(f"tilted:{math.pi / 3}", 8)
    s_a, s_num, s_conf, delta_s = entropy_decomposition(st, 4)
    assert s_a == pytest.approx(0.0, abs=1e-12)  # product state
    assert s_num == pytest.approx(delta_s, abs=1e-10)


def test_post_measurement_number_entropy_vanishes():
    st = evolve(build_state("dimer", 10), 1.5)
    projected, _ = project_charge(st, range(1, 5), 2)
    _, s_num, _, _ = entropy_decomposition(projected, 4)
    assert abs(s_num) < 1e-12


def test_protocol_run_neel():
    record, series = run_protocol("neel", 10, 4, 0.7, 3, 3.5, seed=11)
    assert len(record.events) == 3
    for _, q, prob in record.events:
        assert 0 <= q <= 4 and 0 < prob <= 1
    # total charge conserved: outcomes lie in the exact support
    for time, s_a, s_num, s_conf, delta_s in series:
        assert s_a == pytest.approx(s_num + s_conf - delta_s, abs=1e-10)
    # measurement rows have zero number entropy
    for step, (time, s_a, s_num, s_conf, delta_s) in enumerate(series[1:4]):
        assert abs(s_num) < 1e-12
    # forced outcomes are honoured
    record2, _ = run_protocol("neel", 10, 4, 0.7, 2, 2.0, forced_outcomes=[2, 2])
    assert [q for _, q, _ in record2.events] == [2, 2]
