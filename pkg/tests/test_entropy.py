import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entrocone import states
from entrocone.entropy import (EntropyVector, capacity, entropy_vector, entropy_vectors_batch, nonflatness, renyi2,
                               spectrum_stats, union_masks, von_neumann)
from entrocone.qsim import (DensityMatrix, PureState, QuantumError, haar_state, partial_trace,
                            random_clifford_circuit, run_circuit)

import oracles

seeds = st.integers(0, 2**32 - 1)


def dm(*diag):
    return DensityMatrix(np.diag(np.array(diag, dtype=complex)))


def test_von_neumann_simple():
    assert von_neumann(dm(1, 0)) == 0
    assert von_neumann(dm(0.5, 0.5)) == pytest.approx(1.0, abs=1e-14)


def test_cd_of_prepared_state_is_two_bits():
    out = run_circuit(PureState.zero(6), states.abcdr_circuit())
    assert von_neumann(partial_trace(out, 0b110000)) == pytest.approx(2.0, abs=1e-12)


def test_renyi2_values():
    assert renyi2(dm(1, 0)) == 0
    assert renyi2(dm(0.5, 0.5)) == pytest.approx(math.log(2))
    assert renyi2(dm(0.25, 0.25, 0.25, 0.25)) == pytest.approx(math.log(4))


def test_capacity_values():
    assert capacity(dm(0.5, 0.5)) == pytest.approx(0, abs=1e-15)
    assert capacity(dm(1 / 3, 1 / 3, 1 / 3, 0)) == pytest.approx(0, abs=1e-14)
    p = np.array([0.75, 0.25])
    s = -np.sum(p * np.log2(p))
    assert capacity(dm(*p)) == pytest.approx(np.sum(p * np.log2(p) ** 2) - s**2, abs=1e-14)


def test_nonflatness_values():
    assert nonflatness(dm(0.5, 0.5)) == pytest.approx(0, abs=1e-15)
    assert nonflatness(dm(1, 0)) == pytest.approx(0, abs=1e-15)
    assert nonflatness(dm(0.75, 0.25)) == pytest.approx(3 / 64, abs=1e-15)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8), st.integers(0, 7))
def test_capacity_zero_iff_flat(weights, zeros):
    w = np.zeros(8)
    w[: len(weights)] = weights
    w[: min(zeros, len(weights) - 1)] = 0
    w /= w.sum()
    support = w[w > 0]
    flat = np.ptp(support) < 1e-12
    c = capacity(dm(*w))
    if flat:
        assert c == pytest.approx(0, abs=1e-12)
    elif np.ptp(np.log2(support)) > 1e-3:
        assert c > 1e-9


def test_ghz4_entropy_vector_all_ones():
    ev = entropy_vector(states.ghz(4), [[0], [1], [2]])
    assert len(ev.entries) == 8
    np.testing.assert_allclose([ev[m] for m in ev.masks()], np.ones(7), atol=1e-12)


def test_product_state_vector_zero():
    ev = entropy_vector(PureState.zero(6))
    assert np.all(ev.entries == 0)


@given(seeds)
def test_entropy_vector_matches_oracle(seed):
    psi = haar_state(5, np.random.default_rng(seed))
    np.testing.assert_allclose(entropy_vector(psi).entries, oracles.entropy_vector(psi.amplitudes, 5), atol=1e-10)


def test_mixed_entropy_vector_matches_oracle():
    rho = states.linden_rho()
    np.testing.assert_allclose(entropy_vector(rho).entries, oracles.entropy_vector(rho.matrix, 4), atol=1e-12)


def test_grouped_parties(rng):
    psi = haar_state(5, rng)
    ev = entropy_vector(psi, [[0, 1], [2], [3, 4]])
    assert ev.qubit_masks == (0b11, 0b100, 0b11000)
    assert ev[0b101] == pytest.approx(oracles.vn_entropy(oracles.reduced(psi.amplitudes, 0b11011, 5)), abs=1e-10)


def test_party_validation():
    with pytest.raises(QuantumError):
        entropy_vector(PureState.zero(3), [[0], [0, 1]])
    with pytest.raises(QuantumError):
        entropy_vector(PureState.zero(3), [[0], []])
    with pytest.raises(QuantumError):
        entropy_vector(PureState.zero(3), [[5]])


def test_purity_duality_on_haar_states():
    r = np.random.default_rng(6)
    full = 63
    for _ in range(100):
        e = entropy_vector(haar_state(6, r)).entries
        for m in range(1, full):
            assert abs(e[m] - e[full ^ m]) < 1e-8


@given(seeds, st.integers(3, 6))
def test_subadditivity_and_ssa(seed, n):
    e = entropy_vector(haar_state(n, np.random.default_rng(seed))).entries
    full = (1 << n) - 1
    r = np.random.default_rng(seed + 1)
    for _ in range(20):
        a, b, c = (int(x) for x in r.integers(0, full + 1, 3))
        a, b = a & ~b, b  # disjoint
        c &= ~(a | b)
        if a and b:
            assert e[a] + e[b] >= e[a | b] - 1e-8
        if a and b and c:
            assert e[a | b] + e[b | c] >= e[b] + e[a | b | c] - 1e-8


@given(seeds, st.integers(1, 40))
def test_stabilizer_reductions_are_flat(seed, depth):
    r = np.random.default_rng(seed)
    psi = run_circuit(PureState.zero(4), random_clifford_circuit(4, depth, r))
    for m in range(1, 15):
        st_ = spectrum_stats(psi, m)
        assert st_.capacity == pytest.approx(0, abs=1e-9)
        assert st_.nonflatness == pytest.approx(0, abs=1e-9)


def test_spectrum_stats_consistent(rng):
    psi = haar_state(4, rng)
    s = spectrum_stats(psi, 0b0011)
    rho = partial_trace(psi, 0b0011)
    assert s.s_vn == pytest.approx(von_neumann(rho))
    assert s.capacity == pytest.approx(capacity(rho))
    assert s.s2 == pytest.approx(renyi2(rho))
    assert s.nonflatness == pytest.approx(nonflatness(rho))


def test_serialisation_and_order():
    ev = entropy_vector(states.ghz(3))
    assert list(ev.masks()) == [1, 2, 4, 3, 5, 6, 7]
    back = EntropyVector.from_mapping(3, ev.as_dict())
    np.testing.assert_array_equal(back.entries, ev.entries)
    assert '"3": 1.0' in ev.to_json()


def test_batch_matches_single(rng):
    psis = np.array([haar_state(4, rng).amplitudes for _ in range(5)])
    batch = entropy_vectors_batch(psis, 4, [1, 2, 4, 8])
    for p, row in zip(psis, batch):
        np.testing.assert_allclose(row, entropy_vector(PureState(4, p)).entries, atol=1e-12)


def test_union_masks():
    np.testing.assert_array_equal(union_masks([0b11, 0b100]), [0, 0b11, 0b100, 0b111])
