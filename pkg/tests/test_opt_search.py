import numpy as np
import pytest
from hypothesis import given, strategies as st

from entrocone import opt_search, states
from entrocone.inequal import ingleton_instances
from entrocone.opt_search import (CostFunction, OptimizerConfig, RealVecState, cost, default_scope, devectorize,
                                  minimize, role_masks, sample_unit_sphere, track_resources, vectorize)
from entrocone.qsim import PureState, haar_state, random_clifford_circuit, run_circuit

import oracles

PLATEAU = -0.1699
seeds = st.integers(0, 2**32 - 1)
FULL6 = default_scope(6)


def test_vectorize_examples():
    np.testing.assert_array_equal(vectorize(PureState.zero(1)).coords, [1, 0, 0, 0])
    phased = PureState.from_vector([1j, 0])
    np.testing.assert_array_equal(vectorize(phased).coords, [0, 0, 1, 0])
    assert not np.allclose(vectorize(phased).coords, vectorize(PureState.zero(1)).coords)


@given(seeds)
def test_round_trip(seed):
    psi = haar_state(6, np.random.default_rng(seed))
    np.testing.assert_allclose(devectorize(vectorize(psi)).amplitudes, psi.amplitudes, atol=1e-12)


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        RealVecState(1, np.zeros(4)).normalized()
    with pytest.raises(ValueError):
        RealVecState(2, np.ones(4))


def test_cost_examples():
    assert cost(vectorize(PureState.zero(6)), FULL6) == pytest.approx(0, abs=1e-12)
    psi = run_circuit(PureState.zero(6), random_clifford_circuit(6, 40, np.random.default_rng(4)))
    assert cost(vectorize(psi), FULL6) >= -1e-8
    assert cost(vectorize(states.psi_abcdr()), FULL6) < 0


def test_cost_dimension_mismatch():
    with pytest.raises(ValueError):
        cost(np.ones(64), FULL6)


def test_cost_matches_oracle_pipeline(rng):
    inst = ingleton_instances(6)
    for _ in range(5):
        psi = haar_state(6, rng)
        want = inst.gaps(oracles.entropy_vector(psi.amplitudes, 6)[None, :]).min()
        assert cost(vectorize(psi), FULL6) == pytest.approx(want, abs=1e-10)


@given(seeds, st.floats(0, 2 * np.pi))
def test_cost_ray_invariant(seed, phase):
    psi = haar_state(6, np.random.default_rng(seed))
    base = cost(vectorize(psi), FULL6)
    assert cost(3 * vectorize(psi).coords, FULL6) == pytest.approx(base, abs=1e-10)
    rotated = PureState(6, psi.amplitudes * np.exp(1j * phase))
    assert cost(vectorize(rotated), FULL6) == pytest.approx(base, abs=1e-10)


@given(seeds)
def test_cost_continuous(seed):
    r = np.random.default_rng(seed)
    x = sample_unit_sphere(128, r)
    dx = sample_unit_sphere(128, r) * 1e-6
    assert abs(cost(x + dx, FULL6) - cost(x, FULL6)) < 1e-3


def test_numpy_and_numba_paths_agree(rng, monkeypatch):
    fn = CostFunction(FULL6, 6)
    xs = np.array([sample_unit_sphere(128, rng) for _ in range(4)])
    a = fn.batch(xs)
    monkeypatch.setattr(opt_search, "USE_NUMBA", not opt_search.USE_NUMBA)
    np.testing.assert_allclose(fn.batch(xs), a, atol=1e-10)


def test_sphere_samples():
    r = np.random.default_rng(9)
    dim, n = 16, 100_000
    v = np.array([sample_unit_sphere(dim, r) for _ in range(n)])
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1, atol=1e-12)
    sigma = 1 / np.sqrt(dim)
    assert np.all(np.abs(v.mean(axis=0)) < 5 * sigma / np.sqrt(n))
    cov = v.T @ v / n
    np.testing.assert_allclose(cov, np.eye(dim) / dim, atol=5e-3)
    with pytest.raises(ValueError):
        sample_unit_sphere(1, r)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(method="adam")
    with pytest.raises(ValueError):
        OptimizerConfig(population=2)
    with pytest.raises(ValueError):
        OptimizerConfig(rho_beg=1e-9)
    with pytest.raises(ValueError):
        OptimizerConfig(max_evals=0)
    with pytest.raises(ValueError):
        default_scope(6, "some")


def _x0(seed, n=6):
    return sample_unit_sphere(1 << (n + 1), np.random.default_rng(seed))


def test_target_stops_cma():
    run = minimize(_x0(1), OptimizerConfig(target_violation=0.05, seed=1))
    assert run.stop_reason == "target"
    assert run.final_cost <= -0.05
    assert run.converged


def test_target_stops_cobyla_quietly(capfd):
    run = minimize(_x0(2), OptimizerConfig(method="cobyla", target_violation=0.01, max_evals=5000))
    assert run.stop_reason == "target"
    assert run.final_cost <= -0.01
    assert "capi_return" not in capfd.readouterr().err


def test_budget_flagged():
    run = minimize(_x0(3), OptimizerConfig(max_evals=50))
    assert run.stop_reason == "budget"
    assert not run.converged


@given(seeds)
def test_final_cost_never_above_trace(seed):
    run = minimize(_x0(seed, 4), OptimizerConfig(max_evals=300, seed=seed))
    assert all(run.final_cost <= c + 1e-15 for _, c in run.trace)
    assert cost(run.x_star, default_scope(4)) == pytest.approx(run.final_cost, abs=1e-10)


def test_reported_violator_reverifies(cma_campaign):
    inst = ingleton_instances(6)
    for run in cma_campaign[:5]:
        e = oracles.entropy_vector(run.state.amplitudes, 6)
        assert inst.gaps(e[None, :]).min() == pytest.approx(run.final_cost, abs=1e-8)


@pytest.mark.slow
def test_single_instance_reaches_same_plateau():
    run = minimize(_x0(5), OptimizerConfig(instance_scope="single_instance", seed=5))
    assert run.final_cost == pytest.approx(PLATEAU, abs=0.005)


def test_role_masks():
    m = role_masks((1, 2, 4, 8))
    assert m["CD"] == 12 and m["ABC"] == 7 and m["ABCD"] == 15


def test_track_resources_cd_gap_largest(cma_campaign):
    for run in cma_campaign[:5]:
        last = track_resources(run).rows[-1]
        diff = {k: last[k]["s_vn"] - last[k]["capacity"] for k in ("AB", "AC", "AD", "BC", "BD", "CD")}
        assert max(diff, key=diff.get) == "CD"


def test_track_resources_abc_entropy(cma_campaign):
    for run in cma_campaign[:5]:
        assert track_resources(run).rows[-1]["ABC"]["s_vn"] == pytest.approx(2, abs=0.3)


def test_track_resources_total_capacity_drops(cma_campaign):
    drops = 0
    for run in cma_campaign:
        tr = track_resources(run)
        first, last = tr.rows[0], tr.rows[-1]
        drops += sum(last[k]["capacity"] for k in tr.subsystems) < sum(first[k]["capacity"] for k in tr.subsystems)
    assert drops >= 0.9 * len(cma_campaign)


@pytest.mark.xfail(strict=True, reason="single-qubit capacities start near zero on random states and rise "
                                       "during the search, so not every subsystem collapses")
def test_track_resources_every_capacity_drops(cma_campaign):
    ok = 0
    for run in cma_campaign:
        tr = track_resources(run)
        first, last = tr.rows[0], tr.rows[-1]
        ok += all(last[k]["capacity"] < first[k]["capacity"] for k in tr.subsystems)
    assert ok >= 0.9 * len(cma_campaign)


def test_track_resources_columns(cma_campaign):
    tr = track_resources(cma_campaign[0])
    assert len(tr.column("CD", "s_vn")) == len(tr.rows)
    assert "witness2" in tr.rows[0]
