import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.linalg import expm

from conftest import I2, X, dense_single_edge_expected_cut, single_edge
from qopt_bench.graphs import GraphInstance, generate_3_regular
from qopt_bench.hamiltonian import ResourceLimitError, diagonal_cost_table
from qopt_bench.qaoa import (
    AnsatzParams,
    NoiseModel,
    Statevector,
    circuit_resources,
    evolve_ansatz,
    expected_cut,
    hellinger_fidelities,
    noisy_sample,
    sample,
    uniform_state,
)
from qopt_bench.samples import SampleSet

angles = st.floats(-4.0, 4.0, allow_nan=False)


def dense_ansatz(g, params):
    """Reference evolution with full 2^n x 2^n matrices."""
    n = g.num_nodes
    cuts = diagonal_cost_table(g).cut_sizes
    mixer = np.zeros((1 << n, 1 << n), dtype=complex)
    for q in range(n):
        ops = [X if k == q else I2 for k in reversed(range(n))]
        term = ops[0]
        for op in ops[1:]:
            term = np.kron(term, op)
        mixer += term
    psi = np.full(1 << n, 2 ** (-n / 2), dtype=complex)
    for b, gm in zip(params.betas, params.gammas):
        psi = np.exp(1j * gm * cuts) * psi
        psi = expm(-1j * b * mixer) @ psi
    return psi


def test_zero_angles_give_uniform_distribution():
    g = generate_3_regular(6, 0)
    probs = evolve_ansatz(g, AnsatzParams((0.0, 0.0), (0.0, 0.0))).probabilities()
    assert np.allclose(probs, 1 / 64, atol=1e-14)


def test_single_edge_grid_matches_dense_oracle():
    g = single_edge()
    cuts = diagonal_cost_table(g).cut_sizes
    grid = np.linspace(0, np.pi, 20)
    for b in grid:
        for gm in np.linspace(0, 2 * np.pi, 20):
            got = expected_cut(evolve_ansatz(g, AnsatzParams((b,), (gm,))), cuts)
            assert abs(got - dense_single_edge_expected_cut(b, gm)) < 1e-9


def test_single_edge_optimum_puts_all_mass_on_cuts():
    # locate the maximizer on a fine grid with the dense oracle alone
    betas = np.linspace(0, np.pi, 161)
    gammas = np.linspace(0, 2 * np.pi, 161)
    vals = np.array([[dense_single_edge_expected_cut(b, c) for c in gammas] for b in betas])
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    assert vals[i, j] == pytest.approx(1.0, abs=1e-9)
    probs = evolve_ansatz(single_edge(), AnsatzParams((betas[i],), (gammas[j],))).probabilities()
    assert probs[1] + probs[2] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n, p", [(4, 1), (6, 2), (6, 3)])
def test_matches_dense_matrix_evolution(n, p):
    g = generate_3_regular(n, n)
    rng = np.random.default_rng(p)
    params = AnsatzParams(tuple(rng.uniform(0, 3, p)), tuple(rng.uniform(0, 6, p)))
    assert np.allclose(evolve_ansatz(g, params).amplitudes, dense_ansatz(g, params), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(angles, angles), min_size=1, max_size=3))
def test_norm_preserved(pairs):
    g = generate_3_regular(8, 1)
    params = AnsatzParams(tuple(b for b, _ in pairs), tuple(c for _, c in pairs))
    assert abs(evolve_ansatz(g, params).norm() - 1.0) < 1e-10


def test_resource_limit():
    with pytest.raises(ResourceLimitError):
        evolve_ansatz(generate_3_regular(8, 0), AnsatzParams((1.0,), (1.0,)), limit=6)


def test_ansatz_params_validation():
    with pytest.raises(ValueError):
        AnsatzParams((1.0,), (1.0, 2.0))
    p = AnsatzParams((0.1, 0.2), (0.3, 0.4))
    assert AnsatzParams.from_vector(p.to_vector()) == p and p.p == 2


def test_sampling_basis_state_and_counts():
    amps = np.zeros(4, dtype=complex)
    amps[1] = 1.0
    s = sample(Statevector(2, amps), 500, 0)
    assert s.counts == {"01": 500}
    g = generate_3_regular(6, 0)
    assert sample(evolve_ansatz(g, AnsatzParams((0.3,), (0.7,))), 1234, 1).shots == 1234


def test_sampling_is_seeded():
    state = evolve_ansatz(generate_3_regular(6, 0), AnsatzParams((0.3,), (0.7,)))
    assert sample(state, 100, 5).counts == sample(state, 100, 5).counts


def test_uniform_sampling_chi_square():
    n, shots = 6, 100_000
    s = sample(Statevector(n, uniform_state(n)), shots, 3)
    idx, cnt = s.arrays()
    observed = np.zeros(1 << n)
    observed[idx] = cnt
    chi2 = ((observed - shots / (1 << n)) ** 2 / (shots / (1 << n))).sum()
    assert chi2 < stats.chi2.ppf(0.999, (1 << n) - 1)


def _dense_counts(s, n):
    idx, cnt = s.arrays()
    out = np.zeros(1 << n)
    out[idx] = cnt
    return out


def test_zero_noise_matches_ideal_sampling():
    g = generate_3_regular(6, 2)
    params = AnsatzParams((0.4, 0.9), (1.1, 0.3))
    a = _dense_counts(noisy_sample(g, params, 10_000, NoiseModel(0.0, 0.0), 1), 6)
    b = _dense_counts(sample(evolve_ansatz(g, params), 10_000, 2), 6)
    keep = (a + b) > 0
    _, pvalue, _, _ = stats.chi2_contingency(np.vstack([a[keep], b[keep]]))
    assert pvalue > 0.001


def test_full_noise_scrambles_output():
    g = generate_3_regular(6, 2)
    params = AnsatzParams((0.4,) * 4, (1.1,) * 4)
    measured = noisy_sample(g, params, 20_000, NoiseModel(1.0, 1.0), 0)
    _, norm = hellinger_fidelities(measured, evolve_ansatz(g, params).probabilities())
    assert norm < 0.05


def test_fidelity_identities():
    ideal = {"00": 0.5, "11": 0.5}
    same = SampleSet(2, {"00": 50, "11": 50})
    assert hellinger_fidelities(same, ideal) == pytest.approx((1.0, 1.0))
    uniform = SampleSet(2, {"00": 25, "01": 25, "10": 25, "11": 25})
    assert hellinger_fidelities(uniform, ideal)[1] == pytest.approx(0.0, abs=1e-12)
    disjoint = SampleSet(2, {"01": 10})
    assert hellinger_fidelities(disjoint, ideal)[0] == 0.0


def test_fidelity_rises_with_shots():
    g = generate_3_regular(8, 4)
    state = evolve_ansatz(g, AnsatzParams((0.5, 0.2), (0.8, 1.7)))
    probs = state.probabilities()
    lo = np.mean([hellinger_fidelities(sample(state, 1000, s), probs)[0] for s in range(5)])
    hi = np.mean([hellinger_fidelities(sample(state, 5000, s), probs)[0] for s in range(5)])
    assert hi > lo


def test_circuit_resources():
    g6 = generate_3_regular(6, 0)
    r = circuit_resources(g6, 2)
    assert r.two_qubit_gate_count == 18 and r.mixer_gate_count == 12 and r.width == 6
    k4 = GraphInstance(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))
    r = circuit_resources(k4, 1)
    assert (r.two_qubit_gate_count, r.mixer_gate_count, r.one_qubit_gate_count) == (6, 4, 8)
    d = [circuit_resources(g6, p).algorithmic_depth for p in (1, 2, 3)]
    assert d[1] - d[0] == d[2] - d[1] > 0
