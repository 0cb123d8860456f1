import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscswap.errors import DimensionError
from oscswap.fock import (
    CutoffConfig,
    fock_state,
    random_density,
    random_pure_state,
    single_mode_density,
    superpose,
    tensor,
    tensor_power,
    vacuum,
)
from oscswap.swap import (
    Verdict,
    build_swap,
    expect_swap_direct,
    fidelity_pure,
    hs_distance,
    overlap,
    power_trace,
    power_trace_via_swap,
    purity,
    swap_expectation,
    witness_verdict,
)

C1 = CutoffConfig(1, 2)


def antisymmetric():
    return superpose([(1, fock_state(C1, (0, 1))), (-1, fock_state(C1, (1, 0)))])


def symmetric():
    return superpose([(1, fock_state(C1, (0, 1))), (1, fock_state(C1, (1, 0)))])


def ket(n, d):
    v = np.zeros(d)
    v[n] = 1
    return single_mode_density(np.outer(v, v))


def test_swap_two_modes():
    V = build_swap(C1, 2)
    b = fock_state(C1, (0, 1)).basis
    assert V.perm[b.index[(0, 1)]] == b.index[(1, 0)]


def test_swap_three_modes_cyclic():
    c = CutoffConfig(1, 3)
    V = build_swap(c, 3)
    b = fock_state(c, (1, 0, 0)).basis
    assert V.perm[b.index[(1, 0, 0)]] == b.index[(0, 1, 0)]
    assert V.perm[b.index[(0, 0, 1)]] == b.index[(1, 0, 0)]


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_vacuum_fixed(N):
    c = CutoffConfig(2, N)
    V = build_swap(c, N)
    assert V.perm[0] == 0
    assert expect_swap_direct(vacuum(c), V) == 1


@pytest.mark.parametrize("N,n_max", [(2, 3), (3, 2), (4, 2), (2, 4)])
def test_swap_matrix_properties(N, n_max):
    V = build_swap(CutoffConfig(n_max, N), N)
    m = V.matrix()
    assert np.all(m.sum(axis=0) == 1) and np.all(m.sum(axis=1) == 1)
    assert np.max(np.abs(m.T @ m - np.eye(len(m)))) < 1e-14
    assert np.array_equal(np.linalg.matrix_power(m, N), np.eye(len(m)))
    assert np.array_equal(m, m.T) == (N == 2)
    assert np.array_equal((V ** N).perm, np.arange(len(m)))
    # sector block diagonal
    photons = vacuum(V.cutoff).basis.photon_numbers()
    assert np.array_equal(photons[V.perm], photons)


def test_swap_rejects_mode_mismatch():
    with pytest.raises(DimensionError):
        build_swap(CutoffConfig(1, 3), 2)


def test_slot_swap_moves_groups():
    c = CutoffConfig(2, 4)
    V = build_swap(c, 2, slot_modes=2)
    b = fock_state(c, (0,) * 4).basis
    assert V.perm[b.index[(1, 0, 0, 1)]] == b.index[(0, 1, 1, 0)]


def test_expect_antisymmetric():
    assert expect_swap_direct(antisymmetric(), build_swap(C1, 2)) == pytest.approx(-1, abs=1e-15)


def test_expect_orthogonal_product():
    s = fock_state(C1, (0, 1))
    assert expect_swap_direct(s, build_swap(C1, 2)) == 0


def test_expect_identical_pure(rng):
    psi = random_pure_state(CutoffConfig(2, 1), rng)
    joint = tensor(psi, psi)
    assert expect_swap_direct(joint, build_swap(joint.cutoff, 2)) == pytest.approx(1, abs=1e-14)


def test_expect_pure_matches_density(rng):
    psi = random_pure_state(CutoffConfig(2, 3), rng)
    V = build_swap(psi.cutoff, 3)
    rho = psi.density_matrix()
    direct = np.trace(rho @ V.matrix())
    assert expect_swap_direct(psi, V) == pytest.approx(direct, abs=1e-14)


@pytest.mark.parametrize("N,k", [(3, 1), (3, 2), (4, 1), (4, 3)])
def test_expect_mixed_matches_matrix_trace(rng, N, k):
    rho = random_density(CutoffConfig(2, N), rng)
    V = build_swap(rho.cutoff, N)
    direct = np.trace(rho.data @ np.linalg.matrix_power(V.matrix(), k))
    assert expect_swap_direct(rho, V, k) == pytest.approx(direct, abs=1e-14)


def test_overlap_examples():
    zero, one = ket(0, 2), ket(1, 2)
    half = single_mode_density(np.eye(2) / 2)
    assert overlap(zero, zero) == pytest.approx(1)
    assert overlap(zero, one) == 0
    assert overlap(half, half) == pytest.approx(0.5)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_overlap_is_swap_expectation(seed):
    rng = np.random.default_rng(seed)
    a, b = (random_density(CutoffConfig(2, 1), rng) for _ in range(2))
    joint = tensor(a, b)
    assert overlap(a, b) == pytest.approx(expect_swap_direct(joint, build_swap(joint.cutoff, 2)).real, abs=1e-12)
    assert overlap(a, b) == pytest.approx(overlap(b, a), abs=1e-12)
    assert 0 <= overlap(a, b) <= 1


def test_purity_examples():
    assert purity(ket(1, 3)) == pytest.approx(1)
    assert purity(single_mode_density(np.eye(2) / 2)) == pytest.approx(0.5)
    assert purity(single_mode_density(np.diag([0.75, 0.25]))) == pytest.approx(5 / 8)


def test_fidelity_examples():
    c = CutoffConfig(1, 1)
    zero, one = fock_state(c, (0,)), fock_state(c, (1,))
    half = single_mode_density(np.eye(2) / 2)
    assert fidelity_pure(zero, ket(0, 2)) == pytest.approx(1)
    assert fidelity_pure(one, half) == pytest.approx(0.5)
    assert fidelity_pure(one, ket(0, 2)) == 0


def test_fidelity_equals_overlap(rng):
    alpha = random_pure_state(CutoffConfig(3, 1), rng)
    rho = random_density(CutoffConfig(3, 1), rng)
    assert fidelity_pure(alpha, rho) == pytest.approx(overlap(alpha, rho), abs=1e-14)


def test_power_trace_examples(rng):
    rho = random_density(CutoffConfig(3, 1), rng)
    assert power_trace(rho, 1) == pytest.approx(1, abs=1e-12)
    assert power_trace(single_mode_density(np.eye(2) / 2), 3) == pytest.approx(0.25)
    psi = random_pure_state(CutoffConfig(3, 1), rng)
    assert power_trace(psi, 4) == pytest.approx(1)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_power_trace_three_ways(seed, d, k):
    rng = np.random.default_rng(seed)
    rho = random_density(CutoffConfig(d - 1, 1), rng)
    lam = np.linalg.eigvalsh(rho.data)
    assert power_trace(rho, k) == pytest.approx(np.sum(lam ** k), abs=1e-10)
    via_swap = power_trace_via_swap(rho, k)
    assert via_swap.real == pytest.approx(np.sum(lam ** k), abs=1e-10)
    assert abs(via_swap.imag) < 1e-10


def test_hs_distance_examples():
    zero, one = ket(0, 2), ket(1, 2)
    half = single_mode_density(np.eye(2) / 2)
    assert hs_distance(zero, zero) == pytest.approx(0, abs=1e-15)
    assert hs_distance(zero, one) == pytest.approx(2)
    assert hs_distance(zero, half) == pytest.approx(0.5)


def test_hs_distance_matches_direct(rng):
    a, b = (random_density(CutoffConfig(2, 1), rng) for _ in range(2))
    diff = a.data - b.data
    assert hs_distance(a, b) == pytest.approx(np.trace(diff @ diff).real, abs=1e-12)


def test_witness_examples():
    w = witness_verdict(antisymmetric())
    assert w.verdict is Verdict.WITNESSED_ENTANGLED and w.value == pytest.approx(-1)
    w = witness_verdict(fock_state(C1, (0, 1)))
    assert w.verdict is Verdict.INCONCLUSIVE and w.value == 0
    w = witness_verdict(symmetric())
    assert w.verdict is Verdict.INCONCLUSIVE and w.value == pytest.approx(1)


@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_witness_nonnegative_on_products(seed, n_max):
    rng = np.random.default_rng(seed)
    a = random_density(CutoffConfig(n_max, 1), rng)
    b = random_density(CutoffConfig(n_max, 1), rng)
    w = witness_verdict(tensor(a, b))
    assert w.value >= -1e-10
    assert w.verdict is Verdict.INCONCLUSIVE


@pytest.mark.parametrize("N", [2, 3, 4])
def test_identical_copies_real(rng, N):
    rho = random_density(CutoffConfig(1, 1), rng)
    val = swap_expectation(tensor_power(rho, N), N)
    assert abs(val.imag) < 1e-10


def test_nonhermitian_for_three():
    V = build_swap(CutoffConfig(1, 3), 3)
    assert not V.is_hermitian
    assert build_swap(C1, 2).is_hermitian
