import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import all_deterministic_min, cmi, entropy, grid_channel_oracle, mi
from qsecret.errors import DimensionError, InvariantError
from qsecret.infotheory import (
    ClassicalChannel,
    JointDistribution,
    apply_channel,
    conditional_mutual_information,
    deterministic_channels,
    intrinsic_information,
    is_secret_bit,
    mutual_information,
    project_simplex,
    refine_channel,
    set_partitions,
)


def secret_bit_with(pz):
    pz = np.asarray(pz, dtype=float)
    q = np.zeros((2, 2, pz.size))
    q[0, 0] = q[1, 1] = pz / 2
    return q


def random_dist(shape, seed):
    return np.random.default_rng(seed).dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)


def test_distribution_validation():
    with pytest.raises(InvariantError):
        JointDistribution(np.array([0.5, 0.5]))
    with pytest.raises(InvariantError):
        JointDistribution(np.array([[0.6, 0.6], [-0.2, 0.0]]))
    with pytest.raises(InvariantError):
        JointDistribution(np.array([[0.5, 0.4], [0.0, 0.0]]))
    d = JointDistribution.clamped(np.array([[0.5, -1e-13], [0.5, 0.0]]))
    assert d.probs.min() == 0.0
    with pytest.raises(InvariantError):
        JointDistribution.clamped(np.array([[0.5, -1e-6], [0.5, 0.0]]))


def test_channel_validation():
    with pytest.raises(InvariantError):
        ClassicalChannel(np.array([[0.5, 0.4]]))
    with pytest.raises(InvariantError):
        ClassicalChannel(np.array([[1.5, -0.5]]))
    assert ClassicalChannel.merge_all(3).n_out == 1
    assert ClassicalChannel.deterministic([0, 2, 1]).n_out == 3


def test_mutual_information_examples():
    assert mutual_information(np.full((2, 2), 0.25)) == pytest.approx(0.0, abs=1e-15)
    assert mutual_information(np.array([[0, 0.5], [0.5, 0]])) == pytest.approx(1.0, abs=1e-15)
    p = np.array([[0.4, 0.1], [0.1, 0.4]])
    # direct formula: 1 - h(0.2)
    expect = 1 - entropy([0.2, 0.8])
    assert expect == pytest.approx(0.2781, abs=1e-4)
    assert mutual_information(p) == pytest.approx(expect, abs=1e-14)
    with pytest.raises(DimensionError):
        mutual_information(np.full((2, 2, 1), 0.25))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
def test_mutual_information_range(seed, nx, ny):
    p = random_dist((nx, ny), seed)
    v = mutual_information(p)
    assert v == pytest.approx(mi(p), abs=1e-12)
    assert -1e-15 <= v <= np.log2(min(nx, ny)) + 1e-12


def test_conditional_mutual_information_examples():
    assert conditional_mutual_information(secret_bit_with([0.3, 0.7])) == pytest.approx(1.0, abs=1e-14)
    parity = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            parity[x, y, x ^ y] = 0.25
    assert conditional_mutual_information(parity) == pytest.approx(1.0, abs=1e-14)
    assert mutual_information(parity.sum(axis=2)) == pytest.approx(0.0, abs=1e-14)
    # conditionally independent slices
    rng = np.random.default_rng(3)
    px, py, pz = rng.dirichlet(np.ones(3), 4), rng.dirichlet(np.ones(2), 4), rng.dirichlet(np.ones(4))
    fact = np.einsum("z,zx,zy->xyz", pz, px, py)
    assert conditional_mutual_information(fact) <= 1e-12


def test_cmi_ignores_empty_symbols():
    q = np.zeros((2, 2, 3))
    q[:, :, 0] = [[0.5, 0], [0, 0.5]]
    assert conditional_mutual_information(q) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cmi_nonnegative_and_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    p = random_dist(tuple(rng.integers(1, 4, size=3)), seed)
    v = conditional_mutual_information(p)
    assert v >= 0
    assert v == pytest.approx(max(cmi(p), 0.0), abs=1e-12)


def test_apply_channel_examples():
    p = random_dist((2, 3, 3), 5)
    assert np.allclose(apply_channel(p, ClassicalChannel.identity(3)).probs, p, atol=1e-15)
    merged = apply_channel(p, ClassicalChannel.merge_all(3))
    assert merged.alphabet_sizes == (2, 3, 1)
    assert conditional_mutual_information(merged) == pytest.approx(mutual_information(p.sum(axis=2)))
    ch = ClassicalChannel.random(3, 2, np.random.default_rng(0))
    out = apply_channel(p, ch)
    assert np.max(np.abs(out.probs.sum(axis=2) - p.sum(axis=2))) <= 1e-12
    with pytest.raises(DimensionError):
        apply_channel(p, ClassicalChannel.identity(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_apply_channel_preserves_marginal(seed, nw):
    rng = np.random.default_rng(seed)
    p = random_dist((2, 3, 4), seed)
    out = apply_channel(p, ClassicalChannel.random(4, nw, rng))
    assert np.max(np.abs(out.probs.sum(axis=2) - p.sum(axis=2))) <= 1e-12


def test_set_partitions_counts():
    bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140]
    for n in range(1, 9):
        assert sum(1 for _ in set_partitions(n, n)) == bell[n]
    # Stirling numbers S(4,1)+S(4,2) = 1 + 7
    assert sum(1 for _ in set_partitions(4, 2)) == 8
    chs = deterministic_channels(3, 2)
    assert chs.shape == (4, 3, 2)
    assert np.all(chs.sum(axis=2) == 1)


def test_deterministic_enumeration_matches_unreduced_oracle():
    for s in range(10):
        p = random_dist((2, 3, 4), 100 + s)
        for n_out in (1, 2, 4):
            res = intrinsic_information(p, zbar_size=n_out, restarts=0, seed=s)
            assert res.deterministic_value == pytest.approx(all_deterministic_min(p, n_out), abs=1e-12)


def test_project_simplex():
    v = project_simplex(np.array([0.2, 0.3, 0.5]))
    assert np.allclose(v, [0.2, 0.3, 0.5])
    v = project_simplex(np.array([2.0, 0.0, -1.0]))
    assert np.allclose(v, [1.0, 0.0, 0.0])
    v = project_simplex(np.array([0.5, 0.5, 0.5]))
    assert np.allclose(v, [1 / 3] * 3)


def test_refine_channel_is_monotone():
    p = random_dist((2, 2, 3), 3)
    ch0 = np.random.default_rng(1).dirichlet(np.ones(3), size=3)
    start = cmi(np.einsum("xyz,zw->xyw", p, ch0))
    ch, val, n_eval, conv = refine_channel(p, ch0)
    assert val <= start + 1e-15
    assert conv and n_eval > 1
    assert np.allclose(ch.sum(axis=1), 1.0, atol=1e-12)


def test_intrinsic_examples():
    res = intrinsic_information(secret_bit_with([0.25, 0.25, 0.5]), restarts=4, seed=0)
    assert res.value == pytest.approx(1.0, abs=1e-9)

    rng = np.random.default_rng(9)
    px, py, pz = rng.dirichlet(np.ones(2), 3), rng.dirichlet(np.ones(2), 3), rng.dirichlet(np.ones(3))
    fact = np.einsum("z,zx,zy->xyz", pz, px, py)
    res = intrinsic_information(fact, restarts=0)
    assert res.value <= 1e-12
    assert res.channel.matrix.shape == (3, 3)
    assert np.allclose(np.sort(res.channel.matrix, axis=1)[:, -1], 1.0)  # deterministic

    with pytest.raises(InvariantError):
        intrinsic_information(fact, zbar_size=0)
    with pytest.raises(DimensionError):
        intrinsic_information(fact.sum(axis=2))


def test_intrinsic_random_2x2x2_against_grid_oracle():
    for s in range(5):
        p = random_dist((2, 2, 2), 40 + s)
        res = intrinsic_information(p, restarts=16, seed=s)
        det = all_deterministic_min(p, 2)
        raw, polished = grid_channel_oracle(p, 2, 100_000, seed=s)
        assert res.value <= det + 1e-9
        assert res.value <= raw + 1e-6
        assert res.value == pytest.approx(min(det, polished), abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_intrinsic_invariants(seed):
    rng = np.random.default_rng(seed)
    p = random_dist(tuple(rng.integers(1, 4, size=3)), seed)
    res = intrinsic_information(p, restarts=2, seed=seed)
    assert res.value >= -1e-9
    assert res.value <= conditional_mutual_information(p) + 1e-9
    assert res.value <= mutual_information(p.sum(axis=2)) + 1e-9
    assert res.value <= res.deterministic_value + 1e-12
    # reported channel reproduces the reported value
    assert cmi(apply_channel(p, res.channel).probs) == pytest.approx(res.value, abs=1e-9)


def test_intrinsic_is_seed_deterministic():
    p = random_dist((3, 2, 3), 77)
    a = intrinsic_information(p, restarts=5, seed=11)
    b = intrinsic_information(p, restarts=5, seed=11)
    assert a.value == b.value
    assert a.channel == b.channel


def test_large_alphabet_skips_enumeration():
    p = random_dist((2, 2, 9), 1)
    with pytest.warns(UserWarning, match="exceeds"):
        res = intrinsic_information(p, zbar_size=2, restarts=2, seed=0)
    assert np.isnan(res.deterministic_value)
    assert res.value <= mutual_information(p.sum(axis=2)) + 1e-9


def test_zbar_larger_than_z():
    p = random_dist((2, 2, 2), 8)
    small = intrinsic_information(p, zbar_size=2, restarts=4, seed=0)
    big = intrinsic_information(p, zbar_size=4, restarts=4, seed=0)
    assert big.channel.n_out == 4
    assert big.value <= small.value + 1e-6


def test_is_secret_bit():
    assert is_secret_bit(secret_bit_with([0.2, 0.8]))
    anti = np.zeros((2, 2, 1))
    anti[0, 1, 0] = anti[1, 0, 0] = 0.5
    assert not is_secret_bit(anti)
    leaky = np.zeros((2, 2, 2))
    leaky[0, 0, 0] = leaky[1, 1, 1] = 0.5  # Eve knows the bit
    assert not is_secret_bit(leaky)
    residual = np.max(np.abs(leaky - leaky.sum(axis=2)[:, :, None] * leaky.sum(axis=(0, 1))))
    assert residual == pytest.approx(0.25)
    assert not is_secret_bit(np.full((3, 3, 1), 1 / 9))
    biased = np.zeros((2, 2, 1))
    biased[0, 0, 0], biased[1, 1, 0] = 0.6, 0.4
    assert not is_secret_bit(biased)
