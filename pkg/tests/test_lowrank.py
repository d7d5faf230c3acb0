import numpy as np
import pytest

from hrecon.lowrank import LowRankConfig, fold, lowrank_rotate, svd_truncate, unfold


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def unfold_oracle(t, n):
    """Enumerate mode-n fibers by hand: row = mode-n index, columns run over
    the remaining indices in ascending-mode order with the last varying fastest."""
    shape = t.shape
    rest = [m for m in range(t.ndim) if m != n]
    out = np.zeros((shape[n], int(np.prod([shape[m] for m in rest]))), dtype=t.dtype)
    for idx in np.ndindex(*shape):
        col = 0
        for m in rest:
            col = col * shape[m] + idx[m]
        out[idx[n], col] = t[idx]
    return out


def random_rank_tau_tucker(rng, shape, tau):
    """Tensor with all three mode unfoldings of rank <= tau."""
    core = rng.standard_normal((tau, tau, tau)) + 1j * rng.standard_normal((tau, tau, tau))
    t = core
    for n, dim in enumerate(shape):
        q, _ = np.linalg.qr(rng.standard_normal((dim, tau)) + 1j * rng.standard_normal((dim, tau)))
        t = fold(q @ unfold(t, n), n, t.shape[:n] + (dim,) + t.shape[n + 1 :])
    return t


def matrix_rank(m, tol=1e-8):
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


class TestUnfoldFold:
    def test_hand_worked_example(self):
        t = np.arange(8).reshape(2, 2, 2)  # t[i,j,k] = 4i + 2j + k
        assert np.array_equal(unfold(t, 0), [[0, 1, 2, 3], [4, 5, 6, 7]])

    def test_matches_enumeration_oracle_all_modes(self):
        rng = np.random.default_rng(0)
        t = rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))
        for n in range(3):
            assert np.array_equal(unfold(t, n), unfold_oracle(t, n))

    def test_round_trip_all_modes(self):
        rng = np.random.default_rng(1)
        t = rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))
        for n in range(3):
            assert np.array_equal(fold(unfold(t, n), n, t.shape), t)

    def test_norm_preserved(self):
        rng = np.random.default_rng(2)
        t = rng.standard_normal((4, 5, 6))
        for n in range(3):
            assert np.isclose(np.linalg.norm(unfold(t, n)), np.linalg.norm(t))

    def test_fold_then_unfold_identity(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((4, 15))
        assert np.array_equal(unfold(fold(m, 1, (3, 4, 5)), 1), m)

    def test_fold_shape_mismatch(self):
        with pytest.raises(ValueError, match="does not match mode-1"):
            fold(np.zeros((4, 14)), 1, (3, 4, 5))

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            unfold(np.zeros((2, 2, 2)), 3)


class TestSvdTruncate:
    def test_rank_one_unchanged(self):
        rng = np.random.default_rng(4)
        m = np.outer(rng.standard_normal(6), rng.standard_normal(5))
        assert rel_err(svd_truncate(m, 1), m) <= 1e-12
        assert rel_err(svd_truncate(m, 3), m) <= 1e-12

    def test_full_tau_identity(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        assert rel_err(svd_truncate(m, 5), m) <= 1e-12
        assert rel_err(svd_truncate(m, 99), m) <= 1e-12

    def test_eckart_young_residual_and_search(self):
        rng = np.random.default_rng(6)
        m = rng.standard_normal((6, 5))
        s = np.linalg.svd(m, compute_uv=False)
        out = svd_truncate(m, 2)
        residual = np.linalg.norm(m - out) ** 2
        assert residual == pytest.approx(np.sum(s[2:] ** 2), rel=1e-10)
        # no random rank-2 candidate does better
        best = min(
            np.linalg.norm(m - np.outer(rng.standard_normal(6), rng.standard_normal(5))
                           - np.outer(rng.standard_normal(6), rng.standard_normal(5))) ** 2
            for _ in range(2000)
        )
        assert residual <= best + 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        m = rng.standard_normal((8, 6)) + 1j * rng.standard_normal((8, 6))
        once = svd_truncate(m, 3)
        assert rel_err(svd_truncate(once, 3), once) <= 1e-10

    def test_never_expands_norm(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            m = rng.standard_normal((7, 9))
            assert np.linalg.norm(svd_truncate(m, 2)) <= np.linalg.norm(m) + 1e-12

    def test_rejects_bad_tau(self):
        with pytest.raises(ValueError, match="tau"):
            svd_truncate(np.eye(3), 0)


class TestLowRankRotate:
    def test_tucker_fixed_point(self):
        rng = np.random.default_rng(9)
        t = random_rank_tau_tucker(rng, (8, 7, 6), 2)
        out = lowrank_rotate(t, LowRankConfig(tau=2))
        assert rel_err(out, t) <= 1e-10

    def test_zero_tensor(self):
        out = lowrank_rotate(np.zeros((4, 4, 4), dtype=complex), LowRankConfig(tau=2))
        assert np.all(out == 0)

    def test_mode_ranks_after_pass(self):
        rng = np.random.default_rng(10)
        t = rng.standard_normal((8, 8, 8)) + 1j * rng.standard_normal((8, 8, 8))
        out = lowrank_rotate(t, LowRankConfig(tau=2, mode_order=(0, 1, 2)))
        assert matrix_rank(unfold(out, 2)) <= 2
        # hard truncation projects fibers, so earlier modes cannot re-expand either
        assert matrix_rank(unfold(out, 0)) <= 2
        assert matrix_rank(unfold(out, 1)) <= 2
        # the pass is still not the joint-optimal approximation: truncating in a
        # different order generally gives a different tensor
        other = lowrank_rotate(t, LowRankConfig(tau=2, mode_order=(2, 1, 0)))
        assert np.linalg.norm(out - other) > 1e-6

    def test_large_tau_identity(self):
        rng = np.random.default_rng(11)
        t = rng.standard_normal((5, 6, 7))
        out = lowrank_rotate(t, LowRankConfig(tau=7))
        assert rel_err(out, t) <= 1e-10

    def test_norm_nonexpansive(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            t = rng.standard_normal((6, 6, 6))
            out = lowrank_rotate(t, LowRankConfig(tau=3))
            assert np.linalg.norm(out) <= np.linalg.norm(t) + 1e-12

    def test_soft_threshold_mode(self):
        rng = np.random.default_rng(13)
        t = rng.standard_normal((5, 5, 5))
        out = lowrank_rotate(t, LowRankConfig(tau=1, soft_threshold=0.0))
        # zero shrinkage leaves the tensor unchanged regardless of tau
        assert rel_err(out, t) <= 1e-10
        shrunk = lowrank_rotate(t, LowRankConfig(tau=1, soft_threshold=0.5))
        assert np.linalg.norm(shrunk) < np.linalg.norm(t)

    def test_config_validation(self):
        with pytest.raises(ValueError, match="permutation"):
            LowRankConfig(tau=1, mode_order=(0, 1, 1))
        with pytest.raises(ValueError, match="sum to 1"):
            LowRankConfig(tau=1, weights=(0.5, 0.2, 0.2))
        with pytest.raises(ValueError, match="tau"):
            LowRankConfig(tau=0)
