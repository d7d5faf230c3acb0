import numpy as np
import pytest

from hrecon.metrics import psnr, ssim


def psnr_oracle(ref, tst):
    """Straight-line reimplementation: normalize by ref max, peak 1, 10 log10(peak^2/mse)."""
    peak = ref.max()
    a = ref / peak
    b = tst / peak
    mse = ((a - b) ** 2).sum() / a.size
    return 10.0 * np.log10(1.0 / mse)


def ssim_oracle(ref, tst):
    """Brute-force sliding-window SSIM: explicit loops, 11x11 Gaussian weights."""
    peak = ref.max()
    a = ref / peak
    b = tst / peak
    half = 5
    coords = np.arange(11) - 5.0
    g = np.exp(-(coords**2) / (2 * 1.5**2))
    w = np.outer(g, g)
    w /= w.sum()
    c1, c2 = 0.01**2, 0.03**2
    vals = []
    for i in range(half, a.shape[0] - half):
        for j in range(half, a.shape[1] - half):
            wa = a[i - half : i + half + 1, j - half : j + half + 1]
            wb = b[i - half : i + half + 1, j - half : j + half + 1]
            mx = (w * wa).sum()
            my = (w * wb).sum()
            vx = (w * wa * wa).sum() - mx * mx
            vy = (w * wb * wb).sum() - my * my
            vxy = (w * wa * wb).sum() - mx * my
            vals.append(
                ((2 * mx * my + c1) * (2 * vxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
            )
    return float(np.mean(vals))


class TestPSNR:
    def test_identical_is_inf(self):
        img = np.random.default_rng(0).random((16, 16))
        assert psnr(img, img) == float("inf")

    def test_uniform_difference_closed_form(self):
        ref = np.zeros((8, 8))
        ref[0, 0] = 1.0  # peak exactly 1
        assert psnr(ref, ref + 0.1) == pytest.approx(20.0, abs=1e-12)

    def test_matches_independent_oracle(self):
        rng = np.random.default_rng(7)
        ref = rng.random((32, 32)) + 0.1
        tst = np.abs(ref + 0.05 * rng.standard_normal((32, 32)))
        assert psnr(ref, tst) == pytest.approx(psnr_oracle(ref, tst), abs=1e-9)

    def test_rejects_zero_reference(self):
        with pytest.raises(ValueError, match="identically zero"):
            psnr(np.zeros((8, 8)), np.ones((8, 8)))

    def test_mse_symmetric_peak_reference_defined(self):
        rng = np.random.default_rng(5)
        a = rng.random((16, 16)) + 0.1
        b = rng.random((16, 16)) + 0.1
        # equal maxima: swapping arguments changes nothing
        a[0, 0] = b[0, 0] = 2.0
        assert psnr(a, b) == pytest.approx(psnr(b, a), abs=1e-12)
        # different maxima: the reference defines the normalization
        c = b * 0.5
        assert psnr(a, c) != pytest.approx(psnr(c, a), abs=1e-6)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            psnr(np.ones((8, 8)), np.ones((8, 9)))


class TestSSIM:
    def test_self_similarity_exact(self):
        img = np.random.default_rng(1).random((20, 20))
        assert ssim(img, img) == 1.0

    def test_negated_structure_below_one(self):
        rng = np.random.default_rng(2)
        pattern = rng.standard_normal((24, 24))
        pattern -= pattern.mean()
        pattern /= np.abs(pattern).max() * 2.5  # keep both images in [0, 1]
        ref = 0.5 + pattern
        flipped = 0.5 - pattern
        assert ssim(ref, flipped) < 1.0

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(3):
            ref = rng.random((64, 64)) + 0.05
            tst = np.abs(ref + 0.1 * rng.standard_normal((64, 64)))
            assert ssim(ref, tst) == pytest.approx(ssim_oracle(ref, tst), abs=1e-6)

    def test_rejects_small_images(self):
        with pytest.raises(ValueError, match="smaller than"):
            ssim(np.ones((10, 10)), np.ones((10, 10)))
