import numpy as np
import pytest

from tiger import imaging
from tiger.imaging import Box


def bilinear_oracle(img, y, x):
    """Scalar bilinear sample with edge clamping (independent of the vectorized path)."""
    h, w = img.shape[:2]
    x0, y0 = int(np.floor(x)), int(np.floor(y))
    tx, ty = x - x0, y - y0

    def at(yy, xx):
        return img[min(max(yy, 0), h - 1), min(max(xx, 0), w - 1)]

    return (
        at(y0, x0) * (1 - tx) * (1 - ty)
        + at(y0, x0 + 1) * tx * (1 - ty)
        + at(y0 + 1, x0) * (1 - tx) * ty
        + at(y0 + 1, x0 + 1) * tx * ty
    )


def conv3_oracle(img, kernel):
    """Direct 3x3 correlation with replicate padding, plain loops."""
    h, w = img.shape
    p = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(3):
                for j in range(3):
                    acc += kernel[i, j] * p[y + i, x + j]
            out[y, x] = acc
    return out


class TestIO:
    def test_roundtrip_quantization_bound(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.random((16, 16, 3))
        p = tmp_path / "a.png"
        imaging.save_image(img, p)
        back = imaging.load_image(p)
        assert np.abs(back - img).max() <= 1.0 / 255.0

    def test_all_zero_roundtrip(self, tmp_path):
        img = np.zeros((8, 8))
        p = tmp_path / "z.png"
        imaging.save_image(img, p)
        assert np.array_equal(imaging.load_image(p), img)

    def test_255_maps_to_one(self, tmp_path):
        from PIL import Image as PILImage

        p = tmp_path / "w.png"
        PILImage.fromarray(np.full((4, 4), 255, dtype=np.uint8), mode="L").save(p)
        assert imaging.load_image(p).max() == 1.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imaging.load_image(tmp_path / "nope.png")

    def test_save_missing_parent(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imaging.save_image(np.zeros((4, 4)), tmp_path / "sub" / "x.png")


class TestResize:
    @pytest.mark.parametrize("method", ["nearest", "bilinear", "bicubic"])
    def test_identity_size(self, method):
        rng = np.random.default_rng(1)
        img = rng.random((7, 9, 3))
        out = imaging.resize(img, 7, 9, method)
        assert np.array_equal(out, img)

    @pytest.mark.parametrize("method", ["nearest", "bilinear", "bicubic"])
    def test_constant_preserved(self, method):
        img = np.full((5, 6), 0.37)
        out = imaging.resize(img, 11, 4, method)
        assert np.allclose(out, 0.37, atol=1e-12)

    def test_checkerboard_bilinear_matches_oracle(self):
        img = np.array([[0.0, 1.0], [1.0, 0.0]])
        out = imaging.resize(img, 4, 4, "bilinear")
        # Same pixel-center convention, evaluated per coordinate by the scalar oracle.
        for v in range(4):
            for u in range(4):
                sy = (v + 0.5) * 2 / 4 - 0.5
                sx = (u + 0.5) * 2 / 4 - 0.5
                assert out[v, u] == pytest.approx(bilinear_oracle(img, sy, sx), abs=1e-12)

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            imaging.resize(np.zeros((4, 4)), 0, 3)


class TestCropPaste:
    def test_crop_paste_roundtrip(self):
        rng = np.random.default_rng(2)
        img = rng.random((10, 12, 3))
        b = Box(3, 2, 5, 6)
        assert np.array_equal(imaging.paste(img, imaging.crop(img, b), b), img)

    def test_full_crop_identity(self):
        rng = np.random.default_rng(3)
        img = rng.random((6, 7))
        assert np.array_equal(imaging.crop(img, Box(0, 0, 7, 6)), img)

    def test_single_pixel_paste(self):
        canvas = np.zeros((5, 5))
        out = imaging.paste(canvas, np.ones((1, 1)), Box(0, 0, 1, 1))
        assert out[0, 0] == 1.0
        assert np.count_nonzero(out != canvas) == 1

    def test_out_of_bounds(self):
        with pytest.raises(ValueError):
            imaging.crop(np.zeros((4, 4)), Box(2, 2, 4, 4))
        with pytest.raises(ValueError):
            imaging.paste(np.zeros((4, 4)), np.zeros((2, 2)), Box(3, 3, 2, 2))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            imaging.paste(np.zeros((4, 4)), np.zeros((2, 3)), Box(0, 0, 2, 2))


class TestSobel:
    def test_constant_zero(self):
        g = imaging.sobel(np.full((6, 6), 0.5))
        assert np.allclose(g.gx, 0.0) and np.allclose(g.gy, 0.0)
        assert np.allclose(g.magnitude, 0.0)

    def test_step_edge_fixture_matches_hand_convolution(self):
        img = np.zeros((5, 5))
        img[:, 3:] = 1.0  # vertical step between columns 2 and 3
        g = imaging.sobel(img)
        assert np.allclose(g.gx, conv3_oracle(img, imaging.SOBEL_X))
        assert np.allclose(g.gy, conv3_oracle(img, imaging.SOBEL_Y))
        # Columns flanking the edge see the full unnormalized kernel weight.
        assert np.allclose(g.gx[:, 2], 4.0)
        assert np.allclose(g.gx[:, 3], 4.0)
        assert np.allclose(g.gy, 0.0)

    def test_transpose_swaps_planes(self):
        rng = np.random.default_rng(4)
        img = rng.random((6, 9))
        g = imaging.sobel(img)
        gt = imaging.sobel(img.T)
        assert np.allclose(gt.gx, g.gy.T)
        assert np.allclose(gt.gy, g.gx.T)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        img = rng.random((8, 8)) * 0.5
        g1 = imaging.sobel(img)
        g2 = imaging.sobel(2.0 * img)
        assert np.allclose(g2.gx, 2.0 * g1.gx)
        assert np.allclose(g2.gy, 2.0 * g1.gy)

    def test_magnitude_definition(self):
        rng = np.random.default_rng(6)
        g = imaging.sobel(rng.random((7, 7)))
        assert np.allclose(g.magnitude, np.sqrt(g.gx**2 + g.gy**2))


class TestWarp:
    def test_identity(self):
        rng = np.random.default_rng(7)
        img = rng.random((9, 11, 3))
        out, valid = imaging.warp_homography(img, np.eye(3), 9, 11)
        assert np.allclose(out, img, atol=1e-12)
        assert valid.all()

    def test_integer_translation_nearest(self):
        rng = np.random.default_rng(8)
        img = rng.random((6, 10))
        H = np.array([[1.0, 0.0, 3.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        out, valid = imaging.warp_homography(img, H, 6, 10, interp="nearest")
        assert np.allclose(out[:, 3:], img[:, :7])
        assert not valid[:, :3].any()
        assert valid[:, 3:].all()
        assert np.allclose(out[:, :3], 0.0)

    def test_projective_roundtrip_psnr(self):
        # Smooth gradient test image; warp then warp back, check interior fidelity.
        h, w = 64, 64
        yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        img = 0.25 + 0.5 * (xx / (w - 1) * 0.6 + yy / (h - 1) * 0.4)
        rng = np.random.default_rng(9)
        src = np.array([[0, 0], [w - 1.0, 0], [w - 1.0, h - 1.0], [0, h - 1.0]])
        dst = src + rng.uniform(-4, 4, size=(4, 2))
        H = imaging.homography_from_points(src, dst)
        fwd, _ = imaging.warp_homography(img, H, h, w)
        back, valid = imaging.warp_homography(fwd, np.linalg.inv(H), h, w)
        interior = valid.copy()
        interior[:8] = interior[-8:] = False
        interior[:, :8] = interior[:, -8:] = False
        mse = np.mean((back[interior] - img[interior]) ** 2)
        assert 10 * np.log10(1.0 / mse) > 35.0

    def test_singular_rejected(self):
        H = np.zeros((3, 3))
        with pytest.raises(ValueError):
            imaging.warp_homography(np.zeros((4, 4)), H, 4, 4)


class TestHomographyFromPoints:
    def test_recovers_known_transform(self):
        rng = np.random.default_rng(10)
        H_true = np.array([[1.1, 0.02, 3.0], [-0.03, 0.95, -2.0], [1e-4, -2e-4, 1.0]])
        src = rng.uniform(0, 50, size=(4, 2))
        dst = imaging.apply_homography(H_true, src)
        H = imaging.homography_from_points(src, dst)
        assert np.allclose(H, H_true, atol=1e-8)

    def test_degenerate_rejected(self):
        src = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        with pytest.raises(ValueError):
            imaging.homography_from_points(src, src)
