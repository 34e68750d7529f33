import json

import numpy as np
import pytest

from tiger import imaging
from tiger.corpus import CorpusConfig, make_corpus, read_manifest
from tiger.metrics import (
    ToyOcrEngine,
    cropped_metrics,
    evaluate_method,
    levenshtein,
    ocr_accuracy,
    psnr,
    ssim,
    structural_dissimilarity_np,
    toy_ocr,
)
from tiger.corpus.render import RenderSpec, render_text
from tiger.regions import TextRegionInstance, placement_native


def lev_table_oracle(a: str, b: str) -> int:
    """Full DP table, kept separate from the production implementation."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[n][m]


class TestPSNR:
    def test_identical_caps_at_100(self, rng):
        x = rng.random((16, 16, 3))
        assert psnr(x, x) == 100.0

    def test_constant_difference(self):
        x = np.zeros((8, 8))
        y = np.full((8, 8), 0.5)
        assert psnr(x, y) == pytest.approx(10 * np.log10(1 / 0.25), abs=1e-9)
        assert psnr(x, y) == pytest.approx(6.0206, abs=1e-4)

    def test_noise_doubling_decreases(self, rng):
        x = np.full((32, 32), 0.5)
        n = rng.uniform(-0.1, 0.1, size=(32, 32))
        assert psnr(x, np.clip(x + 2 * n, 0, 1)) < psnr(x, np.clip(x + n, 0, 1))

    def test_symmetry(self, rng):
        x, y = rng.random((12, 12)), rng.random((12, 12))
        assert psnr(x, y) == psnr(y, x)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((4, 4)), np.zeros((4, 5)))


class TestSSIM:
    def test_self_is_one(self, rng):
        x = rng.random((24, 24, 3))
        assert ssim(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_inverted_texture_negative(self, rng):
        x = 0.3 + 0.4 * rng.random((32, 32))
        assert ssim(x, 1.0 - x) < 0.0

    def test_constant_pair_closed_form(self):
        a, b = 0.3, 0.6
        x = np.full((16, 16), a)
        y = np.full((16, 16), b)
        c1 = 0.01**2
        expected = (2 * a * b + c1) / (a**2 + b**2 + c1)  # zero-variance limit
        assert ssim(x, y) == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self, rng):
        x, y = rng.random((16, 16)), rng.random((16, 16))
        assert ssim(x, y) == pytest.approx(ssim(y, x), abs=1e-12)

    def test_too_small(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))


class TestCroppedMetrics:
    def test_full_image_region_matches_full_metrics(self, rng):
        x = rng.random((32, 48, 3))
        y = np.clip(x + rng.normal(0, 0.05, x.shape), 0, 1)
        h, w = x.shape[:2]
        quad = [[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]]
        out = cropped_metrics(x, y, [TextRegionInstance(quad=quad, transcript="t")])
        assert out["psnr_cr"] == pytest.approx(psnr(x, y), abs=1e-9)
        assert out["ssim_cr"] == pytest.approx(ssim(x, y), abs=1e-9)

    def test_identical_images(self, rng):
        x = rng.random((40, 40, 3))
        quad = [[4, 4], [30, 4], [30, 20], [4, 20]]
        out = cropped_metrics(x, x, [TextRegionInstance(quad=quad, transcript="t")])
        assert out["psnr_cr"] == 100.0
        assert out["ssim_cr"] == pytest.approx(1.0, abs=1e-12)

    def test_mean_of_per_region_metrics(self, rng):
        x = rng.random((64, 64, 3))
        y = x.copy()
        y[8:24, 8:40] = np.clip(y[8:24, 8:40] + 0.1, 0, 1)  # perturb region 1 only
        q1 = [[8, 8], [39, 8], [39, 23], [8, 23]]
        q2 = [[8, 40], [39, 40], [39, 55], [8, 55]]
        regions = [TextRegionInstance(quad=q1, transcript="a"), TextRegionInstance(quad=q2, transcript="b")]
        out = cropped_metrics(x, y, regions)
        singles = [cropped_metrics(x, y, [r])["psnr_cr"] for r in regions]
        assert out["psnr_cr"] == pytest.approx(np.mean(singles), abs=1e-9)
        assert singles[1] == 100.0

    def test_zero_regions_absent(self, rng):
        x = rng.random((16, 16))
        out = cropped_metrics(x, x, [])
        assert out["psnr_cr"] is None and out["ssim_cr"] is None

    def test_out_of_bounds_quad(self, rng):
        x = rng.random((16, 16))
        with pytest.raises(ValueError):
            cropped_metrics(x, x, [TextRegionInstance(quad=[[0, 0], [20, 0], [20, 8], [0, 8]], transcript="t")])


class TestLevenshtein:
    @pytest.mark.parametrize("a,b,d", [("", "ab", 2), ("abc", "abc", 0), ("kitten", "sitting", 3)])
    def test_fixtures(self, a, b, d):
        assert levenshtein(a, b) == d
        assert lev_table_oracle(a, b) == d

    def test_matches_oracle_random(self, rng):
        alphabet = "abcde"
        for _ in range(200):
            a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 9)))
            b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 9)))
            assert levenshtein(a, b) == lev_table_oracle(a, b)

    def test_triangle_inequality(self, rng):
        alphabet = "abc"
        for _ in range(150):
            s = ["".join(rng.choice(list(alphabet), size=rng.integers(0, 7))) for _ in range(3)]
            assert levenshtein(s[0], s[2]) <= levenshtein(s[0], s[1]) + levenshtein(s[1], s[2])


class TestOcrAccuracy:
    def test_fixtures(self):
        assert ocr_accuracy("abc", "abc") == 1.0
        assert ocr_accuracy("", "ab") == 0.0
        assert ocr_accuracy("kitten", "sitting") == pytest.approx(10 / 13, abs=1e-12)

    def test_both_empty(self):
        assert ocr_accuracy("", "") == 1.0

    def test_symmetric_and_bounded(self, rng):
        alphabet = "xyz01"
        for _ in range(100):
            a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 8)))
            b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 8)))
            v = ocr_accuracy(a, b)
            assert 0.0 <= v <= 1.0
            assert v == ocr_accuracy(b, a)
            if len(a) + len(b) > 0:
                assert (v == 1.0) == (a == b)


class TestToyOcr:
    def test_clean_render_exact(self, default_atlas):
        bg = np.full((64, 96, 3), 0.5)
        hr, _, region = render_text(bg, default_atlas, RenderSpec("A7", origin=(20, 20), scale=1.0))
        pred, conf = toy_ocr(placement_native(region).extract(hr), default_atlas)
        assert pred == "A7"
        assert conf >= 0.99

    def test_blank_region(self, default_atlas):
        assert toy_ocr(np.full((32, 64), 0.5), default_atlas) == ("", 0.0)

    def test_closed_loop_500(self, default_atlas):
        from tiger.corpus.build import _sample_render_spec
        from tiger.corpus.render import make_background

        cfg = CorpusConfig(count=1)
        exact = 0
        n = 500
        for i in range(n):
            r = np.random.default_rng(1000 + i)
            spec = _sample_render_spec(cfg, default_atlas, r)
            hr, _, region = render_text(make_background(256, 256, r), default_atlas, spec)
            pred, _ = toy_ocr(placement_native(region, target_h=32).extract(hr), default_atlas)
            exact += pred == spec.text
        assert exact / n >= 0.99


class TestPerceptualProxy:
    def test_zero_on_identical(self, rng):
        x = rng.random((32, 32, 3))
        assert structural_dissimilarity_np(x, x) == pytest.approx(0.0, abs=1e-9)

    def test_symmetric_nonnegative(self, rng):
        x, y = rng.random((32, 32, 3)), rng.random((32, 32, 3))
        d = structural_dissimilarity_np(x, y)
        assert d >= 0.0
        assert d == pytest.approx(structural_dissimilarity_np(y, x), abs=1e-9)


@pytest.fixture(scope="module")
def tiny_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny_corpus")
    cfg = CorpusConfig(count=6, image_h=160, image_w=160, scale_min=1.2, scale_max=1.5,
                       split_train=0.5, split_val=0.0, split_test=0.5, real_fraction=0.0, seed=9)
    manifest = make_corpus(cfg, root)
    return root, read_manifest(manifest)


class TestEvaluateMethod:
    def _copy_as_sr(self, root, records, key, out):
        out.mkdir(exist_ok=True)
        for rec in records:
            data = (root / getattr(rec, key)).read_bytes()
            (out / f"{rec.id}.png").write_bytes(data)

    def test_hr_copies_perfect(self, tiny_corpus, tmp_path, default_atlas):
        root, records = tiny_corpus
        self._copy_as_sr(root, records, "hr", tmp_path / "sr")
        rep = evaluate_method(records, tmp_path / "sr", root, ToyOcrEngine(default_atlas))
        assert rep.aggregates["psnr"] == 100.0
        assert rep.aggregates["ssim"] == pytest.approx(1.0, abs=1e-9)
        assert rep.aggregates["ocr_a"] >= 0.99

    def test_lr_copies_dominated_by_hr(self, tiny_corpus, tmp_path, default_atlas):
        root, records = tiny_corpus
        self._copy_as_sr(root, records, "hr", tmp_path / "sr_hr")
        self._copy_as_sr(root, records, "lr", tmp_path / "sr_lr")
        engine = ToyOcrEngine(default_atlas)
        rep_hr = evaluate_method(records, tmp_path / "sr_hr", root, engine)
        rep_lr = evaluate_method(records, tmp_path / "sr_lr", root, engine)
        for key in ("psnr", "ssim", "psnr_cr", "ssim_cr", "ocr_a"):
            assert rep_lr.aggregates[key] <= rep_hr.aggregates[key]

    def test_deterministic_reports(self, tiny_corpus, tmp_path, default_atlas):
        root, records = tiny_corpus
        self._copy_as_sr(root, records, "lr", tmp_path / "sr")
        engine = ToyOcrEngine(default_atlas)
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        evaluate_method(records, tmp_path / "sr", root, engine).write_json(p1)
        evaluate_method(records, tmp_path / "sr", root, engine).write_json(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_sr_skipped(self, tiny_corpus, tmp_path, default_atlas):
        root, records = tiny_corpus
        self._copy_as_sr(root, records, "hr", tmp_path / "sr")
        (tmp_path / "sr" / f"{records[0].id}.png").unlink()
        rep = evaluate_method(records, tmp_path / "sr", root, ToyOcrEngine(default_atlas))
        assert len(rep.per_image) == len(records) - 1

    def test_aggregates_are_means(self, tiny_corpus, tmp_path, default_atlas):
        root, records = tiny_corpus
        self._copy_as_sr(root, records, "lr", tmp_path / "sr")
        rep = evaluate_method(records, tmp_path / "sr", root, ToyOcrEngine(default_atlas))
        assert rep.aggregates["psnr"] == pytest.approx(np.mean([r.psnr for r in rep.per_image]), abs=1e-12)
        assert rep.aggregates["ocr_a"] == pytest.approx(np.mean([r.ocr_a for r in rep.per_image]), abs=1e-12)

    def test_csv_row_count(self, tiny_corpus, tmp_path, default_atlas):
        root, records = tiny_corpus
        self._copy_as_sr(root, records, "hr", tmp_path / "sr")
        rep = evaluate_method(records, tmp_path / "sr", root, ToyOcrEngine(default_atlas))
        out = tmp_path / "report.csv"
        rep.write_csv(out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == len(records) + 2  # header + per-image + aggregate
        rep.write_json(tmp_path / "report.json")
        assert json.loads((tmp_path / "report.json").read_text())["aggregates"]["psnr"] == 100.0
