import numpy as np
import pytest

from tiger import imaging
from tiger.corpus import (
    CorpusConfig,
    DegradationConfig,
    FilterRules,
    RenderSpec,
    Triplet,
    build_atlas,
    degrade,
    filter_pair,
    make_corpus,
    read_manifest,
    render_text,
    split_counts,
)
from tiger.corpus.build import _sample_render_spec
from tiger.corpus.render import compose_line_mask, make_background
from tiger.metrics.text import ocr_accuracy
from tiger.metrics.toyocr import toy_ocr
from tiger.regions import TextRegionInstance, placement_native


class TestAtlas:
    def test_deterministic(self):
        a = build_atlas("AB0λ", (16, 16), seed=3)
        b = build_atlas("AB0λ", (16, 16), seed=3)
        for ch in a.charset:
            assert np.array_equal(a.bitmaps[ch], b.bitmaps[ch])

    def test_binary_digits(self):
        a = build_atlas("01", (16, 16), seed=0)
        assert len(a.bitmaps) == 2
        assert all(bm.any() for bm in a.bitmaps.values())
        assert all(bm.shape == (16, 16) for bm in a.bitmaps.values())

    def test_composite_stroke_counts(self):
        a = build_atlas("λμξπφ", (16, 16), seed=1)
        for ch in a.charset:
            assert a.composite_flags[ch]
            assert 2 <= a.stroke_counts[ch] <= 4

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            build_atlas("AA", (16, 16), 0)

    def test_small_glyphs_rejected(self):
        with pytest.raises(ValueError):
            build_atlas("A", (4, 4), 0)


class TestRender:
    def test_single_char_mask_count(self, default_atlas):
        bg = np.full((64, 64, 3), 0.5)
        spec = RenderSpec("A", origin=(20, 20), scale=1.0, rotation=0.0)
        _, mask, region = render_text(bg, default_atlas, spec)
        assert mask.sum() == default_atlas.bitmaps["A"].sum()
        assert region.transcript == "A"

    def test_two_chars_double_count(self, default_atlas):
        bg = np.full((64, 96, 3), 0.5)
        spec = RenderSpec("HH", origin=(20, 20), scale=1.0, rotation=0.0)
        _, mask, _ = render_text(bg, default_atlas, spec)
        assert mask.sum() == 2 * default_atlas.bitmaps["H"].sum()

    def test_mask_marks_exactly_foreground_writes(self, default_atlas):
        bg = np.full((96, 160, 3), 0.5)
        spec = RenderSpec("AB", origin=(30, 30), scale=1.7, rotation=5.0, fg_color=(0.1, 0.2, 0.3))
        hr, mask, _ = render_text(bg, default_atlas, spec)
        fg = mask == 1.0
        assert fg.any()
        assert np.allclose(hr[fg], np.array([0.1, 0.2, 0.3]))

    def test_out_of_charset(self, default_atlas):
        bg = np.full((64, 64, 3), 0.5)
        with pytest.raises(ValueError):
            render_text(bg, default_atlas, RenderSpec("a", origin=(20, 20)))

    def test_quad_overflow(self, default_atlas):
        bg = np.full((32, 32, 3), 0.5)
        with pytest.raises(ValueError):
            render_text(bg, default_atlas, RenderSpec("WWWW", origin=(2, 2), scale=2.0))

    def test_closed_loop_ocr(self, default_atlas):
        cfg = CorpusConfig(count=1)
        exact = 0
        n = 200
        for i in range(n):
            r = np.random.default_rng(1000 + i)
            spec = _sample_render_spec(cfg, default_atlas, r)
            hr, _, region = render_text(make_background(256, 256, r), default_atlas, spec)
            pred, _ = toy_ocr(placement_native(region, target_h=32).extract(hr), default_atlas)
            exact += pred == spec.text
        assert exact / n >= 0.99


class TestDegrade:
    def test_identity_config_quantization_only(self, rng):
        hr = rng.random((32, 32, 3))
        lr = degrade(hr, DegradationConfig(0.0, 1, 0.0, 256, seed=0))
        assert np.abs(lr - hr).max() <= 1.0 / 255.0

    def test_noise_std_monte_carlo(self):
        hr = np.full((256, 256), 0.5)
        lr = degrade(hr, DegradationConfig(0.0, 1, 0.05, 256, seed=7))
        assert abs(float(np.std(lr - hr)) - 0.05) <= 0.005

    def test_deterministic(self, rng):
        hr = rng.random((48, 48, 3))
        cfg = DegradationConfig(1.5, 2, 0.03, 64, seed=11)
        assert np.array_equal(degrade(hr, cfg), degrade(hr, cfg))

    def test_psnr_monotone_in_blur(self, default_atlas):
        from tiger.metrics.quality import psnr

        r = np.random.default_rng(0)
        spec = _sample_render_spec(CorpusConfig(count=1), default_atlas, r)
        hr, _, _ = render_text(make_background(256, 256, r), default_atlas, spec)
        vals = [
            psnr(degrade(hr, DegradationConfig(b, 2, 0.0, 256, seed=0)), hr)
            for b in (0.0, 0.5, 1.0, 2.0, 3.0, 4.0)
        ]
        assert all(vals[i] >= vals[i + 1] for i in range(len(vals) - 1))

    def test_ocr_accuracy_monotone_in_blur(self, default_atlas):
        cfg = CorpusConfig(count=1)
        means = []
        for blur in (0.0, 1.0, 2.0, 3.0):
            accs = []
            for i in range(30):
                r = np.random.default_rng(5000 + i)
                spec = _sample_render_spec(cfg, default_atlas, r)
                hr, _, region = render_text(make_background(256, 256, r), default_atlas, spec)
                lr = degrade(hr, DegradationConfig(blur, 1, 0.0, 256, seed=i))
                pred, _ = toy_ocr(placement_native(region, target_h=32).extract(lr), default_atlas)
                accs.append(ocr_accuracy(pred, spec.text))
            means.append(np.mean(accs))
        assert all(means[i] >= means[i + 1] - 1e-12 for i in range(len(means) - 1))

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            DegradationConfig(blur_sigma=5.0)
        with pytest.raises(ValueError):
            DegradationConfig(downscale_factor=3)
        with pytest.raises(ValueError):
            DegradationConfig(quantization_levels=100)


def _write_triplet(tmp_path, size=(300, 400), text="ABC", text_h=40.0):
    img = np.full((*size, 3), 0.5)
    for name in ("hr", "lr", "mask"):
        imaging.save_image(img if name != "mask" else np.zeros(size), tmp_path / f"{name}.png")
    quad = np.array([[10, 10], [10 + 4 * text_h, 10], [10 + 4 * text_h, 10 + text_h - 1], [10, 10 + text_h - 1]])
    region = TextRegionInstance(quad=quad, transcript=text)
    return Triplet(tmp_path / "hr.png", tmp_path / "lr.png", tmp_path / "mask.png", [region])


class TestFilterRules:
    def test_accept_all_rules(self, tmp_path):
        t = _write_triplet(tmp_path)
        ok, reasons = filter_pair(t, FilterRules(), ocr_score=0.95)
        assert ok and reasons == []

    @pytest.mark.parametrize(
        "size,text_h,score,text,expected",
        [
            ((255, 400), 40.0, 0.95, "ABC", ["min_image_dim"]),
            ((256, 400), 40.0, 0.95, "ABC", []),
            ((300, 400), 31.0, 0.95, "ABC", ["min_text_height"]),
            ((300, 400), 32.0, 0.95, "ABC", []),
            ((300, 400), 40.0, 0.89, "ABC", ["min_ocr_score"]),
            ((300, 400), 40.0, 0.90, "ABC", []),
            ((300, 400), 40.0, 0.95, "   ", ["blank_transcript"]),
        ],
    )
    def test_rule_boundaries(self, tmp_path, size, text_h, score, text, expected):
        t = _write_triplet(tmp_path, size=size, text=text, text_h=text_h)
        ok, reasons = filter_pair(t, FilterRules(), ocr_score=score)
        assert reasons == expected
        assert ok == (not expected)


class TestMakeCorpus:
    def test_counts_and_files(self, tmp_path):
        cfg = CorpusConfig(count=10, image_h=160, image_w=160, scale_min=1.2, scale_max=1.5, seed=1)
        manifest = make_corpus(cfg, tmp_path)
        records = read_manifest(manifest)
        assert len(records) == 10
        assert len(list((tmp_path / "images").glob("*.png"))) == 30

    def test_split_counts_exact(self):
        assert split_counts(100, (0.8, 0.1, 0.1)) == (80, 10, 10)
        assert split_counts(7, (0.5, 0.25, 0.25)) == (3, 2, 2)
        assert sum(split_counts(123, (0.7, 0.2, 0.1))) == 123

    def test_split_assignment(self, tmp_path):
        cfg = CorpusConfig(
            count=20, image_h=160, image_w=160, scale_min=1.2, scale_max=1.5,
            split_train=0.8, split_val=0.1, split_test=0.1, seed=2,
        )
        records = read_manifest(make_corpus(cfg, tmp_path))
        by_split = {s: sum(r.split == s for r in records) for s in ("train", "val", "test")}
        assert by_split == {"train": 16, "val": 2, "test": 2}

    def test_reproducible(self, tmp_path):
        cfg = CorpusConfig(count=4, image_h=160, image_w=160, scale_min=1.2, scale_max=1.5, seed=3)
        m1 = make_corpus(cfg, tmp_path / "a")
        m2 = make_corpus(cfg, tmp_path / "b")
        assert m1.read_text() == m2.read_text()
        for rec in read_manifest(m1):
            for key in ("hr", "lr", "mask"):
                assert (tmp_path / "a" / getattr(rec, key)).read_bytes() == (
                    tmp_path / "b" / getattr(rec, key)
                ).read_bytes()

    def test_real_records_tagged_in_train_only(self, tmp_path):
        cfg = CorpusConfig(
            count=20, image_h=160, image_w=160, scale_min=1.2, scale_max=1.5,
            split_train=0.8, split_val=0.1, split_test=0.1, real_fraction=0.5, seed=4,
        )
        records = read_manifest(make_corpus(cfg, tmp_path))
        real = [r for r in records if r.is_real]
        assert len(real) == 8  # half of the 16 train records
        assert all(r.split == "train" for r in real)

    def test_mask_consistent_with_render(self, tmp_path, default_atlas):
        # Synthetic (non-real) records store the exact render mask: every
        # foreground pixel carries the region's uniform glyph color in HR.
        cfg = CorpusConfig(count=3, image_h=160, image_w=160, scale_min=1.2, scale_max=1.5, real_fraction=0.0, seed=5)
        records = read_manifest(make_corpus(cfg, tmp_path))
        for rec in records:
            hr = imaging.load_image(tmp_path / rec.hr)
            mask = imaging.load_image(tmp_path / rec.mask)
            fg = mask == 1.0
            assert fg.any()
            colors = hr[fg]
            assert np.allclose(colors, colors[0], atol=1 / 255)


def test_compose_line_spacing(default_atlas):
    line = compose_line_mask(default_atlas, "II")
    gw, sp = default_atlas.glyph_w, default_atlas.spacing
    assert line.shape == (default_atlas.glyph_h, 2 * gw + sp)
    assert not line[:, gw : gw + sp].any()
