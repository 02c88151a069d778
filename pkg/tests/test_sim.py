import math

import numpy as np
import pytest

from classtrack import (
    BoundingBox,
    Corruption,
    FusionConfig,
    InvalidConfig,
    ScenarioConfig,
    fuse,
    generate,
    make_corruption_suite,
    validate_pmf,
)


class TestGenerate:
    def test_zero_noise_reproduces_truth_and_template(self):
        cfg = ScenarioConfig(seed=1, num_frames=4, box_jitter_sigma=0.0, conf_jitter=0.0)
        frames, truth = generate(cfg)
        rest = (1.0 - cfg.correct_conf) / cfg.num_classes
        template = validate_pmf([cfg.correct_conf] + [rest] * 4, normalize=True)
        for t, f in enumerate(frames):
            assert len(f.proposals) == cfg.proposals_per_frame
            for p in f.proposals:
                assert p.box == truth.boxes[t] == cfg.true_box
                assert np.array_equal(p.confidence.probs, template.probs)

    def test_determinism_bit_identical(self):
        cfg = ScenarioConfig(seed=123, num_frames=5, walk_sigma=3.0)
        a_frames, a_truth = generate(cfg)
        b_frames, b_truth = generate(cfg)
        assert a_truth == b_truth
        for fa, fb in zip(a_frames, b_frames):
            assert fa.frame_index == fb.frame_index
            for pa, pb in zip(fa.proposals, fb.proposals):
                assert pa.box == pb.box
                assert np.array_equal(pa.confidence.probs, pb.confidence.probs)

    def test_all_confidences_are_exact_simplexes(self):
        frames, _ = generate(ScenarioConfig(seed=5, num_frames=10, conf_jitter=0.08))
        for f in frames:
            for p in f.proposals:
                assert abs(math.fsum(p.confidence.probs) - 1.0) <= 1e-9
                # passes strict validation without renormalization slack
                validate_pmf(p.confidence.probs)

    def test_corruption_is_swapped_copy_of_previous_frame(self):
        cfg = ScenarioConfig(seed=2, num_frames=3, corruption=Corruption(frame=2, wrong_class=3))
        frames, truth = generate(cfg)
        prev, corr = frames[1], frames[2]
        assert len(prev.proposals) == len(corr.proposals)
        i, j = cfg.true_class - 1, 2
        for p_prev, p_corr in zip(prev.proposals, corr.proposals):
            assert p_corr.box == p_prev.box  # boxes bit-identical
            expected = p_prev.confidence.probs.copy()
            expected[i], expected[j] = expected[j], expected[i]
            assert np.array_equal(p_corr.confidence.probs, expected)
        assert truth.boxes[2] == truth.boxes[1]

    def test_zero_jitter_fusion_recovers_truth(self):
        cfg = ScenarioConfig(seed=3, num_frames=2, box_jitter_sigma=0.0, conf_jitter=0.0)
        frames, truth = generate(cfg)
        fcfg = FusionConfig(cov_floor=1e-6)
        for t, f in enumerate(frames):
            m = fuse(list(f.proposals), fcfg)
            assert np.allclose(m.box.as_array(), truth.boxes[t].as_array(), rtol=0, atol=1e-9)
            assert np.allclose(m.box_cov, 1e-6 * np.eye(4), rtol=0, atol=1e-12)

    def test_walk_moves_truth_within_bounds(self):
        cfg = ScenarioConfig(seed=8, num_frames=50, walk_sigma=40.0)
        _, truth = generate(cfg)
        w, h = cfg.image_size
        moved = False
        for box in truth.boxes:
            x1, y1, x2, y2 = box.corners()
            assert 0.0 <= x1 and x2 <= w and 0.0 <= y1 and y2 <= h
            moved = moved or box != cfg.true_box
        assert moved

    def test_sizes_stay_positive_under_heavy_jitter(self):
        frames, _ = generate(
            ScenarioConfig(seed=4, num_frames=5, box_jitter_sigma=200.0)
        )
        for f in frames:
            for p in f.proposals:
                assert p.box.l >= 1.0 and p.box.h >= 1.0


class TestConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(InvalidConfig):
            ScenarioConfig(num_frames=0)
        with pytest.raises(InvalidConfig):
            ScenarioConfig(true_class=5, num_classes=4)
        with pytest.raises(InvalidConfig):
            ScenarioConfig(correct_conf=0.0)
        with pytest.raises(InvalidConfig):
            ScenarioConfig(box_jitter_sigma=-1.0)
        with pytest.raises(InvalidConfig):
            ScenarioConfig(true_box=BoundingBox(0, 0, 10_000, 10.0))

    def test_corruption_needs_predecessor(self):
        with pytest.raises(InvalidConfig):
            ScenarioConfig(corruption=Corruption(frame=0, wrong_class=2))
        with pytest.raises(InvalidConfig):
            ScenarioConfig(num_frames=3, corruption=Corruption(frame=3, wrong_class=2))
        with pytest.raises(InvalidConfig):
            ScenarioConfig(corruption=Corruption(frame=2, wrong_class=1))  # == true_class

    def test_class_names_length_checked(self):
        with pytest.raises(InvalidConfig):
            ScenarioConfig(num_classes=2, class_names=("a",))
        cfg = ScenarioConfig(num_classes=2, class_names=("cat", "dog"))
        assert cfg.resolved_class_names() == ("cat", "dog")
        assert ScenarioConfig(num_classes=2).resolved_class_names() == ("class1", "class2")


class TestSuite:
    def test_twenty_sequences_cover_wrong_classes(self):
        base = ScenarioConfig(seed=100)
        suite = make_corruption_suite(base, 20)
        assert len(suite) == 20
        for i, cfg in enumerate(suite):
            assert cfg.seed == 100 + i
            assert cfg.num_frames == 3
            assert cfg.corruption is not None and cfg.corruption.frame == 2
        wrongs = [cfg.corruption.wrong_class for cfg in suite]
        # round-robin over the 3 non-true classes
        assert wrongs[:6] == [2, 3, 4, 2, 3, 4]

    def test_single_sequence_keeps_base_seed(self):
        suite = make_corruption_suite(ScenarioConfig(seed=42), 1)
        assert len(suite) == 1 and suite[0].seed == 42

    def test_needs_two_classes(self):
        with pytest.raises(InvalidConfig):
            make_corruption_suite(ScenarioConfig(num_classes=1), 5)
        with pytest.raises(InvalidConfig):
            make_corruption_suite(ScenarioConfig(), 0)
