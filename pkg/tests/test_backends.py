import numpy as np
import pytest

from eyeseg.backends import (
    MockBackend,
    OracleBackend,
    PredictionSet,
    SegmenterBackend,
    average_mask,
    build_backend,
    combine_predictions,
    image_digest,
    select_prompted_mask,
    to_rgb_uint8,
)
from eyeseg.datasets import feature_mask
from eyeseg.errors import (
    CapabilityError,
    EmptyPromptError,
    InvalidHandleError,
)
from eyeseg.masks import BACKGROUND, FOREGROUND, Box, Point, make_rng
from eyeseg.prompts import PromptSet, StrategySpec, build_prompts
from eyeseg.synthetic import synthetic_item


def _mask(shape, coords):
    m = np.zeros(shape, dtype=bool)
    for x, y in coords:
        m[y, x] = True
    return m


class TestConversion:
    def test_grayscale_to_three_identical_channels(self):
        gray = np.arange(12, dtype=np.uint8).reshape(3, 4)
        rgb = to_rgb_uint8(gray)
        assert rgb.shape == (3, 4, 3)
        assert (rgb[..., 0] == rgb[..., 1]).all() and (rgb[..., 1] == rgb[..., 2]).all()
        assert (rgb[..., 0] == gray).all()

    def test_rgb_passthrough(self):
        rgb = np.zeros((2, 2, 3), dtype=np.uint8)
        assert to_rgb_uint8(rgb) is rgb or (to_rgb_uint8(rgb) == rgb).all()

    def test_clips_wide_range(self):
        arr = np.array([[-5.0, 300.0]])
        out = to_rgb_uint8(arr)
        assert out.dtype == np.uint8
        assert out[0, 0, 0] == 0 and out[0, 1, 0] == 255

    def test_digest_distinguishes_content(self):
        a = np.zeros((4, 4), np.uint8)
        b = a.copy()
        b[0, 0] = 1
        assert image_digest(a) == image_digest(a.copy())
        assert image_digest(a) != image_digest(b)


class TestPredictionSet:
    def test_validation(self):
        m = np.zeros((2, 2), bool)
        with pytest.raises(ValueError):
            PredictionSet(masks=(), scores=())
        with pytest.raises(ValueError):
            PredictionSet(masks=(m,), scores=(0.5, 0.6))
        with pytest.raises(ValueError):
            PredictionSet(masks=(m, np.zeros((3, 3), bool)), scores=(0.5, 0.6))

    def test_select_argmax(self):
        masks = tuple(_mask((4, 4), [(i, 0)]) for i in range(3))
        preds = PredictionSet(masks=masks, scores=(0.2, 0.9, 0.4))
        assert (select_prompted_mask(preds) == masks[1]).all()

    def test_select_single(self):
        m = _mask((4, 4), [(1, 1)])
        preds = PredictionSet(masks=(m,), scores=(0.1,))
        assert (select_prompted_mask(preds) == m).all()

    def test_select_tie_lowest_index(self):
        masks = (_mask((4, 4), [(0, 0)]), _mask((4, 4), [(1, 1)]))
        preds = PredictionSet(masks=masks, scores=(0.5, 0.5))
        assert (select_prompted_mask(preds) == masks[0]).all()

    def test_average_policy_majority(self):
        a = np.ones((2, 2), bool)
        b = np.ones((2, 2), bool)
        c = np.zeros((2, 2), bool)
        preds = PredictionSet(masks=(a, b, c), scores=(0.1, 0.2, 0.9))
        assert average_mask(preds).all()
        assert not combine_predictions(preds, "best").any()
        with pytest.raises(ValueError):
            combine_predictions(preds, "vote")


class TestMockBackend:
    def test_disk_around_first_foreground_point(self):
        backend = MockBackend(radius=3)
        image = np.zeros((20, 30), np.uint8)
        handle = backend.embed(image)
        preds = backend.predict(
            handle, PromptSet(points=(Point(10, 10, FOREGROUND),))
        )
        mask = preds.masks[0]
        assert mask[10, 10] and mask[10, 13] and not mask[10, 14]
        assert mask.shape == (20, 30)

    def test_box_fill_without_points(self):
        backend = MockBackend()
        image = np.zeros((10, 10), np.uint8)
        handle = backend.embed(image)
        preds = backend.predict(handle, PromptSet(box=Box(2, 3, 4, 5)))
        mask = preds.masks[0]
        assert mask.sum() == 3 * 3 and mask[3, 2] and mask[5, 4]

    def test_everything_grid_is_fixed_tiling(self):
        backend = MockBackend(grid=(2, 3))
        image = np.zeros((10, 12), np.uint8)
        preds = backend.segment_everything(image)
        assert len(preds) == 6
        union = np.zeros((10, 12), int)
        for m in preds.masks:
            union += m.astype(int)
        assert (union == 1).all()  # exact tiling, no gaps or overlaps
        again = backend.segment_everything(image)
        for a, b in zip(preds.masks, again.masks):
            assert (a == b).all()

    def test_rejects_foreign_handle(self):
        backend = MockBackend()
        other = OracleBackend()
        image = np.zeros((5, 5), np.uint8)
        handle = other.embed(image)
        with pytest.raises(InvalidHandleError):
            backend.predict(handle, PromptSet(points=(Point(1, 1, FOREGROUND),)))

    def test_rejects_empty_prompts(self):
        backend = MockBackend()
        handle = backend.embed(np.zeros((5, 5), np.uint8))
        with pytest.raises(EmptyPromptError):
            backend.predict(handle, PromptSet())

    def test_deterministic_embed_predict(self):
        backend = MockBackend()
        image, _ = synthetic_item(4)
        h1, h2 = backend.embed(image), backend.embed(image)
        assert h1 == h2
        prompts = PromptSet(points=(Point(50, 40, FOREGROUND),))
        a = backend.predict(h1, prompts)
        b = backend.predict(h2, prompts)
        assert (a.masks[0] == b.masks[0]).all() and a.scores == b.scores


class TestOracleBackend:
    def test_primed_predict_returns_ground_truth(self, eye_labels):
        backend = OracleBackend()
        image, labels = synthetic_item(123, mode="full")
        backend.prime(labels, "iris")
        handle = backend.embed(image)
        preds = backend.predict(handle, PromptSet(box=Box(0, 0, 10, 10)))
        assert (preds.masks[0] == feature_mask(labels, "iris")).all()
        assert preds.scores == (1.0,)

    @pytest.mark.parametrize("feature", ["pupil", "iris", "sclera"])
    def test_unprimed_feature_inference_from_points(self, feature):
        image, labels = synthetic_item(55, mode="full")
        backend = OracleBackend()
        backend.prime(labels)  # labels known, feature left to inference
        handle = backend.embed(image)
        prompts = build_prompts(StrategySpec("P4"), feature, labels, make_rng(3))
        preds = backend.predict(handle, prompts.prompt_set)
        assert (preds.masks[0] == feature_mask(labels, feature)).all()

    def test_unprimed_raises(self):
        backend = OracleBackend()
        handle = backend.embed(np.zeros((5, 5), np.uint8))
        with pytest.raises(InvalidHandleError):
            backend.predict(handle, PromptSet(points=(Point(1, 1, FOREGROUND),)))

    def test_everything_returns_per_class_masks(self):
        image, labels = synthetic_item(55, mode="full")
        backend = OracleBackend()
        backend.prime(labels)
        preds = backend.segment_everything(image)
        assert len(preds) == 3
        expected = [feature_mask(labels, f) for f in ("sclera", "iris", "pupil")]
        for got, want in zip(preds.masks, expected):
            assert (got == want).all()
        assert preds.scores == (1.0, 1.0, 1.0)

    def test_background_points_do_not_confuse_inference(self):
        image, labels = synthetic_item(55, mode="full")
        backend = OracleBackend()
        backend.prime(labels)
        handle = backend.embed(image)
        prompts = build_prompts(StrategySpec("BBOXP4_4"), "sclera", labels, make_rng(1))
        preds = backend.predict(handle, prompts.prompt_set)
        assert (preds.masks[0] == feature_mask(labels, "sclera")).all()


class TestBackendContract:
    def test_identity_string(self):
        assert MockBackend().identity == "mock:1"
        assert OracleBackend().identity == "oracle:1"

    def test_everything_mode_capability(self):
        class NoEverything(SegmenterBackend):
            name = "stub"

            def embed(self, image):
                return self._handle_for(image)

            def predict(self, handle, prompts):
                raise NotImplementedError

        with pytest.raises(CapabilityError):
            NoEverything().segment_everything(np.zeros((4, 4), np.uint8))

    def test_build_backend(self):
        assert isinstance(build_backend({"name": "oracle"}), OracleBackend)
        mock = build_backend({"name": "mock", "radius": 5})
        assert isinstance(mock, MockBackend) and mock.radius == 5
        with pytest.raises(ValueError):
            build_backend({"name": "segnet"})
