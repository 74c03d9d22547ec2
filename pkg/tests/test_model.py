"""
Tests for the IQCaption360 network: backbone, aggregation, heads, full model and checkpoints.
"""

import json
import struct

import numpy as np
import pytest

from src.modules.errors import ArgumentError, CheckpointError, ConfigError, ModelStateError
from src.modules.model import (
    AdaptiveFeatureAggregation,
    Backbone,
    BackboneConfig,
    DistortionSituationHead,
    IQCaption360,
    ModelConfig,
    PatchEmbed,
    QualityRegressionHead,
    ViewportFeatureSelector,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)
from src.modules.numerics import ParamStore, Tensor, check_store_gradients


def small_config(**overrides) -> ModelConfig:
    """Four 90°-spaced 32x32 viewports on a one-block-per-stage backbone."""
    backbone = BackboneConfig(depths=(1, 1, 1, 1), dims=(4, 4, 4, 4), heads=(1, 1, 1, 1), kernel=3, embed_dim=4)
    params = dict(backbone=backbone, m=4, k=2, offset_deg=90.0, size=32)
    params.update(overrides)
    return ModelConfig(**params)


def random_views(config: ModelConfig, batch: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=(batch, config.m, config.size, config.size, 3)).astype(np.float32)


@pytest.fixture
def small_model():
    return IQCaption360(small_config()).init_params(seed=5)


class TestModelConfig:

    def test_k_out_of_range(self):
        with pytest.raises(ConfigError):
            ModelConfig(m=8, k=9)
        with pytest.raises(ConfigError):
            ModelConfig(m=8, k=0)

    def test_size_multiple_of_32(self):
        with pytest.raises(ConfigError):
            ModelConfig(size=100)

    def test_even_kernel(self):
        with pytest.raises(ConfigError):
            BackboneConfig(kernel=6)

    def test_dims_divisible_by_heads(self):
        with pytest.raises(ConfigError):
            BackboneConfig(dims=(6, 8, 8, 8), heads=(4, 4, 4, 4))

    def test_task_dim(self):
        config = ModelConfig(backbone=BackboneConfig(dims=(16, 32, 64, 64)))
        assert config.afa_dims == (16, 32, 128)
        assert config.task_dim == 176

    def test_dict_round_trip(self):
        config = small_config(enable_vpfs=False)
        assert ModelConfig.from_dict(config.to_dict()) == config

    def test_unknown_field_rejected(self):
        data = small_config().to_dict()
        data['colour'] = 'red'
        with pytest.raises(ConfigError):
            ModelConfig.from_dict(data)


class TestPatchEmbed:

    def test_quarter_resolution(self):
        rng = np.random.default_rng(0)
        embed = PatchEmbed(ParamStore(np.float64), rng, embed_dim=4, size=224)
        out = embed(Tensor(rng.uniform(size=(1, 224, 224, 3))))
        assert out.shape == (1, 56, 56, 4)

    def test_128_input(self):
        rng = np.random.default_rng(0)
        embed = PatchEmbed(ParamStore(np.float64), rng, embed_dim=4, size=128)
        assert embed(Tensor(rng.uniform(size=(2, 128, 128, 3)))).shape == (2, 32, 32, 4)

    def test_constant_input_is_constant_inside(self):
        rng = np.random.default_rng(1)
        embed = PatchEmbed(ParamStore(np.float64), rng, embed_dim=4, size=64)
        out = embed(Tensor(np.full((1, 64, 64, 3), 0.4))).numpy()
        interior = out[0, 2:-2, 2:-2]
        np.testing.assert_allclose(interior, np.broadcast_to(interior[:1, :1], interior.shape), atol=1e-9)

    def test_wrong_size_raises(self):
        rng = np.random.default_rng(0)
        embed = PatchEmbed(ParamStore(), rng, embed_dim=4, size=64)
        with pytest.raises(ArgumentError):
            embed(Tensor(np.zeros((1, 32, 32, 3))))


class TestBackbone:

    def test_stage_resolutions_for_224(self):
        rng = np.random.default_rng(0)
        config = BackboneConfig(depths=(2, 2, 5, 3), dims=(4, 4, 4, 4), heads=(1, 1, 1, 1), kernel=3, embed_dim=4)
        backbone = Backbone(ParamStore(np.float64), rng, config)
        pyramid = backbone(Tensor(rng.normal(size=(1, 56, 56, 4))))
        assert [p.shape[1:3] for p in pyramid] == [(28, 28), (14, 14), (7, 7), (7, 7)]

    def test_zero_depth_is_downsampling_chain(self):
        rng = np.random.default_rng(0)
        config = BackboneConfig(depths=(0, 0, 0, 0), dims=(4, 6, 8, 8), heads=(1, 1, 1, 1), kernel=3, embed_dim=4)
        backbone = Backbone(ParamStore(np.float64), rng, config)
        x = Tensor(rng.normal(size=(1, 16, 16, 4)))
        pyramid = backbone(x)

        expected, h = [], x
        for transition in backbone.transitions:
            if transition is not None:
                h = transition(h)
            expected.append(h.numpy())
        for got, want in zip(pyramid, expected):
            np.testing.assert_array_equal(got.numpy(), want)
        assert backbone.blocks() == []

    def test_two_block_stage_gradient(self):
        rng = np.random.default_rng(2)
        store = ParamStore(np.float64)
        config = BackboneConfig(depths=(2, 0, 0, 0), dims=(4, 4, 4, 4), heads=(2, 1, 1, 1), kernel=3, embed_dim=4)
        backbone = Backbone(store, rng, config)
        x = Tensor(rng.normal(size=(1, 8, 8, 4)))
        projection = Tensor(rng.normal(size=(1, 4, 4, 4)))

        result = check_store_gradients('two_block_stage', lambda: (backbone(x)[0] * projection).sum(), store,
                                       tolerance=1e-6, entries_per_tensor=3)
        assert result.passed, result.errors


class TestAdaptiveFeatureAggregation:

    @pytest.fixture
    def setup(self):
        config = small_config()
        rng = np.random.default_rng(3)
        store = ParamStore(np.float64)
        afa = AdaptiveFeatureAggregation(store, rng, config, "qspn")
        sizes = (4, 2, 1, 1)
        pyramid = [Tensor(rng.normal(size=(2, s, s, 4))) for s in sizes]
        return config, store, afa, pyramid

    def test_unify_has_four_stages_per_scale(self, setup):
        _, _, afa, pyramid = setup
        stacked = afa.unify(pyramid)
        assert [s.shape for s in stacked] == [(2, 4, 4, 4, 4), (2, 4, 2, 2, 4), (2, 4, 1, 1, 8)]

    def test_channel_constant_stages_stay_constant(self, setup):
        _, _, afa, _ = setup
        pyramid = [Tensor(np.broadcast_to(np.arange(4.0), (1, s, s, 4)).copy()) for s in (4, 2, 1, 1)]
        for maps in afa.unify(pyramid):
            data = maps.numpy()
            np.testing.assert_allclose(data, np.broadcast_to(data[:, :, :1, :1], data.shape), atol=1e-12)

    def test_gates_sum_to_one(self, setup):
        _, _, afa, pyramid = setup
        for scale, maps in enumerate(afa.unify(pyramid)):
            np.testing.assert_allclose(afa.gates(maps, scale).numpy().sum(axis=1), 1.0, atol=1e-6)

    def test_forced_gate_selects_stage(self, setup):
        _, _, afa, pyramid = setup
        stacked = afa.unify(pyramid)
        afa.force_gate = np.array([0.0, 0.0, 1.0, 0.0])
        fused = afa.fuse(stacked)
        for maps, out in zip(stacked, fused):
            np.testing.assert_allclose(out.numpy(), maps.numpy()[:, 2], atol=1e-12)

    def test_disabled_msfs_averages_stages(self):
        config = small_config(enable_msfs=False)
        rng = np.random.default_rng(3)
        afa = AdaptiveFeatureAggregation(ParamStore(np.float64), rng, config, "dspn")
        maps = Tensor(rng.normal(size=(2, 4, 3, 3, 4)))
        np.testing.assert_array_equal(afa.gates(maps, 0).numpy(), np.full((2, 4), 0.25))

    def test_task_vector_length(self, setup):
        config, _, afa, pyramid = setup
        assert afa(pyramid).shape == (2, config.task_dim)

    def test_identical_inputs_give_identical_vectors(self, setup):
        _, _, afa, pyramid = setup
        doubled = [Tensor(np.concatenate([p.numpy()[:1], p.numpy()[:1]])) for p in pyramid]
        out = afa(doubled).numpy()
        np.testing.assert_array_equal(out[0], out[1])

    def test_msfs_gradient(self, setup):
        _, store, afa, pyramid = setup
        projection = Tensor(np.random.default_rng(4).normal(size=(2, 16)))
        result = check_store_gradients('msfs', lambda: (afa(pyramid) * projection).sum(), store,
                                       tolerance=1e-6, entries_per_tensor=2)
        assert result.passed, result.errors


class TestDistortionSituationHead:

    def test_zero_weights_give_uniform_probs(self):
        config = small_config()
        head = DistortionSituationHead(ParamStore(np.float64), np.random.default_rng(0), config)
        for weight, bias in (head.fc1, head.fc2):
            weight.data[...] = 0.0
            bias.data[...] = 0.0
        vectors = Tensor(np.random.default_rng(1).normal(size=(3, config.m, config.task_dim)))
        np.testing.assert_allclose(head(vectors).numpy(), 0.25, atol=1e-12)

    def test_probs_sum_to_one(self):
        config = small_config()
        head = DistortionSituationHead(ParamStore(np.float64), np.random.default_rng(0), config)
        probs = head(Tensor(np.random.default_rng(1).normal(size=(5, config.m, config.task_dim)))).numpy()
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)
        assert set(np.argmax(probs, axis=1)) <= {0, 1, 2, 3}

    def test_wrong_m_raises(self):
        config = small_config()
        head = DistortionSituationHead(ParamStore(), np.random.default_rng(0), config)
        with pytest.raises(ArgumentError):
            head(Tensor(np.zeros((1, config.m + 1, config.task_dim))))


class TestViewportFeatureSelector:

    @pytest.mark.parametrize("k", [1, 2, 4, 8])
    def test_exactly_m_minus_k_zero_weights(self, k):
        config = small_config(m=8, k=k, offset_deg=45.0)
        vpfs = ViewportFeatureSelector(ParamStore(np.float64), np.random.default_rng(0), config)
        vectors = Tensor(np.random.default_rng(k).normal(size=(3, 8, config.task_dim)))
        weights = vpfs(vectors, k).weights.numpy()
        assert ((weights == 0.0).sum(axis=1) == 8 - k).all()

    def test_ties_keep_lower_index(self):
        config = small_config(m=4, k=2)
        vpfs = ViewportFeatureSelector(ParamStore(np.float64), np.random.default_rng(0), config)
        weight, bias = vpfs.fc2
        weight.data[...] = 0.0
        bias.data[...] = 0.0
        result = vpfs(Tensor(np.ones((1, 4, config.task_dim))), 2)
        assert result.selected.tolist() == [[0, 1]]

    def test_permutation_invariance(self):
        config = small_config(m=8, k=4, offset_deg=45.0)
        vpfs = ViewportFeatureSelector(ParamStore(np.float64), np.random.default_rng(0), config)
        vectors = np.random.default_rng(9).normal(size=(1, 8, config.task_dim))
        permuted = vectors[:, np.random.default_rng(10).permutation(8)]
        a, b = vpfs(Tensor(vectors), 4), vpfs(Tensor(permuted), 4)
        assert np.array_equal(a.merged.numpy(), b.merged.numpy())
        assert np.array_equal(a.raw_weights.numpy(), b.raw_weights.numpy())

    def test_k_out_of_range(self):
        config = small_config()
        vpfs = ViewportFeatureSelector(ParamStore(), np.random.default_rng(0), config)
        with pytest.raises(ArgumentError):
            vpfs(Tensor(np.zeros((1, config.m, config.task_dim))), config.m + 1)


class TestQualityRegressionHead:

    def test_single_viewport_score(self):
        config = small_config()
        head = QualityRegressionHead(ParamStore(np.float64), np.random.default_rng(0), config)
        score, per_view = head(Tensor(np.random.default_rng(1).normal(size=(2, 1, config.task_dim))))
        np.testing.assert_array_equal(score.numpy(), per_view.numpy()[:, 0])

    def test_identical_vectors(self):
        config = small_config()
        head = QualityRegressionHead(ParamStore(np.float64), np.random.default_rng(0), config)
        row = np.random.default_rng(1).normal(size=config.task_dim)
        score, per_view = head(Tensor(np.broadcast_to(row, (1, 3, config.task_dim)).copy()))
        np.testing.assert_allclose(score.numpy()[0], per_view.numpy()[0, 0], atol=1e-12)

    def test_shift_moves_mean(self):
        config = small_config()
        head = QualityRegressionHead(ParamStore(np.float64), np.random.default_rng(0), config)
        vectors = Tensor(np.random.default_rng(1).normal(size=(2, 3, config.task_dim)))
        before = head(vectors)[0].numpy().copy()
        head.fc2[1].data += 0.75
        np.testing.assert_allclose(head(vectors)[0].numpy(), before + 0.75, atol=1e-12)


class TestIQCaption360:

    def test_forward_before_init_raises(self):
        with pytest.raises(ModelStateError):
            IQCaption360(small_config()).forward(random_views(small_config(), 1))

    def test_wrong_viewport_shape_raises(self, small_model):
        with pytest.raises(ArgumentError):
            small_model.forward(np.zeros((1, 3, 32, 32, 3), dtype=np.float32))

    def test_forward_shapes(self, small_model):
        result = small_model.forward(random_views(small_model.config, 2))
        assert result.probs.shape == (2, 4)
        assert result.score.shape == (2,)
        assert result.viewport_scores.shape == (2, 2)
        assert result.weights.shape == (2, 4)
        assert ((result.weights.numpy() == 0.0).sum(axis=1) == 2).all()

    def test_deterministic(self, small_model):
        views = random_views(small_model.config, 1)
        first = small_model.predict(views[0]).to_dict()
        second = small_model.predict(views[0]).to_dict()
        assert first == second

    def test_same_seed_same_parameters(self):
        a = IQCaption360(small_config()).init_params(seed=3)
        b = IQCaption360(small_config()).init_params(seed=3)
        for name, value in a.store.state_dict().items():
            np.testing.assert_array_equal(value, b.store.state_dict()[name])

    def test_predict_from_erp(self, smooth_erp):
        model = IQCaption360(ModelConfig.toy()).init_params(seed=0)
        output = model.predict(smooth_erp)
        assert output.probs.shape == (4,)
        np.testing.assert_allclose(output.probs.sum(), 1.0, atol=1e-5)
        assert len(output.selected) == model.config.k
        assert 0 <= output.situation <= 3

    def test_vpfs_ablation_uses_all_viewports(self):
        model = IQCaption360(small_config(enable_vpfs=False)).init_params(seed=0)
        result = model.forward(random_views(model.config, 1))
        np.testing.assert_array_equal(result.weights.numpy(), np.ones((1, 4)))
        assert result.viewport_scores.shape == (1, 4)
        assert result.selected.tolist() == [[0, 1, 2, 3]]

    def test_full_attention_matches_large_kernel(self):
        config = small_config(backbone=BackboneConfig(depths=(1, 1, 1, 1), dims=(4, 4, 4, 4), heads=(1, 1, 1, 1),
                                                      kernel=9, embed_dim=4))
        model = IQCaption360(config).init_params(seed=1)
        views = random_views(config, 1)
        local = model.forward(views).score.numpy().copy()
        model.set_full_attention(True)
        assert np.array_equal(model.forward(views).score.numpy(), local)

    def test_astype_keeps_values(self, small_model):
        double = small_model.astype(np.float64)
        assert double.store.dtype == np.float64
        views = random_views(small_model.config, 1)
        np.testing.assert_allclose(double.forward(views.astype(np.float64)).score.numpy(),
                                   small_model.forward(views).score.numpy(), atol=1e-4)


class TestCheckpoint:

    def test_round_trip(self, small_model, tmp_path):
        path = save_checkpoint(small_model, tmp_path / "model.iqc", extra={"epoch": 3})
        restored = load_checkpoint(path)
        assert restored.config == small_model.config
        views = random_views(small_model.config, 1)
        assert np.array_equal(restored.forward(views).score.numpy(), small_model.forward(views).score.numpy())
        header, tensors = read_checkpoint(path)
        assert header["extra"] == {"epoch": 3}
        assert set(tensors) == set(small_model.store.names())

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.iqc"
        path.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncated(self, small_model, tmp_path):
        path = save_checkpoint(small_model, tmp_path / "model.iqc")
        raw = path.read_bytes()
        path.write_bytes(raw[:-10])
        with pytest.raises(CheckpointError):
            read_checkpoint(path)

    @pytest.mark.parametrize("keep", [6, 12])
    def test_truncated_config_block(self, small_model, tmp_path, keep):
        path = save_checkpoint(small_model, tmp_path / "model.iqc")
        path.write_bytes(path.read_bytes()[:keep])
        with pytest.raises(CheckpointError):
            read_checkpoint(path)

    def test_corrupt_config_json(self, small_model, tmp_path):
        path = save_checkpoint(small_model, tmp_path / "model.iqc")
        raw = bytearray(path.read_bytes())
        raw[8] = ord('#')
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointError):
            read_checkpoint(path)

    def test_config_with_unknown_keys(self, tmp_path):
        block = json.dumps({"config": {"m": 8, "bogus": 1}}).encode('utf-8')
        path = tmp_path / "odd.iqc"
        path.write_bytes(b"IQC1" + struct.pack('<I', len(block)) + block)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_header_without_config(self, tmp_path):
        block = b'[1, 2]'
        path = tmp_path / "list.iqc"
        path.write_bytes(b"IQC1" + struct.pack('<I', len(block)) + block)
        with pytest.raises(CheckpointError):
            read_checkpoint(path)

    def test_save_before_init_raises(self, tmp_path):
        with pytest.raises(ModelStateError):
            save_checkpoint(IQCaption360(small_config()), tmp_path / "x.iqc")
