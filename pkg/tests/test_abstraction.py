import numpy as np
import pytest

from semsample import (
    BallQueryConfig,
    ConfigError,
    DimensionError,
    Mlp,
    PointCloud,
    SasaLayer,
    SFpsConfig,
    SharedMlp,
    ball_query,
    fps,
    gen_scene,
    group_and_pool,
    sasa_forward,
    SceneGenConfig,
)


def line_cloud(xs, feats=None):
    coords = np.column_stack([xs, np.zeros(len(xs)), np.zeros(len(xs))])
    return PointCloud(coords, feats)


class TestBallQuery:
    def test_isolated_centers_pad_with_self(self):
        cloud = line_cloud([0.0, 10.0, 20.0])
        groups = ball_query(cloud, [0, 1], BallQueryConfig(radius=1.0, max_neighbors=4))
        assert groups[0].tolist() == [0, 0, 0, 0]
        assert groups[1].tolist() == [1, 1, 1, 1]

    def test_radius_beyond_diameter_takes_first_k(self):
        cloud = line_cloud([0.0, 1.0, 2.0, 3.0])
        groups = ball_query(cloud, [2], BallQueryConfig(radius=100.0, max_neighbors=3))
        assert groups[0].tolist() == [0, 1, 2]

    def test_partial_neighborhood(self):
        cloud = line_cloud([0.0, 1.0, 2.0, 5.0])
        groups = ball_query(cloud, [1], BallQueryConfig(radius=1.5, max_neighbors=8))
        assert groups[0].tolist() == [0, 1, 2, 0, 0, 0, 0, 0]

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            BallQueryConfig(radius=0.0, max_neighbors=4)
        with pytest.raises(ConfigError):
            BallQueryConfig(radius=1.0, max_neighbors=0)


class TestGroupAndPool:
    def test_padded_group_pools_to_single_point(self, rng):
        feats = rng.normal(size=(3, 2))
        cloud = line_cloud([0.0, 10.0, 20.0], feats)
        mlp = SharedMlp.seeded((5, 7), seed=0)
        groups = ball_query(cloud, [1], BallQueryConfig(radius=1.0, max_neighbors=6))
        pooled = group_and_pool(cloud, [1], groups, mlp)
        single = mlp.forward(np.concatenate([[0.0, 0.0, 0.0], feats[1]])[None, :])
        assert np.allclose(pooled, single)

    def test_identity_mlp_pools_relative_coordinate_max(self):
        # 3-point group around center 0: relative xs are (0, 1, 2); the
        # identity stack must pool to their component-wise max
        feats = np.zeros((3, 1))
        cloud = line_cloud([0.0, 1.0, 2.0], feats)
        mlp = SharedMlp.identity(4)
        groups = ball_query(cloud, [0], BallQueryConfig(radius=5.0, max_neighbors=3))
        pooled = group_and_pool(cloud, [0], groups, mlp)
        assert pooled[0].tolist() == [2.0, 0.0, 0.0, 0.0]

    def test_order_invariant_within_group(self, rng):
        feats = rng.normal(size=(5, 2))
        cloud = PointCloud(rng.uniform(-1, 1, size=(5, 3)), feats)
        mlp = SharedMlp.seeded((5, 6), seed=1)
        groups = np.array([[0, 1, 2, 3, 4]])
        shuffled = np.array([[3, 1, 4, 0, 2]])
        a = group_and_pool(cloud, [0], groups, mlp)
        b = group_and_pool(cloud, [0], shuffled, mlp)
        assert np.allclose(a, b)

    def test_shape_mismatch_rejected(self, rng):
        cloud = PointCloud(rng.uniform(-1, 1, size=(4, 3)), rng.normal(size=(4, 2)))
        mlp = SharedMlp.seeded((9, 4), seed=0)  # expects 3 + 6 features
        groups = np.array([[0, 1, 2, 3]])
        with pytest.raises(DimensionError):
            group_and_pool(cloud, [0], groups, mlp)


def small_layer(n_feats=2, budget=4, radius=5.0, k=4, scorer_seed=0):
    return SasaLayer(
        scorer=Mlp.seeded((n_feats, 8, 1), scorer_seed),
        sampler=SFpsConfig(gamma=1.0),
        ball=BallQueryConfig(radius=radius, max_neighbors=k),
        feature_mlp=SharedMlp.seeded((3 + n_feats, 16, 8), scorer_seed + 1),
        budget=budget,
    )


class TestSasaForward:
    def test_full_budget_keeps_all_points(self, rng):
        coords = rng.uniform(-1, 1, size=(6, 3))
        cloud = PointCloud(coords, rng.normal(size=(6, 2)))
        layer = small_layer(budget=6, radius=100.0, k=6)
        keys, scores, result = sasa_forward(layer, cloud)
        assert sorted(result.indices.tolist()) == list(range(6))
        assert keys.n == 6

    def test_zero_scorer_reduces_to_fps_from_zero(self, rng):
        coords = rng.uniform(-5, 5, size=(12, 3))
        cloud = PointCloud(coords, rng.normal(size=(12, 2)))
        layer = small_layer(budget=5)
        layer.scorer = Mlp.zeros((2, 8, 1))
        keys, scores, result = sasa_forward(layer, cloud)
        assert np.all(scores.values == 0.5)
        assert np.array_equal(result.indices, fps(cloud, 5, start_index=0).indices)

    def test_keys_are_input_coordinates(self, rng):
        coords = rng.uniform(-5, 5, size=(20, 3))
        cloud = PointCloud(coords, rng.normal(size=(20, 2)))
        keys, _, result = sasa_forward(small_layer(budget=7), cloud)
        assert np.array_equal(keys.coords, coords[result.indices])

    def test_scores_are_plain_forward_output(self, rng):
        from semsample import mlp_forward

        cloud = PointCloud(rng.uniform(-5, 5, size=(10, 3)), rng.normal(size=(10, 2)))
        layer = small_layer(budget=3)
        _, scores, _ = sasa_forward(layer, cloud)
        assert np.array_equal(scores.values, mlp_forward(layer.scorer, cloud.features).values)

    def test_two_stacked_layers_on_synthetic_scene(self):
        scene = gen_scene(SceneGenConfig(n_points=512, n_objects=3, seed=3))
        n_feats = scene.cloud.features.shape[1]
        first = SasaLayer(
            scorer=Mlp.seeded((n_feats, 16, 1), 0),
            sampler=SFpsConfig(gamma=1.0),
            ball=BallQueryConfig(radius=4.0, max_neighbors=16),
            feature_mlp=SharedMlp.seeded((3 + n_feats, 32, 16), 1),
            budget=128,
        )
        keys1, scores1, _ = sasa_forward(first, scene.cloud)
        second = SasaLayer(
            scorer=Mlp.seeded((16, 16, 1), 2),
            sampler=SFpsConfig(gamma=1.0),
            ball=BallQueryConfig(radius=8.0, max_neighbors=16),
            feature_mlp=SharedMlp.seeded((3 + 16, 32, 24), 3),
            budget=32,
        )
        keys2, scores2, _ = sasa_forward(second, keys1)
        assert keys2.n == 32
        assert np.isfinite(keys2.features).all()
        assert len(scores1) == 512 and len(scores2) == 128

    def test_permutation_invariant_pooling(self, rng):
        # permuting input points permutes key selection consistently and
        # leaves each key's pooled feature unchanged
        coords = rng.uniform(-5, 5, size=(15, 3))
        feats = rng.normal(size=(15, 2))
        layer = small_layer(budget=6, radius=4.0, k=8, scorer_seed=4)
        keys_a, _, res_a = sasa_forward(layer, PointCloud(coords, feats))
        perm = rng.permutation(15)
        keys_b, _, res_b = sasa_forward(layer, PointCloud(coords[perm], feats[perm]))
        inv = np.argsort(perm)
        assert np.array_equal(res_b.indices, inv[res_a.indices])
        assert np.allclose(keys_a.features, keys_b.features)

    def test_width_composition_validated(self):
        with pytest.raises(DimensionError):
            SasaLayer(
                scorer=Mlp.seeded((2, 4, 1), 0),
                sampler=SFpsConfig(),
                ball=BallQueryConfig(radius=1.0, max_neighbors=2),
                feature_mlp=SharedMlp.seeded((4, 8), 0),  # should be 3 + 2 = 5
                budget=2,
            )
