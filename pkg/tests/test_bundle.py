"""Bundle serialization tests: a reloaded bundle must reproduce every
prediction of the pipeline it came from, exactly."""

import json

import numpy as np
import pytest

from adaptest.bundle import (
    BUNDLE_FORMAT,
    _parse_subset,
    _subset_key,
    bundle_to_pipeline,
    fit_bundle,
    load_bundle,
    pipeline_to_bundle,
    save_bundle,
)
from adaptest.errors import BundleNotLoaded
from adaptest.strategies import initial_state


class TestSubsetKeys:
    def test_roundtrip(self):
        for subset in [(), (1,), (1, 3), (2, 5, 11)]:
            assert _parse_subset(_subset_key(subset)) == subset


@pytest.fixture(scope="module")
def bundle(small_pipeline):
    return pipeline_to_bundle(small_pipeline, measure="synthetic", max_items=3)


@pytest.fixture(scope="module")
def reloaded(bundle, tmp_path_factory):
    path = tmp_path_factory.mktemp("bundle") / "bundle.json"
    save_bundle(bundle, path)
    return bundle_to_pipeline(load_bundle(path))


class TestBundleShape:
    def test_core_sections_present(self, bundle):
        for key in (
            "format", "version", "K", "seed", "items", "embeddings", "item_models",
            "thresholds", "grm", "fixed_orders", "actor_critic", "tree",
            "max_items", "theta0", "score_exposure", "strategies",
        ):
            assert key in bundle
        assert bundle["format"] == BUNDLE_FORMAT
        assert bundle["measure"] == "synthetic"
        assert bundle["max_items"] == 3

    def test_strategies_listed(self, bundle):
        assert set(bundle["strategies"]) == {
            "alirt", "actor_critic", "random", "forward", "backward", "tree"
        }

    def test_tree_nodes_schema(self, bundle):
        for node in bundle["tree"]["nodes"]:
            assert {"feature", "threshold", "left", "right", "value"} <= set(node)

    def test_json_serializable(self, bundle):
        text = json.dumps(bundle, sort_keys=True)
        assert json.loads(text) == json.loads(json.dumps(bundle, sort_keys=True))

    def test_exposure_validated(self, small_pipeline):
        with pytest.raises(ValueError):
            pipeline_to_bundle(small_pipeline, score_exposure="sometimes")


class TestRoundTrip:
    def test_config_restored(self, reloaded):
        _, config = reloaded
        assert config == {
            "measure": "synthetic",
            "max_items": 3,
            "score_exposure": "trajectory",
        }

    def test_scores_and_levels_identical(self, small_cohort, small_pipeline, reloaded):
        dataset, _ = small_cohort
        clone, _ = reloaded
        for record in dataset.records[:10]:
            original = small_pipeline.full_scores(record)
            restored = clone.full_scores(record)
            assert original == restored
            assert small_pipeline.levels_for(original) == clone.levels_for(restored)

    def test_latent_estimates_identical(self, small_cohort, small_pipeline, reloaded):
        dataset, _ = small_cohort
        clone, _ = reloaded
        for record in dataset.records[:5]:
            levels = small_pipeline.levels_for(small_pipeline.full_scores(record))
            a = small_pipeline.latent_all(levels)
            b = clone.latent_all(levels)
            assert a.theta == b.theta
            assert a.posterior_sd == b.posterior_sd

    def test_grm_parameters_identical(self, small_pipeline, reloaded):
        clone, _ = reloaded
        for item_id, params in small_pipeline.grm.items.items():
            other = clone.grm.items[item_id]
            assert other.alpha == params.alpha
            np.testing.assert_array_equal(other.betas, params.betas)
            assert other.level_map == params.level_map

    def test_policies_pick_identically(self, small_pipeline, reloaded):
        clone, _ = reloaded
        state = initial_state(small_pipeline.item_ids)
        for strategy in small_pipeline.available_strategies:
            a = small_pipeline.policy(strategy).next_item(state, "probe")
            b = clone.policy(strategy).next_item(state, "probe")
            assert a == b

    def test_actor_critic_tables_identical(self, small_pipeline, reloaded):
        clone, _ = reloaded
        ac_a, ac_b = small_pipeline.actor_critic, clone.actor_critic
        assert set(ac_a.measure_models) == set(ac_b.measure_models)
        assert set(ac_a.error_models) == set(ac_b.error_models)
        for key in ac_a.measure_models:
            np.testing.assert_array_equal(
                ac_a.measure_models[key].weights, ac_b.measure_models[key].weights
            )
            assert ac_a.measure_models[key].intercept == ac_b.measure_models[key].intercept

    def test_fixed_orders_identical(self, small_pipeline, reloaded):
        clone, _ = reloaded
        assert clone.fixed_orders == small_pipeline.fixed_orders


class TestGuards:
    def test_missing_file(self, tmp_path):
        with pytest.raises(BundleNotLoaded):
            load_bundle(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(BundleNotLoaded):
            load_bundle(path)

    def test_wrong_format(self, bundle):
        with pytest.raises(BundleNotLoaded):
            bundle_to_pipeline({**bundle, "format": "something-else"})

    def test_wrong_version(self, bundle):
        with pytest.raises(BundleNotLoaded):
            bundle_to_pipeline({**bundle, "version": 99})

    def test_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(BundleNotLoaded):
            load_bundle(path)


class TestFitBundle:
    def test_trains_from_rotation_split(self, small_cohort):
        dataset, embeddings = small_cohort
        data = fit_bundle(
            dataset, embeddings, K=4, seed=17, strategies=("alirt", "random"),
            measure="synthetic", max_items=4,
        )
        pipeline, config = bundle_to_pipeline(data)
        assert config["max_items"] == 4
        assert pipeline.K == 4
        assert set(data["strategies"]) == {"alirt", "random", "forward", "backward"}
        assert data["actor_critic"] is None
        assert data["tree"] is None
        # Rotation 0's audit carries over so provenance is inspectable.
        assert pipeline.meta["n_train"] + pipeline.meta["n_poly"] == 96
