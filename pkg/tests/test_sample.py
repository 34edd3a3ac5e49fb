"""Tests for the Monte Carlo engine and its block-parallel reduction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from network import BUILTIN_LAYOUTS, Method, run_enumerate, run_sample
from network.sample import draw_pairs
from noise import NoiseModel
from sources import SourceModel, emission_weights
from threads import block_rng, block_sizes, create_worker_count_from_config, map_blocks


class TestBlocks:
    def test_block_sizes(self):
        assert block_sizes(10, 4) == [4, 4, 2]
        assert block_sizes(8, 4) == [4, 4]
        assert block_sizes(3, 100) == [3]

    def test_block_sizes_rejects_zero(self):
        with pytest.raises(ValueError):
            block_sizes(0, 4)

    def test_streams_are_independent_and_repeatable(self):
        a = block_rng(7, 0, 1).random(5)
        assert np.array_equal(a, block_rng(7, 0, 1).random(5))
        assert not np.array_equal(a, block_rng(7, 1, 1).random(5))
        assert not np.array_equal(a, block_rng(7, 0, 2).random(5))

    @pytest.mark.parametrize("workers", [1, 3, 8])
    def test_map_blocks_keeps_order(self, workers):
        assert map_blocks(lambda i: i * i, 6, workers=workers) == [0, 1, 4, 9, 16, 25]

    def test_worker_count_floor(self):
        class Cfg:
            WORKERS = 0

        assert create_worker_count_from_config(Cfg()) == 1


class TestRunSample:
    def _run(self, layout, workers=1, seed=11, trials=20_000):
        return run_sample(
            layout,
            SourceModel(p=0.1),
            NoiseModel(efficiency=1.0, include_multi_pair=False),
            trials=trials,
            seed=seed,
            workers=workers,
            block_size=4096,
            with_states=False,
        )

    @pytest.mark.parametrize("workers", [4, 8])
    def test_worker_count_does_not_change_results(self, all_photonic, workers):
        base = self._run(all_photonic, workers=1)
        other = self._run(all_photonic, workers=workers)
        assert base.to_dict() == other.to_dict()

    def test_seed_determinism(self, conventional):
        assert self._run(conventional, seed=3).to_dict() == self._run(conventional, seed=3).to_dict()
        assert self._run(conventional, seed=3).total().value != self._run(conventional, seed=4).total().value

    def test_rejects_zero_trials(self, conventional):
        with pytest.raises(ValueError):
            self._run(conventional, trials=0)

    def test_estimates_carry_errors(self, conventional):
        total = self._run(conventional).total()
        assert total.method is Method.SAMPLE
        assert total.std_error > 0

    @pytest.mark.slow
    @pytest.mark.parametrize("name", sorted(BUILTIN_LAYOUTS))
    @pytest.mark.parametrize("p", [0.0344, 0.0483, 0.1])
    def test_agrees_with_enumeration(self, name, p):
        layout = BUILTIN_LAYOUTS[name]()
        noise = NoiseModel(efficiency=1.0, include_multi_pair=False)
        exact = run_enumerate(layout, SourceModel(p=p), noise, with_states=False).total()
        sampled = run_sample(layout, SourceModel(p=p), noise, trials=1_000_000, seed=13,
                             workers=4, with_states=False).total()
        assert abs(sampled.value - exact.value) < 3 * sampled.std_error

    def test_lossy_run_agrees_with_enumeration(self, conventional):
        noise = NoiseModel(efficiency=0.8, pcm_visibility=0.7, include_multi_pair=False)
        model = SourceModel(p=0.2)
        exact = run_enumerate(conventional, model, noise, with_states=False).total()
        sampled = run_sample(conventional, model, noise, trials=100_000, seed=5, block_size=8192,
                             with_states=False).total()
        assert abs(sampled.value - exact.value) < 5 * sampled.std_error

    def test_records_carry_valid_states(self, conventional):
        run = run_sample(conventional, SourceModel(p=0.1), NoiseModel(efficiency=1.0, include_multi_pair=False),
                         trials=20_000, seed=2, block_size=4096)
        assert run.records
        for rec in run.records:
            assert rec.state.is_valid()
            assert rec.rate.method is Method.SAMPLE


class TestProposal:
    @pytest.mark.parametrize("emission", ["thermal", "poisson"])
    def test_weighted_pair_frequencies_converge(self, rng, emission):
        w = emission_weights(SourceModel(p=0.1, max_pairs=3, emission=emission))
        k, weight = draw_pairs(w, 1_000_000, 1, rng)
        freq = np.array([weight[k[:, 0] == j].sum() for j in range(len(w))]) / len(weight)
        assert_allclose(freq, w, atol=6e-3)

    def test_weights_are_unbiased_for_several_sources(self, rng):
        w = emission_weights(SourceModel(p=0.2, max_pairs=2))
        k, weight = draw_pairs(w, 200_000, 4, rng)
        all_fire = (k >= 1).all(axis=1)
        assert np.sum(weight * all_fire) / len(weight) == pytest.approx(w[1:].sum() ** 4, rel=0.05)
