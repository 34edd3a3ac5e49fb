"""Tests for SPDC emission weights, loss and the twofold rate."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import DomainError
from sources import (
    ClickPattern,
    EmissionModel,
    EmissionPattern,
    SourceModel,
    emission_distribution,
    emission_weights,
    sample_emissions,
    source_outcomes,
    survival_sample,
    twofold_rate,
)


class TestEmissionWeights:
    def test_thermal_weights(self, source):
        w = emission_weights(source)
        assert w[1] == pytest.approx(0.0344)
        assert w[2] == pytest.approx(0.00118336)
        assert w.sum() == pytest.approx(1.0)

    def test_truncated_to_one_pair(self, source):
        w = emission_weights(source.truncated(1))
        assert_allclose(w, [1 - 0.0344, 0.0344])

    def test_zero_p_is_vacuum(self):
        assert_allclose(emission_weights(SourceModel(p=0.0)), [1.0, 0.0, 0.0])

    def test_poisson_ratio(self):
        w = emission_weights(SourceModel(p=0.05, emission=EmissionModel.POISSON))
        assert w.sum() == pytest.approx(1.0)
        assert w[2] / w[1] == pytest.approx(0.05 / 2)

    @pytest.mark.parametrize("kwargs", [{"p": -0.01}, {"p": 0.31}, {"max_pairs": 0}, {"efficiency": 1.2}])
    def test_invalid_models(self, kwargs):
        with pytest.raises(DomainError):
            SourceModel(**kwargs)

    def test_emission_accepts_string(self):
        assert SourceModel(emission="poisson").emission is EmissionModel.POISSON


class TestEmissionDistribution:
    def test_six_sources(self, source):
        patterns = emission_distribution(source, 6)
        assert len(patterns) == 729
        assert sum(w for _, w in patterns) == pytest.approx(1.0)

    def test_pattern_photons(self):
        assert EmissionPattern((1, 0, 2)).num_photons == 6

    def test_sampled_frequencies(self, rng):
        model = SourceModel(p=0.2)
        draws = sample_emissions(model, 3, 200_000, rng)
        assert draws.shape == (200_000, 3)
        freq = np.bincount(draws.ravel(), minlength=3) / draws.size
        assert_allclose(freq, emission_weights(model), atol=0.005)


class TestSurvival:
    def test_lossless_keeps_everything(self, rng):
        assert survival_sample(EmissionPattern((1, 2)), 1.0, rng).all()

    def test_total_loss(self, rng):
        assert not survival_sample(EmissionPattern((1, 1)), 0.0, rng).any()

    def test_survival_rate(self, rng):
        kept = np.concatenate([survival_sample(EmissionPattern((2, 2)), 0.38, rng) for _ in range(20_000)])
        assert kept.mean() == pytest.approx(0.38, abs=0.01)

    def test_rejects_bad_eta(self, rng):
        with pytest.raises(DomainError):
            survival_sample(EmissionPattern((1,)), 1.5, rng)

    def test_source_outcomes_normalised(self, source):
        out = source_outcomes(source, 0.38, 0.9)
        assert out.weight.sum() == pytest.approx(1.0)
        assert np.all(out.single_pair <= out.weight + 1e-15)


class TestTwofold:
    def test_reference_rate(self):
        assert twofold_rate(SourceModel(p=0.0344)) == pytest.approx(3.974e5, rel=1e-3)

    def test_scales_with_efficiency_squared(self):
        a = twofold_rate(SourceModel(efficiency=0.5))
        b = twofold_rate(SourceModel(efficiency=1.0))
        assert a / b == pytest.approx(0.25)


class TestClickPattern:
    def test_restrict(self):
        clicks = ClickPattern.of("S1:LH", "S1:RV", "S2:LH")
        assert clicks.restrict({"S1:LH", "S1:RV"}) == ClickPattern.of("S1:LH", "S1:RV")
        assert len(clicks) == 3
