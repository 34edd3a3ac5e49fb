"""Tests for the noise model and its visibility and white-noise channels."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import ConfigError, DomainError
from core.states import PHI_PLUS, PSI_PLUS, DensityMatrix, fidelity, ghz, random_density, tensor
from noise import MixedBranch, NoiseModel, apply_visibility, cpbs_branches, depolarize, pbs_channel, werner_pair
from optics import BranchLabel, CpbsDevice, PbsGate
from pcm import PcmTag, bell_element


def _by_label(branches) -> dict:
    return {br.label: br for br in branches}


class TestNoiseModel:
    def test_defaults(self):
        noise = NoiseModel()
        assert noise.efficiency == pytest.approx(0.38)
        assert noise.visibility("pbs") == 1.0
        assert noise.lam(3) == 0.0

    def test_overrides(self):
        noise = NoiseModel(
            pcm_visibility=0.9,
            photon_efficiency={5: 0.5},
            visibilities={"S1": 0.7},
            source_white_noise={2: 0.1},
            ghz_lossless=True,
        )
        assert noise.eta(5) == 0.5
        assert noise.eta(1, ghz_photons=(1, 2)) == 1.0
        assert noise.eta(7, ghz_photons=(1, 2)) == pytest.approx(0.38)
        assert noise.visibility("S1") == 0.7
        assert noise.visibility("S2") == 0.9
        assert noise.lam(2) == 0.1

    @pytest.mark.parametrize("kwargs", [{"efficiency": 1.5}, {"pcm_visibility": -0.1}, {"white_noise": 2.0}])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(DomainError):
            NoiseModel(**kwargs)

    def test_dict_round_trip(self):
        noise = NoiseModel(efficiency=0.5, photon_efficiency={1: 0.9}, source_white_noise={0: 0.05})
        assert NoiseModel.from_dict(noise.to_dict()) == noise

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            NoiseModel.from_dict({"efficency": 0.5})


class TestPbsChannel:
    @pytest.mark.parametrize("v", [0.0, 0.4, 0.8, 1.0])
    def test_ghz4_fidelity_under_visibility(self, v):
        pairs = tensor(PHI_PLUS, PHI_PLUS).to_density()
        rho, prob = pbs_channel(pairs, PbsGate(1, 2), v)
        assert prob == pytest.approx(0.5)
        assert fidelity(rho, ghz(4)) == pytest.approx((1 + v) / 2)

    def test_blocked_input(self):
        rho, prob = pbs_channel(PSI_PLUS.to_density(), PbsGate(0, 1), 1.0)
        assert prob == 0.0
        assert rho is None


class TestCpbsBranches:
    def test_ideal_matches_pure_result(self):
        branches = _by_label(cpbs_branches(PHI_PLUS.to_density(), CpbsDevice(0, 1), 1.0))
        assert branches[BranchLabel.COINC_HH].probability == pytest.approx(0.5)
        assert branches[BranchLabel.COINC_HV].probability == pytest.approx(0.0, abs=1e-12)

    def test_distinguishable_photons_leak_into_wrong_tag(self):
        branches = _by_label(cpbs_branches(PHI_PLUS.to_density(), CpbsDevice(0, 1), 0.0))
        assert branches[BranchLabel.COINC_HV].probability == pytest.approx(0.25)
        assert branches[BranchLabel.COINC_HH].probability == pytest.approx(0.25)

    @pytest.mark.parametrize("v", [0.0, 0.5, 1.0])
    def test_probability_conserved(self, rng, v):
        rho = random_density(3, rng)
        total = sum(br.probability for br in cpbs_branches(rho, CpbsDevice(0, 1), v))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_swap_fidelity_falls_with_visibility(self):
        pairs = tensor(PHI_PLUS, PHI_PLUS).to_density()
        scores = []
        for v in (1.0, 0.8, 0.5, 0.2):
            hh = _by_label(cpbs_branches(pairs, CpbsDevice(1, 2), v))[BranchLabel.COINC_HH]
            scores.append(fidelity(hh.state, PHI_PLUS))
        assert scores[0] == pytest.approx(1.0)
        assert all(a > b for a, b in zip(scores, scores[1:]))


class TestWhiteNoise:
    @pytest.mark.parametrize("lam", [0.0, 0.2, 1.0])
    def test_werner_fidelity(self, lam):
        assert fidelity(werner_pair(lam), PHI_PLUS) == pytest.approx(1 - 3 * lam / 4)

    def test_depolarize_full(self):
        rho = depolarize(ghz(3).to_density(), 1.0)
        assert_allclose(rho.entries, np.eye(8) / 8, atol=1e-12)

    def test_depolarize_keeps_trace(self, rng):
        rho = depolarize(random_density(2, rng), 0.3)
        assert rho.trace() == pytest.approx(1.0)
        assert isinstance(rho, DensityMatrix)


class TestApplyVisibility:
    @staticmethod
    def _branch_set(rng, labels):
        weights = rng.dirichlet(np.ones(len(labels)))
        return [MixedBranch(label, float(w), random_density(2, rng)) for label, w in zip(labels, weights)]

    @pytest.mark.parametrize("v", [0.0, 0.25, 0.6, 1.0])
    def test_merge_keeps_total_probability_and_trace(self, rng, v):
        labels = ["a", "b", "c"]
        for _ in range(200):
            merged = apply_visibility(self._branch_set(rng, labels), self._branch_set(rng, labels), v)
            assert [br.label for br in merged] == labels
            assert sum(br.probability for br in merged) == pytest.approx(1.0, abs=1e-12)
            for br in merged:
                assert br.state.trace() == pytest.approx(1.0, abs=1e-12)
                assert br.state.is_valid()

    def test_endpoints_return_one_side(self, rng):
        ideal = self._branch_set(rng, ["a", "b"])
        classical = self._branch_set(rng, ["a", "b"])
        for v, side in ((1.0, ideal), (0.0, classical)):
            for merged, src in zip(apply_visibility(ideal, classical, v), side):
                assert merged.probability == pytest.approx(src.probability)
                assert_allclose(merged.state.entries, src.state.entries, atol=1e-12)


class TestBunchedBranches:
    @pytest.mark.parametrize("v", [0.0, 0.5, 1.0])
    def test_coincidences_rebuild_bell_elements(self, rng, v):
        rho = random_density(2, rng)
        branches = _by_label(cpbs_branches(rho, CpbsDevice(0, 1), v))
        phi = branches[BranchLabel.COINC_HH].probability + branches[BranchLabel.COINC_VV].probability
        expected = np.trace(bell_element(PcmTag.PHI_PLUS, v) @ rho.entries).real
        assert phi == pytest.approx(expected, abs=1e-12)

    def test_bunched_weight_ignores_visibility(self, rng):
        rho = random_density(2, rng)
        low = _by_label(cpbs_branches(rho, CpbsDevice(0, 1), 0.0))[BranchLabel.BOTH_LEFT].probability
        high = _by_label(cpbs_branches(rho, CpbsDevice(0, 1), 1.0))[BranchLabel.BOTH_LEFT].probability
        assert low == pytest.approx(high, abs=1e-12)
