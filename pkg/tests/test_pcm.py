"""Tests for PCM click classification, state updates and measurement operators."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import DomainError
from core.states import KETS, PHI_PLUS, PSI_PLUS, PureState, ghz, tensor
from optics import BranchLabel, CpbsDevice, cpbs_apply
from pcm import (
    MASK_DETECTORS,
    PcmOutcome,
    PcmTag,
    Port,
    Side,
    apply_outcome,
    bunched_single_click,
    classify,
    click_probabilities,
    false_bsm_rate,
    ideal_povm,
    mask_tag_table,
    outcome_for,
    port_for,
    sample_clicks,
    single_basis,
)
from sources import ClickPattern, SourceModel


def _overlap(a: PureState, b: PureState) -> float:
    return abs(np.vdot(a.amplitudes, b.amplitudes))


def _phased_pair(phase: float) -> PureState:
    return PureState(2, np.array([1, 0, 0, np.exp(1j * phase)]) / np.sqrt(2))


class TestClassify:
    @pytest.mark.parametrize(
        "clicks, tag",
        [
            (("LH", "RH"), PcmTag.PHI_PLUS),
            (("LV", "RV"), PcmTag.PHI_PLUS),
            (("LH", "RV"), PcmTag.PSI_PLUS),
            (("LV", "RH"), PcmTag.PSI_PLUS),
            (("LH",), PcmTag.SINGLE_LEFT),
            (("RV",), PcmTag.SINGLE_RIGHT),
            ((), PcmTag.NO_DECISION),
            (("LH", "LV"), PcmTag.NO_DECISION),
            (("LH", "LV", "RH"), PcmTag.NO_DECISION),
            (("LH", "LV", "RH", "RV"), PcmTag.NO_DECISION),
        ],
    )
    def test_tags(self, clicks, tag):
        assert classify(clicks).tag is tag

    def test_namespaced_detectors(self):
        assert classify(ClickPattern.of("S2:LH", "S2:RV")).tag is PcmTag.PSI_PLUS

    def test_corrections(self):
        assert classify(("LH", "RV")).correction == "X"
        assert classify(("LH", "RH")).correction == "I"
        assert classify(("LH",), Side.B).correction == "I"
        assert classify(("RH",), Side.B).correction == "Z"
        assert classify(("LH",), Side.A).correction == "Z"

    def test_single_basis(self):
        assert single_basis(PcmTag.SINGLE_LEFT, Side.B) == "D"
        assert single_basis(PcmTag.SINGLE_RIGHT, Side.A) == "D"
        with pytest.raises(ValueError):
            single_basis(PcmTag.PHI_PLUS)


class TestClickProbabilities:
    @pytest.mark.parametrize("n_a, n_b", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 3), (3, 3)])
    def test_distinguishable_photons_match_brute_force(self, n_a, n_b):
        # at v = 0 every photon picks a port and a detector independently
        table = mask_tag_table()
        tags = list(PcmTag)
        n = n_a + n_b
        counts = np.zeros(len(tags))
        for landing in itertools.product(range(len(MASK_DETECTORS)), repeat=n):
            mask = 0
            for d in landing:
                mask |= 1 << d
            counts[table[mask]] += 1
        probs = click_probabilities(n_a, n_b, v=0.0)
        assert_allclose([float(probs[t]) for t in tags], counts / 4 ** n, atol=1e-12)

    def test_one_photon_per_input(self):
        probs = click_probabilities(1, 1)
        for tag in (PcmTag.PHI_PLUS, PcmTag.PSI_PLUS, PcmTag.SINGLE_LEFT, PcmTag.SINGLE_RIGHT):
            assert float(probs[tag]) == pytest.approx(0.25)
        assert float(probs[PcmTag.NO_DECISION]) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("v", [0.0, 0.3, 0.8])
    def test_bunching_follows_visibility(self, v):
        probs = click_probabilities(1, 1, v)
        assert float(probs[PcmTag.SINGLE_LEFT]) == pytest.approx(bunched_single_click(v) / 4)
        assert float(probs[PcmTag.PHI_PLUS] + probs[PcmTag.PSI_PLUS]) == pytest.approx(0.5)

    def test_two_photons_on_one_input(self):
        probs = click_probabilities(2, 0)
        assert float(probs[PcmTag.PHI_PLUS]) == pytest.approx(0.25)
        assert float(probs[PcmTag.SINGLE_RIGHT]) == pytest.approx(0.125)
        assert float(probs[PcmTag.NO_DECISION]) == pytest.approx(0.25)

    def test_vacuum_is_no_decision(self):
        assert float(click_probabilities(0, 0)[PcmTag.NO_DECISION]) == 1.0

    def test_vectorised(self):
        probs = click_probabilities(np.array([1, 2, 0]), np.array([1, 0, 3]), 0.7)
        assert_allclose(sum(probs.values()), 1.0)

    @pytest.mark.parametrize("side", [Side.A, Side.B])
    def test_pinned_ports_average_to_free(self, side):
        free = click_probabilities(2, 1, 0.6)
        left = click_probabilities(2, 1, 0.6, (side, Port.LEFT))
        right = click_probabilities(2, 1, 0.6, (side, Port.RIGHT))
        for tag in PcmTag:
            assert float(left[tag] + right[tag]) / 2 == pytest.approx(float(free[tag]))

    def test_port_rule(self):
        assert port_for("D", Side.B) is Port.LEFT
        assert port_for("D", Side.A) is Port.RIGHT

    def test_sampled_clicks_follow_the_same_model(self):
        rng = np.random.default_rng(3)
        size = 200_000
        masks = sample_clicks(np.full(size, 1), np.full(size, 2), 0.6, rng)
        tags = mask_tag_table()[masks]
        probs = click_probabilities(1, 2, 0.6)
        for i, tag in enumerate(PcmTag):
            assert np.mean(tags == i) == pytest.approx(float(probs[tag]), abs=0.005)


class TestApplyOutcome:
    def test_entanglement_swap(self):
        pairs = tensor(PHI_PLUS, PHI_PLUS)
        out, prob = apply_outcome(pairs, (1, 2), outcome_for(PcmTag.PHI_PLUS))
        assert prob == pytest.approx(0.25)
        assert _overlap(out, PHI_PLUS) == pytest.approx(1.0)

    def test_swap_with_x_correction(self):
        pairs = tensor(PHI_PLUS, PHI_PLUS)
        out, prob = apply_outcome(pairs, (1, 2), outcome_for(PcmTag.PSI_PLUS), correction_qubits=(3,))
        assert prob == pytest.approx(0.25)
        assert _overlap(out, PHI_PLUS) == pytest.approx(1.0)

    def test_swap_over_random_phases(self):
        rng = np.random.default_rng(11)
        for a, b in rng.uniform(0.0, 2 * np.pi, size=(1000, 2)):
            pairs = tensor(_phased_pair(a), _phased_pair(b))
            out, prob = apply_outcome(pairs, (1, 2), outcome_for(PcmTag.PHI_PLUS))
            assert prob == pytest.approx(0.25, abs=1e-12)
            assert _overlap(out, _phased_pair(a + b)) == pytest.approx(1.0, abs=1e-10)
            out, prob = apply_outcome(pairs, (1, 2), outcome_for(PcmTag.PSI_PLUS), correction_qubits=(3,))
            expected = PureState(2, np.array([np.exp(1j * b), 0, 0, np.exp(1j * a)]) / np.sqrt(2))
            assert prob == pytest.approx(0.25, abs=1e-12)
            assert _overlap(out, expected) == pytest.approx(1.0, abs=1e-10)

    def test_uncorrected_swap_gives_psi(self):
        pairs = tensor(PHI_PLUS, PHI_PLUS)
        out, _ = apply_outcome(pairs, (1, 2), PcmOutcome(PcmTag.PSI_PLUS, "I"))
        assert _overlap(out, PSI_PLUS) == pytest.approx(1.0)

    def test_single_photon_on_ghz_with_z_correction(self):
        outcome = outcome_for(PcmTag.SINGLE_RIGHT, Side.B)
        assert outcome.correction == "Z"
        out, prob = apply_outcome(ghz(3), (0,), outcome, correction_qubits=(1,))
        assert prob == pytest.approx(0.5)
        assert _overlap(out, ghz(2)) == pytest.approx(1.0)

    @pytest.mark.parametrize("tag", [PcmTag.PHI_PLUS, PcmTag.PSI_PLUS])
    def test_ghz_merge(self, tag):
        state = tensor(ghz(3), ghz(3))
        out, prob = apply_outcome(state, (2, 3), outcome_for(tag), correction_qubits=(4, 5))
        assert prob == pytest.approx(0.25)
        assert out.num_qubits == 4
        assert _overlap(out, ghz(4)) == pytest.approx(1.0)

    def test_no_decision_has_no_update(self):
        with pytest.raises(ValueError):
            apply_outcome(PHI_PLUS, (0, 1), PcmOutcome(PcmTag.NO_DECISION))

    def test_impossible_branch(self):
        _, prob = apply_outcome(PureState.basis("HH"), (0, 1), outcome_for(PcmTag.PHI_PLUS))
        assert prob == pytest.approx(0.5)
        out, prob = apply_outcome(PHI_PLUS, (0, 1), PcmOutcome(PcmTag.PSI_PLUS, "I"))
        assert prob == 0.0
        assert out.is_empty


class TestCpbsAgreement:
    @pytest.mark.parametrize("state, tag", [(PHI_PLUS, PcmTag.PHI_PLUS), (PSI_PLUS, PcmTag.PSI_PLUS)])
    def test_bell_inputs_classify_to_their_tag(self, state, tag):
        for br in cpbs_apply(state, CpbsDevice(0, 1)):
            if br.probability == 0.0:
                continue
            assert br.label.is_coincidence
            left, right = br.label.value[-2:].upper()
            assert classify(("L" + left, "R" + right)).tag is tag

    def test_bunched_photons_fire_one_detector(self):
        # opposite D/A values from the two inputs share a port and a detector
        state = tensor(KETS["A"], KETS["D"])
        branches = {br.label: br.probability for br in cpbs_apply(state, CpbsDevice(0, 1))}
        assert branches[BranchLabel.BOTH_LEFT] == pytest.approx(1.0)
        assert bunched_single_click(1.0) == 1.0
        assert classify(("LH",)).tag is PcmTag.SINGLE_LEFT
        # distinguishable photons may split over both detectors of the port
        assert classify(("LH", "LV")).tag is PcmTag.NO_DECISION


class TestPovm:
    @pytest.mark.parametrize("v", np.linspace(0.0, 1.0, 11))
    def test_complete_and_positive(self, v):
        povm = ideal_povm(v)
        assert povm.completeness_error() < 1e-12
        assert povm.min_eigenvalue() > -1e-12
        assert povm.is_valid()

    @pytest.mark.parametrize("v", [0.0, 0.5, 0.63, 1.0])
    def test_bell_element_fidelity(self, v):
        element = ideal_povm(v)[PcmTag.PHI_PLUS]
        ket = PHI_PLUS.amplitudes
        normalised = np.vdot(ket, element @ ket).real / np.trace(element).real
        assert normalised == pytest.approx((1 + v) / 2)

    def test_rejects_bad_visibility(self):
        with pytest.raises(DomainError):
            ideal_povm(1.1)

    def test_to_dict_uses_tag_values(self):
        assert set(ideal_povm().to_dict()) == {"phi_plus", "psi_plus", "no_decision"}


class TestFalseBsm:
    @pytest.mark.parametrize("p, reference", [(0.0344, 0.0104), (0.0483, 0.0145)])
    def test_order_of_magnitude(self, p, reference):
        rate = false_bsm_rate(SourceModel(p=p), eta=0.38)
        assert reference / 2 < rate < reference * 2

    def test_grows_with_p(self):
        low = false_bsm_rate(SourceModel(p=0.0344), eta=0.38)
        high = false_bsm_rate(SourceModel(p=0.0483), eta=0.38)
        assert high > low

    def test_single_pair_sources_never_fake(self):
        assert false_bsm_rate(SourceModel(p=0.05, max_pairs=1), eta=0.38) == 0.0
