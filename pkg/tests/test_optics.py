"""Tests for wave plates, PBS post-selection and the CPBS branches."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.states import KETS, PHI_PLUS, PSI_PLUS, PureState, apply_single, ghz, random_pure
from optics import (
    HWP_22_5,
    PARITY_PROJECTOR,
    BranchLabel,
    CpbsDevice,
    PbsGate,
    WavePlate,
    cpbs_apply,
    cpbs_bra,
    pbs_postselect,
    waveplate_matrix,
)


def _overlap(a: PureState, b: PureState) -> float:
    return abs(np.vdot(a.amplitudes, b.amplitudes))


def _by_label(branches) -> dict:
    return {br.label: br for br in branches}


class TestWavePlates:
    def test_hwp_22_5_maps_h_to_d(self):
        out = apply_single(KETS["H"], 0, HWP_22_5)
        assert _overlap(out, KETS["D"]) == pytest.approx(1.0)

    def test_hwp_22_5_maps_v_to_a(self):
        out = apply_single(KETS["V"], 0, HWP_22_5)
        assert _overlap(out, KETS["A"]) == pytest.approx(1.0)

    def test_hwp_zero_is_z(self):
        assert_allclose(waveplate_matrix(WavePlate.half(0)), np.diag([1, -1]), atol=1e-12)

    def test_qwp_45_makes_circular(self):
        out = apply_single(KETS["H"], 0, waveplate_matrix(WavePlate.quarter(45)))
        assert _overlap(out, KETS["L"]) == pytest.approx(1.0)

    @pytest.mark.parametrize("degrees", [0, 10, 22.5, 45, 67.5, 90])
    def test_plates_are_unitary(self, degrees):
        for plate in (WavePlate.half(degrees), WavePlate.quarter(degrees)):
            m = waveplate_matrix(plate)
            assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-12)


class TestPbs:
    def test_phi_plus_passes(self):
        out, prob = pbs_postselect(PHI_PLUS, PbsGate(0, 1))
        assert prob == pytest.approx(1.0)
        assert _overlap(out, PHI_PLUS) == pytest.approx(1.0)

    def test_psi_plus_is_blocked(self):
        out, prob = pbs_postselect(PSI_PLUS, PbsGate(0, 1))
        assert prob == 0.0
        assert out.is_empty

    def test_dd_input_gives_phi_plus(self):
        out, prob = pbs_postselect(PureState.basis("DD"), PbsGate(0, 1))
        assert prob == pytest.approx(0.5)
        assert _overlap(out, PHI_PLUS) == pytest.approx(1.0)

    def test_fusing_two_bell_pairs_gives_ghz4(self):
        pairs = PureState(4, np.kron(PHI_PLUS.amplitudes, PHI_PLUS.amplitudes))
        out, prob = pbs_postselect(pairs, PbsGate(1, 2))
        assert prob == pytest.approx(0.5)
        assert _overlap(out, ghz(4)) == pytest.approx(1.0)

    def test_rejects_same_qubit(self):
        with pytest.raises(ValueError):
            pbs_postselect(PHI_PLUS, PbsGate(0, 0))

    def test_postselection_is_idempotent(self, rng):
        for _ in range(200):
            first, prob = pbs_postselect(random_pure(3, rng), PbsGate(0, 2))
            if prob == 0.0:
                continue
            again, prob_again = pbs_postselect(first, PbsGate(0, 2))
            assert prob_again == pytest.approx(1.0, abs=1e-10)
            assert _overlap(again, first) == pytest.approx(1.0, abs=1e-10)


class TestCpbs:
    def test_phi_plus_lands_on_same_colour_coincidences(self):
        branches = _by_label(cpbs_apply(PHI_PLUS, CpbsDevice(0, 1)))
        assert branches[BranchLabel.COINC_HH].probability == pytest.approx(0.5)
        assert branches[BranchLabel.COINC_VV].probability == pytest.approx(0.5)
        assert branches[BranchLabel.COINC_HV].probability == pytest.approx(0.0, abs=1e-12)
        assert branches[BranchLabel.COINC_VH].probability == pytest.approx(0.0, abs=1e-12)

    def test_psi_plus_lands_on_mixed_coincidences(self):
        branches = _by_label(cpbs_apply(PSI_PLUS, CpbsDevice(0, 1)))
        assert branches[BranchLabel.COINC_HV].probability == pytest.approx(0.5)
        assert branches[BranchLabel.COINC_VH].probability == pytest.approx(0.5)

    def test_product_input_spreads_evenly(self):
        branches = _by_label(cpbs_apply(PureState.basis("HH"), CpbsDevice(0, 1)))
        for label in (BranchLabel.COINC_HH, BranchLabel.COINC_VV, BranchLabel.BOTH_LEFT, BranchLabel.BOTH_RIGHT):
            assert branches[label].probability == pytest.approx(0.25)

    def test_probabilities_sum_to_one(self, rng):
        for _ in range(1000):
            state = random_pure(3, rng)
            total = sum(br.probability for br in cpbs_apply(state, CpbsDevice(0, 2)))
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_detected_photons_leave_register(self):
        for br in cpbs_apply(ghz(4), CpbsDevice(1, 2)):
            assert br.state.num_qubits == 2

    def test_coincidence_flags(self):
        assert BranchLabel.COINC_VH.is_coincidence
        assert not BranchLabel.BOTH_RIGHT.is_coincidence


def _projector(bra: np.ndarray) -> np.ndarray:
    return np.outer(bra, bra.conj())


class TestCpbsAsRotatedPbs:
    HH = np.kron(HWP_22_5, HWP_22_5)

    def test_coincidences_are_a_rotated_parity_check(self):
        coincidences = sum(_projector(cpbs_bra(label)) for label in BranchLabel if label.is_coincidence)
        assert_allclose(coincidences, self.HH @ PARITY_PROJECTOR @ self.HH, atol=1e-12)

    @pytest.mark.parametrize(
        "label, kron_ket",
        [(BranchLabel.BOTH_LEFT, ("V", "H")), (BranchLabel.BOTH_RIGHT, ("H", "V"))],
    )
    def test_bunched_outputs_are_rotated_pbs_rejections(self, label, kron_ket):
        ket = np.kron(KETS[kron_ket[0]].amplitudes, KETS[kron_ket[1]].amplitudes)
        assert_allclose(_projector(cpbs_bra(label)), self.HH @ _projector(ket) @ self.HH, atol=1e-12)

    def test_coincidence_weight_matches_rotated_pbs(self, rng):
        for _ in range(1000):
            state = random_pure(2, rng)
            rotated = apply_single(apply_single(state, 0, HWP_22_5), 1, HWP_22_5)
            _, passed = pbs_postselect(rotated, PbsGate(0, 1))
            coincident = sum(br.probability for br in cpbs_apply(state, CpbsDevice(0, 1)) if br.label.is_coincidence)
            assert coincident == pytest.approx(passed, abs=1e-10)
