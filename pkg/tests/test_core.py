"""Tests for polarization-qubit registers and their operations."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import CapacityError, DimensionError, NonUnitaryError, QubitIndexError
from core.states import (
    KETS,
    PHI_PLUS,
    PSI_PLUS,
    DensityMatrix,
    PauliString,
    Projector,
    PureState,
    apply_single,
    expectation,
    fidelity,
    ghz,
    project,
    random_density,
    random_pure,
    tensor,
)


HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]])


class TestTensor:
    def test_basis_product(self):
        state = tensor(KETS["H"], KETS["V"])
        assert state.num_qubits == 2
        assert state.amplitude("HV") == pytest.approx(1.0)
        assert state.amplitude("VH") == pytest.approx(0.0)

    def test_two_bell_pairs(self):
        state = tensor(PHI_PLUS, PHI_PLUS)
        expected = np.zeros(16)
        expected[[0b0000, 0b0011, 0b1100, 0b1111]] = 0.5
        assert_allclose(state.amplitudes, expected, atol=1e-12)

    def test_ghz2_is_phi_plus(self):
        assert_allclose(ghz(2).amplitudes, PHI_PLUS.amplitudes, atol=1e-12)

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            tensor(ghz(8), ghz(7))


class TestApplySingle:
    def test_hadamard_on_h_gives_d(self):
        out = apply_single(KETS["H"], 0, HADAMARD)
        assert_allclose(out.amplitudes, KETS["D"].amplitudes, atol=1e-12)

    def test_identity_is_noop(self, rng):
        state = random_pure(3, rng)
        out = apply_single(state, 1, np.eye(2))
        assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)

    def test_x_maps_phi_to_psi(self):
        out = apply_single(PHI_PLUS, 0, X)
        assert_allclose(out.amplitudes, PSI_PLUS.amplitudes, atol=1e-12)

    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitaryError):
            apply_single(KETS["H"], 0, np.array([[1, 1], [0, 1]]))

    def test_rejects_bad_index(self):
        with pytest.raises(QubitIndexError):
            apply_single(PHI_PLUS, 2, HADAMARD)

    def test_norm_preserved_over_many_gates(self, rng):
        state = random_pure(4, rng)
        for i in range(100):
            theta = rng.uniform(0, np.pi)
            u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
            state = apply_single(state, i % 4, u)
        assert state.norm() == pytest.approx(1.0, abs=1e-10)


class TestProject:
    def test_phi_plus_first_qubit_h(self):
        out, prob = project(PHI_PLUS, Projector.on((0, "H")))
        assert prob == pytest.approx(0.5)
        assert abs(out.amplitude("HH")) == pytest.approx(1.0)

    def test_annihilating_projection(self):
        out, prob = project(PHI_PLUS, Projector.on((0, "H"), (1, "V")))
        assert prob == 0.0
        assert out.is_empty

    def test_ghz4_d_projection_leaves_ghz3(self):
        out, prob = project(ghz(4), Projector.on((0, "D"), discard=True))
        assert prob == pytest.approx(0.5)
        assert out.num_qubits == 3
        assert abs(np.vdot(ghz(3).amplitudes, out.amplitudes)) == pytest.approx(1.0)

    def test_basis_completeness(self, rng):
        state = random_pure(3, rng)
        _, p_d = project(state, Projector.on((1, "D")))
        _, p_a = project(state, Projector.on((1, "A")))
        assert p_d + p_a == pytest.approx(1.0, abs=1e-10)


class TestFidelity:
    def test_pure_target(self):
        assert fidelity(ghz(4).to_density(), ghz(4)) == pytest.approx(1.0)

    def test_maximally_mixed(self):
        assert fidelity(DensityMatrix.maximally_mixed(4), ghz(4)) == pytest.approx(1 / 16)

    def test_mixture_with_orthogonal_state(self):
        good = ghz(4).to_density().entries
        bad = ghz(4, sign=-1).to_density().entries
        rho = DensityMatrix(4, 0.896 * good + 0.104 * bad)
        assert fidelity(rho, ghz(4)) == pytest.approx(0.896, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            fidelity(ghz(3).to_density(), ghz(4))


class TestExpectation:
    def test_phi_plus_stabilizers(self):
        rho = PHI_PLUS.to_density()
        assert expectation(rho, "XX") == pytest.approx(1.0)
        assert expectation(rho, "YY") == pytest.approx(-1.0)
        assert expectation(rho, "ZZ") == pytest.approx(1.0)

    def test_psi_plus_zz(self):
        assert expectation(PSI_PLUS.to_density(), PauliString("ZZ")) == pytest.approx(-1.0)

    def test_maximally_mixed_is_zero(self):
        rho = DensityMatrix.maximally_mixed(2)
        for letters in ("XI", "IZ", "XY", "ZZ", "YX"):
            assert expectation(rho, letters) == pytest.approx(0.0, abs=1e-12)

    def test_pauli_string_letters(self):
        with pytest.raises(ValueError):
            PauliString("XQ")


class TestDensityMatrix:
    def test_random_states_are_valid(self, rng):
        for _ in range(20):
            assert random_density(2, rng).is_valid()

    def test_partial_trace_of_bell_pair(self):
        reduced = PHI_PLUS.to_density().partial_trace([1])
        assert_allclose(reduced.entries, np.eye(2) / 2, atol=1e-12)

    def test_reorder_swaps_qubits(self):
        rho = PureState.basis("HV").to_density().reorder([1, 0])
        assert_allclose(rho.entries, PureState.basis("VH").to_density().entries, atol=1e-12)

    def test_values_are_read_only(self):
        with pytest.raises(ValueError):
            PHI_PLUS.amplitudes[0] = 0.0
