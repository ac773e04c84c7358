"""
Tests for sources, amplitudes and pair rates
"""
from math import acos, pi, sqrt

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import random_spec
from pathid.core.errors import CoherenceError, SpecValidationError
from pathid.core.model import (
    InterferometerSpec,
    PhaseConvention,
    SourceSpec,
    balanced_spec,
    convert_phases,
    fock_state,
    modulus_and_argument,
    pair_rate,
    pair_rate_grid,
    pairwise_rate,
    pairwise_visibility,
    source_probabilities,
    source_amplitude,
    total_amplitude,
    with_phases,
    with_yields,
)


def _spec(*sources, convention=PhaseConvention.ABSOLUTE):
    return InterferometerSpec(
        sources=tuple(SourceSpec(label=f"NL{k + 1}", **fields) for k, fields in enumerate(sources)),
        phase_convention=convention,
    )


class TestSourceAmplitude:
    def test_unit_yield(self):
        assert source_amplitude(SourceSpec(label="a", yield_rate=1.0)) == pytest.approx(1 + 0j)

    def test_sign_from_phase(self):
        amplitude = source_amplitude(SourceSpec(label="a", yield_rate=4.0, phase=pi))
        assert amplitude.real == pytest.approx(-2.0)
        assert abs(amplitude.imag) < 1e-12

    def test_square_root_of_yield(self):
        assert source_amplitude(SourceSpec(label="a", yield_rate=2200.0)).real == pytest.approx(46.9041575982343)

    def test_argument_of_zero_is_zero(self):
        assert modulus_and_argument(0j) == (0.0, 0.0)
        assert modulus_and_argument(-1 + 0j) == pytest.approx((1.0, pi))


class TestValidation:
    def test_negative_yield_rejected(self):
        with pytest.raises(ValidationError):
            SourceSpec(label="a", yield_rate=-1.0)

    def test_leak_angle_range(self):
        with pytest.raises(ValidationError):
            SourceSpec(label="a", yield_rate=1.0, leak_angle=pi / 2 + 1e-6)

    def test_non_finite_phase_rejected(self):
        with pytest.raises(ValidationError):
            SourceSpec(label="a", yield_rate=1.0, phase=float("nan"))

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValidationError):
            InterferometerSpec(sources=(SourceSpec(label="a", yield_rate=1.0), SourceSpec(label="a", yield_rate=1.0)))

    def test_needs_a_source(self):
        with pytest.raises(ValidationError):
            InterferometerSpec(sources=())


class TestTotalAmplitude:
    def test_three_sources(self):
        assert total_amplitude(balanced_spec([pi, 0.0, pi])) == pytest.approx(-1 + 0j, abs=1e-12)

    def test_frustrated_pair(self):
        assert abs(total_amplitude(balanced_spec([pi, 0.0]))) < 1e-12

    def test_third_of_a_turn(self):
        amplitude = total_amplitude(balanced_spec([2 * pi / 3, 0.0]))
        assert amplitude == pytest.approx(np.exp(2j * pi / 3) + 1)
        assert abs(amplitude) == pytest.approx(1.0)

    def test_rejects_partial_coherence(self):
        with pytest.raises(CoherenceError):
            total_amplitude(_spec({"yield_rate": 1.0, "leak_angle": 0.1}, {"yield_rate": 1.0}))


class TestPairRate:
    def test_fully_constructive(self):
        assert pair_rate(balanced_spec([0.0, 0.0, 0.0])) == pytest.approx(9.0)

    def test_pi_pi_keeps_emitting(self):
        assert pair_rate(balanced_spec([pi, 0.0, pi])) == pytest.approx(1.0)

    @pytest.mark.parametrize("phi", [0.0, 0.7, pi / 2, pi, 4.0])
    def test_partial_coherence_pair(self, phi):
        e1 = acos(0.9864)
        spec = _spec({"yield_rate": 2200.0, "phase": phi, "leak_angle": e1}, {"yield_rate": 2000.0})
        expected = 4200.0 + 2 * sqrt(2200.0 * 2000.0) * 0.9864 * np.cos(phi)
        assert pair_rate(spec) == pytest.approx(expected, rel=1e-12)

    def test_single_source_normalization(self, rng):
        for _ in range(50):
            spec = random_spec(rng, 1)
            assert pair_rate(spec) == pytest.approx(spec.sources[0].yield_rate, rel=1e-14, abs=1e-12)

    def test_non_negative(self, rng):
        for _ in range(500):
            assert pair_rate(random_spec(rng, int(rng.integers(1, 6)))) >= 0.0

    def test_coherent_limit(self, rng):
        for _ in range(200):
            spec = random_spec(rng, int(rng.integers(1, 6)), coherent=True)
            assert pair_rate(spec) == pytest.approx(abs(total_amplitude(spec)) ** 2, rel=1e-12, abs=1e-9)

    def test_phase_periodicity(self, rng):
        for _ in range(100):
            spec = random_spec(rng, 3)
            k = int(rng.integers(0, 3))
            shifted = with_phases(spec, {k: spec.sources[k].phase + 2 * pi})
            assert pair_rate(shifted) == pytest.approx(pair_rate(spec), rel=1e-10, abs=1e-9)

    def test_global_phase_symmetry(self, rng):
        for _ in range(100):
            spec = random_spec(rng, 4)
            shift = float(rng.uniform(-pi, pi))
            rotated = with_phases(spec, {k: s.phase + shift for k, s in enumerate(spec.sources)})
            assert pair_rate(rotated) == pytest.approx(pair_rate(spec), rel=1e-10, abs=1e-9)

    def test_balanced_zero_visibility_line_is_flat(self):
        rates = [pair_rate(balanced_spec([pi, 0.0, t])) for t in np.linspace(-pi, 3 * pi, 97)]
        assert max(rates) - min(rates) <= 1e-12 * max(rates)

    def test_grid_matches_pointwise(self, rng):
        spec = random_spec(rng, 3)
        a = np.linspace(0, 2 * pi, 7)
        c = np.linspace(-pi, pi, 5)
        grid_a, grid_c = np.meshgrid(a, c, indexing="ij")
        rates = pair_rate_grid(spec, [0, 2], [grid_a, grid_c])
        for i, phase_a in enumerate(a):
            for j, phase_c in enumerate(c):
                expected = pair_rate(with_phases(spec, {0: phase_a, 2: phase_c}))
                assert rates[i, j] == pytest.approx(expected, rel=1e-12, abs=1e-9)


class TestFockState:
    def test_single_source(self):
        state = fock_state(_spec({"yield_rate": 4.0, "phase": 0.3}))
        assert state.amplitudes == pytest.approx(np.array([2 * np.exp(0.3j), 0.0]))

    def test_three_mode_construction(self):
        a, b, c = sqrt(2200.0), sqrt(2000.0), sqrt(1800.0)
        e1, e3 = 0.17, 0.12
        phi1, phi2 = 0.4, 1.1
        spec = _spec(
            {"yield_rate": a ** 2, "phase": 0.0, "leak_angle": e1},
            {"yield_rate": b ** 2, "phase": phi1},
            {"yield_rate": c ** 2, "phase": phi2, "leak_angle": e3},
            convention=PhaseConvention.CUMULATIVE,
        )
        state = fock_state(spec)
        expected_common = a * np.cos(e1) + b * np.exp(1j * phi1) + c * np.cos(e3) * np.exp(1j * (phi1 + phi2))
        assert state.common == pytest.approx(expected_common)
        assert state.leaks == pytest.approx(np.array([a * np.sin(e1), 0.0, c * np.sin(e3) * np.exp(1j * (phi1 + phi2))]))

    def test_norm_matches_rate(self, rng):
        for _ in range(500):
            spec = random_spec(rng, int(rng.integers(1, 6)))
            assert fock_state(spec).norm_squared == pytest.approx(pair_rate(spec), rel=1e-12, abs=1e-9)


class TestPairwise:
    def test_frustrated(self):
        assert pairwise_rate(balanced_spec([0.0, 0.0]), 0, 1, pi) == pytest.approx(0.0, abs=1e-12)

    def test_measured_visibility_reproduced(self):
        cos_e1 = 0.9853 * 4200.0 / (2 * sqrt(2200.0 * 2000.0))
        spec = _spec({"yield_rate": 2200.0, "leak_angle": acos(cos_e1)}, {"yield_rate": 2000.0})
        high, low = pairwise_rate(spec, 0, 1, 0.0), pairwise_rate(spec, 0, 1, pi)
        assert (high - low) / (high + low) == pytest.approx(0.9853, abs=1e-12)
        assert pairwise_visibility(spec, 0, 1) == pytest.approx(0.9853, abs=1e-12)

    def test_skipping_the_middle_source(self):
        e1, e3 = 0.2, 0.15
        spec = _spec({"yield_rate": 2200.0, "leak_angle": e1}, {"yield_rate": 2000.0},
                     {"yield_rate": 1800.0, "leak_angle": e3})
        expected = 2 * sqrt(2200.0 * 1800.0) * np.cos(e1) * np.cos(e3) / 4000.0
        assert pairwise_visibility(spec, 0, 2) == pytest.approx(expected, rel=1e-12)
        without_middle = with_yields(spec, {1: 0.0})
        rates = [pair_rate(with_phases(without_middle, {2: phi})) for phi in (0.0, pi)]
        assert (rates[0] - rates[1]) / (rates[0] + rates[1]) == pytest.approx(expected, rel=1e-12)

    def test_index_out_of_range(self):
        with pytest.raises(SpecValidationError):
            pairwise_rate(balanced_spec([0.0, 0.0]), 0, 2, 0.0)

    def test_same_index(self):
        with pytest.raises(SpecValidationError):
            pairwise_rate(balanced_spec([0.0, 0.0]), 1, 1, 0.0)


class TestPhaseConvention:
    def test_absolute_to_cumulative_and_back(self):
        spec = balanced_spec([0.5, 0.0, 2.0])
        cumulative = convert_phases(spec, PhaseConvention.CUMULATIVE)
        assert cumulative.phases == pytest.approx([0.5, -0.5, 2.0])
        assert pair_rate(cumulative) == pytest.approx(pair_rate(spec))
        back = convert_phases(cumulative, PhaseConvention.ABSOLUTE)
        assert back.phases == pytest.approx(spec.phases)

    def test_cumulative_accumulates(self):
        spec = convert_phases(balanced_spec([0.0, 0.0, 0.0]), PhaseConvention.CUMULATIVE)
        spec = with_phases(spec, {1: pi / 2, 2: pi / 2})
        assert spec.accumulated_phases() == pytest.approx([0.0, pi / 2, pi])


class TestSourceProbabilities:
    def test_measured_yields(self, measured_yields_spec):
        shares = source_probabilities(measured_yields_spec)
        assert shares == pytest.approx([2200 / 6000, 2000 / 6000, 1800 / 6000])
        assert shares.sum() == pytest.approx(1.0)

    def test_all_dark(self):
        assert source_probabilities(balanced_spec([0.0, 0.0], yield_rate=0.0)).tolist() == [0.0, 0.0]
