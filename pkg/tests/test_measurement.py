import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phaseret.measurement import (
    AutocorrelationSpectrum,
    IllConditionedWarning,
    MeasurementSet,
    NodeSet,
    TrigPolynomial,
    autocorrelation_from_coefficients,
    autocorrelation_from_measurements,
    measure,
    measure_at_nodes,
    measure_general,
    random_nodes,
    roots_of_unity,
    to_uniform,
    trig_interpolate,
)
from phaseret.oracle import injectivity_probe
from phaseret.poly import Polynomial, evaluate, global_phase_distance, random_polynomial, trial_seeds

seeds = st.integers(min_value=0, max_value=2**63 - 1)
SQRT3 = math.sqrt(3)


def dft_oracle(samples, n_freqs):
    """a_n = (1/M) sum_j f(t_j) e^{-i n t_j}, straight from the definition."""
    m = len(samples)
    return [
        sum(samples[j] * cmath.exp(-1j * n * 2 * math.pi * j / m) for j in range(m)) / m
        for n in range(n_freqs)
    ]


class TestRootsOfUnity:
    def test_single(self):
        np.testing.assert_array_equal(roots_of_unity(1).angles, [0.0])

    def test_four(self):
        np.testing.assert_allclose(roots_of_unity(4).angles, [0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_three_sum_to_zero(self):
        assert abs(roots_of_unity(3).points.sum()) <= 1e-15

    def test_invalid(self):
        with pytest.raises(ValueError):
            roots_of_unity(0)


class TestNodeSet:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            NodeSet([0.5, 1.0, 0.5])

    def test_rejects_wraparound_duplicate(self):
        with pytest.raises(ValueError):
            NodeSet([0.0, 2 * np.pi - 1e-13])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            NodeSet([0.0, 7.0])

    def test_random_nodes_gap(self):
        for s in range(20):
            ns = random_nodes(15, 2 * np.pi / 64, s)
            assert len(ns) == 15
            assert ns.min_gap() >= 2 * np.pi / 64 - 1e-12

    def test_json_round_trip(self):
        ns = random_nodes(5, 0.1, 3)
        np.testing.assert_array_equal(NodeSet.from_dict(ns.to_dict()).angles, ns.angles)


class TestMeasure:
    def test_linear_example(self):
        ms = measure(Polynomial([1, 2]))
        np.testing.assert_allclose(ms.intensities_p, [3, SQRT3, SQRT3], rtol=1e-15)
        np.testing.assert_allclose(ms.intensities_dp, [2], rtol=1e-15)

    def test_constant(self):
        ms = measure(Polynomial([0.3 - 0.4j, 0]))
        np.testing.assert_allclose(ms.intensities_p, [0.5] * 3, rtol=1e-15)
        np.testing.assert_array_equal(ms.intensities_dp, [0.0])

    @pytest.mark.parametrize("n", [2, 3, 5, 17, 64])
    def test_count(self, n):
        ms = measure(random_polynomial(n, n))
        assert len(ms.intensities_p) == 2 * n - 1
        assert len(ms.intensities_dp) == 2 * n - 3
        assert len(ms) == 4 * n - 4

    def test_requires_n_two(self):
        with pytest.raises(ValueError):
            measure(Polynomial([1]))

    @given(st.integers(2, 32), seeds, st.floats(0, 2 * math.pi))
    def test_phase_invariance(self, n, seed, phi):
        p = random_polynomial(n, seed)
        a = measure(p).vector()
        b = measure(cmath.exp(1j * phi) * p).vector()
        np.testing.assert_allclose(b, a, rtol=1e-13, atol=1e-13 * a.max())

    def test_bad_lengths_rejected(self):
        with pytest.raises(ValueError):
            MeasurementSet(3, [1, 1, 1, 1], [1, 1, 1])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            MeasurementSet(2, [1, -1, 1], [1])

    def test_json_round_trip_is_exact(self):
        ms = measure(random_polynomial(6, 2))
        back = MeasurementSet.from_dict(ms.to_dict())
        np.testing.assert_array_equal(back.intensities_p, ms.intensities_p)
        np.testing.assert_array_equal(back.intensities_dp, ms.intensities_dp)
        assert back.is_uniform


class TestMeasureAtNodes:
    def test_roots_of_unity_specialization(self):
        p = random_polynomial(5, 4)
        vw, vz = measure_at_nodes(p, roots_of_unity(9), roots_of_unity(7))
        ms = measure(p)
        np.testing.assert_allclose(vw, ms.intensities_p, rtol=1e-14)
        np.testing.assert_allclose(vz, ms.intensities_dp, rtol=1e-14)

    def test_arbitrary_angles(self):
        vw, vz = measure_at_nodes(Polynomial([1, 2]), NodeSet([0.0, 1.0, 2.0]), NodeSet([0.5]))
        expected = [abs(1 + 2 * cmath.exp(1j * t)) for t in (0.0, 1.0, 2.0)]
        np.testing.assert_allclose(vw, expected, rtol=1e-15)
        np.testing.assert_allclose(vz, [2.0])

    def test_zero(self):
        vw, vz = measure_at_nodes(Polynomial.zero(3), random_nodes(5, 0.1, 0), random_nodes(3, 0.1, 1))
        assert not vw.any() and not vz.any()

    def test_wrong_counts(self):
        with pytest.raises(ValueError):
            measure_at_nodes(Polynomial([1, 2]), roots_of_unity(4), roots_of_unity(1))

    def test_general_file_embeds_nodes(self):
        p = random_polynomial(3, 0)
        ms = measure_general(p, random_nodes(5, 0.2, 1), random_nodes(3, 0.2, 2))
        d = ms.to_dict()
        assert "nodes_w" in d and "nodes_z" in d
        back = MeasurementSet.from_dict(d)
        np.testing.assert_array_equal(back.nodes_w.angles, ms.nodes_w.angles)


class TestTrigInterpolate:
    def test_constant(self):
        tp = trig_interpolate([2.5] * 5, random_nodes(5, 0.3, 0), 2)
        np.testing.assert_allclose(tp.a, [0, 0, 2.5, 0, 0], atol=1e-13)

    def test_single_exponential(self):
        nodes = NodeSet([0.1, 1.7, 4.0])
        tp = trig_interpolate(np.exp(1j * nodes.angles), nodes, 1)
        np.testing.assert_allclose(tp.a, [0, 0, 1], atol=1e-14)
        assert np.max(np.abs(tp(nodes.angles) - np.exp(1j * nodes.angles))) <= 1e-12

    @pytest.mark.parametrize("n", [2, 4, 9, 20])
    def test_uniform_nodes_match_dft_formula(self, n):
        p = random_polynomial(n, 100 + n)
        nodes = roots_of_unity(2 * n - 1)
        vals = np.abs(evaluate(p, nodes.points)) ** 2
        tp = trig_interpolate(vals, nodes, n - 1)
        expected = dft_oracle(vals, n)
        np.testing.assert_allclose([tp.coefficient(k) for k in range(n)], expected, atol=1e-10 * (1 + p.norm() ** 2))

    def test_interpolant_of_squared_modulus_is_real(self):
        p = random_polynomial(7, 5)
        nodes = roots_of_unity(13)
        tp = trig_interpolate(np.abs(evaluate(p, nodes.points)) ** 2, nodes, 6)
        assert tp.is_real(1e-10)

    @pytest.mark.parametrize("m", [1, 2, 4, 8, 10])
    def test_reproduces_values_at_nodes(self, m):
        for s in trial_seeds(m, 10):
            nodes = random_nodes(2 * m + 1, 2 * np.pi / (8 * m), s)
            vals = np.random.default_rng(s).standard_normal(2 * m + 1)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IllConditionedWarning)
                tp = trig_interpolate(vals, nodes, m)
            np.testing.assert_allclose(tp(nodes.angles), vals, rtol=1e-9, atol=1e-9 * np.abs(vals).max())

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            trig_interpolate([1, 2], roots_of_unity(3), 1)

    def test_near_coalescing_nodes_warn(self):
        nodes = NodeSet([0.0, 1e-7, 2e-7, 3e-7, 4e-7])
        with pytest.warns(IllConditionedWarning):
            trig_interpolate(np.ones(5), nodes, 2)

    def test_is_real_flag(self):
        assert TrigPolynomial(1, [1 - 1j, 2, 1 + 1j]).is_real()
        assert not TrigPolynomial(1, [1j, 2, 1j]).is_real()


class TestAutocorrelation:
    def test_linear_from_measurements(self):
        spec = autocorrelation_from_measurements(measure(Polynomial([1, 2])))
        np.testing.assert_allclose(spec.f, [5, 2], atol=1e-14)
        np.testing.assert_allclose(spec.fprime, [4, 0], atol=1e-14)

    def test_linear_from_hand_values(self):
        # spectra of the exact intensities (3, sqrt3, sqrt3) and (2,)
        ms = MeasurementSet(2, [3, SQRT3, SQRT3], [2])
        spec = autocorrelation_from_measurements(ms)
        np.testing.assert_allclose(spec.f, dft_oracle([9, 3, 3], 2), atol=1e-14)
        np.testing.assert_allclose(spec.f, [5, 2], atol=1e-14)

    def test_constant(self):
        spec = autocorrelation_from_measurements(measure(Polynomial([2j, 0, 0, 0])))
        np.testing.assert_allclose(spec.f, [4, 0, 0, 0], atol=1e-14)
        np.testing.assert_array_equal(spec.fprime, 0)

    def test_monomial_z_squared(self):
        spec = autocorrelation_from_measurements(measure(Polynomial([0, 0, 1])))
        np.testing.assert_allclose(spec.f, [1, 0, 0], atol=1e-14)
        np.testing.assert_allclose(spec.fprime, [4, 0, 0], atol=1e-14)

    def test_from_coefficients_linear(self):
        spec = autocorrelation_from_coefficients(Polynomial([1, 2]))
        np.testing.assert_array_equal(spec.f, [5, 2])
        np.testing.assert_array_equal(spec.fprime, [4, 0])

    def test_from_coefficients_sparse_cubic(self):
        spec = autocorrelation_from_coefficients(Polynomial([0, 1, 0, 1]))
        np.testing.assert_array_equal(spec.f, [2, 0, 1, 0])
        np.testing.assert_array_equal(spec.fprime, [10, 0, 3, 0])

    def test_from_coefficients_zero(self):
        spec = autocorrelation_from_coefficients(Polynomial.zero(4))
        assert not spec.f.any() and not spec.fprime.any()

    def test_convention_entry(self):
        for n in (2, 5, 9):
            assert autocorrelation_from_measurements(measure(random_polynomial(n, 0))).fprime[-1] == 0

    def test_spectrum_rejects_bad_convention(self):
        with pytest.raises(ValueError):
            AutocorrelationSpectrum(2, [1, 0], [1, 1])

    def test_spectrum_rejects_complex_lag_zero(self):
        with pytest.raises(ValueError):
            AutocorrelationSpectrum(2, [1 + 1j, 0], [1, 0])

    @given(st.integers(2, 64), seeds)
    def test_two_routes_agree(self, n, seed):
        p = random_polynomial(n, seed)
        a = autocorrelation_from_measurements(measure(p))
        b = autocorrelation_from_coefficients(p)
        tol = 1e-10 * (1 + p.norm() ** 2)
        assert np.max(np.abs(a.f - b.f)) <= tol
        assert np.max(np.abs(a.fprime - b.fprime)) <= tol

    @given(st.integers(2, 32), st.data())
    def test_degree_truncation(self, n, data):
        d = data.draw(st.integers(0, n - 1))
        p = random_polynomial(n, data.draw(seeds), support=range(0, d + 1))
        spec = autocorrelation_from_measurements(measure(p))
        tol = 1e-10 * (1 + p.norm() ** 2)
        assert np.all(np.abs(spec.f[d + 1 :]) <= tol)
        assert np.all(np.abs(spec.fprime[max(d, 0) :]) <= tol)

    def test_requires_uniform(self):
        ms = measure_general(random_polynomial(3, 0), random_nodes(5, 0.2, 0), random_nodes(3, 0.2, 1))
        with pytest.raises(ValueError):
            autocorrelation_from_measurements(ms)


class TestBridge:
    def test_uniform_passthrough(self):
        ms = measure(random_polynomial(4, 0))
        assert to_uniform(ms) is ms

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_resampled_matches_uniform(self, n):
        p = random_polynomial(n, n)
        gap = 2 * np.pi / (8 * n)
        s1, s2 = trial_seeds(n, 2)
        ms = measure_general(p, random_nodes(2 * n - 1, gap, s1), random_nodes(2 * n - 3, gap, s2))
        bridged = to_uniform(ms)
        direct = measure(p)
        assert bridged.is_uniform
        np.testing.assert_allclose(bridged.intensities_p, direct.intensities_p, atol=1e-9 * (1 + p.norm()))
        np.testing.assert_allclose(bridged.intensities_dp, direct.intensities_dp, atol=1e-9 * (1 + n * p.norm()))


class TestInjectivity:
    def test_equivalent_pair(self):
        p = random_polynomial(6, 1)
        assert injectivity_probe(p, cmath.exp(0.7j) * p) <= 1e-13

    def test_sign_flip(self):
        assert injectivity_probe(Polynomial([1, 2]), Polynomial([1, -2])) > 1e-6

    def test_derivative_separates(self):
        p, q = Polynomial([1, 0]), Polynomial([0, 1])
        a, b = measure(p), measure(q)
        np.testing.assert_allclose(a.intensities_p, b.intensities_p, atol=1e-15)
        assert injectivity_probe(p, q) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            injectivity_probe(Polynomial([1, 2]), Polynomial([1, 2, 3]))

    def test_random_pairs_separated(self):
        checked = 0
        for s in trial_seeds(2024, 200):
            rng = np.random.default_rng(s)
            n = int(rng.integers(2, 9))
            s1, s2 = trial_seeds(s, 2)
            p, q = random_polynomial(n, s1), random_polynomial(n, s2)
            if global_phase_distance(p, q) <= 0.1:
                continue
            checked += 1
            assert injectivity_probe(p, q) > 1e-6
        assert checked >= 190
