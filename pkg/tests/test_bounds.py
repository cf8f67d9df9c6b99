"""Formula-level tests for the eigenvalue bound toolkit.

Expected values were computed with the independent oracles defined here
(bisection, dense root scans, brute-force inequality evaluation) and then
frozen.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from elastica.bounds import (BoundRecord, DegenerateGapError, DomainGeometry,
                             Spectrum, SpectrumError, VerifyTolerance,
                             alpha_threshold, average_upper, blend_weight,
                             cheng_yang_sum, chebyshev_sum_check,
                             coupling_coefficient, evaluate_all, gap_upper,
                             hook_sum_ratio, index_growth_upper,
                             levine_protter_lower, levitin_parnovski_gap,
                             low_order_check, sphere_surface_measure,
                             yang_coefficient, yang_type_next_upper,
                             yang_type_quadratic)
from conftest import bisect


def spectrum(values, n=2, alpha=0.0):
    return Spectrum(n, alpha, np.asarray(values, dtype=float))


class TestThresholdAndCoefficients:
    def test_threshold_closed_form_values(self):
        assert alpha_threshold(1) == pytest.approx(4.0, abs=0)  # sqrt(25)=5
        assert alpha_threshold(2) == pytest.approx(2 + 2 * math.sqrt(2),
                                                   rel=1e-15)
        assert alpha_threshold(3) == pytest.approx((5 + math.sqrt(41)) / 2,
                                                   rel=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 7])
    def test_threshold_is_root_of_branch_quadratic(self, n):
        # oracle: bisection on a^2 - (n+2)a - 4 = 0
        root = bisect(lambda a: a * a - (n + 2) * a - 4, 0.0, 50.0)
        assert alpha_threshold(n) == pytest.approx(root, rel=1e-12)

    def test_blend_weight_values(self):
        assert blend_weight(2, 0.0) == 1.0
        assert blend_weight(3, 1.0) == pytest.approx(1.125, abs=0)
        assert blend_weight(2, 4.0) == pytest.approx(1.0 / 9.0, rel=1e-15)

    def test_blend_weight_rejects_wrong_branch(self):
        with pytest.raises(ValueError):
            blend_weight(2, alpha_threshold(2) + 1e-9)

    def test_coupling_coefficient_branches(self):
        assert coupling_coefficient(2, 0.0) == pytest.approx(4.0, abs=0)
        assert coupling_coefficient(2, 10.0) == pytest.approx(104.0, abs=0)
        # at the branch point both expressions give 8 + 4*alpha = 16 + 8*sqrt(2)
        star = alpha_threshold(2)
        both = 16 + 8 * math.sqrt(2)
        assert coupling_coefficient(2, star) == pytest.approx(both, rel=1e-14)
        assert 4 + star ** 2 == pytest.approx(both, rel=1e-14)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_branch_continuity(self, n):
        star = alpha_threshold(n)
        eps = 1e-9
        below = coupling_coefficient(n, star - eps)
        above = coupling_coefficient(n, star + eps)
        assert abs(below - above) < 1e-6 * above

    @pytest.mark.parametrize("n", range(1, 11))
    def test_yang_reduction_exact(self, n):
        assert yang_coefficient(n, 0.0) == 4.0 / n

    def test_yang_coefficient_values(self):
        assert yang_coefficient(2, 0.0) == 2.0
        assert yang_coefficient(2, 10.0) == pytest.approx(104.0 / 12.0,
                                                          rel=1e-15)
        assert yang_coefficient(3, 1.0) == pytest.approx(26.0 / 17.0,
                                                         rel=1e-14)

    def test_dominance_on_grid(self):
        # never weaker than the max-form gap coefficient or the plain 4(n+a)/n^2
        for n in range(1, 11):
            for alpha in np.arange(0.0, 50.01, 0.5):
                c = yang_coefficient(n, alpha)
                assert c <= 4 * (n + alpha) / n ** 2
                big = max(4 + alpha ** 2, (n + 2) * alpha + 8)
                assert c * (n + alpha) <= big * (1 + 1e-15)


class TestUpperBounds:
    def test_next_upper_k1_factorisation(self):
        s = spectrum([3.0])
        c = yang_coefficient(2, 0.0)
        assert yang_type_next_upper(s, 1) == pytest.approx((1 + c) * 3.0,
                                                           rel=1e-14)

    def test_next_upper_equal_eigenvalues(self):
        # 2x^2 - 16x + 24 = 0 -> largest root 6
        assert yang_type_next_upper(spectrum([2.0, 2.0]), 2) == \
            pytest.approx(6.0, rel=1e-14)

    def test_next_upper_scan_oracle(self):
        # oracle: locate the sign change of the quadratic by dense scan
        s = spectrum([2.0, 5.0])
        c = yang_coefficient(2, 0.0)

        def quad(x):
            sig = s.values[:2]
            return 2 * x ** 2 - (2 + c) * sig.sum() * x \
                + (1 + c) * (sig ** 2).sum()

        grid = np.linspace(5.0, 50.0, 200001)
        signs = np.sign(quad(grid))
        idx = np.flatnonzero(np.diff(signs) > 0)[-1]
        root = bisect(quad, grid[idx], grid[idx + 1])
        expected = (28 + math.sqrt(88)) / 4
        assert root == pytest.approx(expected, rel=1e-10)
        assert yang_type_next_upper(s, 2) == pytest.approx(expected,
                                                           rel=1e-14)

    def test_next_upper_rejects_inconsistent_spectrum(self):
        # a wildly growing artificial sequence makes the discriminant negative
        bad = Spectrum(2, 0.0, np.array([1.0, 100.0]))
        with pytest.raises(SpectrumError, match="k=2"):
            yang_type_next_upper(bad, 2)

    def test_average_upper_values(self):
        assert average_upper(spectrum([2.0]), 1) == pytest.approx(6.0)
        assert average_upper(spectrum([2.0, 2.0, 5.0]), 3) == \
            pytest.approx(9.0, rel=1e-15)

    def test_average_dominates_quadratic_root(self, rng):
        checked = 0
        for _ in range(300):
            k = int(rng.integers(1, 9))
            vals = np.sort(rng.uniform(0.1, 10.0, size=k))
            s = spectrum(vals, n=int(rng.integers(1, 5)),
                         alpha=float(rng.uniform(0, 20)))
            try:
                root = yang_type_next_upper(s, k)
            except SpectrumError:
                continue  # random sequence too spread to be a spectrum
            checked += 1
            assert root <= average_upper(s, k) * (1 + 1e-12)
        assert checked > 100

    def test_gap_upper_values(self):
        assert gap_upper(spectrum([2.0]), 1) == pytest.approx(4.0)
        assert gap_upper(spectrum([2.0, 5.0]), 2) == pytest.approx(7.0)
        assert gap_upper(spectrum([1.0], alpha=10.0), 1) == \
            pytest.approx(104.0 / 12.0, rel=1e-14)

    def test_levitin_parnovski_values(self):
        assert levitin_parnovski_gap(spectrum([2.0]), 1) == pytest.approx(8.0)
        assert levitin_parnovski_gap(spectrum([1.0], alpha=10.0), 1) == \
            pytest.approx(104.0 / 12.0, rel=1e-14)

    def test_gap_bound_never_weaker_than_max_form(self):
        # the minimised coefficient strengthens the max-form gap bound
        for n in range(1, 11):
            for alpha in np.linspace(0.0, 50.0, 101):
                s = spectrum([1.0, 2.0], n=n, alpha=float(alpha))
                assert gap_upper(s, 1) <= \
                    levitin_parnovski_gap(s, 1) * (1 + 1e-15)

    def test_index_growth_values(self):
        assert index_growth_upper(2.0, 2, 0.0, 4) == pytest.approx(24.0)
        assert index_growth_upper(1.0, 2, 2.0, 2) == pytest.approx(20.0)
        # k = 1 never undercuts the averaged bound there
        s = spectrum([3.0], n=3, alpha=1.5)
        assert index_growth_upper(3.0, 3, 1.5, 1) >= average_upper(s, 1)


class TestRatioAndLowerBounds:
    def test_hook_equality_instance(self):
        lhs, rhs = hook_sum_ratio(spectrum([2.0, 6.0]), 1)
        assert lhs == pytest.approx(0.5)
        assert rhs == pytest.approx(0.5)

    def test_hook_values(self):
        lhs, rhs = hook_sum_ratio(spectrum([2.0, 2.0, 5.0]), 2)
        assert lhs == pytest.approx(4.0 / 3.0, rel=1e-15)
        assert rhs == pytest.approx(1.0)
        lhs, rhs = hook_sum_ratio(spectrum([1.0, 1.1], n=3, alpha=5.0), 1)
        assert lhs == pytest.approx(10.0, rel=1e-12)
        assert rhs == pytest.approx(9.0 / 32.0, rel=1e-15)

    def test_hook_degenerate_gap(self):
        with pytest.raises(DegenerateGapError):
            hook_sum_ratio(spectrum([2.0, 2.0]), 1)

    def test_sphere_surface_measures(self):
        assert sphere_surface_measure(2) == pytest.approx(2 * math.pi,
                                                          rel=1e-15)
        assert sphere_surface_measure(3) == pytest.approx(4 * math.pi,
                                                          rel=1e-15)
        # log-gamma path stays finite far out
        assert 0 < sphere_surface_measure(50) < 1.0

    def test_levine_protter_square_box(self):
        geom = DomainGeometry(2, (math.pi, math.pi))
        assert levine_protter_lower(geom, 1) == pytest.approx(1 / math.pi,
                                                              rel=1e-15)
        # computed sigma_1 = 2 at alpha = 0 satisfies it comfortably
        assert levine_protter_lower(geom, 1) < 2.0
        assert levine_protter_lower(geom, 15) == \
            pytest.approx(15 ** 2 / math.pi, rel=1e-15)

    def test_low_order_check(self):
        rec = low_order_check(spectrum([2.0, 5.0, 5.0]))
        assert rec.bound_value == pytest.approx(12.0)
        assert rec.measured_value == pytest.approx(10.0)
        assert rec.verdict == "pass"
        rec = low_order_check(spectrum([1.0, 1.0, 1.0]))
        assert rec.verdict == "pass" and rec.bound_value == 6.0
        rec = low_order_check(spectrum([1.0, 1.0, 1.0], alpha=1.0))
        assert rec.bound_value == pytest.approx(10.0)

    def test_low_order_needs_enough_values(self):
        with pytest.raises(SpectrumError):
            low_order_check(spectrum([1.0, 2.0], n=3))


class TestChebyshevSum:
    def test_known_instance(self):
        lhs, rhs = chebyshev_sum_check([2.0, 1.0], [1.0, 2.0], 2.0)
        assert lhs == 30.0 and rhs == 36.0

    def test_k1_and_constant_equality(self):
        lhs, rhs = chebyshev_sum_check([3.0], [7.0], 1.5)
        assert lhs == rhs
        lhs, rhs = chebyshev_sum_check([1.0] * 5, [1.0, 2, 3, 4, 5], 3.0)
        assert lhs == pytest.approx(rhs, rel=1e-15)

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            chebyshev_sum_check([1.0, 2.0], [1.0, 2.0], 2.0)
        with pytest.raises(ValueError):
            chebyshev_sum_check([2.0, 1.0], [2.0, 1.0], 2.0)

    @given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=12),
           st.lists(st.floats(0.0, 100.0), min_size=1, max_size=12),
           st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    @settings(max_examples=200, deadline=None)
    def test_holds_on_sorted_sequences(self, a, b, s):
        k = min(len(a), len(b))
        a = np.sort(np.asarray(a[:k]))[::-1]
        b = np.sort(np.asarray(b[:k]))
        lhs, rhs = chebyshev_sum_check(a, b, s)
        assert lhs <= rhs + 1e-12 * max(rhs, 1.0)


class TestSpectrumValidation:
    def test_rejects_unsorted_and_nonpositive(self):
        with pytest.raises(SpectrumError):
            Spectrum(2, 0.0, np.array([2.0, 1.0]))
        with pytest.raises(SpectrumError):
            Spectrum(2, 0.0, np.array([0.0, 1.0]))
        with pytest.raises(SpectrumError):
            Spectrum(0, 0.0, np.array([1.0]))
        with pytest.raises(SpectrumError):
            Spectrum(2, -0.5, np.array([1.0]))

    def test_residual_contract(self):
        Spectrum(2, 0.0, np.array([1.0, 2.0]), source="computed",
                 residuals=np.array([1e-10, 1e-10]), solver_tol=1e-8)
        with pytest.raises(SpectrumError):
            Spectrum(2, 0.0, np.array([1.0, 2.0]), source="computed",
                     residuals=np.array([1e-6, 1e-10]), solver_tol=1e-8)


def sorted_spectra(draw):
    n = draw(st.integers(1, 4))
    alpha = draw(st.floats(0.0, 25.0))
    k = draw(st.integers(1, 10))
    base = draw(st.lists(st.floats(0.01, 50.0), min_size=k + 1,
                         max_size=k + 1))
    vals = np.sort(np.asarray(base))
    return Spectrum(n, alpha, vals), k


spectra_strategy = st.composite(sorted_spectra)()


class TestProperties:
    def test_next_upper_monotone_on_lattice_spectra(self, rng):
        # monotone under perturbation of genuine spectra; arbitrary
        # sequences near the consistency boundary admit counterexamples
        # (see test_monotonicity_boundary_counterexample)
        from elastica.assembly import reference_spectrum_alpha0
        for _ in range(300):
            n = int(rng.integers(2, 4))
            edges = tuple(rng.uniform(0.5, 3.0, size=n))
            vals = reference_spectrum_alpha0(edges, 14) \
                * rng.uniform(0.2, 5.0)
            alpha = float(rng.uniform(0.0, 10.0))
            k = int(rng.integers(1, 13))
            base = yang_type_next_upper(Spectrum(n, alpha, vals), k)
            i = int(rng.integers(0, k))
            bumped = vals.copy()
            bumped[i] *= 1.001
            bumped = np.sort(bumped)
            assert yang_type_next_upper(Spectrum(n, alpha, bumped), k) >= \
                base * (1 - 1e-12)

    def test_monotonicity_boundary_counterexample(self):
        # the root is NOT monotone for sequences whose top entry sits close
        # to the bound itself: the derivative flips sign once
        # sigma_k > (2+C) x+ / (2(1+C)); such sequences pass prefix
        # consistency but do not arise as actual spectra in our runs
        vals = np.array([2.76659659, 4.71368702, 8.67012158, 13.546667])
        n, alpha = 3, 2.366061697766446
        base = yang_type_next_upper(Spectrum(n, alpha, vals), 4)
        bumped = vals.copy()
        bumped[3] *= 1.001
        assert yang_type_next_upper(Spectrum(n, alpha, bumped), 4) < base

    @given(spectra_strategy)
    @settings(max_examples=150, deadline=None)
    def test_k1_consistency(self, case):
        s, _ = case
        c = yang_coefficient(s.dim, s.alpha)
        expected = (1 + c) * s.values[0]
        assert yang_type_next_upper(s, 1) == pytest.approx(expected,
                                                           rel=1e-12)
        assert average_upper(s, 1) == pytest.approx(expected, rel=1e-12)

    @given(spectra_strategy)
    @settings(max_examples=200, deadline=None)
    def test_quadratic_implies_cheng_yang(self, case):
        # the minimised-coefficient inequality pushes through the
        # Chebyshev-sum chain to the square-root form
        s, k = case
        d = s.values[k] - s.values[:k]
        assume(np.all(d > 0))
        lhs = float(np.sum(d ** 2))
        plain = 4 * (s.dim + s.alpha) / s.dim ** 2 * float(
            np.sum(d * s.values[:k]))
        assume(lhs <= plain)
        cy_lhs, cy_rhs = cheng_yang_sum(s, k)
        assert cy_lhs <= cy_rhs * (1 + 1e-10)

    @given(spectra_strategy)
    @settings(max_examples=100, deadline=None)
    def test_chain_instances_match_lemma(self, case):
        # the two substitutions used to chain the inequalities
        s, k = case
        d = s.values[k] - s.values[:k]
        assume(np.all(d > 0))
        a = np.sqrt(d)[::1]
        order = np.argsort(-a, kind="stable")
        a_sorted = a[order]
        b_sorted = s.values[:k][order]
        assume(np.all(np.diff(b_sorted) >= 0))
        lhs, rhs = chebyshev_sum_check(a_sorted, b_sorted, 2.0)
        assert lhs <= rhs + 1e-12 * max(rhs, 1.0)
        lhs, rhs = chebyshev_sum_check(a_sorted, np.ones(k), 3.0)
        assert lhs <= rhs + 1e-12 * max(rhs, 1.0)


class TestEvaluateAll:
    def test_linear_spectrum_all_upper_pass(self):
        s = spectrum(np.arange(1.0, 8.0))
        records = evaluate_all(s, 5)
        for rec in records:
            assert rec.verdict in ("pass", "skip"), (rec.name, rec.k)

    def test_square_box_spectrum_passes(self):
        vals = [2, 2, 5, 5, 5, 5, 8, 8, 10, 10, 10, 10]
        s = spectrum(np.array(vals, dtype=float))
        geom = DomainGeometry(2, (math.pi, math.pi))
        records = evaluate_all(s, 8, geometry=geom)
        assert all(r.verdict in ("pass", "skip") for r in records)
        hooks = [r for r in records if r.name == "hook_sum_ratio"]
        # degenerate consecutive duplicates must be skips, not failures
        assert any(r.verdict == "skip" for r in hooks)

    def test_corrupted_spectrum_fails_first_gap(self):
        s = spectrum([1.0, 100.0])
        records = evaluate_all(s, 1)
        failing = {r.name for r in records if r.verdict == "fail"}
        assert "next_upper" in failing
        assert "average_upper" in failing

    def test_needs_enough_eigenvalues(self):
        with pytest.raises(SpectrumError):
            evaluate_all(spectrum([1.0, 2.0]), 5)

    def test_counts_and_low_order_once(self):
        s = spectrum(np.arange(1.0, 12.0), n=2)
        records = evaluate_all(s, 4)
        assert sum(r.name == "low_order" for r in records) == 1
        per_k = sum(r.name == "yang_quadratic" for r in records)
        assert per_k == 4

    def test_marginal_band(self):
        tol = VerifyTolerance(rel=1e-2)
        s = spectrum([1.0, 3.02])  # bound (1+2)*1 = 3 < 3.02, within 1% band
        records = evaluate_all(s, 1, tolerance=tol)
        nxt = [r for r in records if r.name == "next_upper"][0]
        assert nxt.verdict == "marginal"
