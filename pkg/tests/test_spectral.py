import itertools

import numpy as np
import pytest

from epsensor import (ConfigurationError, SystemConfig, build_system,
                      cardano_eigenvalues, classify_phase, cubic_discriminant,
                      eigensolve, ep3_sensor, ep4_system, match_branches,
                      perturbed_eigenvalues_analytic, puiseux_fit)
from epsensor.spectral import (aberth_roots, char_poly, coupling_shift,
                               eigenvector_residuals, same_detuning_shift,
                               single_detuning_shift, smallest_arg_branch)


def match_error(a, b):
    """Set distance via exhaustive assignment (small sets only)."""
    return min(np.abs(np.asarray(p) - np.asarray(b)).max()
               for p in itertools.permutations(a))


class TestEigensolve:
    def test_triple_coalescence(self):
        spec = eigensolve(ep3_sensor(1.0))
        assert np.abs(spec.eigenvalues).max() < 1e-12
        assert spec.ep_order == 3
        assert spec.phase == "exceptional"

    def test_oscillatory_point(self):
        spec = eigensolve(ep3_sensor(0.95))
        expected = np.array([-0.31224989991992, 0.0, 0.31224989991992])
        assert np.allclose(np.sort(spec.eigenvalues.real), expected, atol=1e-12)
        assert np.abs(spec.eigenvalues.imag).max() < 1e-12
        assert spec.phase == "stable"
        assert spec.ep_order == 1
        assert spec.chi == pytest.approx(0.31224989991992, abs=1e-12)

    def test_reducible_counterexample_values(self):
        eps = 0.01
        cfg = SystemConfig(n=3, m=1, g=[1.2], kappa=[1.0], epsilon=(eps, -eps))
        spec = eigensolve(cfg)
        lam_pm = (eps + np.array([1, -1]) * np.sqrt(4 + eps**2 - 4 * 1.2**2 + 0j)) / 2
        expected = np.array([eps, lam_pm[0], lam_pm[1]])
        assert match_error(spec.eigenvalues, expected) < 1e-12
        assert spec.phase == "unstable"
        assert spec.ep_order == 1

    def test_sorted_by_real_then_imag(self):
        spec = eigensolve(ep3_sensor(0.9))
        eigs = spec.eigenvalues
        assert np.all(np.diff(eigs.real) >= -1e-15)

    def test_eigenvector_relations(self):
        cfg = ep3_sensor(0.9)
        H = build_system(cfg).reduced
        spec = eigensolve(cfg)
        r_res, l_res = eigenvector_residuals(H, spec)
        assert r_res < 1e-10
        assert l_res < 1e-10

    def test_eigenvalue_precision_away_from_coalescence(self, rng):
        for _ in range(50):
            g = rng.uniform(0.2, 0.85)
            cfg = ep3_sensor(g)
            spec = eigensolve(cfg)
            chi = np.sqrt(1 - g * g)
            expected = np.array([-chi, 0.0, chi])
            assert np.abs(np.sort(spec.eigenvalues.real) - expected).max() \
                < 1e-12 * max(1, chi)

    def test_cardano_agrees_with_polynomial_solver_stable_regime(self, rng):
        count, worst = 0, 0.0
        while count < 200:
            g = rng.uniform(0.1, 1.3)
            d1, d2 = rng.uniform(-1.5, 1.5, 2)
            cfg = SystemConfig(n=3, m=1, g=[g], kappa=[1.0], delta=(d1, d2))
            if cubic_discriminant(cfg).D >= -1e-4:
                continue
            count += 1
            analytic = cardano_eigenvalues(g, d1, d2)
            roots = aberth_roots(char_poly(build_system(cfg).reduced))
            worst = max(worst, match_error(analytic, roots))
        assert worst < 1e-10

    def test_symmetric_function_identities(self, rng):
        # sums/products of the eigenvalues against the closed combinations
        for _ in range(30):
            g = rng.uniform(0.2, 1.4)
            e1, e2 = rng.uniform(-0.3, 0.3, 2)
            lam = cardano_eigenvalues(g, e1, e2)
            assert abs(lam.sum() - (e1 - e2)) < 1e-10
            assert abs(np.prod(lam) - (-e1 - g * g * e2)) < 1e-10
            assert abs(np.prod(e1 - lam) - g * g * (e1 + e2)) < 1e-10
            assert abs(np.prod(e2 + lam) - (-(e1 + e2))) < 1e-10

    def test_non_square_rejected(self):
        with pytest.raises(ConfigurationError):
            eigensolve(np.zeros((2, 3)))


class TestDiscriminant:
    def test_triple_point(self):
        d = cubic_discriminant(ep3_sensor(1.0))
        assert d.x == pytest.approx(0.0, abs=1e-15)
        assert d.y == pytest.approx(0.0, abs=1e-15)
        assert d.D == pytest.approx(0.0, abs=1e-15)

    def test_oscillatory_side(self):
        d = cubic_discriminant(ep3_sensor(0.95))
        assert d.x == pytest.approx(-0.0325, abs=1e-15)
        assert d.y == pytest.approx(0.0, abs=1e-15)
        assert d.D == pytest.approx(-3.4328125e-5, rel=1e-10)

    def test_amplifying_side_positive_and_unstable(self):
        cfg = ep3_sensor(1.05)
        d = cubic_discriminant(cfg)
        assert d.x == pytest.approx(0.0341666666666667, rel=1e-10)
        assert d.D > 0
        assert eigensolve(cfg).phase == "unstable"

    def test_requires_three_mode_lossless(self):
        with pytest.raises(ConfigurationError):
            cubic_discriminant(SystemConfig(n=2, m=1, g=[0.5]))
        with pytest.raises(ConfigurationError):
            cubic_discriminant(ep3_sensor(0.9, gamma=0.1))


class TestClassifyPhase:
    def test_examples(self):
        assert eigensolve(ep3_sensor(0.95)).phase == "stable"
        assert eigensolve(ep3_sensor(1.0)).phase == "exceptional"
        cfg = SystemConfig(n=3, m=1, g=[1.2], kappa=[1.0], epsilon=(0.01, -0.01))
        assert eigensolve(cfg).phase == "unstable"

    def test_tolerance_controls_stability(self):
        cfg = SystemConfig(n=3, m=1, g=[1.2], kappa=[1.0], epsilon=(0.01, -0.01))
        spec = eigensolve(cfg)
        assert classify_phase(spec, tol=1e-9) == "unstable"
        assert classify_phase(spec, tol=10.0) == "stable"


class TestPerturbedBranches:
    def test_same_case_real_branch(self):
        lam = perturbed_eigenvalues_analytic(1e-6, "same")
        assert lam[1] == pytest.approx((2e-6) ** (1 / 3), rel=1e-12)
        # oracle: numeric roots of lambda^3 - eps^2 lambda - 2 eps = 0
        roots = np.roots([1.0, 0.0, -(1e-6) ** 2, -2e-6])
        assert match_error(lam, roots) < 1e-8

    def test_different_case_real_branch(self):
        lam = perturbed_eigenvalues_analytic(1e-6, "different")
        assert lam[1] == pytest.approx(1e-2, rel=1e-4)
        # oracle: numeric roots of lambda^3 + eps lambda^2 - eps = 0; the
        # leading-order branches are short by the eps/3 next-order term
        roots = np.roots([1.0, 1e-6, 0.0, -1e-6])
        assert match_error(lam, roots) < 1e-6

    def test_zero_perturbation(self):
        assert np.all(perturbed_eigenvalues_analytic(0.0, "same") == 0)

    def test_bad_case_rejected(self):
        with pytest.raises(ConfigurationError):
            perturbed_eigenvalues_analytic(1e-6, "both")


class TestPuiseuxFit:
    GRID = np.logspace(-9, -5, 17)

    def test_ep3_same_slope_and_prefactor(self):
        fit = puiseux_fit(ep3_sensor(1.0), self.GRID, same_detuning_shift)
        assert fit.slope == pytest.approx(1 / 3, abs=0.02)
        assert fit.branch_prefactor == pytest.approx(2 ** (1 / 3), rel=1e-3)
        assert fit.r_squared > 0.9999

    def test_prefactor_ratio(self):
        fit_same = puiseux_fit(ep3_sensor(1.0), self.GRID, same_detuning_shift)
        fit_single = puiseux_fit(ep3_sensor(1.0), self.GRID, single_detuning_shift)
        ratio = fit_same.branch_prefactor / fit_single.branch_prefactor
        assert ratio == pytest.approx(2 ** (1 / 3), rel=0.01)

    def test_ep4_slope(self):
        fit = puiseux_fit(ep4_system(0.2), self.GRID, same_detuning_shift)
        assert fit.slope == pytest.approx(0.25, abs=0.02)

    def test_two_fold_coupling_response(self):
        fit = puiseux_fit(ep3_sensor(1.0), self.GRID, coupling_shift)
        assert fit.slope == pytest.approx(0.5, abs=0.02)

    def test_branch_selector(self):
        fit = puiseux_fit(ep3_sensor(1.0), self.GRID, same_detuning_shift,
                          branch_selector=smallest_arg_branch)
        assert fit.slope == pytest.approx(1 / 3, abs=0.02)

    def test_needs_ep_configuration(self):
        with pytest.raises(ConfigurationError):
            puiseux_fit(ep3_sensor(0.9), self.GRID, same_detuning_shift)

    def test_needs_enough_points(self):
        with pytest.raises(ConfigurationError):
            puiseux_fit(ep3_sensor(1.0), np.logspace(-8, -6, 5),
                        same_detuning_shift)


def test_match_branches_keeps_continuity():
    ref = np.array([1.0 + 0j, -1.0 + 0j, 0.0 + 1j])
    shuffled = np.array([0.02 + 1j, 1.01 + 0j, -0.98 + 0j])
    matched = match_branches(ref, shuffled)
    assert np.abs(matched - np.array([1.01, -0.98, 0.02 + 1j])).max() < 0.1
