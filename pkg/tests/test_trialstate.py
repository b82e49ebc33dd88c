"""Tests for the occupation function, its integrals, and the frame check."""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from chargelab.errors import ConsistencyError, DomainError, PreconditionError
from chargelab.foldy import foldy_j
from chargelab.trialstate import (
    XI_FUNCTIONS,
    CoherentFrame,
    CondensateSpec,
    berezin_lieb_check,
    berezin_lieb_ensemble,
    condensate_from_minimizer,
    occupation_f,
    pointwise_pair_energy,
    random_tight_frame,
    trace_gamma,
    upper_bound_energy,
)
from chargelab.variational import (
    GAUSSIAN_OPTIMAL_SCALE,
    gaussian_profile,
    minimize,
    rescale,
)
from chargelab.numerics import uniform_radial_grid

# direct evaluation of ((1+8pi)/sqrt(1+16pi) - 1)/2, checked in extended
# precision before the build
F_AT_RHO1_P1 = 1.32491418907452476


@pytest.fixture(scope="module")
def grid800():
    return uniform_radial_grid(800, 25.0)


@pytest.fixture(scope="module")
def minimizer(grid800):
    res = minimize(rescale(gaussian_profile(grid800), GAUSSIAN_OPTIMAL_SCALE))
    assert res.converged
    return res


class TestOccupationF:
    def test_reference_point(self):
        assert occupation_f(1.0, 1.0) == pytest.approx(F_AT_RHO1_P1, rel=1e-14)

    def test_zero_density_vanishes(self):
        for p in (1e-3, 1.0, 50.0):
            assert occupation_f(0.0, p) == 0.0

    def test_large_p_decay(self):
        # f -> 16 pi^2 rho^2 / p^8; the subleading correction is O(p^-4)
        lead = 16.0 * math.pi**2
        assert occupation_f(1.0, 10.0) * 10.0**8 / lead == pytest.approx(
            0.9949970281995246, rel=1e-12
        )
        assert occupation_f(1.0, 30.0) * 30.0**8 / lead == pytest.approx(
            0.9999379474588894, rel=1e-12
        )

    def test_small_p_growth(self):
        # f ~ sqrt(pi rho) / p^2
        for rho in (0.3, 1.0, 7.0):
            got = occupation_f(rho, 1e-4) * 1e-8
            assert got == pytest.approx(math.sqrt(math.pi * rho), rel=1e-6)

    def test_strictly_decreasing_in_p(self):
        p = np.logspace(-2, 2, 81)
        f = occupation_f(1.7, p)
        assert np.all(np.diff(f) < 0)
        assert np.all(f >= 0)

    def test_vectorized_matches_scalar(self):
        p = np.array([0.5, 1.0, 2.0])
        f = occupation_f(2.0, p)
        for pk, fk in zip(p, f):
            assert occupation_f(2.0, float(pk)) == fk

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            occupation_f(-1.0, 1.0)
        with pytest.raises(DomainError):
            occupation_f(1.0, 0.0)
        with pytest.raises(DomainError):
            occupation_f(1.0, np.array([1.0, -2.0]))


class TestPointwisePairEnergy:
    def test_zero_density(self):
        assert pointwise_pair_energy(0.0) == 0.0

    def test_matches_closed_form_over_densities(self):
        j = foldy_j().value
        for rho in (1e-2, 1.0, 1e2, 1e4):
            value = pointwise_pair_energy(rho, 1e-9)
            assert value == pytest.approx(-j * rho**1.25, rel=1e-6)

    def test_density_scaling(self):
        ratio = pointwise_pair_energy(16.0) / pointwise_pair_energy(1.0)
        assert ratio == pytest.approx(32.0, rel=1e-9)

    def test_integrand_identity_with_occupation(self):
        # the quadrature uses the collapsed Bogolubov-floor form; confirm
        # it agrees with the literal f-based bracket where both are stable
        rho = 1.3
        for p in (0.5, 1.0, 2.0, 4.0):
            t = 0.5 * p * p
            b = 4.0 * math.pi * rho / (p * p)
            f = occupation_f(rho, p)
            bracket = (t + b) * f - b * math.sqrt(f * (f + 1.0))
            floor = -0.5 * (t + b - math.sqrt(t * t + 2.0 * t * b))
            assert bracket == pytest.approx(floor, rel=1e-12)

    def test_consistency_guard_fires(self, monkeypatch):
        import chargelab.trialstate as ts

        monkeypatch.setattr(
            ts, "simplified_energy_quadrature", lambda nu, ell, tol: -0.5
        )
        with pytest.raises(ConsistencyError):
            ts.pointwise_pair_energy(1.0, 1e-9)

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            pointwise_pair_energy(-1.0)
        with pytest.raises(DomainError):
            pointwise_pair_energy(1.0, tol=0.0)


class TestCondensateSpec:
    def test_density_formula(self, grid800):
        phi = gaussian_profile(grid800)
        spec = CondensateSpec(lambda0_sq=3.0, phi0=phi)
        assert np.allclose(spec.density(), 6.0 * phi.values**2)

    def test_rejects_negative_amplitude(self, grid800):
        with pytest.raises(DomainError):
            CondensateSpec(lambda0_sq=-1.0, phi0=gaussian_profile(grid800))

    def test_from_minimizer_scaling(self, minimizer):
        spec = condensate_from_minimizer(1000, minimizer.profile)
        assert spec.lambda0_sq == 500.0
        assert spec.phi0.norm_sq == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(PreconditionError):
            condensate_from_minimizer(0, minimizer.profile)


class TestTraceGamma:
    def test_zero_amplitude(self, grid800):
        spec = CondensateSpec(lambda0_sq=0.0, phi0=gaussian_profile(grid800))
        assert trace_gamma(spec) == 0.0

    def test_density_scaling(self, grid800):
        # rho -> 16 rho rescales every p-integral by 16^(3/4) = 8
        phi = gaussian_profile(grid800)
        one = trace_gamma(CondensateSpec(lambda0_sq=1.0, phi0=phi))
        sixteen = trace_gamma(CondensateSpec(lambda0_sq=16.0, phi0=phi))
        assert sixteen / one == pytest.approx(8.0, rel=1e-10)

    def test_against_single_quadrature_oracle(self, grid800):
        # the p-integral at density rho equals rho^(3/4) times its value
        # at rho = 1, so an independent scipy quadrature of the latter
        # plus the radial rho^(3/4) sum must reproduce the iterated form
        phi = gaussian_profile(grid800)
        spec = CondensateSpec(lambda0_sq=2.0, phi0=phi)
        inner_one, err = quad(
            lambda p: p * p * occupation_f(1.0, p), 0.0, np.inf, limit=200
        )
        assert err < 1e-7
        radial = float(spec.phi0.grid.weights @ spec.density() ** 0.75)
        oracle = inner_one * radial / (2.0 * math.pi**2)
        assert trace_gamma(spec) == pytest.approx(oracle, rel=1e-6)

    def test_particle_number_exponent(self, minimizer):
        ns = np.array([1e3, 1e4, 1e5, 1e6])
        values = np.array(
            [
                trace_gamma(condensate_from_minimizer(int(n), minimizer.profile))
                for n in ns
            ]
        )
        slope = np.polyfit(np.log(ns), np.log(values), 1)[0]
        assert slope == pytest.approx(0.6, abs=0.01)
        # exact N^(3/5) covariance of the construction, not just the fit
        ratios = values / ns**0.6
        assert np.max(np.abs(ratios / ratios[0] - 1.0)) < 1e-10

    def test_rejects_bad_tolerance(self, grid800):
        spec = CondensateSpec(lambda0_sq=1.0, phi0=gaussian_profile(grid800))
        with pytest.raises(DomainError):
            trace_gamma(spec, tol=-1e-8)


class TestUpperBoundEnergy:
    def test_identity_at_one(self, minimizer):
        assert upper_bound_energy(1, minimizer.profile) == pytest.approx(
            minimizer.energy, rel=1e-12
        )

    def test_power_of_two(self, minimizer):
        # 32^(7/5) = 128
        assert upper_bound_energy(32, minimizer.profile) == pytest.approx(
            128.0 * minimizer.energy, rel=1e-12
        )

    def test_large_n_tracks_e_star(self, minimizer):
        value = upper_bound_energy(10**5, minimizer.profile)
        assert value == pytest.approx(1e7 * minimizer.energy, rel=1e-8)

    def test_holds_for_any_normalized_profile(self, grid800):
        # the scaling identity is structural, not specific to the minimizer
        phi = rescale(gaussian_profile(grid800), 0.37)
        e = upper_bound_energy(17, phi)
        assert math.isfinite(e)

    def test_rejects_bad_input(self, grid800, minimizer):
        with pytest.raises(PreconditionError):
            upper_bound_energy(0, minimizer.profile)
        unnormalized = rescale(gaussian_profile(grid800), 1.1)
        unnormalized = type(unnormalized)(
            grid=unnormalized.grid, values=2.0 * unnormalized.values
        )
        with pytest.raises(PreconditionError):
            upper_bound_energy(4, unnormalized)


class TestCoherentFrame:
    def test_random_frames_are_tight(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            frame = random_tight_frame(rng, 8, 24)
            assert frame.frame_residual() <= 1e-10
            # trace of the frame identity: weights sum to the dimension
            assert frame.weights.sum() == pytest.approx(8.0, rel=1e-12)

    def test_minimal_frame_is_orthonormal_basis(self):
        # m = d forces the rows into an orthonormal set with unit weights
        rng = np.random.default_rng(5)
        frame = random_tight_frame(rng, 4, 4)
        gram = frame.vectors @ frame.vectors.T
        assert np.allclose(gram, np.eye(4), atol=1e-10)
        assert np.allclose(frame.weights, 1.0, atol=1e-10)

    def test_rejects_invalid_frames(self):
        rng = np.random.default_rng(3)
        frame = random_tight_frame(rng, 6, 12)
        with pytest.raises(DomainError):
            CoherentFrame(6, frame.vectors, 2.0 * frame.weights)
        with pytest.raises(DomainError):
            CoherentFrame(6, 1.1 * frame.vectors, frame.weights)
        with pytest.raises(DomainError):
            CoherentFrame(1, np.ones((2, 1)), np.ones(2))
        with pytest.raises(DomainError):
            CoherentFrame(6, frame.vectors[:4], frame.weights[:4])
        with pytest.raises(DomainError):
            random_tight_frame(rng, 8, 5)


@pytest.fixture(scope="module")
def setup():
    rng = np.random.default_rng(202)
    frame = random_tight_frame(rng, 8, 24)
    raw = rng.standard_normal((8, 8))
    y_psd = raw @ raw.T
    f_vals = rng.uniform(0.0, 5.0, 24)
    return frame, f_vals, y_psd


class TestBerezinLieb:
    def test_identity_xi_is_equality(self, setup):
        frame, f_vals, y_psd = setup
        rep = berezin_lieb_check(frame, f_vals, y_psd, "identity")
        assert abs(rep.slack) <= 1e-12 * max(1.0, abs(rep.lhs))
        assert rep.holds

    def test_constant_f_is_equality(self, setup):
        frame, _, y_psd = setup
        for name in XI_FUNCTIONS:
            rep = berezin_lieb_check(frame, np.full(24, 2.5), y_psd, name)
            assert abs(rep.slack) <= 1e-12 * max(1.0, abs(rep.lhs))

    def test_concave_xi_gives_positive_slack(self, setup):
        frame, f_vals, y_psd = setup
        for name in ("sqrt", "sqrt-pairing", "log1p"):
            rep = berezin_lieb_check(frame, f_vals, y_psd, name)
            assert rep.holds
            assert rep.slack > 1e-6

    def test_random_ensembles_have_no_violations(self):
        for name in XI_FUNCTIONS:
            violations, rows = berezin_lieb_ensemble(name, 200, 20260825)
            assert violations == 0
            assert len(rows) == 200

    def test_ensemble_reproducibility(self):
        _, first = berezin_lieb_ensemble("sqrt", 50, 99)
        _, second = berezin_lieb_ensemble("sqrt", 50, 99)
        assert first == second

    def test_rejects_bad_input(self, setup):
        frame, f_vals, y_psd = setup
        with pytest.raises(PreconditionError):
            berezin_lieb_check(frame, f_vals, y_psd, "cube")
        with pytest.raises(PreconditionError):
            berezin_lieb_check(frame, f_vals[:5], y_psd, "sqrt")
        with pytest.raises(PreconditionError):
            berezin_lieb_check(frame, -f_vals, y_psd, "sqrt")
        with pytest.raises(PreconditionError):
            berezin_lieb_check(frame, f_vals, y_psd - 50.0 * np.eye(8), "sqrt")
        rng = np.random.default_rng(0)
        with pytest.raises(PreconditionError):
            berezin_lieb_check(frame, f_vals, rng.standard_normal((8, 8)), "sqrt")
