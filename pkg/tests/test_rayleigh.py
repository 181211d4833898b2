import math

import numpy as np
import pytest

from majorate.distributions import make_prob_vec, uniform
from majorate.entropic import entropy_variance, shannon_entropy
from majorate.errors import OutOfExpansionRange, ValidationFailure
from majorate.moderate import ModerateSequence
from majorate.rates import expand_rate
from majorate.rayleigh import (
    conjectured_converse_infidelity,
    crossing_point,
    gaussian_cdf,
    gaussian_cdf_shifted,
    log_expansion_minus,
    log_expansion_plus,
    rayleigh_cdf,
    rayleigh_inverse_approx,
    _crossing_residual,
)

SEQ = ModerateSequence(c=1.0, alpha=1 / 3)


class TestGaussianCdf:
    def test_centre(self):
        assert gaussian_cdf(0.0) == pytest.approx(0.5)

    def test_shifted_centre(self):
        assert gaussian_cdf_shifted(1.7, 1.7, 2.5) == pytest.approx(0.5)

    def test_deep_tail(self):
        assert gaussian_cdf(-8.0) < 1e-14


class TestCrossingPoint:
    def test_minus_asymptote(self):
        alpha = crossing_point(-20.0, 4.0)
        seed = -20.0 / (1.0 - 2.0)
        assert abs(alpha - seed) / abs(seed) < 0.05

    def test_plus_asymptote(self):
        alpha = crossing_point(20.0, 4.0)
        seed = 20.0 / (1.0 - 4.0)
        assert abs(alpha - seed) / abs(seed) < 0.05

    def test_residual_small(self):
        for mu in (-6.0, -1.0, 0.0, 1.0, 6.0):
            for nu in (0.25, 2.0, 4.0):
                alpha = crossing_point(mu, nu)
                assert abs(_crossing_residual(alpha, mu, nu)) <= 1e-10

    def test_unit_nu_rejected(self):
        with pytest.raises(ValidationFailure):
            crossing_point(0.5, 1.0)


class TestRayleighCdf:
    @pytest.mark.parametrize("nu", [0.25, 4.0])
    def test_monotone_on_grid(self, nu):
        zs = [rayleigh_cdf(nu, -10 + 0.5 * i).Z for i in range(41)]
        assert all(a <= b + 1e-12 for a, b in zip(zs, zs[1:]))
        assert all(0.0 <= z <= 1.0 for z in zs)

    @pytest.mark.parametrize("nu", [0.25, 4.0])
    def test_limits(self, nu):
        assert rayleigh_cdf(nu, -15.0).Z < 1e-6
        assert rayleigh_cdf(nu, 15.0).Z > 1.0 - 1e-3

    @pytest.mark.parametrize("nu", [0.25, 4.0])
    def test_log_expansions_at_ten(self, nu):
        z_minus = rayleigh_cdf(nu, -10.0).Z
        pred = log_expansion_minus(-10.0, nu)
        assert abs(math.log(z_minus) - pred) / abs(pred) < 0.2
        z_plus = rayleigh_cdf(nu, 10.0).Z
        pred = log_expansion_plus(10.0, nu)
        assert abs(math.log(1.0 - z_plus) - pred) / abs(pred) < 0.2

    def test_unit_nu_rejected(self):
        with pytest.raises(ValidationFailure):
            rayleigh_cdf(1.0, 0.0)

    def test_duality_between_reciprocal_parameters(self):
        for mu in (-3.0, -0.5, 1.0, 4.0):
            assert rayleigh_cdf(0.25, mu).Z == pytest.approx(
                rayleigh_cdf(4.0, mu / 0.5).Z, abs=1e-12)


class TestInverse:
    def test_direct_seed_formula(self):
        n = 125
        eps = math.exp(-SEQ.nt2(n))
        seed = rayleigh_inverse_approx(4.0, eps, "direct")
        assert seed == pytest.approx(
            abs(1 - math.sqrt(4.0)) * math.sqrt(2 * n) * SEQ.t(n))

    def test_converse_seed_formula(self):
        n = 125
        eps = 1.0 - math.exp(-SEQ.nt2(n))
        seed = rayleigh_inverse_approx(4.0, eps, "converse")
        assert seed == pytest.approx(math.sqrt(4 * (1 + 4.0) * n) * SEQ.t(n))

    def test_range_validation(self):
        with pytest.raises(OutOfExpansionRange):
            rayleigh_inverse_approx(4.0, 0.5, "direct")
        with pytest.raises(OutOfExpansionRange):
            rayleigh_inverse_approx(4.0, 0.5, "converse")

    @pytest.mark.parametrize("nu", [0.25, 4.0])
    def test_refined_round_trip(self, nu):
        for eps, side in ((1e-3, "direct"), (0.995, "converse")):
            mu = rayleigh_inverse_approx(nu, eps, side, refine=True)
            assert rayleigh_cdf(nu, mu).Z == pytest.approx(eps, abs=1e-6)


def test_small_deviation_consistency_with_direct_coefficient():
    # substituting the inverse at e^(-n t_n^2) into the small-deviation rate
    # form reproduces the direct coefficient; the Rayleigh parameter is the
    # reciprocal of the irreversibility parameter
    rng = np.random.default_rng(21)
    n = 1000
    eps_n = math.exp(-SEQ.nt2(n))
    for _ in range(20):
        nu = float(rng.uniform(0.1, 5.0))
        if abs(nu - 1.0) < 1e-3:
            continue
        v_p = float(rng.uniform(0.05, 1.0))
        h_q = float(rng.uniform(0.2, 1.5))
        inverse = rayleigh_inverse_approx(1.0 / nu, eps_n, "direct")
        small_dev = math.sqrt(v_p / (n * h_q ** 2)) * inverse
        direct = math.sqrt(2 * v_p / h_q ** 2) * abs(1 - 1 / math.sqrt(nu)) * SEQ.t(n)
        assert small_dev == pytest.approx(direct, abs=1e-10)


class TestConjecturedConverse:
    def test_resonant_coefficient(self):
        # nu = 1 means the coefficient is sqrt(2) times the direct prefactor
        p = make_prob_vec([0.75, 0.25])
        out = conjectured_converse_infidelity(p, p, None, "entanglement", SEQ, 100)
        v, h = entropy_variance(p), shannon_entropy(p)
        assert out.nu == 1.0
        assert out.coefficient == pytest.approx(
            math.sqrt(2 * v / h ** 2) * math.sqrt(2.0))
        assert out.value == pytest.approx(1.0 + 2 * math.sqrt(v / h ** 2) * SEQ.t(100))
        assert out.conjecture is True

    def test_canonical_pair_plugin(self):
        p = make_prob_vec([0.75, 0.25])
        q = make_prob_vec([0.9, 0.1])
        out = conjectured_converse_infidelity(p, q, None, "entanglement", SEQ, 64)
        vp, vq = entropy_variance(p), entropy_variance(q)
        hp, hq = shannon_entropy(p), shannon_entropy(q)
        nu = (vp / hp) / (vq / hq)
        want = math.sqrt(2 * vp / hq ** 2) * math.sqrt(1 + 1 / nu)
        assert out.coefficient == pytest.approx(want, abs=1e-12)
        assert out.value > out.R_inf

    def test_exceeds_direct_expansion(self):
        p = make_prob_vec([0.75, 0.25])
        q = make_prob_vec([0.9, 0.1])
        out = conjectured_converse_infidelity(p, q, None, "entanglement", SEQ, 64)
        _, direct = expand_rate(p, q, None, "entanglement", "direct", SEQ, 64)
        assert out.value > direct
