import math
from fractions import Fraction

import numpy as np
import pytest

from majorate.distributions import (
    dense_probs,
    embed,
    gibbs_from_weights,
    make_prob_vec,
    sharp,
    tensor_product,
    uniform,
)
from majorate.entropic import entropy_variance, shannon_entropy
from majorate.errors import ConverseInfidelityUnsupported, MetricUnsupported, ValidationFailure
from majorate.majorisation import majorises
from majorate.moderate import ModerateSequence
from majorate.rates import (
    convergence_report,
    error_level,
    exact_optimal_rate,
    expand_rate,
    resonance_gap,
)

SEQ = ModerateSequence(c=1.0, alpha=1 / 3)
P = make_prob_vec([0.75, 0.25])
Q = make_prob_vec([0.9, 0.1])

# frozen high-precision plug-ins for the canonical pair
R_INF = 1.7298203555609577
NU = 0.3010909957551251
COEFF = -1.7020228377139732


class TestExpandRate:
    def test_identical_states_reversible(self):
        exp, value = expand_rate(P, P, None, "entanglement", "direct", SEQ, 10)
        assert exp.R_inf == 1.0
        assert exp.coefficient == 0.0
        assert value == 1.0

    def test_canonical_pair(self):
        exp, _ = expand_rate(P, Q, None, "entanglement", "direct", SEQ, 100)
        assert exp.R_inf == pytest.approx(R_INF, abs=1e-12)
        assert exp.nu == pytest.approx(NU, abs=1e-12)
        assert exp.coefficient == pytest.approx(COEFF, abs=1e-12)

    def test_sharp_input(self):
        exp, value = expand_rate(make_prob_vec([1.0, 0.0]), Q, None,
                                 "entanglement", "direct", SEQ, 10)
        assert exp.R_inf == 0.0
        assert exp.coefficient == 0.0
        assert value == 0.0

    def test_flat_input_rewriting(self):
        # V(p) = 0 with H(p) > 0 uses the rewritten coefficient
        p = uniform(2)
        exp, _ = expand_rate(p, Q, None, "entanglement", "direct", SEQ, 10)
        hq, vq, hp = shannon_entropy(Q), entropy_variance(Q), math.log(2)
        assert exp.nu == 0.0
        assert exp.coefficient == pytest.approx(-math.sqrt(2 * vq * hp / hq ** 3))

    def test_flat_target_nu_infinite(self):
        exp, _ = expand_rate(Q, uniform(2), None, "entanglement", "direct", SEQ, 10)
        assert exp.nu == math.inf
        vp, hq = entropy_variance(Q), math.log(2)
        assert exp.coefficient == pytest.approx(-math.sqrt(2 * vp / hq ** 2))

    def test_sign_conventions(self):
        exp_d, _ = expand_rate(P, Q, None, "entanglement", "direct", SEQ, 10)
        exp_c, _ = expand_rate(P, Q, None, "entanglement", "converse", SEQ, 10)
        assert exp_d.coefficient <= 0.0
        assert exp_c.coefficient >= 0.0

    def test_converse_infidelity_rejected(self):
        with pytest.raises(ConverseInfidelityUnsupported):
            expand_rate(P, Q, None, "entanglement", "converse", SEQ, 10,
                        metric="infidelity")

    def test_thermo_embedding_invariance(self):
        g = gibbs_from_weights([(3, 5), (2, 5)])
        exp1, v1 = expand_rate(P, Q, g, "thermodynamic", "direct", SEQ, 10)
        p_hat, q_hat = embed(P, g), embed(Q, g)
        eta = gibbs_from_weights([(1, 5)] * 5)
        exp2, v2 = expand_rate(p_hat, q_hat, eta, "thermodynamic", "direct", SEQ, 10)
        assert exp1.R_inf == pytest.approx(exp2.R_inf, abs=1e-12)
        assert exp1.coefficient == pytest.approx(exp2.coefficient, abs=1e-12)
        assert v1 == pytest.approx(v2, abs=1e-12)

    def test_reversal_duality_first_order(self):
        # swapping the states and substituting t -> t/sqrt(R), R -> 1/R
        # reproduces the forward expansion up to O(t^2)
        for regime, sign in (("direct", 1.0), ("converse", -1.0)):
            exp_pq, _ = expand_rate(P, Q, None, "entanglement", regime, SEQ, 10)
            exp_qp, _ = expand_rate(Q, P, None, "entanglement", regime, SEQ, 10)
            hp, hq = shannon_entropy(P), shannon_entropy(Q)

            def residual(t):
                forward = exp_pq.R_inf + exp_pq.coefficient * t
                dual = hp / (hq + sign * abs(exp_qp.coefficient)
                             * math.sqrt(hp * hq) * t)
                return abs(dual - forward)

            r2, r3 = residual(1e-2), residual(1e-3)
            assert r2 / 1e-4 == pytest.approx(r3 / 1e-6, rel=0.25)
            assert r3 < 1e-4


class TestResonanceGap:
    def test_identical(self):
        assert resonance_gap(P, P) == (1.0, 0.0)

    def test_gap_formula(self):
        nu, gap = resonance_gap(P, Q)
        assert gap == pytest.approx(abs(1 - 1 / math.sqrt(nu)))

    def test_engineered_resonance_off_diagonal(self):
        from scipy.optimize import brentq
        ratio_p = entropy_variance(P) / shannon_entropy(P)

        def excess(w):
            q = make_prob_vec([w, (1 - w) / 2, (1 - w) / 2])
            return entropy_variance(q) / shannon_entropy(q) - ratio_p

        w = brentq(excess, 0.34, 0.999, xtol=1e-15)
        q = make_prob_vec([w, (1 - w) / 2, (1 - w) / 2])
        nu, gap = resonance_gap(P, q)
        assert abs(nu - 1.0) < 1e-6
        assert gap < 1e-6


class TestExactOptimalRate:
    def test_identical_states_rate_one(self):
        for n in (3, 5):
            point = exact_optimal_rate(P, P, None, n, 0.0)
            assert point.m_star == n
            assert point.rate == Fraction(1)

    def test_sharp_input_yields_nothing(self):
        point = exact_optimal_rate(make_prob_vec([1.0, 0.0]), uniform(2), None, 4, 0.0)
        assert point.m_star == 0

    def test_uniform_pair_exact_halving(self):
        point = exact_optimal_rate(uniform(2), uniform(4), None, 4, 0.0)
        assert point.m_star == 2
        assert point.rate == Fraction(1, 2)
        # dense confirmation at the accepted and the rejected m
        P4 = tensor_product([(uniform(2), 4)])
        for m, ok in ((2, True), (3, False)):
            Qm = tensor_product([(uniform(4), m)])
            da = make_prob_vec(dense_probs(Qm) + [0.0] * max(0, P4.full_count - Qm.full_count))
            db = make_prob_vec(dense_probs(P4) + [0.0] * max(0, Qm.full_count - P4.full_count))
            assert majorises(da, db) == ok

    def test_monotone_in_epsilon(self):
        rates = [exact_optimal_rate(P, Q, None, 6, e).m_star
                 for e in (0.0, 0.05, 0.1, 0.3, 0.6)]
        assert rates == sorted(rates)

    def test_min_epsilon_monotone_in_m(self):
        # the binary search over m rests on this: appending more target
        # copies never lowers the minimal smoothing error
        from majorate.distributions import total_states
        from majorate.majorisation import max_prefix_violation
        for pp, qq in ((P, Q), (Q, P), (uniform(2), Q)):
            eps = []
            for m in range(0, 14):
                Pt, Qt = total_states(pp, qq, sharp(), 5, m)
                eps.append(max_prefix_violation(Qt, Pt))
            assert all(a <= b + 1e-12 for a, b in zip(eps, eps[1:]))

    def test_epsilon_validation(self):
        with pytest.raises(ValidationFailure):
            exact_optimal_rate(P, Q, None, 4, 1.0)

    def test_thermo_direction_embedded(self):
        g = gibbs_from_weights([(1, 2), (1, 2)])
        point = exact_optimal_rate(Q, P, None, 4, 0.1, "thermodynamic", ctx=g)
        assert point.m_star >= 1
        # infinite-temperature thermo with d=2 reduces to uniform free states
        from majorate.majorisation import max_prefix_violation
        from majorate.distributions import total_states
        Pt, Qt = total_states(Q, P, uniform(2), 4, point.m_star)
        assert max_prefix_violation(Pt, Qt) <= 0.1 + 1e-12

    def test_infidelity_small_instance(self):
        point = exact_optimal_rate(uniform(2), uniform(2), None, 1, 0.4,
                                   metric="infidelity")
        assert point.m_star >= 1

    def test_infidelity_refuses_large(self):
        with pytest.raises(MetricUnsupported):
            exact_optimal_rate(P, Q, None, 6, 0.1, metric="infidelity")


class TestConvergenceReport:
    def test_identical_states_settled_rows(self):
        rows = convergence_report(P, P, None, "entanglement", SEQ, [8, 16])
        for r in rows:
            assert r.exact_rate == pytest.approx(1.0)
            assert r.residual == pytest.approx(0.0)

    def test_canonical_pair_residuals_shrink(self):
        rows = convergence_report(P, Q, None, "entanglement", SEQ, [4, 8, 12])
        resid = [abs(r.residual) for r in rows]
        assert resid == sorted(resid, reverse=True)

    def test_converse_exceeds_asymptotic(self):
        rows = convergence_report(P, Q, None, "entanglement", SEQ, [16],
                                  regime="converse")
        assert rows[0].exact_rate > R_INF
        assert rows[0].expanded_rate > R_INF


def test_error_level_regimes():
    assert error_level(SEQ, 8, "direct") == pytest.approx(math.exp(-2.0))
    assert error_level(SEQ, 8, "converse") == pytest.approx(1 - math.exp(-2.0))
