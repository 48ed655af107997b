"""Tests for weight sequences, Dick weights, embeddings and volume."""

import math
import unittest

import numpy as np

from wafom_nets.basefield import digits_matrix, from_integer
from wafom_nets.walsh import MultiIndex
from wafom_nets.weights import (
    EmbeddingConstants, VolumeCapExceededError, WeightRuleError, WeightSequence,
    dick_weight, embed_smooth_to_walsh, embedding_norm_factor, gamma_sum_bound_check,
    hamming_weight, norm_equivalence_exponent, parse_weight_rule, position_costs,
    power_series_check, rate_to_decay, sigma_bar, sigma_bar_infinite, trac_volume_constant,
    tractability_exponent, vol, vol_bound_conv, vol_bound_trac, walsh_decay_bound,
)


def explicit(values, b=2):
    return WeightSequence(kind='explicit', base=b, values=tuple(values))


def power(a, r=1.0, c=0.0, b=2):
    return WeightSequence(kind='power', base=b, a=a, r=r, c=c)


def naive_vol(M, s, a, L):
    """Count k with k_j < b^L and modified weight <= M by full scan."""
    b = a.base
    digits = digits_matrix(range(b ** (s * L)), b, s * L).reshape(-1, s, L)
    weights = ((digits != 0) * position_costs(a, s, L)[None]).sum(axis=(1, 2))
    return int((weights <= M + 1e-9).sum())


class TestEmbeddingConstants(unittest.TestCase):
    """Test cases for m_b, M_b and C_b."""

    def test_binary(self):
        """Test m_2 = M_2 = C_2 = 2."""
        consts = EmbeddingConstants.from_base(2)
        self.assertAlmostEqual(consts.m_b, 2.0)
        self.assertAlmostEqual(consts.M_b, 2.0)
        self.assertEqual(consts.C_b, 2.0)

    def test_ranges(self):
        """Test m_b in (0, 2] and C_b >= 2."""
        for b in range(2, 17):
            consts = EmbeddingConstants.from_base(b)
            self.assertGreater(consts.m_b, 0)
            self.assertLessEqual(consts.m_b, 2.0 + 1e-15)
            self.assertGreaterEqual(consts.C_b, 2.0)

    def test_ternary(self):
        """Test C_3 against its closed form."""
        root3 = math.sqrt(3)
        expected = root3 + 3 * root3 / (3 - root3)
        self.assertAlmostEqual(EmbeddingConstants.from_base(3).C_b, expected)


class TestWeightRules(unittest.TestCase):
    """Test cases for parsing and validating weight rules."""

    def test_parse_valid_rules(self):
        """Test every rule kind."""
        a = parse_weight_rule("explicit:0,0.5,1", 2)
        self.assertEqual(a.terms(3).tolist(), [0.0, 0.5, 1.0])
        p = parse_weight_rule("power:a=1,r=2,c=-1", 3)
        self.assertEqual(p.term(3), 8.0)
        self.assertEqual(parse_weight_rule("power:a=1,r=1", 2).c, 0.0)
        u = parse_weight_rule("smooth-power:u0=0.5,q=0.5", 2)
        self.assertEqual(u.term(3), 0.125)
        self.assertTrue(u.is_smooth)
        v = parse_weight_rule("smooth-explicit:1,0.5", 2)
        self.assertEqual(v.term(2), 0.5)

    def test_parse_invalid_rules(self):
        """Test grammar and invariant violations."""
        for text in ["power:a=1", "foo:1", "explicit:", "explicit:1,0", "power:a=-1,r=1",
                     "smooth-power:u0=0.5,q=2", "power:a=x,r=1", "power", "power:a=1,r=1,z=2",
                     "smooth-explicit:0.5,1", "smooth-explicit:0,0"]:
            with self.subTest(text=text):
                with self.assertRaises(WeightRuleError):
                    parse_weight_rule(text, 2)

    def test_rule_string_round_trip(self):
        """Test that the canonical string parses back to the same rule."""
        for text in ["explicit:-0.5,0,2", "power:a=0.5,r=1.5,c=-2",
                     "smooth-power:u0=0.25,q=0.75", "smooth-explicit:0.5,0.5,0.1"]:
            a = parse_weight_rule(text, 3)
            self.assertEqual(parse_weight_rule(a.rule_string(), 3), a)

    def test_explicit_list_too_short(self):
        """Test that explicit lists do not extrapolate."""
        with self.assertRaises(ValueError):
            explicit([0, 1]).term(3)

    def test_liminf(self):
        """Test the tractability condition for closed-form rules."""
        self.assertTrue(power(1, r=1).satisfies_liminf(1))
        self.assertTrue(power(1, r=1).satisfies_liminf(0.5))
        self.assertFalse(power(1, r=1).satisfies_liminf(2))
        self.assertFalse(power(0, c=3).satisfies_liminf(1))
        self.assertIsNone(explicit([0, 1, 2]).satisfies_liminf(1))
        u = parse_weight_rule("smooth-power:u0=1,q=0.5", 2)
        self.assertTrue(u.satisfies_liminf(1))
        self.assertFalse(u.satisfies_liminf(2))
        self.assertFalse(parse_weight_rule("smooth-power:u0=0.5,q=1", 2).satisfies_liminf(1))

    def test_tractability_params(self):
        """Test (a, r, A) with a_j >= a j^r beyond A."""
        self.assertEqual(power(1, r=1).tractability_params(), (1, 1, 0))
        a, r, A = power(1, r=2, c=-8).tractability_params()
        self.assertEqual((a, r, A), (0.5, 2, 4))
        rule = power(1, r=2, c=-8)
        for j in range(A + 1, 40):
            self.assertGreaterEqual(rule.term(j), a * j ** r)
        self.assertIsNone(power(0).tractability_params())
        self.assertIsNone(explicit([1, 2]).tractability_params())

    def test_rate_exponents(self):
        """Test p = (2r+1)/(r+1) and its inverse."""
        self.assertEqual(tractability_exponent(1), 1.5)
        self.assertAlmostEqual(rate_to_decay(1.5), 1.0)
        for r in (0.5, 1, 3):
            self.assertAlmostEqual(rate_to_decay(tractability_exponent(r)), r)
        with self.assertRaises(ValueError):
            rate_to_decay(2.0)

    def test_liminf_after_rate_round_trip(self):
        """Test that a rule meets the condition for the rate its own r gives."""
        for r in (0.5, 1, 2, 3):
            rule = power(1, r=r)
            self.assertTrue(rule.satisfies_liminf(rate_to_decay(tractability_exponent(r))))
            self.assertFalse(rule.satisfies_liminf(r + 0.01))


class TestDickWeights(unittest.TestCase):
    """Test cases for Hamming and Dick weights."""

    def test_hamming_examples(self):
        """Test nonzero digit counts."""
        self.assertEqual(hamming_weight(6, 2), 2)
        self.assertEqual(hamming_weight(0, 7), 0)
        self.assertEqual(hamming_weight(9, 3), 1)

    def test_hamming_negative(self):
        """Test that negative k is refused instead of looping."""
        with self.assertRaises(ValueError):
            hamming_weight(-1, 2)
        with self.assertRaises(ValueError):
            hamming_weight(-10, 3)

    def test_hamming_against_digits(self):
        """Test hamming_weight against from_integer."""
        for b in (2, 3, 5):
            for k in range(200):
                expected = int(np.count_nonzero(from_integer(k, b, 8).digits))
                self.assertEqual(hamming_weight(k, b), expected)

    def test_dick_weight_examples(self):
        """Test generalized and modified weights by hand."""
        self.assertEqual(dick_weight([5], explicit([0])), 4)
        self.assertEqual(dick_weight([1], explicit([-0.5])), 0.5)
        self.assertEqual(dick_weight([1], explicit([-0.5]), modified=True), 1)
        self.assertEqual(dick_weight([1, 1], explicit([0, 1])), 3)
        self.assertEqual(dick_weight([0, 0], explicit([0, 1])), 0)

    def test_dick_weight_on_multi_index(self):
        """Test that MultiIndex and integer inputs agree."""
        k = MultiIndex.from_integers([5, 6], 3, 3)
        a = explicit([0.5, 1], b=3)
        self.assertEqual(dick_weight(k, a), dick_weight([5, 6], a))

    def test_sandwich(self):
        """Test mu <= mu_bar <= mu + E over an exhaustive scan."""
        a = explicit([-1.5, -0.5, 0.3])
        E = norm_equivalence_exponent(3, a)
        self.assertAlmostEqual(E, 2.5)
        for k1 in range(8):
            for k2 in range(8):
                for k3 in range(8):
                    mu = dick_weight([k1, k2, k3], a)
                    mu_bar = dick_weight([k1, k2, k3], a, modified=True)
                    self.assertLessEqual(mu, mu_bar + 1e-12)
                    self.assertLessEqual(mu_bar, mu + E + 1e-12)

    def test_equal_for_nonnegative_weights(self):
        """Test mu == mu_bar when a_1 >= 0."""
        a = explicit([0, 0.5, 2])
        for k in [(1, 2, 3), (7, 0, 5), (0, 0, 1)]:
            self.assertEqual(dick_weight(k, a), dick_weight(k, a, modified=True))


class TestEmbedding(unittest.TestCase):
    """Test cases for the smooth-to-Walsh embeddings."""

    def test_examples(self):
        """Test the loose and tight embeddings of u_j = 1/2 and u_j = 1."""
        half = parse_weight_rule("smooth-explicit:0.5", 2)
        self.assertAlmostEqual(embed_smooth_to_walsh(half, 'loose').term(1), 1.0)
        self.assertAlmostEqual(embed_smooth_to_walsh(half, 'tight').term(1), 2.0)
        one = parse_weight_rule("smooth-explicit:1", 2)
        self.assertAlmostEqual(embed_smooth_to_walsh(one, 'loose').term(1), 0.0)

    def test_geometric_rule_stays_closed_form(self):
        """Test u_j = 2^-j embedding to a_j = j."""
        u = parse_weight_rule("smooth-power:u0=0.5,q=0.5", 2)
        a = embed_smooth_to_walsh(u, 'loose')
        self.assertEqual(a.kind, 'power')
        for j in range(1, 8):
            self.assertAlmostEqual(a.term(j), j)
        self.assertTrue(a.satisfies_liminf(1))

    def test_output_non_decreasing(self):
        """Test monotonicity of the embedded sequence."""
        u = parse_weight_rule("smooth-explicit:1,0.5,0.5,0.1", 3)
        for variant in ('loose', 'tight'):
            terms = embed_smooth_to_walsh(u, variant).terms(4)
            self.assertTrue((np.diff(terms) >= 0).all())

    def test_norm_factor(self):
        """Test the embedding norm factors."""
        self.assertEqual(embedding_norm_factor('loose', 3, 2), 1.0)
        self.assertEqual(embedding_norm_factor('tight', 3, 2), 8.0)

    def test_walsh_weights_refused(self):
        """Test that only smooth weights embed."""
        with self.assertRaises(ValueError):
            embed_smooth_to_walsh(power(1), 'loose')


class TestVolume(unittest.TestCase):
    """Test cases for vol and its analytic bounds."""

    def test_examples(self):
        """Test small volumes by hand."""
        self.assertEqual(vol(2, 1, explicit([0])), 3)
        self.assertEqual(vol(1, 2, explicit([0, 0])), 3)
        self.assertEqual(vol(3, 1, explicit([0])), 5)
        for s in (1, 3, 5):
            self.assertEqual(vol(0.9, s, power(0)), 1)

    def test_against_naive_scan(self):
        """Test the counting recursion against a full scan."""
        cases = [
            (2, 2, 6, power(0)), (2, 2, 6, power(1)), (2, 3, 4, power(0)),
            (2, 2, 5, explicit([0, 0.5])), (3, 2, 4, power(0, b=3)), (3, 1, 7, power(0, b=3)),
            (2, 2, 5, explicit([-0.5, 0.5])),
        ]
        for b, s, max_M, a in cases:
            if b != a.base:
                continue
            L = max_M + 2
            for M in np.arange(0, max_M + 0.5, 0.5):
                with self.subTest(b=b, s=s, M=M, a=str(a)):
                    self.assertEqual(vol(M, s, a), naive_vol(M, s, a, L))

    def test_conv_bound(self):
        """Test vol(M) <= exp(sigma_bar + 2 sqrt((b - 1) s M))."""
        for b in (2, 3):
            for a in (power(0, b=b), power(1, b=b)):
                for s in (1, 2, 4):
                    for M in np.arange(0, 10.5, 0.5):
                        self.assertLessEqual(vol(M, s, a), vol_bound_conv(M, s, a))

    def test_trac_bound(self):
        """Test vol(M) <= exp(C_vol M^((r+1)/(2r+1))) for a_j = j."""
        for b in (2, 3):
            a = power(1, b=b)
            for s in (1, 2, 4):
                for M in np.arange(0, 10.5, 0.5):
                    self.assertLessEqual(vol(M, s, a), vol_bound_trac(M, a))

    def test_conv_bound_examples(self):
        """Test the closed form at M = 0 and M = 4."""
        a = explicit([0])
        self.assertAlmostEqual(vol_bound_conv(0, 1, a), math.e)
        self.assertAlmostEqual(vol_bound_conv(4, 1, a), math.exp(5))
        self.assertLessEqual(vol(4, 1, a), math.exp(5))

    def test_trac_constant(self):
        """Test C_vol = 2 for a_j = j in base 2."""
        self.assertAlmostEqual(trac_volume_constant(power(1)), 2.0)
        with self.assertRaises(ValueError):
            trac_volume_constant(explicit([1, 2]))

    def test_cap(self):
        """Test that counting stops at the cap."""
        with self.assertRaises(VolumeCapExceededError):
            vol(10, 4, power(0), cap=10)

    def test_sigma_bar(self):
        """Test clamped-position counts."""
        self.assertEqual(sigma_bar(3, power(0)), 3)
        self.assertEqual(sigma_bar(2, explicit([-1.5, 0.5], b=3)), 4)
        self.assertEqual(sigma_bar_infinite(power(1, c=-2)), 3)


class TestSeriesIdentities(unittest.TestCase):
    """Test cases for the power series and Gamma-sum checks."""

    def test_examples(self):
        """Test X = 0 and a hand-expanded case."""
        self.assertEqual(power_series_check(0.0, 2, power(0), 2), (1.0, 1.0))
        series, product = power_series_check(0.5, 1, power(0), 1)
        self.assertEqual(series, 1.5)
        self.assertEqual(product, 1.5)
        series, product = power_series_check(1 / 3, 2, explicit([0, 1]), 2)
        self.assertTrue(math.isclose(series, product, rel_tol=1e-12))

    def test_identity_grid(self):
        """Test sum == product for both weight variants."""
        for X in (-0.5, -0.1, 0.1, 0.5, 0.9):
            for a in (power(1), explicit([-1, 0, 2]), power(0)):
                for s in (1, 2, 3):
                    for l in (1, 3, 6):
                        for modified in (False, True):
                            series, product = power_series_check(X, s, a, l, modified)
                            self.assertTrue(math.isclose(series, product, rel_tol=1e-12,
                                                         abs_tol=1e-12))

    def test_ternary_positive(self):
        """Test the identity in base 3 with fractional weights."""
        a = explicit([0.5, 1.25], b=3)
        for X in (0.1, 0.5, 0.9):
            series, product = power_series_check(X, 2, a, 3)
            self.assertTrue(math.isclose(series, product, rel_tol=1e-12))

    def test_domain(self):
        """Test |X| >= 1 and negative X with fractional weights."""
        with self.assertRaises(ValueError):
            power_series_check(1.0, 1, power(0), 1)
        with self.assertRaises(ValueError):
            power_series_check(-0.5, 1, explicit([0.5]), 2)

    def test_gamma_sum(self):
        """Test sum_j X^(a j^r) <= Gamma(1/r)/r (a log 1/X)^(-1/r)."""
        total, bound = gamma_sum_bound_check(0.5, 10, 1, 1)
        self.assertLess(total, 1)
        self.assertAlmostEqual(bound, 1 / math.log(2))
        for X, s, a, r in [(1e-6, 5, 1, 1), (0.9, 1, 1, 2), (0.99, 50, 0.5, 0.7)]:
            total, bound = gamma_sum_bound_check(X, s, a, r)
            self.assertGreater(bound, 0)
            self.assertLessEqual(total, bound)
        with self.assertRaises(ValueError):
            gamma_sum_bound_check(1.0, 3, 1, 1)


class TestDecayBound(unittest.TestCase):
    """Test cases for walsh_decay_bound."""

    def test_examples(self):
        """Test the bound for k = 0, 1 and 3 with u = (1/2)."""
        u = parse_weight_rule("smooth-explicit:0.5", 2)
        self.assertEqual(walsh_decay_bound(3.0, [0], u), 3.0)
        self.assertAlmostEqual(walsh_decay_bound(1.0, [1], u), 0.25)
        self.assertAlmostEqual(walsh_decay_bound(1.0, [3], u), 2.0 ** -6)


if __name__ == '__main__':
    unittest.main()
