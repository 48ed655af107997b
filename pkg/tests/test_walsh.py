"""Tests for Walsh functions and coefficients."""

import unittest

import numpy as np

from wafom_nets.basefield import digits_matrix, from_integer
from wafom_nets.walsh import (
    MultiIndex, PointDigits, grid_digits, walsh_coefficient, walsh_eval, walsh_table,
)


def random_index(rng, b, s, l):
    return MultiIndex.from_array(rng.integers(0, b, size=(s, l)), b)


def random_point(rng, b, s, l):
    return PointDigits.from_array(rng.integers(0, b, size=(s, l)), b)


class TestWalshEval(unittest.TestCase):
    """Test cases for walsh_eval."""

    def test_zero_index(self):
        """Test wal_0 == 1 everywhere."""
        rng = np.random.default_rng(1)
        for s in (1, 3):
            k = MultiIndex.from_integers([0] * s, 3, 4)
            self.assertEqual(walsh_eval(k, random_point(rng, 3, s, 4)), 1)

    def test_binary_half(self):
        """Test wal_1(1/2) == -1 in base 2."""
        k = MultiIndex.from_integers([1], 2, 4)
        x = PointDigits.from_floats([0.5], 2, 4)
        self.assertEqual(walsh_eval(k, x), -1)

    def test_ternary_exponent_wraps(self):
        """Test an exponent of 3 wrapping to 0 in base 3."""
        k = MultiIndex.from_integers([1, 1], 3, 2)
        x = PointDigits.from_array([[1, 0], [2, 0]], 3)
        self.assertAlmostEqual(walsh_eval(k, x), 1, places=12)

    def test_shape_mismatch(self):
        """Test that base and dimension mismatches are refused."""
        k = MultiIndex.from_integers([1, 1], 2, 2)
        with self.assertRaises(ValueError):
            walsh_eval(k, PointDigits.from_array([[1, 0]], 2))
        with self.assertRaises(ValueError):
            walsh_eval(k, PointDigits.from_array([[1, 0], [1, 0]], 3))

    def test_character_property(self):
        """Test wal_{k + k'} == wal_k * wal_k' on random instances."""
        rng = np.random.default_rng(2)
        for b in (2, 3, 5):
            for _ in range(40):
                s, l = int(rng.integers(1, 4)), int(rng.integers(1, 5))
                k, k2 = random_index(rng, b, s, l), random_index(rng, b, s, l)
                x = random_point(rng, b, s, l)
                product = walsh_eval(k, x) * walsh_eval(k2, x)
                self.assertAlmostEqual(abs(walsh_eval(k + k2, x) - product), 0, places=12)

    def test_unit_modulus(self):
        """Test |wal_k(x)| == 1."""
        rng = np.random.default_rng(3)
        for b in (2, 3, 7):
            for _ in range(20):
                value = walsh_eval(random_index(rng, b, 2, 3), random_point(rng, b, 2, 3))
                self.assertAlmostEqual(abs(value), 1.0, places=12)

    def test_orthonormal_on_grid(self):
        """Test the discrete orthonormality over all l-digit points."""
        for b in (2, 3):
            for l in range(1, 5):
                if b ** l > 100:
                    continue
                with self.subTest(b=b, l=l):
                    ks = digits_matrix(range(b ** l), b, l)[:, None, :]
                    xs = grid_digits(b, l)[:, None, :]
                    table = walsh_table(ks, xs, b)
                    gram = table @ table.conj().T / b ** l
                    np.testing.assert_allclose(gram, np.eye(b ** l), atol=1e-12)


class TestPointDigits(unittest.TestCase):
    """Test cases for PointDigits."""

    def test_from_floats_binary(self):
        """Test exact digit extraction for dyadic values."""
        x = PointDigits.from_floats([0.75, 0.125], 2, 3)
        self.assertEqual(x.coords[0].digits.tolist(), [1, 1, 0])
        self.assertEqual(x.coords[1].digits.tolist(), [0, 0, 1])
        self.assertEqual(x.to_floats(), (0.75, 0.125))

    def test_outside_unit_interval(self):
        """Test that 1.0 and negative values are refused."""
        with self.assertRaises(ValueError):
            PointDigits.from_floats([1.0], 2, 3)
        with self.assertRaises(ValueError):
            PointDigits.from_floats([-0.1], 2, 3)


class TestMultiIndex(unittest.TestCase):
    """Test cases for MultiIndex."""

    def test_values_and_arithmetic(self):
        """Test digitwise arithmetic per coordinate."""
        k = MultiIndex.from_integers([5, 3], 3, 2)
        k2 = MultiIndex.from_integers([7, 3], 3, 2)
        self.assertEqual((k + k2).values(), (0, 6))
        self.assertTrue((k - k).is_zero())
        self.assertEqual(k.dimension, 2)
        self.assertEqual(k.precision, 2)

    def test_mixed_precision_refused(self):
        """Test that coordinates must share the precision."""
        with self.assertRaises(ValueError):
            MultiIndex([from_integer(1, 2, 2), from_integer(1, 2, 3)])


class TestWalshCoefficient(unittest.TestCase):
    """Test cases for walsh_coefficient."""

    def test_constant_function(self):
        """Test the normalisation and the zero mean of wal_1."""
        one = lambda x: np.ones(len(x))
        k0 = MultiIndex.from_integers([0], 2, 2)
        k1 = MultiIndex.from_integers([1], 2, 2)
        self.assertAlmostEqual(walsh_coefficient(one, k0, 2), 1.0)
        self.assertAlmostEqual(abs(walsh_coefficient(one, k1, 2)), 0.0)

    def test_orthonormality_of_wal_3(self):
        """Test that the 3rd coefficient of wal_3 is 1."""
        def wal_3(x):
            xi_1 = np.floor(2 * x[:, 0]) % 2
            xi_2 = np.floor(4 * x[:, 0]) % 2
            return (-1.0) ** (xi_1 + xi_2)

        k = MultiIndex.from_integers([3], 2, 2)
        self.assertAlmostEqual(walsh_coefficient(wal_3, k, 2), 1.0)
        other = MultiIndex.from_integers([1], 2, 2)
        self.assertAlmostEqual(abs(walsh_coefficient(wal_3, other, 2)), 0.0)

    def test_level_too_small(self):
        """Test that digits beyond quad_level are refused."""
        k = MultiIndex.from_integers([4], 2, 3)
        with self.assertRaises(ValueError):
            walsh_coefficient(lambda x: np.ones(len(x)), k, 2)

    def test_anchored_grid(self):
        """Test the collapsed grid on the first coefficient of x_1 in s = 4."""
        k = MultiIndex.from_integers([1, 0, 0, 0], 2, 6)
        value = walsh_coefficient(lambda x: x[:, 0], k, 6)
        self.assertAlmostEqual(value, -0.25, places=12)


if __name__ == '__main__':
    unittest.main()
