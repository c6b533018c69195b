import numpy as np
from django.test import SimpleTestCase

from stencils.exceptions import ConfigurationError
from stencils.grid import FillPattern, GridDims
from stencils.verify import check_maximum_principle, compare, equivalence_matrix, oracle


class OracleTests(SimpleTestCase):
    def test_fixed_points(self):
        dims = GridDims(6, 5, 4)
        constant = FillPattern.constant(3)
        np.testing.assert_array_equal(oracle(dims, constant, 10), constant.render(dims))
        np.testing.assert_array_equal(oracle(dims, FillPattern.linear(), 10), FillPattern.linear().render(dims))

    def test_deterministic(self):
        dims = GridDims.cube(5)
        np.testing.assert_array_equal(
            oracle(dims, FillPattern.random(8), 3), oracle(dims, FillPattern.random(8), 3)
        )


class CompareTests(SimpleTestCase):
    def setUp(self):
        self.a = FillPattern.random(1).render(GridDims.cube(4))

    def test_identical_fields_are_bitwise(self):
        result = compare(self.a, self.a.copy())
        self.assertTrue(result.passed)
        self.assertTrue(result.bitwise)
        self.assertEqual((result.max_abs, result.max_rel), (0.0, 0.0))

    def test_one_ulp_passes_without_being_bitwise(self):
        b = self.a.copy()
        b[2, 3, 1] = np.nextafter(b[2, 3, 1], 2.0)
        result = compare(self.a, b, 1e-13)
        self.assertTrue(result.passed)
        self.assertFalse(result.bitwise)
        self.assertEqual(result.location, (2, 3, 1))

    def test_large_difference_fails_and_is_located(self):
        b = self.a.copy()
        b[1, 0, 5] += 1e-6
        result = compare(self.a, b, 1e-13)
        self.assertFalse(result.passed)
        self.assertEqual(result.location, (1, 0, 5))
        self.assertIn('FAIL', str(result))

    def test_symmetric(self):
        b = self.a * (1 + 1e-12)
        self.assertEqual(compare(self.a, b, 1e-13).passed, compare(b, self.a, 1e-13).passed)

    def test_zero_against_zero(self):
        zeros = np.zeros((3, 3, 3))
        self.assertTrue(compare(zeros, -zeros, 0.0).passed)

    def test_extent_mismatch(self):
        with self.assertRaises(ConfigurationError):
            compare(self.a, self.a[1:])


class PropertyTests(SimpleTestCase):
    def test_maximum_principle_holds_for_the_hot_plate(self):
        self.assertIsNone(check_maximum_principle(GridDims.cube(6), FillPattern.hotplate(), 10))

    def test_matrix_skips_pipelines_deeper_than_the_grid(self):
        configs = list(equivalence_matrix(GridDims.cube(4), teams=(1, 2), team_sizes=(4,), updates=(1,), upper=(1,), team_delays=(0,)))
        self.assertEqual({cfg.U for cfg in configs}, {4})
        self.assertEqual(len(configs), 4)
