import math

import numpy as np
from django.test import SimpleTestCase

from errormodel import distributions
from errormodel.distributions import ArcsineDistribution


class ArcsineTests(SimpleTestCase):
    def test_pdf(self):
        law = ArcsineDistribution(5.7)
        self.assertAlmostEqual(distributions.pdf(law, 0.0), 1 / (5.7 * math.pi), places=12)
        self.assertAlmostEqual(distributions.pdf(law, 0.0), 0.05585, delta=1e-5)
        self.assertEqual(distributions.pdf(law, 6.0), 0.0)
        self.assertAlmostEqual(distributions.pdf(ArcsineDistribution(1.0), 0.6), 1 / (math.pi * 0.8), places=12)

    def test_pdf_edges_are_infinite(self):
        law = ArcsineDistribution(2.0)
        self.assertEqual(law.pdf(2.0), math.inf)
        self.assertEqual(law.pdf(-2.0), math.inf)

    def test_pdf_vectorised(self):
        values = ArcsineDistribution(1.0).pdf(np.array([-2.0, 0.0, 2.0]))
        self.assertEqual(values.shape, (3,))
        self.assertEqual(values[0], 0.0)

    def test_std(self):
        self.assertAlmostEqual(distributions.std(ArcsineDistribution(5.7)), 4.0305, places=4)
        self.assertEqual(distributions.std(ArcsineDistribution(0.0)), 0.0)
        self.assertAlmostEqual(distributions.std(ArcsineDistribution(math.sqrt(2))), 1.0, places=15)

    def test_cdf(self):
        law = ArcsineDistribution(1.0)
        self.assertAlmostEqual(distributions.cdf(law, 0.0), 0.5, places=12)
        self.assertAlmostEqual(distributions.cdf(law, 1 / math.sqrt(2)), 0.75, places=12)
        self.assertEqual(distributions.cdf(law, -1.0), 0.0)
        self.assertEqual(distributions.cdf(law, -3.0), 0.0)
        self.assertEqual(distributions.cdf(law, 3.0), 1.0)

    def test_cdf_increasing_inside_support(self):
        values = ArcsineDistribution(3.0).cdf(np.linspace(-2.99, 2.99, 200))
        self.assertTrue(np.all(np.diff(values) > 0))

    def test_density_integrates_to_one(self):
        for amplitude in (0.5, 5.0, 5.7):
            self.assertAlmostEqual(ArcsineDistribution(amplitude).normalization(), 1.0, delta=1e-9)

    def test_second_moment(self):
        for amplitude in (0.5, 5.0, 5.7):
            moment = ArcsineDistribution(amplitude).second_moment()
            self.assertLess(abs(moment - amplitude ** 2 / 2) / (amplitude ** 2 / 2), 1e-8)

    def test_sampled_std_and_ks_distance(self):
        law = ArcsineDistribution(5.0)
        samples = law.sample(100_000, seed=2024)
        self.assertLess(abs(samples.std(ddof=1) - law.std()) / law.std(), 0.02)
        self.assertLess(law.ks_distance(samples), 0.01)
        self.assertLessEqual(np.max(np.abs(samples)), 5.0)

    def test_sampling_is_reproducible(self):
        law = ArcsineDistribution(1.0)
        self.assertTrue(np.array_equal(law.sample(1000, seed=5), law.sample(1000, seed=5)))

    def test_density_series_avoids_edges(self):
        y, density = ArcsineDistribution(4.0).density_series(points=11)
        self.assertEqual(len(y), 11)
        self.assertTrue(np.all(np.isfinite(density)))

    def test_negative_amplitude(self):
        with self.assertRaises(ValueError):
            ArcsineDistribution(-1.0)
