# Copyright 2024 The Collapsar Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Tests for the obstruction verification suite."""

import unittest

from collapsar.core.catalog import base
from collapsar.core.catalog import verification


class VerifyObstructionTest(unittest.TestCase):

  def test_catalog_entries_pass(self):
    for name in ('sawblade-I-1', 'sawblade-II-2', 'sawblade-III-14',
                 'duncehat-18-01', 'duncehat-18-61'):
      report = verification.verify_obstruction(
          base.get_entry(name), orders=20)
      self.assertTrue(report.ok, (name, report.failed()))
      self.assertEqual(report.failed(), [])

  def test_check_details(self):
    report = verification.verify_obstruction(
        base.get_entry('sawblade-I-1'), orders=5)
    self.assertEqual(
        [c.name for c in report.checks],
        ['euler_characteristic', 'f2_homology', 'non_collapsible',
         'degree_histogram', 'odd_edge_cycle', 'size_bounds'])
    self.assertEqual(report.check('euler_characteristic').detail, 'chi = 1')
    self.assertEqual(report.check('f2_homology').detail, 'betti = (1, 0, 0)')
    self.assertEqual(
        report.check('degree_histogram').detail,
        'histogram = {2: 21, 3: 4}')
    self.assertEqual(
        report.check('size_bounds').detail, 'f = (8, 25, 18)')
    with self.assertRaises(KeyError):
      report.check('unknown')

  def test_accepts_two_complex_and_triangle_list(self):
    entry = base.get_entry('duncehat-18-10')
    self.assertTrue(
        verification.verify_obstruction(entry.two_complex(), orders=3).ok)
    self.assertTrue(
        verification.verify_obstruction(list(entry.triangles), orders=3).ok)

  def test_disk_fails(self):
    report = verification.verify_obstruction(
        [(1, 2, 3), (1, 3, 4)], orders=3)
    self.assertFalse(report.ok)
    self.assertEqual(
        report.failed(),
        ['non_collapsible', 'degree_histogram', 'odd_edge_cycle',
         'size_bounds'])
    self.assertTrue(
        report.check('non_collapsible').detail.startswith(
            'collapses with order seed'))

  def test_two_sphere_fails_homology(self):
    sphere = [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]
    report = verification.verify_obstruction(sphere, orders=3)
    self.assertIn('euler_characteristic', report.failed())
    self.assertIn('f2_homology', report.failed())
    self.assertTrue(report.check('non_collapsible').passed)


class VerifyCatalogTest(unittest.TestCase):

  def test_verify_catalog(self):
    results = verification.verify_catalog(orders=2)
    self.assertEqual(len(results), 80)
    self.assertTrue(all(report.ok for _, report in results))


if __name__ == '__main__':
  unittest.main()
