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
"""Tests for tree collapses and greedy 2-complex collapses."""

import json
import unittest
from unittest import mock

from collapsar.core import collapse
from collapsar.core import complex as complex_lib
from collapsar.core import errors
from collapsar.core import spanning
from collapsar.core.catalog import base as catalog_base


def _boundary():
  return complex_lib.Complex3(complex_lib.boundary_of_simplex(3))


class TwoComplexTest(unittest.TestCase):

  def test_counts(self):
    tc = collapse.TwoComplex([(1, 2, 3), (2, 3, 4)])
    self.assertEqual(tc.f_vector, (4, 5, 2))
    self.assertEqual(tc.euler_characteristic, 1)
    self.assertTrue(tc.is_connected())
    self.assertEqual(
        sorted(tc.incidence.edges[e] for e in tc.free_edge_ids()),
        [(1, 2), (1, 3), (2, 4), (3, 4)])
    self.assertEqual(collapse.degree_counts(tc), {1: 4, 2: 1})

  def test_extra_edges(self):
    tc = collapse.TwoComplex([(1, 2, 3)], edges=[(3, 4)])
    self.assertEqual(tc.f_vector, (4, 4, 1))
    self.assertEqual(tc.edge_incidence[tc.edge_id((3, 4))], 0)

  def test_collapse_edge(self):
    tc = collapse.TwoComplex([(1, 2, 3), (2, 3, 4)])
    t = tc.collapse_edge(tc.edge_id((1, 2)))
    self.assertEqual(tc.incidence.triangles[t], (1, 2, 3))
    self.assertEqual(tc.f_vector, (4, 4, 1))
    tc.check_consistency()
    with self.assertRaisesRegex(errors.ValidationError, 'not free'):
      tc.collapse_edge(tc.edge_id((1, 2)))

  def test_collapse_vertex(self):
    tc = collapse.TwoComplex([(1, 2, 3)], edges=[(3, 4)])
    with self.assertRaisesRegex(errors.ValidationError, 'not free'):
      tc.collapse_vertex(0)
    e = tc.collapse_vertex(3)
    self.assertEqual(tc.incidence.edges[e], (3, 4))
    self.assertEqual(tc.alive_vertices(), [1, 2, 3])
    tc.check_consistency()

  def test_copy_and_compact(self):
    tc = collapse.TwoComplex([(1, 2, 3), (2, 3, 4)])
    copy = tc.copy()
    copy.collapse_edge(copy.edge_id((1, 2)))
    self.assertEqual(tc.triangle_count, 2)
    compact = copy.compact()
    self.assertEqual(compact.facet_tuples, ((2, 3, 4),))
    self.assertEqual(compact.f_vector, copy.f_vector)

  def test_invalid_triangle(self):
    with self.assertRaises(errors.ValidationError):
      collapse.TwoComplex([(1, 1, 2)])

  def test_check_consistency_detects_corruption(self):
    tc = collapse.TwoComplex([(1, 2, 3)])
    tc.edge_incidence[0] = 5
    with self.assertRaises(errors.ValidationError):
      tc.check_consistency()


class GreedyCollapseTest(unittest.TestCase):

  def test_triangle(self):
    tc = collapse.TwoComplex([(1, 2, 3)])
    outcome = collapse.greedy_collapse(tc)
    self.assertTrue(outcome.collapsed_to_point)
    self.assertTrue(outcome.contract_ok)
    self.assertEqual(outcome.removal_log, [
        ((1, 2), (1, 2, 3)),
        ((1,), (1, 3)),
        ((3,), (2, 3)),
    ])
    self.assertEqual(outcome.remainder.alive_vertices(), [2])
    # The input is untouched.
    self.assertEqual(tc.triangle_count, 1)

  def test_removal_log_jsonl(self):
    outcome = collapse.greedy_collapse(collapse.TwoComplex([(1, 2, 3)]))
    lines = outcome.removal_log_jsonl().splitlines()
    self.assertEqual(len(lines), 3)
    self.assertEqual(
        json.loads(lines[0]), {'step': 0, 'face': [1, 2], 'coface': [1, 2, 3]})

  def test_disk(self):
    # A fan of four triangles around vertex 1.
    disk = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6)]
    tc = collapse.TwoComplex(disk)
    for seed in [None, 0, 1, 2, 3]:
      outcome = collapse.greedy_collapse(tc, seed)
      self.assertTrue(outcome.collapsed_to_point)
      outcome.remainder.check_consistency()

  def test_sphere_does_not_collapse(self):
    tc = collapse.TwoComplex([(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)])
    outcome = collapse.greedy_collapse(tc)
    self.assertFalse(outcome.collapsed_to_point)
    self.assertFalse(outcome.contract_ok)
    self.assertEqual(outcome.removal_log, [])

  def test_dunce_hat_does_not_collapse(self):
    entry = catalog_base.load_catalog()[-1]
    tc = entry.two_complex()
    for i in range(20):
      self.assertFalse(
          collapse.greedy_collapse(tc, spanning.mix_seed(5, i))
          .collapsed_to_point)

  def test_order_does_not_matter_after_tree_collapse(self):
    kernel = collapse.CollapseKernel(catalog_base.sphere_15())
    for i in range(100):
      _, parent_arc = kernel.sample_parents(spanning.mix_seed(3, i))
      tc = kernel.two_complex(parent_arc)
      first = collapse.greedy_collapse(tc)
      self.assertTrue(first.contract_ok)
      for order_seed in range(20):
        outcome = collapse.greedy_collapse(tc, order_seed, record=False)
        self.assertEqual(outcome.collapsed_to_point, first.collapsed_to_point,
                         (i, order_seed))

  def test_debug_recounts_after_every_removal(self):
    with mock.patch.object(
        collapse.TwoComplex, 'check_consistency', autospec=True) as check:
      outcome = collapse.greedy_collapse(
          collapse.TwoComplex([(1, 2, 3)]), debug=True)
    self.assertTrue(outcome.collapsed_to_point)
    self.assertEqual(check.call_count, 3)

    disk = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6)]
    for seed in [None, 0, 1]:
      self.assertTrue(collapse.greedy_collapse(
          collapse.TwoComplex(disk), seed, debug=True).collapsed_to_point)

  def test_debug_detects_stale_counts(self):
    tc = collapse.TwoComplex([(1, 2, 3)])
    tc.triangle_count += 1
    self.assertFalse(collapse.greedy_collapse(tc).collapsed_to_point)
    with self.assertRaisesRegex(errors.ValidationError, 'out of date'):
      collapse.greedy_collapse(tc, debug=True)

  def test_in_place(self):
    tc = collapse.TwoComplex([(1, 2, 3)])
    outcome = collapse.greedy_collapse(tc, in_place=True, record=False)
    self.assertIs(outcome.remainder, tc)
    self.assertEqual(tc.vertex_count, 1)
    self.assertEqual(outcome.removal_log, [])

  def test_replay(self):
    tc = collapse.TwoComplex([(1, 2, 3), (1, 3, 4)])
    outcome = collapse.greedy_collapse(tc, 17)
    replayed = collapse.replay_removal_log(tc, outcome.removal_log)
    self.assertEqual(replayed.alive_vertices(),
                     outcome.remainder.alive_vertices())

  def test_replay_rejects_invalid_logs(self):
    tc = collapse.TwoComplex([(1, 2, 3)])
    with self.assertRaisesRegex(errors.ValidationError, 'not free'):
      collapse.replay_removal_log(
          tc, [((1, 2), (1, 2, 3)), ((1, 2), (1, 2, 3))])
    with self.assertRaisesRegex(errors.ValidationError, 'not in the complex'):
      collapse.replay_removal_log(tc, [((7, 8), (1, 2, 3))])
    with self.assertRaises(errors.ValidationError):
      collapse.replay_removal_log(
          collapse.TwoComplex([(1, 2, 3), (2, 3, 4)]),
          [((1, 2), (2, 3, 4))])


class TreeCollapseTest(unittest.TestCase):

  def test_boundary_always_collapses(self):
    c = _boundary()
    kernel = collapse.CollapseKernel(c)
    for tree in spanning.enumerate_spanning_trees(kernel.graph):
      tc = kernel.two_complex(tree.arcs)
      self.assertEqual(tc.f_vector, (5, 10, 6))
      self.assertEqual(
          sorted(kernel.free_edge_ids(tree.arcs)), sorted(tc.free_edge_ids()))
      self.assertTrue(kernel.collapses(tree.arcs))

  def test_collapse_along_tree(self):
    c = _boundary()
    tree = spanning.wilson_sample(complex_lib.dual_graph(c), 3)
    tc = collapse.collapse_along_tree(c, tree)
    self.assertEqual(tc.triangle_count, 6)
    self.assertEqual(tc.euler_characteristic, 1)
    rerooted = collapse.collapse_along_tree(c, tree, removed_facet=4)
    self.assertEqual(rerooted.alive_triangles(), tc.alive_triangles())

  def test_collapse_along_wrong_tree(self):
    c = _boundary()
    other = complex_lib.DualGraph.from_arcs(3, [(0, 1), (1, 2)])
    tree = spanning.SpanningTree.from_arcs(other, [0, 1])
    with self.assertRaises(errors.TreeMismatchError):
      collapse.collapse_along_tree(c, tree)

  def test_tree_collapse_sequence(self):
    c = _boundary()
    tree = spanning.wilson_sample(complex_lib.dual_graph(c), 9)
    steps = collapse.tree_collapse_sequence(c, tree)
    self.assertEqual(len(steps), 4)
    removed = {c.facet_tuples[tree.root]}
    for triangle, facet in steps:
      self.assertTrue(set(triangle) <= set(facet))
      # The triangle is shared with an already removed facet.
      self.assertTrue(any(set(triangle) <= set(f) for f in removed))
      removed.add(facet)
    self.assertEqual(len(removed), 5)

  def test_trial(self):
    self.assertTrue(collapse.trial(_boundary(), 0))
    self.assertTrue(collapse.trial(_boundary(), spanning.mix_seed(1, 2)))

  def test_kernel_rejects_non_manifold(self):
    with self.assertRaises(errors.ValidationError):
      collapse.CollapseKernel(complex_lib.Complex3([(1, 2, 3, 4)]))

  def test_kernel_on_sphere_15(self):
    kernel = collapse.CollapseKernel(catalog_base.sphere_15())
    _, parent_arc = kernel.sample_parents(1)
    tc = kernel.two_complex(parent_arc)
    self.assertEqual(tc.triangle_count, 91)
    self.assertEqual(tc.euler_characteristic, 1)
    self.assertEqual(
        kernel.run(1),
        collapse.greedy_collapse(tc, record=False).collapsed_to_point)
    self.assertEqual(
        collapse.CollapseKernel(catalog_base.sphere_15(), debug=True).run(1),
        kernel.run(1))


if __name__ == '__main__':
  unittest.main()
