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
"""Tests for bistellar moves and edge-variance annealing."""

import collections
import os
import tempfile
import unittest
from unittest import mock

from collapsar.core import anneal
from collapsar.core import complex as complex_lib
from collapsar.core import errors
from collapsar.core import invariants
from collapsar.core import spanning
from collapsar.core.catalog import base as catalog_base
import numpy as np
import pandas as pd


def _boundary():
  return complex_lib.Complex3(complex_lib.boundary_of_simplex(3))


def _f_delta(before, after):
  return tuple(
      b - a for a, b in zip(before.f_vector.to_tuple(),
                            after.f_vector.to_tuple()))


class LegalMovesTest(unittest.TestCase):

  def test_boundary(self):
    moves = anneal.legal_moves(_boundary())
    self.assertEqual([m.kind for m in moves], ['move14'] * 5)
    self.assertEqual(tuple(moves[0].location), (1, 2, 3, 4))

  def test_after_move14(self):
    c = anneal.apply_move(_boundary(), anneal.MoveSpec('move14', (1, 2, 3, 4)))
    moves = anneal.legal_moves(c)

    def locations(kind):
      return [tuple(m.location) for m in moves if m.kind == kind]

    # Vertices 5 and 6 both have the old facet 1234 as their link.
    self.assertEqual(locations('move41'), [(5,), (6,)])
    self.assertEqual(
        locations('move23'), [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)])
    self.assertEqual(locations('move32'), [])
    self.assertEqual(len(locations('move14')), 8)

  def test_check_move(self):
    c = _boundary()
    self.assertIsNone(
        anneal.check_move(c, anneal.MoveSpec('move14', (1, 2, 3, 5))))
    self.assertEqual(
        anneal.check_move(c, anneal.MoveSpec('move23', (1, 2, 3))),
        'edge already present')
    self.assertEqual(
        anneal.check_move(c, anneal.MoveSpec('move32', (1, 2))),
        'triangle already present')
    self.assertEqual(
        anneal.check_move(c, anneal.MoveSpec('move41', (1,))),
        'link tetrahedron already present')
    self.assertEqual(
        anneal.check_move(c, anneal.MoveSpec('move14', (1, 2, 3, 6))),
        'facet not present')


class ApplyMoveTest(unittest.TestCase):

  def test_move14(self):
    c = anneal.apply_move(_boundary(), anneal.MoveSpec('move14', (1, 2, 3, 4)))
    self.assertEqual(c.f_vector.to_tuple(), (6, 14, 16, 8))
    self.assertTrue(complex_lib.is_closed_3_manifold(c).ok)
    self.assertNotIn((1, 2, 3, 4), c.facet_tuples)
    self.assertIn((1, 2, 3, 6), c.facet_tuples)

  def test_move41_is_inverse_of_move14(self):
    c = anneal.apply_move(_boundary(), anneal.MoveSpec('move14', (1, 2, 4, 5)))
    back = anneal.apply_move(c, anneal.MoveSpec('move41', (6,)))
    self.assertEqual(back.f_vector.to_tuple(), (5, 10, 10, 5))
    self.assertEqual(
        complex_lib.canonical_form(back),
        complex_lib.canonical_form(_boundary()))

  def test_move41_renames_highest_label(self):
    c = anneal.apply_move(_boundary(), anneal.MoveSpec('move14', (1, 2, 3, 4)))
    c = anneal.apply_move(c, anneal.MoveSpec('move14', (1, 2, 3, 5)))
    self.assertEqual(c.vertex_count, 7)
    d = anneal.apply_move(c, anneal.MoveSpec('move41', (6,)))
    self.assertEqual(d.vertex_count, 6)
    self.assertEqual(d.f_vector.to_tuple(), (6, 14, 16, 8))
    self.assertIn(6, d.vertices)
    self.assertTrue(complex_lib.is_closed_3_manifold(d).ok)

  def test_move23_and_move32(self):
    c = anneal.apply_move(_boundary(), anneal.MoveSpec('move14', (1, 2, 3, 4)))
    d = anneal.apply_move(c, anneal.MoveSpec('move23', (1, 2, 3)))
    self.assertEqual(_f_delta(c, d), (0, 1, 2, 1))
    self.assertIn((5, 6), d.edges)
    self.assertEqual(complex_lib.edge_table(d).degree_of((5, 6)), 3)
    e = anneal.apply_move(d, anneal.MoveSpec('move32', (5, 6)))
    self.assertEqual(_f_delta(d, e), (0, -1, -2, -1))
    self.assertEqual(
        complex_lib.canonical_form(e), complex_lib.canonical_form(c))

  def test_illegal_moves(self):
    with self.assertRaisesRegex(
        errors.IllegalMoveError, 'edge already present') as cm:
      anneal.apply_move(_boundary(), anneal.MoveSpec('move23', (1, 2, 3)))
    self.assertEqual(cm.exception.condition, 'edge already present')
    with self.assertRaises(errors.IllegalMoveError):
      anneal.apply_move(_boundary(), anneal.MoveSpec('move41', (5,)))
    with self.assertRaisesRegex(errors.IllegalMoveError, 'degree is not 3'):
      c = anneal.apply_move(
          _boundary(), anneal.MoveSpec('move14', (1, 2, 3, 4)))
      anneal.apply_move(c, anneal.MoveSpec('move32', (1, 2)))

  def test_random_moves_and_inverses(self):
    rng = np.random.default_rng(0)
    c = _boundary()
    for _ in range(60):
      moves = [
          m for m in anneal.legal_moves(c)
          if m.kind != 'move14' or c.vertex_count < 10
      ]
      m = moves[rng.integers(len(moves))]
      d = anneal.apply_move(c, m)
      self.assertEqual(_f_delta(c, d), anneal.F_VECTOR_DELTAS[m.kind])
      self.assertEqual(d.f_vector.euler_characteristic, 0)
      self.assertTrue(complex_lib.is_closed_3_manifold(d).ok, str(m))

      inverse = None
      if m.kind == 'move14':
        inverse = anneal.MoveSpec('move41', (d.vertex_count,))
      elif m.kind == 'move23':
        (edge,) = set(d.edges) - set(c.edges)
        inverse = anneal.MoveSpec('move32', edge)
      elif m.kind == 'move32':
        (triangle,) = set(d.triangles) - set(c.triangles)
        inverse = anneal.MoveSpec('move23', triangle)
      if inverse is not None:
        restored = anneal.apply_move(d, inverse)
        self.assertEqual(
            complex_lib.canonical_form(restored), complex_lib.canonical_form(c))
      c = d


class IncrementalStateTest(unittest.TestCase):

  def assert_matches_rebuild(self, state):
    fresh = anneal._Triangulation(list(state.facets))
    self.assertEqual(sorted(state.legal_moves()), sorted(fresh.legal_moves()))
    for kind in anneal.F_VECTOR_DELTAS:
      self.assertCountEqual(list(state.pools[kind]), list(fresh.pools[kind]))
    self.assertEqual(state.variance, fresh.variance)
    self.assertEqual(state.vertex_count, fresh.vertex_count)
    self.assertEqual(
        {e: set(fs) for e, fs in state.edge_facets.items()},
        {e: set(fs) for e, fs in fresh.edge_facets.items()})

  def test_random_walk_matches_rebuild(self):
    state = anneal._Triangulation(catalog_base.sphere_15().facet_tuples)
    stream = spanning.UniformStream(spanning.make_rng(4))
    for step in range(300):
      kind, location = state.propose(stream)
      record = state.apply(kind, location)
      if step % 3 == 0:
        state.undo(record)
      self.assert_matches_rebuild(state)
    self.assertTrue(complex_lib.is_closed_3_manifold(state.to_complex()).ok)

  def test_propose_is_uniform_over_legal_moves(self):
    c = anneal.apply_move(_boundary(), anneal.MoveSpec('move14', (1, 2, 3, 4)))
    state = anneal._Triangulation(c.facet_tuples)
    stream = spanning.UniformStream(spanning.make_rng(0))
    counts = collections.Counter(state.propose(stream) for _ in range(14000))
    self.assertEqual(set(counts), set(state.legal_moves()))
    self.assertEqual(len(counts), 14)
    for n in counts.values():
      self.assertTrue(850 < n < 1150, counts)

  def test_annealing_does_not_enumerate_moves(self):
    c = catalog_base.sphere_15()
    with mock.patch.object(
        anneal._Triangulation, 'legal_moves', side_effect=AssertionError):
      result = anneal.anneal_edge_variance(
          c, anneal.AnnealConfig(direction='maximize', max_moves=1000, seed=7))
    self.assertEqual(len(result.variance_trace), 1000)
    self.assertGreater(result.best_variance, result.initial_variance)
    self.assertEqual(
        invariants.edge_variance(result.best_complex).variance,
        result.best_variance)


class AnnealConfigTest(unittest.TestCase):

  def test_defaults(self):
    cfg = anneal.AnnealConfig()
    self.assertEqual(cfg.direction, 'minimize')
    self.assertEqual(cfg.initial_temperature, 1.0)
    self.assertEqual(cfg.cooling_factor, 0.99)
    self.assertEqual(cfg.reheat_period, 500)
    self.assertEqual(cfg.ascent_moves, 0)

  def test_validation(self):
    with self.assertRaises(errors.DomainError):
      anneal.AnnealConfig(cooling_factor=1.0)
    with self.assertRaises(errors.DomainError):
      anneal.AnnealConfig(max_moves=0)
    with self.assertRaises(errors.DomainError):
      anneal.AnnealConfig(initial_temperature=0.0)


class AnnealTest(unittest.TestCase):

  def test_boundary_is_already_optimal(self):
    result = anneal.anneal_edge_variance(
        _boundary(), anneal.AnnealConfig(max_moves=50, seed=3))
    self.assertEqual(result.best_variance, 0)
    self.assertEqual(result.best_complex, _boundary())
    self.assertEqual(len(result.variance_trace), 50)
    self.assertTrue(all(v == 0 for v in result.variance_trace))

  def test_minimize_trace_is_monotone(self):
    c = catalog_base.sphere_15()
    for seed in range(3):
      result = anneal.anneal_edge_variance(
          c, anneal.AnnealConfig(max_moves=150, seed=seed, reheat_period=40))
      trace = result.variance_trace
      self.assertTrue(all(b <= a for a, b in zip(trace, trace[1:])))
      self.assertLessEqual(result.best_variance, result.initial_variance)
      self.assertEqual(
          invariants.edge_variance(result.best_complex).variance,
          result.best_variance)

  def test_maximize(self):
    c = catalog_base.sphere_15()
    result = anneal.anneal_edge_variance(
        c, anneal.AnnealConfig(direction='maximize', max_moves=150, seed=1))
    trace = result.variance_trace
    self.assertTrue(all(b >= a for a, b in zip(trace, trace[1:])))
    self.assertGreaterEqual(result.best_variance, result.initial_variance)
    self.assertTrue(complex_lib.is_closed_3_manifold(result.best_complex).ok)

  def test_move_log_replays(self):
    c = catalog_base.sphere_15()
    result = anneal.anneal_edge_variance(
        c, anneal.AnnealConfig(max_moves=60, seed=5, debug=True,
                               ascent_moves=10, reheat_period=20))
    self.assertEqual(len(result.move_log), len(result.move_steps))
    replayed = c
    for m, v in zip(result.move_log, result.move_variances):
      replayed = anneal.apply_move(replayed, m)
      self.assertEqual(invariants.edge_variance(replayed).variance, v)

  def test_deterministic(self):
    c = catalog_base.sphere_15()
    cfg = anneal.AnnealConfig(max_moves=80, seed=9)
    a = anneal.anneal_edge_variance(c, cfg)
    b = anneal.anneal_edge_variance(c, cfg)
    self.assertEqual([str(m) for m in a.move_log],
                     [str(m) for m in b.move_log])
    self.assertEqual(a.best_variance, b.best_variance)

  def test_write(self):
    result = anneal.anneal_edge_variance(
        catalog_base.sphere_15(), anneal.AnnealConfig(max_moves=30, seed=2))
    with tempfile.TemporaryDirectory() as d:
      paths = result.write(os.path.join(d, 'run'))
      self.assertEqual([os.path.basename(p) for p in paths],
                       ['best.facets', 'trace.csv'])
      best = complex_lib.load_complex(paths[0])
      self.assertEqual(best.f_vector, result.best_complex.f_vector)
      trace = pd.read_csv(paths[1])
      self.assertEqual(
          list(trace.columns),
          ['step', 'kind', 'location', 'variance_num', 'variance_den'])
      self.assertEqual(len(trace), len(result.move_log))

  def test_portfolio(self):
    c = catalog_base.sphere_15()
    cfg = anneal.AnnealConfig(max_moves=40)
    best = anneal.anneal_portfolio(c, cfg, [1, 2, 3])
    singles = [
        anneal.anneal_edge_variance(c, cfg.clone(override={'seed': s}))
        for s in [1, 2, 3]
    ]
    self.assertEqual(best.best_variance, min(r.best_variance for r in singles))
    with self.assertRaises(errors.DomainError):
      anneal.anneal_portfolio(c, cfg, [])


if __name__ == '__main__':
  unittest.main()
