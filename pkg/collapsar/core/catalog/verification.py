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
"""Verification suite for contractible non-collapsible 2-complexes."""

from typing import Any

from collapsar.core import collapse
from collapsar.core import complex as complex_lib
from collapsar.core import invariants
from collapsar.core import logging
from collapsar.core import spanning
from collapsar.core.catalog import base
import networkx as nx
import pyglove as pg


# Degree histogram shared by all 8-vertex 18-triangle obstructions.
EXPECTED_DEGREES = {2: 21, 3: 4}


@pg.use_init_args(['name', 'passed', 'detail'])
class Check(pg.Object):
  """One verification check."""

  name: str
  passed: bool
  detail: str = ''


class ObstructionReport(pg.Object):
  """Per-check results of `verify_obstruction`."""

  checks: list[Check] = []

  @property
  def ok(self) -> bool:
    return all(c.passed for c in self.checks)

  def failed(self) -> list[str]:
    return [c.name for c in self.checks if not c.passed]

  def check(self, name: str) -> Check:
    for c in self.checks:
      if c.name == name:
        return c
    raise KeyError(name)


def _as_two_complex(c: Any) -> collapse.TwoComplex:
  if isinstance(c, collapse.TwoComplex):
    return c.compact()
  return collapse.TwoComplex(complex_lib.facet_tuples(c))


def _odd_edges_form_4_cycle(tc: collapse.TwoComplex) -> bool:
  odd = [
      e for e, n, alive in zip(
          tc.incidence.edges, tc.edge_incidence, tc.edge_alive)
      if alive and n == 3
  ]
  g = nx.Graph()
  g.add_edges_from(odd)
  return (len(odd) == 4 and g.number_of_nodes() == 4
          and all(d == 2 for _, d in g.degree()) and nx.is_connected(g))


def verify_obstruction(
    c: Any, orders: int = 1000, base_seed: int = 0) -> ObstructionReport:
  """Checks that a 2-complex behaves like a minimal obstruction.

  Checks Euler characteristic 1, F2 betti numbers (1, 0, 0), failure of the
  greedy collapse under `orders` random removal orders, the degree histogram
  {2: 21, 3: 4} with the degree-3 edges forming one 4-cycle, and the size
  bounds of minimal obstructions.

  Args:
    c: A `TwoComplex`, a catalog entry or a triangle list.
    orders: Number of distinct greedy removal orders to try.
    base_seed: Seed for deriving the removal orders.

  Returns:
    The report.
  """
  tc = _as_two_complex(c)
  checks = []

  chi = tc.euler_characteristic
  checks.append(Check('euler_characteristic', chi == 1, f'chi = {chi}'))

  betti = invariants.f2_homology(tc).betti
  checks.append(Check(
      'f2_homology', list(betti) == [1, 0, 0], f'betti = {tuple(betti)}'))

  collapsed_with = None
  for i in range(orders):
    seed = spanning.mix_seed(base_seed, i)
    if collapse.greedy_collapse(tc, seed, record=False).collapsed_to_point:
      collapsed_with = seed
      break
  checks.append(Check(
      'non_collapsible', collapsed_with is None,
      f'{orders} greedy orders' if collapsed_with is None
      else f'collapses with order seed {collapsed_with}'))

  histogram = dict(sorted(collapse.degree_counts(tc).items()))
  checks.append(Check(
      'degree_histogram', histogram == EXPECTED_DEGREES,
      f'histogram = {histogram}'))
  checks.append(Check(
      'odd_edge_cycle', _odd_edges_form_4_cycle(tc),
      'degree-3 edges form one 4-cycle'))

  bounds = invariants.obstruction_size_bounds(tc)
  checks.append(Check(
      'size_bounds', bounds.could_be_obstruction,
      f'f = ({bounds.f0}, {bounds.f1}, {bounds.f2})'))
  return ObstructionReport(checks=checks)


def verify_catalog(
    orders: int = 1000
) -> list[tuple[base.ObstructionEntry, ObstructionReport]]:
  """Runs `verify_obstruction` on every catalog entry."""
  results = []
  for entry in base.load_catalog():
    report = verify_obstruction(entry, orders=orders)
    if not report.ok:
      logging.warning('catalog entry failed verification', entry=entry.name,
                      failed=','.join(report.failed()))
    results.append((entry, report))
  logging.info('catalog verified', entries=len(results),
               passed=sum(r.ok for _, r in results))
  return results
