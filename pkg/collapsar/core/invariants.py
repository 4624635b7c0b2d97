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
"""Combinatorial and homological invariants.

All values are exact integers or fractions. Homology is computed with
coefficients in the field with two elements and only ever yields necessary
conditions for contractibility.
"""

import collections
import fractions
import itertools
import math
from typing import Annotated, Any, Mapping

from collapsar.core import collapse
from collapsar.core import complex as complex_lib
from collapsar.core import errors
from collapsar.core import text_formatting
import pyglove as pg
import sympy
from sympy.polys.matrices import DomainMatrix


Fraction = fractions.Fraction


class VarianceReport(pg.Object):
  """Edge-degree statistics of a 3-manifold triangulation."""

  average_degree: Annotated[Fraction, 'Mean edge degree 6n/f1.']
  variance: Annotated[
      Fraction, 'Mean squared deviation of edge degrees from the average.']
  degree_counts: Annotated[
      list[tuple[int, int]], '(degree, number of edges), sorted by degree.']

  @property
  def histogram(self) -> dict[int, int]:
    return {d: n for d, n in self.degree_counts}

  @property
  def edge_count(self) -> int:
    return sum(n for _, n in self.degree_counts)

  def to_json(self) -> dict[str, Any]:
    return {
        'variance': {
            'numerator': self.variance.numerator,
            'denominator': self.variance.denominator,
            'decimal': text_formatting.decimal_str(self.variance),
        },
        'average_degree': {
            'numerator': self.average_degree.numerator,
            'denominator': self.average_degree.denominator,
            'decimal': text_formatting.decimal_str(self.average_degree),
        },
        'histogram': {str(d): n for d, n in self.degree_counts},
    }


class F2Homology(pg.Object):
  """Betti numbers over the field with two elements."""

  betti: list[int]

  @property
  def euler_characteristic(self) -> int:
    return sum((-1) ** k * b for k, b in enumerate(self.betti))

  @property
  def is_acyclic(self) -> bool:
    """Whether reduced homology vanishes."""
    return (bool(self.betti) and self.betti[0] == 1
            and not any(self.betti[1:]))


class ObstructionBounds(pg.Object):
  """Size conditions met by minimal contractible non-collapsible complexes."""

  f0: int
  f1: int
  f2: int

  @property
  def edge_bound_ok(self) -> bool:
    """f2 >= (2/3) f1 + 1."""
    return 3 * self.f2 >= 2 * self.f1 + 3

  @property
  def vertex_bound_ok(self) -> bool:
    """f2 >= 2 f0 + 1."""
    return self.f2 >= 2 * self.f0 + 1

  @property
  def minimum_size_ok(self) -> bool:
    """At least 8 vertices and 17 triangles."""
    return self.f0 >= 8 and self.f2 >= 17

  @property
  def could_be_obstruction(self) -> bool:
    return self.edge_bound_ok and self.vertex_bound_ok and self.minimum_size_ok


class ContractibilityCheck(pg.Object):
  """Homological necessary conditions for contractibility."""

  euler_characteristic: int
  betti: list[int]

  @property
  def consistent(self) -> bool:
    return (self.euler_characteristic == 1 and bool(self.betti)
            and self.betti[0] == 1 and not any(self.betti[1:]))

  def describe(self) -> str:
    if self.consistent:
      return 'consistent with contractible'
    return (f'not contractible (euler characteristic '
            f'{self.euler_characteristic}, F2 betti {tuple(self.betti)})')


def faces_by_dimension(c: Any) -> list[list[complex_lib.Facet]]:
  """All faces of a complex, grouped by dimension and sorted."""
  if isinstance(c, collapse.TwoComplex):
    return [[(v,) for v in c.alive_vertices()], c.alive_edges(),
            c.alive_triangles()]
  if isinstance(c, complex_lib.Complex3):
    return [c.skeleton(k) for k in range(4)]
  facets = complex_lib.facet_tuples(c)
  top = max(len(f) for f in facets)
  faces = [set() for _ in range(top)]
  for f in facets:
    for k in range(len(f)):
      faces[k].update(itertools.combinations(f, k + 1))
  return [sorted(s) for s in faces]


def f_vector_of(c: Any) -> tuple[int, ...]:
  """Face counts by dimension of any complex."""
  return tuple(len(fs) for fs in faces_by_dimension(c))


def euler_characteristic(c: Any) -> int:
  """Alternating sum of the f-vector."""
  return sum((-1) ** k * n for k, n in enumerate(f_vector_of(c)))


def _gf2_rank(
    rows: list[complex_lib.Facet], cols: list[complex_lib.Facet]) -> int:
  """Rank over GF(2) of the boundary map from `cols` faces to `rows` faces."""
  if not rows or not cols:
    return 0
  row_index = {f: i for i, f in enumerate(rows)}
  matrix = [[0] * len(cols) for _ in rows]
  for j, face in enumerate(cols):
    for sub in itertools.combinations(face, len(face) - 1):
      matrix[row_index[sub]][j] = 1
  dm = DomainMatrix(
      [[sympy.ZZ(x) for x in row] for row in matrix],
      (len(rows), len(cols)), sympy.ZZ,
  ).convert_to(sympy.GF(2))
  return int(dm.rank())


def f2_homology(c: Any) -> F2Homology:
  """Betti numbers with F2 coefficients from boundary-matrix ranks."""
  faces = faces_by_dimension(c)
  ranks = [0] + [
      _gf2_rank(faces[k - 1], faces[k]) for k in range(1, len(faces))
  ] + [0]
  betti = [
      len(faces[k]) - ranks[k] - ranks[k + 1] for k in range(len(faces))
  ]
  return F2Homology(betti=betti)


def degree_histogram(c: complex_lib.Complex3) -> dict[int, int]:
  """Number of edges per tetrahedron-incidence degree."""
  counts = collections.Counter(complex_lib.edge_table(c).degrees)
  return dict(sorted(counts.items()))


def variance_from_histogram(histogram: Mapping[int, int]) -> Fraction:
  """Variance of a degree distribution given as degree -> count."""
  total = sum(histogram.values())
  if total == 0:
    raise errors.DomainError('histogram is empty.')
  mean = Fraction(sum(d * n for d, n in histogram.items()), total)
  second = Fraction(sum(d * d * n for d, n in histogram.items()), total)
  return second - mean * mean


def average_edge_degree(c: complex_lib.Complex3) -> Fraction:
  """Average number of tetrahedra per edge, 6n/f1."""
  return Fraction(6 * c.facet_count, len(c.edges))


def edge_variance(c: complex_lib.Complex3) -> VarianceReport:
  """Computes the edge variance with its degree histogram."""
  histogram = degree_histogram(c)
  return VarianceReport(
      average_degree=average_edge_degree(c),
      variance=variance_from_histogram(histogram),
      degree_counts=list(histogram.items()),
  )


def is_k_neighbourly(c: complex_lib.Complex3, k: int) -> bool:
  """Whether every k-subset of vertices spans a face (k in {2, 3})."""
  if k not in (2, 3):
    raise errors.DomainError(f'k must be 2 or 3, got {k}.')
  return len(c.skeleton(k - 1)) == math.comb(c.vertex_count, k)


def obstruction_size_bounds(c: Any) -> ObstructionBounds:
  """Evaluates the size inequalities of minimal obstructions on a 2-complex."""
  counts = f_vector_of(c) + (0, 0, 0)
  return ObstructionBounds(f0=counts[0], f1=counts[1], f2=counts[2])


def is_consistent_with_contractible(c: Any) -> ContractibilityCheck:
  """Checks Euler characteristic 1 and trivial reduced F2 homology."""
  return ContractibilityCheck(
      euler_characteristic=euler_characteristic(c),
      betti=f2_homology(c).betti,
  )


def is_certified_extendably_collapsible(c: complex_lib.Complex3) -> bool:
  """Whether size alone certifies every ball obtained from the sphere.

  Spheres with fewer than 8 vertices or fewer than 16 facets cannot contain a
  contractible non-collapsible 2-complex after removing a facet.
  """
  return c.vertex_count < 8 or c.facet_count < 16
