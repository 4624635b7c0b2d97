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
"""Collapsing spheres along spanning trees and greedy 2-complex collapses.

Removing one facet from a 3-sphere leaves a ball. Collapsing every other
facet through the triangle of its parent arc in a spanning tree of the dual
graph leaves a 2-complex with n+1 triangles. The sphere "collapses along the
tree" iff that 2-complex collapses to a point, which the greedy procedure
decides:

  kernel = CollapseKernel(sphere)
  kernel.run(seed)   # one Bernoulli trial
"""

import collections
import dataclasses
import itertools
from typing import Iterable, Sequence

from collapsar.core import complex as complex_lib
from collapsar.core import errors
from collapsar.core import spanning
import networkx as nx
import pyglove as pg


Facet = complex_lib.Facet


@dataclasses.dataclass(frozen=True)
class Incidence:
  """Static face incidences of a 2-complex; ids are lexicographic."""

  vertices: tuple[int, ...]
  edges: tuple[Facet, ...]
  triangles: tuple[Facet, ...]
  # Edge ids of each triangle.
  triangle_edges: tuple[tuple[int, int, int], ...]
  # Triangle ids containing each edge.
  edge_triangles: tuple[tuple[int, ...], ...]
  # Vertex ids of each edge.
  edge_vertices: tuple[tuple[int, int], ...]
  # Edge ids containing each vertex.
  vertex_edges: tuple[tuple[int, ...], ...]

  @classmethod
  def build(
      cls,
      triangles: Iterable[Sequence[int]],
      edges: Iterable[Sequence[int]] = (),
  ) -> 'Incidence':
    tris = sorted({tuple(sorted(t)) for t in triangles})
    for t in tris:
      if len(t) != 3 or len(set(t)) != 3:
        raise errors.ValidationError(f'{t} is not a triangle.')
    edge_set = {tuple(sorted(e)) for e in edges}
    for t in tris:
      edge_set.update(itertools.combinations(t, 2))
    edge_list = sorted(edge_set)
    vertex_list = sorted({x for e in edge_list for x in e})
    edge_id = {e: i for i, e in enumerate(edge_list)}
    vertex_id = {v: i for i, v in enumerate(vertex_list)}
    triangle_edges = tuple(
        tuple(edge_id[e] for e in itertools.combinations(t, 2)) for t in tris)
    edge_triangles = [[] for _ in edge_list]
    for i, es in enumerate(triangle_edges):
      for e in es:
        edge_triangles[e].append(i)
    edge_vertices = tuple((vertex_id[a], vertex_id[b]) for a, b in edge_list)
    vertex_edges = [[] for _ in vertex_list]
    for i, (a, b) in enumerate(edge_vertices):
      vertex_edges[a].append(i)
      vertex_edges[b].append(i)
    return cls(
        vertices=tuple(vertex_list),
        edges=tuple(edge_list),
        triangles=tuple(tris),
        triangle_edges=triangle_edges,
        edge_triangles=tuple(tuple(x) for x in edge_triangles),
        edge_vertices=edge_vertices,
        vertex_edges=tuple(tuple(x) for x in vertex_edges),
    )


class TwoComplex:
  """A mutable 2-complex supporting free-face queries and elementary collapses.

  Faces are identified by ids into a shared `Incidence`. Alive flags and
  incidence counts are updated by every collapse:
    * `edge_incidence[e]` is the number of alive triangles containing `e`;
    * `vertex_incidence[v]` is the number of alive edges containing `v`.
  """

  def __init__(
      self,
      triangles: Iterable[Sequence[int]],
      edges: Iterable[Sequence[int]] = (),
  ):
    self._init_state(Incidence.build(triangles, edges), ())

  @classmethod
  def from_incidence(
      cls, incidence: Incidence, removed_triangles: Iterable[int] = ()
  ) -> 'TwoComplex':
    """Creates a complex over shared incidences with some triangles removed."""
    tc = cls.__new__(cls)
    tc._init_state(incidence, removed_triangles)
    return tc

  def _init_state(
      self, incidence: Incidence, removed_triangles: Iterable[int]) -> None:
    self.incidence = incidence
    self.triangle_alive = [True] * len(incidence.triangles)
    self.edge_alive = [True] * len(incidence.edges)
    self.vertex_alive = [True] * len(incidence.vertices)
    self.edge_incidence = [len(ts) for ts in incidence.edge_triangles]
    self.vertex_incidence = [len(es) for es in incidence.vertex_edges]
    self.triangle_count = len(incidence.triangles)
    self.edge_count = len(incidence.edges)
    self.vertex_count = len(incidence.vertices)
    for t in removed_triangles:
      self.remove_triangle(t)

  def copy(self) -> 'TwoComplex':
    tc = TwoComplex.__new__(TwoComplex)
    tc.incidence = self.incidence
    tc.triangle_alive = list(self.triangle_alive)
    tc.edge_alive = list(self.edge_alive)
    tc.vertex_alive = list(self.vertex_alive)
    tc.edge_incidence = list(self.edge_incidence)
    tc.vertex_incidence = list(self.vertex_incidence)
    tc.triangle_count = self.triangle_count
    tc.edge_count = self.edge_count
    tc.vertex_count = self.vertex_count
    return tc

  def compact(self) -> 'TwoComplex':
    """Returns a copy that holds only the alive faces."""
    return TwoComplex(self.alive_triangles(), self.alive_edges())

  #
  # Queries.
  #

  def alive_triangles(self) -> list[Facet]:
    return [t for t, alive in zip(self.incidence.triangles,
                                  self.triangle_alive) if alive]

  def alive_edges(self) -> list[Facet]:
    return [e for e, alive in zip(self.incidence.edges,
                                  self.edge_alive) if alive]

  def alive_vertices(self) -> list[int]:
    return [v for v, alive in zip(self.incidence.vertices,
                                  self.vertex_alive) if alive]

  @property
  def facet_tuples(self) -> tuple[Facet, ...]:
    return tuple(self.alive_triangles())

  @property
  def f_vector(self) -> tuple[int, int, int]:
    return (self.vertex_count, self.edge_count, self.triangle_count)

  @property
  def euler_characteristic(self) -> int:
    return self.vertex_count - self.edge_count + self.triangle_count

  def is_connected(self) -> bool:
    g = nx.Graph()
    g.add_nodes_from(self.alive_vertices())
    g.add_edges_from(self.alive_edges())
    return g.number_of_nodes() > 0 and nx.is_connected(g)

  def edge_id(self, edge: Sequence[int]) -> int:
    return self.incidence.edges.index(tuple(sorted(edge)))

  def free_edge_ids(self) -> set[int]:
    return {
        e for e, (alive, n) in enumerate(
            zip(self.edge_alive, self.edge_incidence)) if alive and n == 1
    }

  def coface_of_edge(self, e: int) -> int:
    """Returns the unique alive triangle containing a free edge."""
    for t in self.incidence.edge_triangles[e]:
      if self.triangle_alive[t]:
        return t
    raise errors.ValidationError(
        f'edge {self.incidence.edges[e]} has no alive triangle.')

  def coface_of_vertex(self, v: int) -> int:
    """Returns the unique alive edge containing a free vertex."""
    for e in self.incidence.vertex_edges[v]:
      if self.edge_alive[e]:
        return e
    raise errors.ValidationError(
        f'vertex {self.incidence.vertices[v]} has no alive edge.')

  #
  # Mutations.
  #

  def remove_triangle(self, t: int) -> None:
    if not self.triangle_alive[t]:
      raise errors.ValidationError(
          f'triangle {self.incidence.triangles[t]} already removed.')
    self.triangle_alive[t] = False
    self.triangle_count -= 1
    for e in self.incidence.triangle_edges[t]:
      self.edge_incidence[e] -= 1

  def collapse_edge(self, e: int) -> int:
    """Removes a free edge with its triangle; returns the triangle id."""
    if not self.edge_alive[e] or self.edge_incidence[e] != 1:
      raise errors.ValidationError(
          f'edge {self.incidence.edges[e]} is not free.')
    t = self.coface_of_edge(e)
    self.remove_triangle(t)
    self._remove_edge(e)
    return t

  def collapse_vertex(self, v: int) -> int:
    """Removes a free vertex with its edge; returns the edge id."""
    if (not self.vertex_alive[v] or self.vertex_incidence[v] != 1):
      raise errors.ValidationError(
          f'vertex {self.incidence.vertices[v]} is not free.')
    e = self.coface_of_vertex(v)
    if self.edge_incidence[e] != 0:
      raise errors.ValidationError(
          f'edge {self.incidence.edges[e]} still lies in a triangle.')
    self._remove_edge(e)
    self.vertex_alive[v] = False
    self.vertex_count -= 1
    return e

  def _remove_edge(self, e: int) -> None:
    self.edge_alive[e] = False
    self.edge_count -= 1
    for v in self.incidence.edge_vertices[e]:
      self.vertex_incidence[v] -= 1

  def check_consistency(self) -> None:
    """Recounts all incidences and raises on any mismatch."""
    inc = self.incidence
    for e, ts in enumerate(inc.edge_triangles):
      expected = sum(1 for t in ts if self.triangle_alive[t])
      if expected != self.edge_incidence[e]:
        raise errors.ValidationError(
            f'edge {inc.edges[e]}: incidence {self.edge_incidence[e]}, '
            f'recount {expected}.')
      if expected and not self.edge_alive[e]:
        raise errors.ValidationError(
            f'removed edge {inc.edges[e]} lies in an alive triangle.')
    for v, es in enumerate(inc.vertex_edges):
      expected = sum(1 for e in es if self.edge_alive[e])
      if expected != self.vertex_incidence[v]:
        raise errors.ValidationError(
            f'vertex {inc.vertices[v]}: incidence '
            f'{self.vertex_incidence[v]}, recount {expected}.')
    if (self.triangle_count != sum(self.triangle_alive)
        or self.edge_count != sum(self.edge_alive)
        or self.vertex_count != sum(self.vertex_alive)):
      raise errors.ValidationError('face counts are out of date.')

  def __repr__(self) -> str:
    return (f'TwoComplex(vertices={self.vertex_count}, '
            f'edges={self.edge_count}, triangles={self.triangle_count})')


@dataclasses.dataclass
class CollapseOutcome:
  """Result of one greedy collapse run."""

  collapsed_to_point: bool
  # What is left; empty when collapsed to a point.
  remainder: TwoComplex
  # (free face, coface) vertex tuples in removal order.
  removal_log: list[tuple[Facet, Facet]]
  # False when the input was not a connected complex with Euler
  # characteristic 1, in which case the answer holds for this run only.
  contract_ok: bool = True

  def removal_log_jsonl(self) -> str:
    """Serializes the removal log as JSON lines."""
    return ''.join(
        pg.to_json_str({'step': i, 'face': list(face), 'coface': list(coface)})
        + '\n'
        for i, (face, coface) in enumerate(self.removal_log)
    )


class _Picker:
  """Candidate pool popped in stack order or uniformly at random."""

  def __init__(self, items: Iterable[int], stream: spanning.UniformStream):
    self._items = list(items)
    self._stream = stream

  def push(self, item: int) -> None:
    self._items.append(item)

  def pop(self) -> int | None:
    if not self._items:
      return None
    if self._stream is not None:
      i = self._stream.below(len(self._items))
      self._items[i], self._items[-1] = self._items[-1], self._items[i]
    return self._items.pop()


def greedy_collapse(
    tc: TwoComplex,
    order_seed: int | None = None,
    *,
    record: bool = True,
    in_place: bool = False,
    debug: bool = False,
) -> CollapseOutcome:
  """Collapses a 2-complex greedily.

  Phase 1 removes (free edge, triangle) pairs until no free edge is left.
  Phase 2 runs only when no triangle is left and removes (free vertex, edge)
  pairs. For connected inputs with Euler characteristic 1 the answer does not
  depend on the removal order.

  Args:
    tc: The complex. It is copied unless `in_place` is set.
    order_seed: Seed for a random removal order. If None, candidates are taken
      in stack order.
    record: Whether to record the removal log and check that the input is
      connected with Euler characteristic 1.
    in_place: Whether to mutate `tc` directly.
    debug: Whether to recount all incidences after every removal.

  Returns:
    The outcome, with the remainder after the last removal.
  """
  contract_ok = True
  if record:
    contract_ok = tc.euler_characteristic == 1 and tc.is_connected()
  if not in_place:
    tc = tc.copy()
  stream = None
  if order_seed is not None:
    stream = spanning.UniformStream(spanning.make_rng(order_seed))

  inc = tc.incidence
  log = []
  edge_incidence = tc.edge_incidence
  edge_alive = tc.edge_alive
  picker = _Picker(sorted(tc.free_edge_ids(), reverse=True), stream)
  while (e := picker.pop()) is not None:
    if not edge_alive[e] or edge_incidence[e] != 1:
      continue
    t = tc.collapse_edge(e)
    for other in inc.triangle_edges[t]:
      if edge_incidence[other] == 1 and edge_alive[other]:
        picker.push(other)
    if record:
      log.append((inc.edges[e], inc.triangles[t]))
    if debug:
      tc.check_consistency()

  if tc.triangle_count == 0:
    vertex_incidence = tc.vertex_incidence
    picker = _Picker(
        [v for v in range(len(inc.vertices) - 1, -1, -1)
         if tc.vertex_alive[v] and vertex_incidence[v] == 1], stream)
    while (v := picker.pop()) is not None:
      if not tc.vertex_alive[v] or vertex_incidence[v] != 1:
        continue
      e = tc.collapse_vertex(v)
      (a, b) = inc.edge_vertices[e]
      other = b if a == v else a
      if vertex_incidence[other] == 1:
        picker.push(other)
      if record:
        log.append(((inc.vertices[v],), inc.edges[e]))
      if debug:
        tc.check_consistency()

  collapsed = (
      tc.triangle_count == 0 and tc.edge_count == 0 and tc.vertex_count == 1)
  return CollapseOutcome(
      collapsed_to_point=collapsed,
      remainder=tc,
      removal_log=log,
      contract_ok=contract_ok,
  )


def free_edges(tc: TwoComplex) -> set[int]:
  """Ids of alive edges contained in exactly one alive triangle."""
  return tc.free_edge_ids()


def replay_removal_log(
    tc: TwoComplex, log: Iterable[tuple[Sequence[int], Sequence[int]]]
) -> TwoComplex:
  """Re-executes a removal log on a copy, checking every removed face was free.

  Args:
    tc: The starting complex.
    log: (face, coface) pairs as vertex tuples.

  Returns:
    The complex after the last removal.

  Raises:
    ValidationError: If a face is not free or its coface does not match.
  """
  tc = tc.copy()
  inc = tc.incidence
  for step, (face, coface) in enumerate(log):
    face, coface = tuple(sorted(face)), tuple(sorted(coface))
    try:
      if len(face) == 2:
        t = tc.collapse_edge(inc.edges.index(face))
        removed = inc.triangles[t]
      elif len(face) == 1:
        e = tc.collapse_vertex(inc.vertices.index(face[0]))
        removed = inc.edges[e]
      else:
        raise errors.ValidationError(f'unsupported face {face}.')
    except ValueError as e:
      raise errors.ValidationError(
          f'step {step}: face {face} is not in the complex.', cause=e) from e
    if removed != coface:
      raise errors.ValidationError(
          f'step {step}: free face {face} lies in {removed}, not {coface}.')
  return tc


class CollapseKernel:
  """Per-complex state shared by all trials on one closed 3-manifold.

  Holds the dual graph and the incidences of the 2-skeleton. Triangle `i` of
  the 2-skeleton is arc `i` of the dual graph, and edge ids follow
  `edge_table` order.
  """

  def __init__(
      self, c: complex_lib.Complex3, validate: bool = True,
      debug: bool = False):
    if validate:
      complex_lib.is_closed_3_manifold(c).raise_if_failed()
    self.complex = c
    self.graph = complex_lib.dual_graph(c)
    if validate and self.graph.component_count() != 1:
      raise errors.DisconnectedError(self.graph.component_count())
    self.incidence = Incidence.build(c.triangles, c.edges)
    self._base_edge_incidence = [
        len(ts) for ts in self.incidence.edge_triangles]
    self.debug = debug

  def sample_parents(self, rng_seed: int) -> tuple[int, list[int]]:
    stream = spanning.UniformStream(spanning.make_rng(rng_seed))
    return spanning.wilson_parents(self.graph, stream)

  def two_complex(self, tree_arcs: Iterable[int]) -> TwoComplex:
    return TwoComplex.from_incidence(
        self.incidence, (a for a in tree_arcs if a >= 0))

  def free_edge_ids(self, tree_arcs: Iterable[int]) -> list[int]:
    """Free edges right after collapsing the 3-cells along the tree."""
    counts = list(self._base_edge_incidence)
    for a in tree_arcs:
      if a >= 0:
        for e in self.incidence.triangle_edges[a]:
          counts[e] -= 1
    return [e for e, n in enumerate(counts) if n == 1]

  def collapses(self, tree_arcs: Iterable[int]) -> bool:
    tc = self.two_complex(tree_arcs)
    return greedy_collapse(
        tc, record=False, in_place=True, debug=self.debug).collapsed_to_point

  def run(self, rng_seed: int) -> bool:
    """One Bernoulli trial: sample, collapse the 3-cells, then greedy."""
    _, parent_arc = self.sample_parents(rng_seed)
    return self.collapses(parent_arc)


def collapse_along_tree(
    c: complex_lib.Complex3,
    t: spanning.SpanningTree,
    removed_facet: int | None = None,
) -> TwoComplex:
  """Collapses all 3-cells of a sphere along a spanning tree of its dual graph.

  The root facet (or `removed_facet`, which reroots the tree) is removed
  first. Each other facet then goes through the triangle of its parent arc.

  Args:
    c: A closed 3-manifold triangulation.
    t: A spanning tree of `dual_graph(c)`.
    removed_facet: Optional facet to remove first.

  Returns:
    The 2-complex of the remaining n+1 triangles and the full 1-skeleton.

  Raises:
    TreeMismatchError: If `t` is not a spanning tree of the dual graph.
  """
  g = complex_lib.dual_graph(c)
  if t.node_count != g.node_count:
    raise errors.TreeMismatchError(
        f'tree has {t.node_count} nodes, dual graph has {g.node_count}.')
  t.validate(g)
  if removed_facet is not None:
    t = t.reroot(removed_facet)
  return TwoComplex.from_incidence(
      Incidence.build(c.triangles, c.edges), t.arcs)


def tree_collapse_sequence(
    c: complex_lib.Complex3, t: spanning.SpanningTree
) -> list[tuple[Facet, Facet]]:
  """Returns the (free triangle, tetrahedron) pairs of the 3-cell collapse.

  Facets are listed root outwards, so the parent triangle of each facet is
  free when that facet is removed.
  """
  triangles = c.triangles
  facets = c.facet_tuples
  return [
      (triangles[t.parent_arc[node]], facets[node])
      for node in t.breadth_first_order() if node != t.root
  ]


def trial(c: complex_lib.Complex3, rng_seed: int) -> bool:
  """One Bernoulli draw: whether the sphere collapses along a random tree."""
  return CollapseKernel(c).run(rng_seed)


def degree_counts(tc: TwoComplex) -> collections.Counter[int]:
  """Histogram of alive-triangle counts over alive edges."""
  return collections.Counter(
      n for n, alive in zip(tc.edge_incidence, tc.edge_alive) if alive)
