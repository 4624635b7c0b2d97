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
"""Searching sphere 2-skeleta for embedded obstruction complexes."""

import collections
import itertools
from typing import Annotated, Any, Iterator, Sequence

from collapsar.core import complex as complex_lib
from collapsar.core import component
from collapsar.core import concurrent
from collapsar.core import invariants
from collapsar.core import logging
from collapsar.core.catalog import base
import pyglove as pg


Facet = complex_lib.Facet


class EmbeddingResult(pg.Object):
  """Outcome of an embedding search."""

  found: bool
  vertex_map: Annotated[
      list[tuple[int, int]],
      '(pattern vertex, host vertex) pairs of the first embedding found.'
  ] = []
  all_maps: Annotated[
      list[list[tuple[int, int]]],
      'Every embedding, when the search enumerated all of them.'
  ] = []

  @property
  def mapping(self) -> dict[int, int]:
    return dict(self.vertex_map)

  def to_json(self, entry: str | None = None) -> dict[str, Any]:
    result = {}
    if entry is not None:
      result['entry'] = entry
    result['found'] = self.found
    result['map'] = {str(p): h for p, h in self.vertex_map}
    return result


def _host_faces(host: Any) -> tuple[list[Facet], list[Facet]]:
  """Returns (edges, triangles) of the host's 2-skeleton."""
  if isinstance(host, complex_lib.Complex3):
    return host.edges, host.triangles
  faces = invariants.faces_by_dimension(host)
  return faces[1], faces[2]


def _pattern_order(
    vertices: Sequence[int], adjacency: dict[int, set[int]]) -> list[int]:
  """Orders pattern vertices so each one is joined to as many earlier ones."""
  order = []
  remaining = set(vertices)
  while remaining:
    placed = set(order)
    v = max(
        remaining,
        key=lambda x: (len(adjacency[x] & placed), len(adjacency[x]), -x))
    order.append(v)
    remaining.remove(v)
  return order


def iter_embeddings(pattern: Any, host: Any) -> Iterator[dict[int, int]]:
  """Yields injective vertex maps sending pattern triangles to host triangles.

  Pattern vertices are assigned in an order that keeps them adjacent to
  already assigned ones. A candidate must be adjacent in the host to the
  images of assigned neighbours, must have at least the pattern vertex's
  degree, and every pattern triangle completed by the assignment must be a
  host triangle.
  """
  pattern_triangles = complex_lib.facet_tuples(pattern)
  host_edges, host_triangles = _host_faces(host)
  host_triangle_set = set(host_triangles)

  pattern_adj = collections.defaultdict(set)
  for t in pattern_triangles:
    for a, b in itertools.combinations(t, 2):
      pattern_adj[a].add(b)
      pattern_adj[b].add(a)
  host_adj = collections.defaultdict(set)
  for a, b in host_edges:
    host_adj[a].add(b)
    host_adj[b].add(a)
  host_vertices = sorted(host_adj)
  pattern_vertices = sorted(pattern_adj)
  if len(pattern_vertices) > len(host_vertices):
    return

  order = _pattern_order(pattern_vertices, pattern_adj)
  position = {v: i for i, v in enumerate(order)}
  # Triangles to check once the vertex at each position is assigned.
  closing = [[] for _ in order]
  for t in pattern_triangles:
    closing[max(position[x] for x in t)].append(t)
  # Already assigned neighbours at each position.
  earlier = [
      [u for u in pattern_adj[v] if position[u] < i]
      for i, v in enumerate(order)
  ]

  mapping = {}
  used = set()

  def candidates(i: int) -> list[int]:
    v = order[i]
    if earlier[i]:
      pool = set.intersection(*(host_adj[mapping[u]] for u in earlier[i]))
    else:
      pool = host_vertices
    need = len(pattern_adj[v])
    return sorted(h for h in pool if h not in used and len(host_adj[h]) >= need)

  def extend(i: int) -> Iterator[dict[int, int]]:
    if i == len(order):
      yield dict(sorted(mapping.items()))
      return
    v = order[i]
    for h in candidates(i):
      mapping[v] = h
      if all(tuple(sorted(mapping[x] for x in t)) in host_triangle_set
             for t in closing[i]):
        used.add(h)
        yield from extend(i + 1)
        used.discard(h)
      del mapping[v]

  yield from extend(0)


def find_embedding(
    pattern: Any, host: Any, *, find_all: bool = False) -> EmbeddingResult:
  """Finds a copy of a 2-complex inside the 2-skeleton of a host complex.

  Args:
    pattern: A `TwoComplex`, catalog entry or triangle list.
    host: A `Complex3` or any pure complex.
    find_all: Whether to enumerate every embedding.

  Returns:
    The first embedding in deterministic order, plus all of them when
    `find_all` is set.
  """
  maps = []
  for m in iter_embeddings(pattern, host):
    maps.append(sorted(m.items()))
    if not find_all:
      break
  return EmbeddingResult(
      found=bool(maps),
      vertex_map=maps[0] if maps else [],
      all_maps=maps if find_all else [],
  )


class ObstructionScan(component.Component):
  """Runs embedding searches for catalog entries on a worker pool."""

  max_workers: Annotated[
      int, 'Number of worker threads.'] = component.contextual(default=1)
  show_progress: Annotated[
      bool, 'Whether to show a progress bar.'
  ] = component.contextual(default=False)

  def __call__(
      self,
      host: complex_lib.Complex3,
      entries: Sequence[base.ObstructionEntry] | None = None,
  ) -> list[tuple[str, EmbeddingResult]]:
    entries = list(base.load_catalog() if entries is None else entries)
    results = {}
    for entry, result, _ in concurrent.concurrent_map(
        lambda e: find_embedding(e, host),
        entries,
        max_workers=self.max_workers,
        show_progress=self.show_progress,
        label='Catalog scan',
        silence_on_errors=None,
    ):
      results[entry.name] = result
    return [(e.name, results[e.name]) for e in entries]


def scan_for_obstructions(
    host: complex_lib.Complex3,
    entries: Sequence[base.ObstructionEntry] | None = None,
) -> list[tuple[str, EmbeddingResult]]:
  """Searches the host's 2-skeleton for every catalog entry, in order."""
  results = ObstructionScan()(host, entries)
  hits = [name for name, r in results if r.found]
  logging.info('catalog scan done', entries=len(results), hits=len(hits))
  return results


def scan_verdict(
    host: complex_lib.Complex3,
    results: Sequence[tuple[str, EmbeddingResult]]) -> str:
  """Summarizes a scan without claiming more than the catalog covers.

  Only the size criterion certifies extendable collapsibility; the catalog
  lacks the 17-triangle dunce hats, so an empty scan does not.
  """
  if invariants.is_certified_extendably_collapsible(host):
    return ('certified extendably collapsible: fewer than 8 vertices or '
            'fewer than 16 facets')
  hits = [name for name, r in results if r.found]
  if hits:
    return (f'contains {len(hits)} 18-triangle obstruction(s); extendable '
            'collapsibility not certified')
  return 'no 18-triangle obstruction found; not certified'
