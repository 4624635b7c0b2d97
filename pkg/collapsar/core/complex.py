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
"""Pure 3-dimensional simplicial complexes given by facet lists.

A `Complex3` is an ordered list of tetrahedra over the vertex labels 1..v.
Everything else (skeleta, f-vector, edge degrees, the dual graph) is derived
and cached on first access:

  sphere = collapsar.parse_facets(open('sphere.facets').read())
  sphere.f_vector            # FVector(f0=15, f1=105, f2=180, f3=90)
  collapsar.dual_graph(sphere).node_count   # 90

Edges and triangles are indexed lexicographically by their sorted vertex
tuples, so indices are stable across runs.
"""

import collections
import dataclasses
import functools
import itertools
import json
from typing import Annotated, Any, Iterable, Mapping, Sequence

from collapsar.core import component
from collapsar.core import errors
import networkx as nx
import pyglove as pg


Facet = tuple[int, ...]


def facet_tuples(value: Any) -> tuple[Facet, ...]:
  """Returns sorted facet tuples of a complex or a raw facet sequence."""
  facets = getattr(value, 'facet_tuples', None)
  if facets is not None:
    return facets
  return tuple(tuple(sorted(f)) for f in value)


def read_facet_list(text: str, arity: int = 4) -> list[Facet]:
  """Reads facets of a fixed arity from text or JSON, keeping input labels.

  Args:
    text: A facet-list document. Either one facet per line with whitespace
      separated positive integers (blank lines and `#` comments ignored), or
      JSON of form `{"facets": [[a, b, c, d], ...]}`.
    arity: Number of vertices per facet.

  Returns:
    Facets in input order, each as a tuple in input vertex order.

  Raises:
    ParseError: If the document is malformed.
  """
  stripped = text.strip()
  if stripped.startswith('{'):
    return _read_json_facets(stripped, arity)

  facets = []
  for line_no, line in enumerate(text.splitlines(), start=1):
    content = line.strip()
    if not content or content.startswith('#'):
      continue
    tokens = content.split()
    try:
      facet = tuple(int(t) for t in tokens)
    except ValueError as e:
      raise errors.ParseError(
          'non-integer token', line=line_no, text=line) from e
    _check_facet(facet, arity, line_no, line)
    facets.append(facet)
  if not facets:
    raise errors.ParseError('no facets found')
  return facets


def _read_json_facets(text: str, arity: int) -> list[Facet]:
  try:
    doc = json.loads(text)
  except json.JSONDecodeError as e:
    raise errors.ParseError(f'invalid JSON: {e.msg}', line=e.lineno) from e
  if not isinstance(doc, dict) or not isinstance(doc.get('facets'), list):
    raise errors.ParseError('JSON input must be an object with "facets".')
  facets = []
  for i, item in enumerate(doc['facets']):
    if not isinstance(item, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in item):
      raise errors.ParseError(
          f'facet #{i} is not a list of integers', text=repr(item))
    facet = tuple(item)
    _check_facet(facet, arity, None, repr(item))
    facets.append(facet)
  if not facets:
    raise errors.ParseError('no facets found')
  return facets


def _check_facet(
    facet: Facet, arity: int, line_no: int | None, text: str) -> None:
  if len(facet) != arity:
    raise errors.ParseError(
        f'expected {arity} vertices, got {len(facet)}', line=line_no,
        text=text)
  if len(set(facet)) != arity:
    raise errors.ParseError('repeated vertex', line=line_no, text=text)
  if any(x < 1 for x in facet):
    raise errors.ParseError(
        'vertex labels must be positive', line=line_no, text=text)


def normalize_labels(facets: Iterable[Sequence[int]]) -> list[Facet]:
  """Relabels vertices to 1..v by order of first appearance."""
  mapping = {}
  result = []
  for f in facets:
    for x in f:
      if x not in mapping:
        mapping[x] = len(mapping) + 1
    result.append(tuple(sorted(mapping[x] for x in f)))
  return result


@pg.use_init_args(['f0', 'f1', 'f2', 'f3'])
class FVector(pg.Object):
  """Face counts by dimension."""

  f0: int
  f1: int
  f2: int
  f3: int

  @property
  def euler_characteristic(self) -> int:
    return self.f0 - self.f1 + self.f2 - self.f3

  def to_tuple(self) -> tuple[int, int, int, int]:
    return (self.f0, self.f1, self.f2, self.f3)


class EdgeTable(pg.Object):
  """Edges of the 1-skeleton with their tetrahedron-incidence degrees."""

  edges: Annotated[
      list[tuple[int, int]], 'Edges as sorted vertex pairs, lexicographic.'
  ]
  degrees: Annotated[
      list[int], 'Number of tetrahedra containing each edge.'
  ]

  @functools.cached_property
  def _index(self) -> dict[tuple[int, int], int]:
    return {tuple(e): i for i, e in enumerate(self.edges)}

  def __len__(self) -> int:
    return len(self.edges)

  def index(self, edge: Sequence[int]) -> int:
    """Returns the id of an edge given by its two vertices."""
    return self._index[tuple(sorted(edge))]

  def degree_of(self, edge: Sequence[int]) -> int:
    return self.degrees[self.index(edge)]

  @property
  def degree_sum(self) -> int:
    return sum(self.degrees)


@dataclasses.dataclass(frozen=True)
class DualGraph:
  """Face-pairing graph: one node per facet, one arc per shared triangle.

  Parallel arcs are kept, so the graph is a multigraph. For a dual graph built
  from a complex, arc `i` is the `i`-th triangle in lexicographic order.
  """

  node_count: int
  # (node, node, triangle id) with the first node smaller.
  arcs: tuple[tuple[int, int, int], ...]
  # Arc ids incident to each node.
  adjacency: tuple[tuple[int, ...], ...]
  # Triangle vertex tuples by triangle id; empty for abstract graphs.
  triangles: tuple[Facet, ...] = ()

  @classmethod
  def from_arcs(
      cls, node_count: int, arcs: Iterable[tuple[int, int]]) -> 'DualGraph':
    """Builds an abstract multigraph, using arc indices as triangle ids."""
    indexed = tuple(
        (min(u, v), max(u, v), i) for i, (u, v) in enumerate(arcs))
    adjacency = [[] for _ in range(node_count)]
    for u, v, i in indexed:
      if not (0 <= u < node_count and 0 <= v < node_count) or u == v:
        raise errors.ValidationError(f'invalid arc ({u}, {v}).')
      adjacency[u].append(i)
      adjacency[v].append(i)
    return cls(node_count, indexed, tuple(tuple(a) for a in adjacency))

  @property
  def arc_count(self) -> int:
    return len(self.arcs)

  def other_end(self, arc: int, node: int) -> int:
    u, v, _ = self.arcs[arc]
    return v if u == node else u

  def degree(self, node: int) -> int:
    return len(self.adjacency[node])

  @functools.cached_property
  def neighbors(self) -> tuple[tuple[tuple[int, int], ...], ...]:
    """(arc, other node) pairs per node, in adjacency order."""
    return tuple(
        tuple((a, self.other_end(a, u)) for a in arcs)
        for u, arcs in enumerate(self.adjacency)
    )

  def to_networkx(self) -> nx.MultiGraph:
    """Returns a `networkx.MultiGraph` with `arc`/`triangle` edge data."""
    g = nx.MultiGraph()
    g.add_nodes_from(range(self.node_count))
    for i, (u, v, t) in enumerate(self.arcs):
      g.add_edge(
          u, v, key=i, arc=i,
          triangle=self.triangles[t] if self.triangles else t)
    return g

  def component_count(self) -> int:
    if self.node_count == 0:
      return 0
    return nx.number_connected_components(self.to_networkx())


@pg.use_init_args(['facets'])
class Complex3(pg.Object):
  """A pure 3-dimensional simplicial complex given by its facets.

  Vertex labels must be the contiguous range 1..v. Use `from_facets` or
  `parse_facets` for inputs with arbitrary labels.
  """

  facets: Annotated[
      list[tuple[int, ...]],
      'Tetrahedra as 4-tuples of vertex labels, in input order.'
  ]

  def _on_bound(self):
    super()._on_bound()
    seen = set()
    labels = set()
    for i, f in enumerate(self.facets):
      t = tuple(sorted(f))
      if len(t) != 4 or len(set(t)) != 4:
        raise errors.ValidationError(
            f'facet #{i} {tuple(f)} does not have 4 distinct vertices.')
      if t in seen:
        raise errors.ValidationError(f'duplicate facet {t}.')
      seen.add(t)
      labels.update(t)
    if not labels:
      raise errors.ValidationError('a complex needs at least one facet.')
    if labels != set(range(1, len(labels) + 1)):
      raise errors.ValidationError(
          f'vertex labels must be 1..{len(labels)}; '
          'use `Complex3.from_facets` to normalize them.')

  @classmethod
  def from_facets(cls, facets: Iterable[Sequence[int]]) -> 'Complex3':
    """Builds a complex, relabeling vertices by order of first appearance."""
    return cls(normalize_labels(facets))

  @functools.cached_property
  def facet_tuples(self) -> tuple[Facet, ...]:
    return tuple(tuple(sorted(f)) for f in self.facets)

  @functools.cached_property
  def vertex_count(self) -> int:
    return max(max(f) for f in self.facet_tuples)

  @property
  def facet_count(self) -> int:
    return len(self.facet_tuples)

  def skeleton(self, k: int) -> list[Facet]:
    """Returns the k-faces, sorted lexicographically."""
    if not 0 <= k <= 3:
      raise errors.DomainError(f'skeleton dimension must be 0..3, got {k}.')
    return self._faces[k]

  @functools.cached_property
  def _faces(self) -> tuple[list[Facet], ...]:
    faces = []
    for k in range(4):
      s = set()
      for f in self.facet_tuples:
        s.update(itertools.combinations(f, k + 1))
      faces.append(sorted(s))
    return tuple(faces)

  @property
  def vertices(self) -> list[int]:
    return list(range(1, self.vertex_count + 1))

  @property
  def edges(self) -> list[Facet]:
    return self._faces[1]

  @property
  def triangles(self) -> list[Facet]:
    return self._faces[2]

  @functools.cached_property
  def triangle_index(self) -> dict[Facet, int]:
    return {t: i for i, t in enumerate(self.triangles)}

  @functools.cached_property
  def edge_index(self) -> dict[Facet, int]:
    return {e: i for i, e in enumerate(self.edges)}

  @functools.cached_property
  def vertex_degrees(self) -> dict[int, int]:
    """Number of facets containing each vertex."""
    counts = collections.Counter(x for f in self.facet_tuples for x in f)
    return {v: counts[v] for v in self.vertices}

  @functools.cached_property
  def f_vector(self) -> FVector:
    return FVector(*(len(self._faces[k]) for k in range(4)))


def parse_facets(text: str) -> Complex3:
  """Parses a facet-list document (text or JSON) into a normalized complex.

  Args:
    text: The document.

  Returns:
    A `Complex3` with labels 1..v assigned by order of first appearance.

  Raises:
    ParseError: Malformed line, with the line number.
    ValidationError: Duplicate facet.
  """
  facets = read_facet_list(text, arity=4)
  seen = {}
  for i, f in enumerate(facets):
    key = frozenset(f)
    if key in seen:
      raise errors.ValidationError(
          f'duplicate facet {tuple(sorted(f))} '
          f'(facets #{seen[key]} and #{i}).')
    seen[key] = i
  return Complex3.from_facets(facets)


def read_text(path: str) -> str:
  """Reads a UTF-8 file, raising `ParseError` on undecodable bytes."""
  data = pg.io.readfile(path, mode='rb')
  try:
    return data.decode('utf-8')
  except UnicodeDecodeError as e:
    raise errors.ParseError(
        f'invalid UTF-8 at byte {e.start}',
        line=data[:e.start].count(b'\n') + 1,
    ) from e


def load_complex(path: str) -> Complex3:
  """Loads a complex from a text or JSON facet-list file."""
  return parse_facets(read_text(path))


def serialize_facets(c: Complex3, format: str = 'text') -> str:  # pylint: disable=redefined-builtin
  """Serializes a complex as facet-list text or JSON."""
  if format == 'text':
    return ''.join(' '.join(str(x) for x in f) + '\n' for f in c.facet_tuples)
  elif format == 'json':
    return pg.to_json_str({'facets': [list(f) for f in c.facet_tuples]})
  raise errors.DomainError(
      f'unknown facet format {format!r}, expected "text" or "json".')


def boundary_of_simplex(d: int) -> list[Facet]:
  """Returns the facets of the boundary of the (d+1)-simplex."""
  if d < 0:
    raise errors.DomainError(f'dimension must be non-negative, got {d}.')
  return list(itertools.combinations(range(1, d + 3), d + 1))


def f_vector(c: Complex3) -> FVector:
  """Returns the numbers of vertices, edges, triangles and tetrahedra."""
  return c.f_vector


def edge_table(c: Complex3) -> EdgeTable:
  """Returns every edge with the number of tetrahedra containing it."""
  degrees = [0] * len(c.edges)
  index = c.edge_index
  for f in c.facet_tuples:
    for e in itertools.combinations(f, 2):
      degrees[index[e]] += 1
  return EdgeTable(edges=c.edges, degrees=degrees)


def triangle_facets(c: Complex3) -> list[list[int]]:
  """Returns the ids of facets containing each triangle."""
  result = [[] for _ in c.triangles]
  index = c.triangle_index
  for i, f in enumerate(c.facet_tuples):
    for t in itertools.combinations(f, 3):
      result[index[t]].append(i)
  return result


def dual_graph(c: Complex3) -> DualGraph:
  """Builds the face-pairing graph of a closed 3-manifold triangulation.

  Args:
    c: The complex.

  Returns:
    The dual graph, with arc `i` corresponding to triangle `i`.

  Raises:
    NotClosedError: If a triangle is not contained in exactly two facets.
  """
  arcs = []
  adjacency = [[] for _ in range(c.facet_count)]
  for t, owners in enumerate(triangle_facets(c)):
    if len(owners) != 2:
      raise errors.NotClosedError(c.triangles[t], len(owners))
    u, v = owners
    arcs.append((u, v, t))
    adjacency[u].append(t)
    adjacency[v].append(t)
  return DualGraph(
      node_count=c.facet_count,
      arcs=tuple(arcs),
      adjacency=tuple(tuple(a) for a in adjacency),
      triangles=tuple(c.triangles),
  )


class ManifoldReport(pg.Object):
  """Outcome of the closed 3-manifold checks."""

  triangles_ok: Annotated[
      bool, 'Every triangle lies in exactly two facets.'] = True
  edge_links_ok: Annotated[bool, 'Every edge link is a single cycle.'] = True
  vertex_links_ok: Annotated[
      bool, 'Every vertex link is a connected closed surface with chi 2.'
  ] = True
  component_count: int = 1
  failures: Annotated[
      list[str], 'Human readable failures, first failing face first.'] = []

  @property
  def links_ok(self) -> bool:
    return self.triangles_ok and self.edge_links_ok and self.vertex_links_ok

  @property
  def connected(self) -> bool:
    return self.component_count == 1

  @property
  def ok(self) -> bool:
    return self.links_ok and self.connected

  @property
  def first_failure(self) -> str | None:
    return self.failures[0] if self.failures else None

  def raise_if_failed(self) -> None:
    """Raises the validation error matching the first failed check."""
    if self.ok:
      return
    if not self.connected:
      raise errors.DisconnectedError(self.component_count, what='complex')
    raise errors.ValidationError(
        f'not a closed 3-manifold: {self.first_failure}')


def is_closed_3_manifold(c: Complex3) -> ManifoldReport:
  """Checks the closed 3-manifold conditions and connectivity.

  Disconnected complexes are reported as failures even when all links pass.

  Args:
    c: The complex.

  Returns:
    A report; failures are listed in check order.
  """
  failures = []
  triangles_ok = True
  for t, owners in zip(c.triangles, triangle_facets(c)):
    if len(owners) != 2:
      triangles_ok = False
      failures.append(f'triangle {t} lies in {len(owners)} facet(s)')
      break

  edge_links = collections.defaultdict(list)
  vertex_links = collections.defaultdict(list)
  for f in c.facet_tuples:
    for e in itertools.combinations(f, 2):
      edge_links[e].append(tuple(x for x in f if x not in e))
    for v in f:
      vertex_links[v].append(tuple(x for x in f if x != v))

  edge_links_ok = True
  for e in c.edges:
    if not _is_single_cycle(edge_links[e]):
      edge_links_ok = False
      failures.append(f'link of edge {e} is not a single cycle')
      break

  vertex_links_ok = True
  for v in c.vertices:
    if not _is_2_sphere(vertex_links[v]):
      vertex_links_ok = False
      failures.append(f'link of vertex {v} is not a 2-sphere')
      break

  g = nx.Graph()
  g.add_nodes_from(c.vertices)
  g.add_edges_from(c.edges)
  component_count = nx.number_connected_components(g)
  if component_count != 1:
    failures.append(f'complex has {component_count} connected components')

  return ManifoldReport(
      triangles_ok=triangles_ok,
      edge_links_ok=edge_links_ok,
      vertex_links_ok=vertex_links_ok,
      component_count=component_count,
      failures=failures,
  )


def _is_single_cycle(link_edges: list[Facet]) -> bool:
  g = nx.MultiGraph()
  g.add_edges_from(link_edges)
  return (
      g.number_of_nodes() >= 3
      and all(d == 2 for _, d in g.degree())
      and nx.is_connected(g)
  )


def _is_2_sphere(link_triangles: list[Facet]) -> bool:
  edge_counts = collections.Counter(
      e for t in link_triangles for e in itertools.combinations(t, 2))
  if any(n != 2 for n in edge_counts.values()):
    return False
  g = nx.Graph()
  g.add_edges_from(edge_counts)
  chi = g.number_of_nodes() - len(edge_counts) + len(link_triangles)
  return chi == 2 and nx.is_connected(g)


def relabel(c: Complex3, permutation: Mapping[int, int]) -> Complex3:
  """Applies a vertex permutation of 1..v and returns the relabeled complex."""
  vertices = set(c.vertices)
  if set(permutation.keys()) != vertices or set(
      permutation.values()) != vertices:
    raise errors.DomainError('permutation must be a bijection on 1..v.')
  return Complex3(
      [tuple(sorted(permutation[x] for x in f)) for f in c.facet_tuples])


def canonical_form(
    c: Any, vertex_bound: int | None = None) -> tuple[Facet, ...]:
  """Returns the lexicographically least facet list over vertex relabelings.

  Works on any pure complex (a `Complex3`, a `TwoComplex` or a facet
  sequence). Vertices are split by iterated colour refinement starting from
  their facet degrees, then remaining ties are broken by individualizing each
  vertex of the first non-singleton cell. The least relabeled facet list over
  all leaves is an isomorphism invariant.

  Args:
    c: The complex.
    vertex_bound: Max vertex count. If None, the contextual value
      `canonical_vertex_bound` is used, defaulting to 12.

  Returns:
    The canonical facet list over labels 1..v.

  Raises:
    RefusalError: If the complex has more vertices than the bound.
  """
  facets = facet_tuples(c)
  if vertex_bound is None:
    vertex_bound = component.context_value('canonical_vertex_bound', 12)
  vertices = sorted({x for f in facets for x in f})
  if len(vertices) > vertex_bound:
    raise errors.RefusalError(
        f'canonical form refused for {len(vertices)} vertices.',
        count=len(vertices), limit=vertex_bound)

  incident = collections.defaultdict(list)
  for f in facets:
    for x in f:
      incident[x].append(f)

  initial = _rank({v: len(incident[v]) for v in vertices})
  best = None
  stack = [_refine(initial, incident)]
  while stack:
    colours = stack.pop()
    cells = collections.defaultdict(list)
    for v, col in colours.items():
      cells[col].append(v)
    target = min(
        (col for col, members in cells.items() if len(members) > 1),
        key=lambda col: (len(cells[col]), col),
        default=None,
    )
    if target is None:
      form = tuple(sorted(
          tuple(sorted(colours[x] + 1 for x in f)) for f in facets))
      if best is None or form < best:
        best = form
      continue
    for v in cells[target]:
      individualized = {
          u: 2 * col + (1 if col == target and u != v else 0)
          for u, col in colours.items()
      }
      stack.append(_refine(_rank(individualized), incident))
  return best


def _rank(values: Mapping[int, Any]) -> dict[int, int]:
  order = {x: i for i, x in enumerate(sorted(set(values.values())))}
  return {v: order[x] for v, x in values.items()}


def _refine(
    colours: dict[int, int], incident: Mapping[int, list[Facet]]
) -> dict[int, int]:
  """Colour refinement until the partition is stable."""
  while True:
    signatures = {
        v: (col, tuple(sorted(
            tuple(sorted(colours[u] for u in f if u != v))
            for f in incident[v])))
        for v, col in colours.items()
    }
    refined = _rank(signatures)
    if len(set(refined.values())) == len(set(colours.values())):
      return refined
    colours = refined
