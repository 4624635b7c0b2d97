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
"""Spanning trees of dual graphs: uniform sampling, enumeration and counting.

Random numbers come from numpy's PCG64. A trial's generator is seeded with
`mix_seed(base_seed, trial_index)`, which is the SplitMix64 finalizer applied
to `base_seed + (trial_index + 1) * 0x9E3779B97F4A7C15 (mod 2**64)`.
"""

import dataclasses
import fractions
from typing import Iterator, Sequence

from collapsar.core import complex as complex_lib
from collapsar.core import errors
import numpy as np
import sympy
from sympy.polys.matrices import DomainMatrix


_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix_seed(base_seed: int, index: int) -> int:
  """Derives the 64-bit seed of trial `index` from a base seed."""
  z = (base_seed + (index + 1) * _GOLDEN_GAMMA) & _MASK64
  z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
  z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
  return z ^ (z >> 31)


def make_rng(seed: int) -> np.random.Generator:
  """Returns the PCG64 generator for a 64-bit seed."""
  return np.random.Generator(np.random.PCG64(seed & _MASK64))


class UniformStream:
  """Buffered uniform draws in [0, 1) from a numpy generator."""

  def __init__(self, rng: np.random.Generator, buffer_size: int = 1024):
    self._rng = rng
    self._buffer_size = buffer_size
    self._buffer = []
    self._pos = 0

  def below(self, n: int) -> int:
    """Returns a uniform integer in [0, n)."""
    if self._pos == len(self._buffer):
      self._buffer = self._rng.random(self._buffer_size).tolist()
      self._pos = 0
    x = self._buffer[self._pos]
    self._pos += 1
    return min(int(x * n), n - 1)


@dataclasses.dataclass(frozen=True)
class SpanningTree:
  """A rooted spanning tree of a dual graph.

  `parent_arc[u]` and `parent_node[u]` point from `u` towards the root; both
  are -1 at the root.
  """

  root: int
  arcs: tuple[int, ...]
  parent_arc: tuple[int, ...]
  parent_node: tuple[int, ...]

  @classmethod
  def from_arcs(
      cls, g: complex_lib.DualGraph, arcs: Sequence[int], root: int = 0
  ) -> 'SpanningTree':
    """Builds a rooted tree from an arc set.

    Args:
      g: The graph.
      arcs: Tree arc ids.
      root: Root node.

    Returns:
      The rooted tree.

    Raises:
      TreeMismatchError: If `arcs` is not a spanning tree of `g`.
    """
    n = g.node_count
    arc_set = set(arcs)
    if len(arc_set) != n - 1 or not 0 <= root < n:
      raise errors.TreeMismatchError(
          f'expected {n - 1} distinct arcs and a root in [0, {n}), '
          f'got {len(arc_set)} arcs and root {root}.')
    parent_arc = [-1] * n
    parent_node = [-1] * n
    visited = [False] * n
    visited[root] = True
    frontier = [root]
    while frontier:
      u = frontier.pop()
      for a, v in g.neighbors[u]:
        if a in arc_set and not visited[v]:
          visited[v] = True
          parent_arc[v] = a
          parent_node[v] = u
          frontier.append(v)
    if not all(visited):
      raise errors.TreeMismatchError(
          'arcs do not connect every node of the graph.')
    return cls(root, tuple(sorted(arc_set)), tuple(parent_arc),
               tuple(parent_node))

  @property
  def node_count(self) -> int:
    return len(self.parent_arc)

  def children(self) -> list[list[int]]:
    result = [[] for _ in range(self.node_count)]
    for v, p in enumerate(self.parent_node):
      if p >= 0:
        result[p].append(v)
    return result

  def breadth_first_order(self) -> list[int]:
    """Nodes ordered root first, each node after its parent."""
    children = self.children()
    order = [self.root]
    for u in order:
      order.extend(children[u])
    return order

  def reroot(self, node: int) -> 'SpanningTree':
    """Returns the same arc set rooted at `node`."""
    if not 0 <= node < self.node_count:
      raise errors.DomainError(f'node {node} is not in the tree.')
    parent_arc = list(self.parent_arc)
    parent_node = list(self.parent_node)
    # Reverse the pointers on the path from `node` to the old root.
    prev_node, prev_arc = -1, -1
    u = node
    while u != -1:
      next_node, next_arc = self.parent_node[u], self.parent_arc[u]
      parent_node[u], parent_arc[u] = prev_node, prev_arc
      prev_node, prev_arc = u, next_arc
      u = next_node
    return SpanningTree(node, self.arcs, tuple(parent_arc), tuple(parent_node))

  def validate(self, g: complex_lib.DualGraph) -> None:
    """Checks size, acyclicity, coverage and parent consistency.

    Raises:
      TreeMismatchError: On the first violated condition.
    """
    if self.node_count != g.node_count:
      raise errors.TreeMismatchError(
          f'tree has {self.node_count} nodes, graph has {g.node_count}.')
    expected = SpanningTree.from_arcs(g, self.arcs, self.root)
    for v in range(g.node_count):
      a = self.parent_arc[v]
      if v == self.root:
        if a != -1 or self.parent_node[v] != -1:
          raise errors.TreeMismatchError('root must not have a parent.')
        continue
      if a not in expected.arcs or g.other_end(a, v) != self.parent_node[v]:
        raise errors.TreeMismatchError(
            f'parent pointer of node {v} is inconsistent with the arcs.')
    # Following parents from every node must reach the root.
    if sorted(self.breadth_first_order()) != list(range(g.node_count)):
      raise errors.TreeMismatchError('parent pointers contain a cycle.')

  def to_json(self) -> dict[str, object]:
    return {'root': self.root, 'arcs': list(self.arcs)}


def wilson_parents(
    g: complex_lib.DualGraph, stream: UniformStream
) -> tuple[int, list[int]]:
  """Runs Wilson's algorithm and returns (root, parent arc per node).

  Random walks start from each node not yet in the tree, in node order, and
  stop when they hit the tree. Overwriting the exit arc of every visited node
  performs the loop erasure.
  """
  n = g.node_count
  neighbors = g.neighbors
  in_tree = [False] * n
  next_arc = [-1] * n
  next_node = [-1] * n
  root = stream.below(n)
  in_tree[root] = True
  for start in range(n):
    u = start
    while not in_tree[u]:
      choices = neighbors[u]
      a, v = choices[stream.below(len(choices))]
      next_arc[u] = a
      next_node[u] = v
      u = v
    u = start
    while not in_tree[u]:
      in_tree[u] = True
      u = next_node[u]
  return root, next_arc


def _check_connected(g: complex_lib.DualGraph) -> None:
  count = g.component_count()
  if count != 1:
    raise errors.DisconnectedError(count)


def wilson_sample(g: complex_lib.DualGraph, rng_seed: int) -> SpanningTree:
  """Samples a uniform spanning tree with a uniformly chosen root.

  Args:
    g: A connected (multi)graph.
    rng_seed: 64-bit seed. Identical (graph, seed) gives an identical tree.

  Returns:
    The sampled tree.

  Raises:
    DisconnectedError: If `g` is not connected.
  """
  _check_connected(g)
  root, parent_arc = wilson_parents(g, UniformStream(make_rng(rng_seed)))
  arcs = [a for a in parent_arc if a >= 0]
  return SpanningTree.from_arcs(g, arcs, root)


@dataclasses.dataclass(frozen=True)
class TreeCount:
  """Exact number of spanning trees of a graph."""

  value: int
  node_count: int

  @property
  def upper_bound(self) -> fractions.Fraction:
    return spanning_tree_upper_bound(self.node_count)

  @property
  def within_bound(self) -> bool:
    """Whether the count respects (9/2)(27/8)^n."""
    return self.value < self.upper_bound

  def __int__(self) -> int:
    return self.value


def spanning_tree_upper_bound(n: int) -> fractions.Fraction:
  """Upper bound (9/2)(27/8)^n on spanning trees of a 4-regular n-node graph."""
  return fractions.Fraction(9, 2) * fractions.Fraction(27, 8) ** n


def count_spanning_trees(g: complex_lib.DualGraph) -> TreeCount:
  """Counts spanning trees with the matrix-tree theorem.

  The reduced Laplacian (node 0 removed) is evaluated with a fraction-free
  determinant over the integers.
  """
  n = g.node_count
  if n <= 1:
    return TreeCount(1 if n == 1 else 0, n)
  laplacian = [[0] * n for _ in range(n)]
  for u, v, _ in g.arcs:
    laplacian[u][u] += 1
    laplacian[v][v] += 1
    laplacian[u][v] -= 1
    laplacian[v][u] -= 1
  rows = [[sympy.ZZ(x) for x in row[1:]] for row in laplacian[1:]]
  det = DomainMatrix(rows, (n - 1, n - 1), sympy.ZZ).det()
  return TreeCount(int(det), n)


def enumerate_spanning_trees(
    g: complex_lib.DualGraph, limit: int = 10**6
) -> Iterator[SpanningTree]:
  """Yields every spanning tree exactly once, rooted at node 0.

  Arcs are decided in index order: the lowest undecided arc is first
  contracted (included) and then deleted (excluded). Branches that would
  close a cycle or disconnect the graph are pruned, so every leaf is a tree.

  Args:
    g: A connected graph.
    limit: Max number of trees to enumerate.

  Yields:
    Spanning trees in a deterministic order.

  Raises:
    DisconnectedError: If `g` is not connected.
    RefusalError: If the tree count exceeds `limit`.
  """
  _check_connected(g)
  count = count_spanning_trees(g).value
  if count > limit:
    raise errors.RefusalError(
        f'graph has {count} spanning trees, more than the limit {limit}.',
        count=count, limit=limit)
  n = g.node_count
  endpoints = [(u, v) for u, v, _ in g.arcs]

  def find(parent, x):
    while parent[x] != x:
      x = parent[x]
    return x

  def connected_without(chosen_parent, start):
    parent = list(chosen_parent)
    components = len({find(parent, x) for x in range(n)})
    for u, v in endpoints[start:]:
      ru, rv = find(parent, u), find(parent, v)
      if ru != rv:
        parent[ru] = rv
        components -= 1
        if components == 1:
          return True
    return components == 1

  def extend(i, chosen, parent):
    if len(chosen) == n - 1:
      yield SpanningTree.from_arcs(g, chosen, 0)
      return
    if i == len(endpoints):
      return
    u, v = endpoints[i]
    ru, rv = find(parent, u), find(parent, v)
    if ru != rv:
      merged = list(parent)
      merged[ru] = rv
      yield from extend(i + 1, chosen + [i], merged)
    if connected_without(parent, i + 1):
      yield from extend(i + 1, chosen, parent)

  yield from extend(0, [], list(range(n)))
