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
"""Bistellar moves and simulated annealing on the edge variance.

The moves are the 3-dimensional Pachner moves:

  * move14 at a facet abcd: a new vertex w is coned over the facet.
  * move23 at a triangle abc in facets abcd, abce: replaced by the three
    facets around the new edge de. Illegal if de already exists.
  * move32 at a degree-3 edge de with link triangle abc: the inverse of
    move23. Illegal if abc already exists.
  * move41 at a vertex w in exactly four facets: the inverse of move14.
    Illegal if the link tetrahedron already exists or fewer than 5 vertices
    would remain. The highest label is renamed to w afterwards.
"""

import fractions
import itertools
import math
from typing import Annotated, Any, Literal, Sequence

from collapsar.core import complex as complex_lib
from collapsar.core import component
from collapsar.core import concurrent
from collapsar.core import errors
from collapsar.core import logging
from collapsar.core import spanning
import pandas as pd
import pyglove as pg


Fraction = fractions.Fraction
Facet = complex_lib.Facet
MoveKind = Literal['move14', 'move23', 'move32', 'move41']

# f-vector change of each move.
F_VECTOR_DELTAS = {
    'move14': (1, 4, 6, 3),
    'move23': (0, 1, 2, 1),
    'move32': (0, -1, -2, -1),
    'move41': (-1, -4, -6, -3),
}


@pg.use_init_args(['kind', 'location'])
class MoveSpec(pg.Object):
  """A bistellar move at a location.

  The location is a facet for move14, a triangle for move23, an edge for
  move32 and a single vertex for move41.
  """

  kind: MoveKind
  location: Annotated[tuple[int, ...], 'Sorted vertex labels.']

  def __str__(self) -> str:
    return f'{self.kind}{tuple(self.location)}'


class _IndexedSet:
  """A set with constant-time removal and positional access."""

  def __init__(self):
    self._items = []
    self._index = {}

  def add(self, x: Any) -> None:
    if x not in self._index:
      self._index[x] = len(self._items)
      self._items.append(x)

  def discard(self, x: Any) -> None:
    i = self._index.pop(x, None)
    if i is None:
      return
    last = self._items.pop()
    if i < len(self._items):
      self._items[i] = last
      self._index[last] = i

  def __contains__(self, x: Any) -> bool:
    return x in self._index

  def __len__(self) -> int:
    return len(self._items)

  def __getitem__(self, i: int) -> Any:
    return self._items[i]

  def __iter__(self):
    return iter(self._items)


class _Triangulation:
  """Mutable facet set with incremental degree statistics.

  Besides the facet list, the state indexes the facets around every triangle,
  edge and vertex, and keeps one candidate pool per move kind: all facets, all
  triangles, degree-3 edges and degree-4 vertices. Adding or removing a facet
  touches only its own faces, so a move costs time proportional to the
  degrees around it rather than to the size of the complex.
  """

  def __init__(self, facets: Sequence[Facet]):
    self.facets: dict[Facet, None] = {}
    self.triangle_facets: dict[Facet, set[Facet]] = {}
    self.edge_facets: dict[Facet, dict[Facet, None]] = {}
    self.vertex_facets: dict[int, dict[Facet, None]] = {}
    self.degree_square_sum = 0
    self.pools = {kind: _IndexedSet() for kind in F_VECTOR_DELTAS}
    for f in facets:
      self.add(tuple(sorted(f)))
    self.vertex_count = len(self.vertex_facets)

  def add(self, f: Facet) -> None:
    self.facets[f] = None
    self.pools['move14'].add(f)
    for t in itertools.combinations(f, 3):
      if t not in self.triangle_facets:
        self.triangle_facets[t] = set()
        self.pools['move23'].add(t)
      self.triangle_facets[t].add(f)
    for e in itertools.combinations(f, 2):
      owners = self.edge_facets.setdefault(e, {})
      k = len(owners)
      owners[f] = None
      self.degree_square_sum += 2 * k + 1
      self._update_pool('move32', e, k + 1 == 3)
    for v in f:
      owners = self.vertex_facets.setdefault(v, {})
      owners[f] = None
      self._update_pool('move41', (v,), len(owners) == 4)

  def remove(self, f: Facet) -> None:
    del self.facets[f]
    self.pools['move14'].discard(f)
    for t in itertools.combinations(f, 3):
      owners = self.triangle_facets[t]
      owners.discard(f)
      if not owners:
        del self.triangle_facets[t]
        self.pools['move23'].discard(t)
    for e in itertools.combinations(f, 2):
      owners = self.edge_facets[e]
      k = len(owners)
      del owners[f]
      self.degree_square_sum -= 2 * k - 1
      if not owners:
        del self.edge_facets[e]
      self._update_pool('move32', e, k - 1 == 3)
    for v in f:
      owners = self.vertex_facets[v]
      del owners[f]
      if not owners:
        del self.vertex_facets[v]
      self._update_pool('move41', (v,), len(owners) == 4)

  def _update_pool(self, kind: str, location: Facet, member: bool) -> None:
    if member:
      self.pools[kind].add(location)
    else:
      self.pools[kind].discard(location)

  def edge_degree(self, e: Facet) -> int:
    return len(self.edge_facets.get(e, ()))

  def vertex_degree(self, v: int) -> int:
    return len(self.vertex_facets.get(v, ()))

  @property
  def variance(self) -> Fraction:
    f1 = len(self.edge_facets)
    mean = Fraction(6 * len(self.facets), f1)
    return Fraction(self.degree_square_sum, f1) - mean * mean

  def to_complex(self) -> complex_lib.Complex3:
    return complex_lib.Complex3(list(self.facets))

  #
  # Moves.
  #

  def check(self, kind: str, location: Facet) -> str | None:
    """Returns the violated condition of a move, or None if it is legal."""
    if kind == 'move14':
      if location not in self.facets:
        return 'facet not present'
    elif kind == 'move23':
      owners = self.triangle_facets.get(location)
      if not owners or len(owners) != 2:
        return 'triangle not in exactly two facets'
      d, e = self._apexes(location, owners)
      if (min(d, e), max(d, e)) in self.edge_facets:
        return 'edge already present'
    elif kind == 'move32':
      if self.edge_degree(location) != 3:
        return 'edge degree is not 3'
      if self._link_triangle(location) in self.triangle_facets:
        return 'triangle already present'
    elif kind == 'move41':
      (w,) = location
      if self.vertex_degree(w) != 4:
        return 'vertex degree is not 4'
      link = self._link_tetrahedron(w)
      if len(link) != 4:
        return 'vertex link is not a tetrahedron boundary'
      if link in self.facets:
        return 'link tetrahedron already present'
      if self.vertex_count - 1 < 5:
        return 'fewer than 5 vertices'
    else:
      return f'unknown move kind {kind!r}'
    return None

  def _apexes(self, triangle: Facet, owners: set[Facet]) -> list[int]:
    return sorted(x for f in owners for x in f if x not in triangle)

  def _edge_facets(self, edge: Facet) -> list[Facet]:
    return sorted(self.edge_facets[edge])

  def _link_triangle(self, edge: Facet) -> Facet:
    return tuple(sorted({
        x for f in self.edge_facets[edge] for x in f if x not in edge}))

  def _link_tetrahedron(self, w: int) -> Facet:
    return tuple(sorted({
        x for f in self.vertex_facets[w] for x in f if x != w}))

  def apply(self, kind: str, location: Facet) -> tuple[Any, ...]:
    """Applies a legal move; returns an undo record."""
    rename = None
    if kind == 'move14':
      w = self.vertex_count + 1
      removed = [location]
      added = [tuple(sorted(t + (w,)))
               for t in itertools.combinations(location, 3)]
      self.vertex_count += 1
    elif kind == 'move23':
      owners = self.triangle_facets[location]
      d, e = self._apexes(location, owners)
      removed = sorted(owners)
      added = [tuple(sorted(pair + (d, e)))
               for pair in itertools.combinations(location, 2)]
    elif kind == 'move32':
      removed = self._edge_facets(location)
      link = self._link_triangle(location)
      added = [tuple(sorted(link + (x,))) for x in location]
    elif kind == 'move41':
      (w,) = location
      removed = sorted(self.vertex_facets[w])
      added = [self._link_tetrahedron(w)]
      self.vertex_count -= 1
    else:
      raise errors.DomainError(f'unknown move kind {kind!r}.')
    for f in removed:
      self.remove(f)
    for f in added:
      self.add(f)
    if kind == 'move41':
      top = self.vertex_count + 1
      (w,) = location
      if w != top:
        self._rename(top, w)
        rename = (top, w)
    return (removed, added, rename, kind)

  def undo(self, record: tuple[Any, ...]) -> None:
    removed, added, rename, kind = record
    if rename is not None:
      self._rename(rename[1], rename[0])
    for f in added:
      self.remove(f)
    for f in removed:
      self.add(f)
    if kind == 'move14':
      self.vertex_count -= 1
    elif kind == 'move41':
      self.vertex_count += 1

  def _rename(self, old: int, new: int) -> None:
    for f in list(self.vertex_facets[old]):
      self.remove(f)
      self.add(tuple(sorted(new if x == old else x for x in f)))

  def legal_moves(self) -> list[tuple[str, Facet]]:
    return [
        (kind, location)
        for kind, pool in self.pools.items()
        for location in pool
        if self.check(kind, location) is None
    ]

  def propose(self, stream: spanning.UniformStream) -> tuple[str, Facet]:
    """Draws a uniformly random legal move.

    A candidate is drawn uniformly from the union of the pools and redrawn
    while illegal. Every facet is a legal move14 site and the pools hold at
    most six candidates per facet, so a draw succeeds with probability at
    least 1/6.

    Args:
      stream: The random source.

    Returns:
      The move kind and its location.
    """
    while True:
      i = stream.below(sum(len(p) for p in self.pools.values()))
      for kind, pool in self.pools.items():
        if i < len(pool):
          break
        i -= len(pool)
      location = pool[i]
      if self.check(kind, location) is None:
        return kind, location


_KIND_ORDER = {k: i for i, k in enumerate(F_VECTOR_DELTAS)}


def legal_moves(c: complex_lib.Complex3) -> list[MoveSpec]:
  """Lists every legal move, grouped by kind and sorted by location."""
  moves = sorted(
      _Triangulation(c.facet_tuples).legal_moves(),
      key=lambda m: (_KIND_ORDER[m[0]], m[1]))
  return [MoveSpec(kind, location) for kind, location in moves]


def check_move(c: complex_lib.Complex3, m: MoveSpec) -> str | None:
  """Returns the condition a move violates, or None if it is legal."""
  return _Triangulation(c.facet_tuples).check(m.kind, tuple(m.location))


def apply_move(c: complex_lib.Complex3, m: MoveSpec) -> complex_lib.Complex3:
  """Applies a bistellar move.

  Args:
    c: A closed 3-manifold triangulation.
    m: The move.

  Returns:
    The new complex. Removed facets are dropped and new facets appended.

  Raises:
    IllegalMoveError: Naming the violated condition.
  """
  state = _Triangulation(c.facet_tuples)
  location = tuple(sorted(m.location))
  condition = state.check(m.kind, location)
  if condition is not None:
    raise errors.IllegalMoveError(m, condition)
  state.apply(m.kind, location)
  return state.to_complex()


class AnnealConfig(pg.Object):
  """Annealing schedule."""

  direction: Annotated[
      Literal['minimize', 'maximize'], 'Whether to lower or raise variance.'
  ] = 'minimize'
  max_moves: Annotated[int, 'Number of proposals.'] = 10000
  initial_temperature: Annotated[
      float, 'Temperature at the start of every phase.'] = 1.0
  cooling_factor: Annotated[
      float, 'Temperature factor per proposal, in (0, 1).'] = 0.99
  reheat_period: Annotated[
      int, 'Accepted moves per phase before the temperature is reset.'] = 500
  ascent_moves: Annotated[
      int,
      'Proposals at the start of each phase that use the flipped objective.'
  ] = 0
  seed: int = 0
  debug: Annotated[
      bool, 'Validate the complex after every accepted move.'] = False
  validation_rate: Annotated[
      float, 'Share of accepted moves validated when not in debug mode.'
  ] = 0.01

  def _on_bound(self):
    super()._on_bound()
    if not 0 < self.cooling_factor < 1:
      raise errors.DomainError(
          f'cooling_factor must be in (0, 1), got {self.cooling_factor}.')
    if self.max_moves < 1:
      raise errors.DomainError(
          f'max_moves must be positive, got {self.max_moves}.')
    if self.initial_temperature <= 0:
      raise errors.DomainError('initial_temperature must be positive.')
    if self.reheat_period < 1 or self.ascent_moves < 0:
      raise errors.DomainError(
          'reheat_period must be positive and ascent_moves non-negative.')


class AnnealResult(pg.Object):
  """Outcome of an annealing run."""

  best_complex: complex_lib.Complex3
  best_variance: Fraction
  initial_variance: Fraction
  move_log: Annotated[list[MoveSpec], 'Accepted moves in order.'] = []
  move_steps: Annotated[
      list[int], 'Proposal index of each accepted move.'] = []
  move_variances: Annotated[
      list[Fraction], 'Variance after each accepted move.'] = []
  variance_trace: Annotated[
      list[Fraction], 'Best-so-far variance after every proposal.'] = []
  seed: int = 0

  def trace_dataframe(self) -> pd.DataFrame:
    return pd.DataFrame({
        'step': list(self.move_steps),
        'kind': [m.kind for m in self.move_log],
        'location': [
            ' '.join(str(x) for x in m.location) for m in self.move_log],
        'variance_num': [v.numerator for v in self.move_variances],
        'variance_den': [v.denominator for v in self.move_variances],
    })

  def write(self, directory: str) -> list[str]:
    """Writes `best.facets` and `trace.csv`; returns the paths."""
    pg.io.mkdirs(directory, exist_ok=True)
    facets_path = f'{directory.rstrip("/")}/best.facets'
    trace_path = f'{directory.rstrip("/")}/trace.csv'
    pg.io.writefile(facets_path, complex_lib.serialize_facets(
        self.best_complex))
    self.trace_dataframe().to_csv(trace_path, index=False)
    return [facets_path, trace_path]


def anneal_edge_variance(
    c: complex_lib.Complex3, cfg: AnnealConfig | None = None
) -> AnnealResult:
  """Searches bistellar moves for a complex with extreme edge variance.

  Every proposal is a uniformly random legal move. It is accepted when it
  improves the objective or with probability exp(-delta / temperature). The
  temperature is multiplied by `cooling_factor` after every proposal and
  reset every `reheat_period` accepted moves; the first `ascent_moves`
  proposals of each phase pursue the opposite direction.

  Args:
    c: A closed 3-manifold triangulation.
    cfg: The schedule.

  Returns:
    The best complex seen, with the accepted moves and best-so-far trace.
  """
  cfg = cfg or AnnealConfig()
  complex_lib.is_closed_3_manifold(c).raise_if_failed()
  sign = 1 if cfg.direction == 'minimize' else -1
  stream = spanning.UniformStream(spanning.make_rng(cfg.seed))
  check_stream = spanning.UniformStream(
      spanning.make_rng(spanning.mix_seed(cfg.seed, 0)))

  state = _Triangulation(c.facet_tuples)
  current = state.variance
  initial = current
  best, best_accepted = current, 0
  temperature = cfg.initial_temperature
  phase_accepted = 0
  phase_proposals = 0
  move_log, move_steps, move_variances, trace = [], [], [], []

  for step in range(cfg.max_moves):
    kind, location = state.propose(stream)
    record = state.apply(kind, location)
    candidate = state.variance
    direction = -sign if phase_proposals < cfg.ascent_moves else sign
    delta = direction * float(candidate - current)
    phase_proposals += 1
    u = stream.below(1 << 30) / (1 << 30)
    if delta <= 0 or u < math.exp(-delta / temperature):
      current = candidate
      move_log.append(MoveSpec(kind, location))
      move_steps.append(step)
      move_variances.append(current)
      if cfg.debug or check_stream.below(10**6) < cfg.validation_rate * 10**6:
        complex_lib.is_closed_3_manifold(
            state.to_complex()).raise_if_failed()
      if sign * (current - best) < 0:
        best, best_accepted = current, len(move_log)
      phase_accepted += 1
      if phase_accepted == cfg.reheat_period:
        temperature = cfg.initial_temperature
        phase_accepted = 0
        phase_proposals = 0
        logging.debug('reheat', step=step, variance=float(current))
    else:
      state.undo(record)
    temperature *= cfg.cooling_factor
    trace.append(best)

  # The best complex is rebuilt once from the accepted prefix.
  replay = _Triangulation(c.facet_tuples)
  for m in move_log[:best_accepted]:
    replay.apply(m.kind, tuple(m.location))
  best_complex = replay.to_complex()

  logging.info(
      'annealing done', direction=cfg.direction, seed=cfg.seed,
      accepted=len(move_log), best_variance=float(best))
  return AnnealResult(
      best_complex=best_complex,
      best_variance=best,
      initial_variance=initial,
      move_log=move_log,
      move_steps=move_steps,
      move_variances=move_variances,
      variance_trace=trace,
      seed=cfg.seed,
  )


class AnnealPortfolio(component.Component):
  """Independent annealing runs on a worker pool."""

  max_workers: Annotated[
      int, 'Number of worker threads.'] = component.contextual(default=1)

  def __call__(
      self,
      c: complex_lib.Complex3,
      cfg: AnnealConfig,
      seeds: Sequence[int],
  ) -> list[AnnealResult]:
    results = {}
    for seed, result, _ in concurrent.concurrent_map(
        lambda s: anneal_edge_variance(c, cfg.clone(override={'seed': s})),
        list(seeds),
        max_workers=self.max_workers,
        silence_on_errors=None,
    ):
      results[seed] = result
    return [results[s] for s in seeds]


def anneal_portfolio(
    c: complex_lib.Complex3, cfg: AnnealConfig, seeds: Sequence[int]
) -> AnnealResult:
  """Runs one annealing per seed; the best result wins, earlier seeds first."""
  if not seeds:
    raise errors.DomainError('at least one seed is required.')
  results = AnnealPortfolio()(c, cfg, seeds)
  sign = 1 if cfg.direction == 'minimize' else -1
  best = results[0]
  for r in results[1:]:
    if sign * (r.best_variance - best.best_variance) < 0:
      best = r
  return best
