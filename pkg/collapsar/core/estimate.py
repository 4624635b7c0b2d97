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
"""Collapsing probability: Monte Carlo estimates and exact values.

Trial `i` of a run with base seed `s` samples its spanning tree from
`mix_seed(s, i)`. Trials are split into index chunks that run on a worker
pool, and per-chunk counts are added up, so results do not depend on the
number of workers:

  with collapsar.use_settings(max_workers=8, show_progress=True):
    est = collapsar.estimate_collapsing_probability(sphere, 10**6, base_seed=7)
  est.to_json()
"""

import fractions
import math
from typing import Annotated, Any, Callable

from collapsar.core import collapse
from collapsar.core import complex as complex_lib
from collapsar.core import component
from collapsar.core import concurrent
from collapsar.core import errors
from collapsar.core import logging
from collapsar.core import spanning
from collapsar.core import text_formatting
import pandas as pd
import pyglove as pg
from scipy import stats


Fraction = fractions.Fraction

# Error probability used in reports when none is given.
DEFAULT_ERROR_PROBABILITY = 1e-4


def _exact(value: int | float | Fraction) -> Fraction:
  if isinstance(value, float):
    return Fraction(repr(value))
  return Fraction(value)


def chebyshev_deviation_bound(
    n_samples: int, epsilon: int | float | Fraction) -> Fraction:
  """Upper bound on P(|p_hat - p| >= epsilon), min(1, 1 / (4 N epsilon^2)).

  Uses the worst case p(1 - p) <= 1/4. Floats are read by their decimal
  representation, so `0.005` means exactly 1/200.

  Args:
    n_samples: Number of trials N.
    epsilon: Deviation.

  Returns:
    The bound as an exact fraction.

  Raises:
    DomainError: If N < 1 or epsilon <= 0.
  """
  if n_samples < 1:
    raise errors.DomainError(f'n_samples must be positive, got {n_samples}.')
  eps = _exact(epsilon)
  if eps <= 0:
    raise errors.DomainError(f'epsilon must be positive, got {epsilon}.')
  return min(Fraction(1), 1 / (4 * n_samples * eps * eps))


def chebyshev_epsilon(n_samples: int, error_probability: float) -> float:
  """Deviation epsilon whose Chebyshev bound equals `error_probability`."""
  if n_samples < 1:
    raise errors.DomainError(f'n_samples must be positive, got {n_samples}.')
  if not 0 < error_probability <= 1:
    raise errors.DomainError(
        f'error_probability must be in (0, 1], got {error_probability}.')
  return 1 / (2 * math.sqrt(n_samples * error_probability))


def free_edge_lower_bound(k: int) -> Fraction:
  """Lower bound (4/7)(4/13)^(k-2) on the free fraction of a degree-k edge."""
  if k < 2:
    raise errors.DomainError(f'edge degree must be at least 2, got {k}.')
  return Fraction(4, 7) * Fraction(4, 13) ** (k - 2)


class Estimate(pg.Object):
  """Monte Carlo estimate of a collapsing probability."""

  successes: Annotated[int, 'Number of trials that collapsed.']
  n_samples: Annotated[int, 'Number of trials.']
  base_seed: Annotated[int, 'Base seed; trial i uses mix_seed(seed, i).']
  first_index: Annotated[int, 'Index of the first trial.'] = 0

  def _on_bound(self):
    super()._on_bound()
    if self.n_samples < 1 or not 0 <= self.successes <= self.n_samples:
      raise errors.DomainError(
          f'invalid counts: {self.successes} successes out of '
          f'{self.n_samples} samples.')

  @property
  def p_hat(self) -> Fraction:
    return Fraction(self.successes, self.n_samples)

  def chebyshev(self, epsilon: float) -> Fraction:
    return chebyshev_deviation_bound(self.n_samples, epsilon)

  def chebyshev_epsilon(
      self, error_probability: float = DEFAULT_ERROR_PROBABILITY) -> float:
    return chebyshev_epsilon(self.n_samples, error_probability)

  def normal_interval(
      self, error_probability: float = DEFAULT_ERROR_PROBABILITY
  ) -> tuple[float, float]:
    """Normal-approximation interval, clipped to [0, 1]."""
    if not 0 < error_probability < 1:
      raise errors.DomainError(
          f'error_probability must be in (0, 1), got {error_probability}.')
    z = stats.norm.ppf(1 - error_probability / 2)
    p = float(self.p_hat)
    half = z * math.sqrt(p * (1 - p) / self.n_samples)
    return max(0.0, p - half), min(1.0, p + half)

  def merge(self, other: 'Estimate') -> 'Estimate':
    """Pools a run over the trial indices that directly follow this one."""
    if other.base_seed != self.base_seed:
      raise errors.DomainError('cannot merge runs with different seeds.')
    if other.first_index != self.first_index + self.n_samples:
      raise errors.DomainError(
          f'run starting at trial {other.first_index} does not follow trials '
          f'[{self.first_index}, {self.first_index + self.n_samples}).')
    return Estimate(
        successes=self.successes + other.successes,
        n_samples=self.n_samples + other.n_samples,
        base_seed=self.base_seed,
        first_index=self.first_index,
    )

  def to_json(
      self, error_probability: float = DEFAULT_ERROR_PROBABILITY
  ) -> dict[str, Any]:
    lower, upper = self.normal_interval(error_probability)
    return {
        'p_hat': float(self.p_hat),
        'successes': self.successes,
        'samples': self.n_samples,
        'seed': self.base_seed,
        'chebyshev': {
            'epsilon': self.chebyshev_epsilon(error_probability),
            'bound': error_probability,
        },
        'normal': {
            'lower': lower,
            'upper': upper,
            'error_probability': error_probability,
        },
    }


class ExactProbability(pg.Object):
  """Collapsing trees over all spanning trees, unreduced."""

  numerator: int
  denominator: Annotated[int, 'Number of spanning trees.']

  @property
  def value(self) -> Fraction:
    return Fraction(self.numerator, self.denominator)

  def to_json(self) -> dict[str, Any]:
    return {
        'fraction': f'{self.numerator}/{self.denominator}',
        'numerator': self.numerator,
        'denominator': self.denominator,
        'decimal': text_formatting.decimal_str(self.value),
    }


class EdgeFreeStats(pg.Object):
  """How often each edge is free right after the 3-cell collapse."""

  edges: Annotated[list[tuple[int, int]], 'Edges in edge table order.']
  degrees: list[int]
  free_counts: list[int]
  n_samples: Annotated[int, 'Number of sampled (or enumerated) trees.']

  def frequency(self, edge_id: int) -> Fraction:
    return Fraction(self.free_counts[edge_id], self.n_samples)

  def theorem_bound(self, edge_id: int) -> Fraction:
    return free_edge_lower_bound(self.degrees[edge_id])

  def violations(self, sigmas: float = 3.0) -> list[int]:
    """Edges whose frequency is below the lower bound minus `sigmas` SDs."""
    result = []
    for i in range(len(self.edges)):
      bound = float(self.theorem_bound(i))
      sd = math.sqrt(bound * (1 - bound) / self.n_samples)
      if float(self.frequency(i)) < bound - sigmas * sd:
        result.append(i)
    return result

  def by_degree(self) -> dict[int, tuple[Fraction, Fraction]]:
    """Mean frequency per edge degree, with the reference 2^(2 - degree)."""
    totals = {}
    for degree, count in zip(self.degrees, self.free_counts):
      n, s = totals.get(degree, (0, 0))
      totals[degree] = (n + 1, s + count)
    return {
        d: (Fraction(s, n * self.n_samples), Fraction(2) ** (2 - d))
        for d, (n, s) in sorted(totals.items())
    }

  def to_dataframe(self) -> pd.DataFrame:
    return pd.DataFrame({
        'edge_id': range(len(self.edges)),
        'v1': [e[0] for e in self.edges],
        'v2': [e[1] for e in self.edges],
        'degree': self.degrees,
        'free_count': self.free_counts,
        'samples': [self.n_samples] * len(self.edges),
        'frequency': [
            text_formatting.decimal_str(self.frequency(i))
            for i in range(len(self.edges))],
        'theorem_bound': [
            text_formatting.decimal_str(self.theorem_bound(i))
            for i in range(len(self.edges))],
    })

  def write_csv(self, path: str) -> None:
    self.to_dataframe().to_csv(path, index=False)


class TrialRunner(component.Component):
  """Runs trial chunks on a worker pool and adds up their tallies."""

  max_workers: Annotated[
      int, 'Number of worker threads.'] = component.contextual(default=1)
  show_progress: Annotated[
      bool, 'Whether to show a progress bar.'
  ] = component.contextual(default=False)
  chunk_size: Annotated[
      int, 'Trials per job.'] = component.contextual(default=1000)

  def map_chunks(
      self,
      fn: Callable[[range], Any],
      n_samples: int,
      first_index: int = 0,
      label: str = 'Trials',
  ) -> list[Any]:
    """Applies `fn` to consecutive index ranges; results in chunk order."""
    chunks = [
        range(first_index + r.start, first_index + r.stop)
        for r in concurrent.index_chunks(n_samples, self.chunk_size)
    ]
    results = {}
    for chunk, result, _ in concurrent.concurrent_map(
        fn,
        chunks,
        max_workers=self.max_workers,
        show_progress=self.show_progress,
        label=label,
        silence_on_errors=None,
    ):
      results[chunk.start] = result
      logging.debug('chunk done', start=chunk.start, size=len(chunk))
    return [results[c.start] for c in chunks]


def estimate_collapsing_probability(
    c: complex_lib.Complex3,
    n_samples: int,
    base_seed: int = 0,
    *,
    first_index: int = 0,
) -> Estimate:
  """Estimates the collapsing probability from independent trials.

  Args:
    c: A connected closed 3-manifold triangulation.
    n_samples: Number of trials, at least 1.
    base_seed: 64-bit base seed.
    first_index: Index of the first trial, to extend an earlier run.

  Returns:
    The estimate; identical for any worker count.
  """
  if n_samples < 1:
    raise errors.DomainError(f'n_samples must be positive, got {n_samples}.')
  kernel = collapse.CollapseKernel(c)

  def count(indices: range) -> int:
    return sum(
        kernel.run(spanning.mix_seed(base_seed, i)) for i in indices)

  successes = sum(TrialRunner().map_chunks(
      count, n_samples, first_index, label='Collapsing trials'))
  result = Estimate(
      successes=successes, n_samples=n_samples, base_seed=base_seed,
      first_index=first_index)
  logging.info(
      'collapsing probability estimated', samples=n_samples, seed=base_seed,
      p_hat=text_formatting.decimal_str(result.p_hat))
  return result


def exact_collapsing_probability(
    c: complex_lib.Complex3, tree_limit: int = 10**6) -> ExactProbability:
  """Counts the spanning trees along which the sphere collapses.

  Raises:
    RefusalError: If the sphere has more than `tree_limit` spanning trees.
  """
  kernel = collapse.CollapseKernel(c)
  total = 0
  collapsing = 0
  for tree in spanning.enumerate_spanning_trees(kernel.graph, tree_limit):
    total += 1
    collapsing += kernel.collapses(tree.arcs)
  logging.info('spanning trees enumerated', trees=total, collapsing=collapsing)
  return ExactProbability(numerator=collapsing, denominator=total)


def edge_free_frequencies(
    c: complex_lib.Complex3, n_samples: int, base_seed: int = 0
) -> EdgeFreeStats:
  """Counts per edge how often it is free after collapsing along random trees.

  Trial `i` uses the same tree as trial `i` of
  `estimate_collapsing_probability` with the same base seed.
  """
  if n_samples < 1:
    raise errors.DomainError(f'n_samples must be positive, got {n_samples}.')
  kernel = collapse.CollapseKernel(c)
  edge_count = len(kernel.incidence.edges)

  def count(indices: range) -> list[int]:
    counts = [0] * edge_count
    for i in indices:
      _, parent_arc = kernel.sample_parents(spanning.mix_seed(base_seed, i))
      for e in kernel.free_edge_ids(parent_arc):
        counts[e] += 1
    return counts

  totals = [0] * edge_count
  for counts in TrialRunner().map_chunks(
      count, n_samples, label='Free-edge trials'):
    totals = [a + b for a, b in zip(totals, counts)]
  table = complex_lib.edge_table(c)
  logging.info('free-edge frequencies sampled', samples=n_samples,
               seed=base_seed, edges=edge_count)
  return EdgeFreeStats(
      edges=table.edges, degrees=table.degrees, free_counts=totals,
      n_samples=n_samples)


def exact_edge_free_frequencies(
    c: complex_lib.Complex3, tree_limit: int = 10**6) -> EdgeFreeStats:
  """Exact free fraction of every edge over all spanning trees."""
  kernel = collapse.CollapseKernel(c)
  totals = [0] * len(kernel.incidence.edges)
  trees = 0
  for tree in spanning.enumerate_spanning_trees(kernel.graph, tree_limit):
    trees += 1
    for e in kernel.free_edge_ids(tree.arcs):
      totals[e] += 1
  table = complex_lib.edge_table(c)
  return EdgeFreeStats(
      edges=table.edges, degrees=table.degrees, free_counts=totals,
      n_samples=trees)
