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
"""The `collapsar` command line.

Exit codes: 0 on success, 2 on input or usage errors and 3 when a resource
limit (such as the spanning tree limit) refuses the computation.
"""

import argparse
import os
import sys
import time
from typing import Any, Callable, Sequence

import collapsar
from collapsar.cli import manifest as manifest_lib
from collapsar.core import anneal
from collapsar.core import catalog
from collapsar.core import complex as complex_lib
from collapsar.core import component
from collapsar.core import console
from collapsar.core import errors
from collapsar.core import estimate
from collapsar.core import invariants
from collapsar.core import logging
from collapsar.core import text_formatting
import pyglove as pg


EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_REFUSED = 3

WORKERS_ENV = 'COLLAPSAR_WORKERS'


class _Run:
  """Per-command state: parsed flags, manifest and outputs."""

  def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
    self.args = args
    self.manifest = manifest_lib.RunManifest.start(
        args.command_name,
        list(argv),
        getattr(args, 'input', None),
        seed=getattr(args, 'seed', None),
        samples=getattr(args, 'samples', None),
        version=collapsar.__version__,
    )
    self.outputs = []

  def emit(self, payload: Any) -> None:
    """Prints a JSON document to stdout."""
    sys.stdout.write(pg.to_json_str(payload, json_indent=2) + '\n')

  def write_json(self, path: str, payload: Any) -> None:
    pg.io.writefile(path, pg.to_json_str(payload, json_indent=2))
    self.outputs.append(path)

  def load_input(self) -> complex_lib.Complex3:
    path = self.args.input
    if not pg.io.path_exists(path):
      raise errors.ValidationError(f'input file {path!r} does not exist.')
    return complex_lib.load_complex(path)

  def finish(self, exit_code: int, wall_time: float) -> None:
    args = self.args
    if getattr(args, 'no_manifest', False):
      return
    path = args.manifest or manifest_lib.manifest_path(
        getattr(args, 'out', None))
    self.manifest.clone(override={
        'wall_time': wall_time,
        'outputs': self.outputs,
        'exit_code': exit_code,
    }).write(path)


def _check_removed_facet(run: _Run, c: complex_lib.Complex3) -> None:
  i = getattr(run.args, 'remove_facet', None)
  if i is not None and not 0 <= i < c.facet_count:
    raise errors.DomainError(
        f'--remove-facet must be in [0, {c.facet_count}), got {i}.')


#
# Subcommands.
#


def cmd_estimate(run: _Run) -> int:
  args = run.args
  c = run.load_input()
  _check_removed_facet(run, c)
  result = estimate.estimate_collapsing_probability(
      c, args.samples, args.seed, first_index=args.first_index)
  payload = result.to_json(args.error_probability)
  run.emit(payload)
  if args.out:
    run.write_json(args.out, payload)
  return EXIT_OK


def cmd_exact(run: _Run) -> int:
  args = run.args
  c = run.load_input()
  _check_removed_facet(run, c)
  result = estimate.exact_collapsing_probability(c, args.tree_limit)
  payload = result.to_json()
  run.emit(payload)
  if args.out:
    run.write_json(args.out, payload)
  return EXIT_OK


def cmd_edge_stats(run: _Run) -> int:
  args = run.args
  c = run.load_input()
  _check_removed_facet(run, c)
  if args.exact:
    stats = estimate.exact_edge_free_frequencies(c, args.tree_limit)
  else:
    stats = estimate.edge_free_frequencies(c, args.samples, args.seed)
  violations = stats.violations(args.sigmas)
  if violations:
    logging.warning(
        'edges below the free-edge lower bound', edges=len(violations),
        sigmas=args.sigmas)
  if args.out:
    stats.write_csv(args.out)
    run.outputs.append(args.out)
  else:
    sys.stdout.write(stats.to_dataframe().to_csv(index=False))
  return EXIT_OK


def cmd_variance(run: _Run) -> int:
  c = run.load_input()
  payload = invariants.edge_variance(c).to_json()
  payload['f_vector'] = list(complex_lib.f_vector(c).to_tuple())
  payload['neighbourly'] = {
      '2': invariants.is_k_neighbourly(c, 2),
      '3': invariants.is_k_neighbourly(c, 3),
  }
  run.emit(payload)
  if run.args.out:
    run.write_json(run.args.out, payload)
  return EXIT_OK


def cmd_anneal(run: _Run) -> int:
  args = run.args
  c = run.load_input()
  cfg = anneal.AnnealConfig(
      direction='maximize' if args.then_estimate else args.direction,
      max_moves=args.moves,
      initial_temperature=args.temperature,
      cooling_factor=args.cooling,
      reheat_period=args.reheat,
      ascent_moves=args.ascent_moves,
      seed=args.seed,
      debug=args.debug,
  )
  if args.portfolio > 1:
    seeds = [args.seed + i for i in range(args.portfolio)]
    result = anneal.anneal_portfolio(c, cfg, seeds)
  else:
    result = anneal.anneal_edge_variance(c, cfg)
  run.outputs.extend(result.write(args.out))
  fraction_str = text_formatting.fraction_str
  payload = {
      'direction': cfg.direction,
      'seed': result.seed,
      'accepted_moves': len(result.move_log),
      'initial_variance': fraction_str(result.initial_variance),
      'best_variance': fraction_str(result.best_variance),
      'best_f_vector': list(result.best_complex.f_vector.to_tuple()),
  }
  if args.then_estimate:
    before = estimate.estimate_collapsing_probability(
        c, args.then_estimate, args.seed)
    after = estimate.estimate_collapsing_probability(
        result.best_complex, args.then_estimate, args.seed)
    payload['estimate'] = {
        'input': before.to_json(),
        'best': after.to_json(),
    }
    if after.p_hat < before.p_hat:
      logging.warning(
          'pre-conditioning lowered the collapsing probability',
          before=float(before.p_hat), after=float(after.p_hat))
  run.emit(payload)
  return EXIT_OK


def cmd_catalog_verify(run: _Run) -> int:
  results = catalog.verify_catalog(run.args.orders)
  payload = {
      'entries': len(results),
      'passed': sum(r.ok for _, r in results),
      'failed': {e.name: r.failed() for e, r in results if not r.ok},
  }
  run.emit(payload)
  return EXIT_OK if payload['passed'] == payload['entries'] else (
      EXIT_INPUT_ERROR)


def cmd_catalog_scan(run: _Run) -> int:
  c = run.load_input()
  results = catalog.scan_for_obstructions(c)
  payload = {
      'results': [r.to_json(name) for name, r in results],
      'verdict': catalog.scan_verdict(c, results),
  }
  run.emit(payload)
  if run.args.out:
    run.write_json(run.args.out, payload)
  return EXIT_OK


def cmd_catalog_export(run: _Run) -> int:
  paths = catalog.export_catalog(run.args.out)
  run.outputs.extend(paths)
  run.emit({'written': len(paths), 'directory': run.args.out})
  return EXIT_OK


def cmd_catalog_identify(run: _Run) -> int:
  path = run.args.input
  if not pg.io.path_exists(path):
    raise errors.ValidationError(f'input file {path!r} does not exist.')
  triangles = complex_lib.read_facet_list(complex_lib.read_text(path), arity=3)
  entry = catalog.identify_obstruction(triangles)
  run.emit({
      'found': entry is not None,
      'name': entry.name if entry else None,
      'family': entry.family if entry else None,
  })
  return EXIT_OK


def cmd_convert(run: _Run) -> int:
  args = run.args
  c = run.load_input()
  text = complex_lib.serialize_facets(c, args.to)
  if args.out:
    pg.io.writefile(args.out, text)
    run.outputs.append(args.out)
  else:
    sys.stdout.write(text if text.endswith('\n') else text + '\n')
  return EXIT_OK


#
# Argument parsing.
#


def _default_workers() -> int:
  value = os.environ.get(WORKERS_ENV)
  if not value:
    return 1
  try:
    return max(1, int(value))
  except ValueError:
    return 1


def _common_flags() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(add_help=False)
  parser.add_argument(
      '--log-level', default='info',
      choices=['debug', 'info', 'warning', 'error', 'fatal'],
      help='Minimum level of log entries written to stderr.')
  parser.add_argument(
      '--manifest', default=None,
      help='Path of the run manifest. Defaults to `<out>.manifest.json`.')
  parser.add_argument(
      '--no-manifest', action='store_true', help='Skip the run manifest.')
  return parser


def _trial_flags() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(add_help=False)
  parser.add_argument(
      '--workers', type=int, default=_default_workers(),
      help=f'Worker threads (default: ${WORKERS_ENV} or 1).')
  parser.add_argument(
      '--chunk-size', type=int, default=1000, help='Trials per job.')
  parser.add_argument(
      '--progress', action='store_true', help='Show a progress bar.')
  parser.add_argument(
      '--remove-facet', type=int, default=None,
      help='Facet removed to obtain the 3-ball. Defaults to the tree root.')
  return parser


def build_parser() -> argparse.ArgumentParser:
  """Returns the parser of all subcommands."""
  parser = argparse.ArgumentParser(
      prog='collapsar',
      description='Random discrete Morse theory experiments on 3-spheres.')
  parser.add_argument(
      '--version', action='version', version=collapsar.__version__)
  common = _common_flags()
  trials = _trial_flags()
  commands = parser.add_subparsers(dest='command', required=True)

  def add(name, handler, help_text, parents=(common,)):
    p = commands.add_parser(name, parents=list(parents), help=help_text)
    if handler is not None:
      p.set_defaults(handler=handler, command_name=name)
    return p

  p = add('estimate', cmd_estimate, 'Estimate the collapsing probability.',
          (common, trials))
  p.add_argument('--input', required=True)
  p.add_argument('--samples', type=int, required=True)
  p.add_argument('--seed', type=int, default=0)
  p.add_argument('--first-index', type=int, default=0,
                 help='Index of the first trial, to extend an earlier run.')
  p.add_argument('--error-probability', type=float,
                 default=estimate.DEFAULT_ERROR_PROBABILITY)
  p.add_argument('--out', default=None)

  p = add('exact', cmd_exact, 'Exact collapsing probability by enumeration.',
          (common, trials))
  p.add_argument('--input', required=True)
  p.add_argument('--tree-limit', type=int, default=10**6)
  p.add_argument('--out', default=None)

  p = add('edge-stats', cmd_edge_stats, 'Per-edge free frequencies as CSV.',
          (common, trials))
  p.add_argument('--input', required=True)
  p.add_argument('--samples', type=int, default=10**4)
  p.add_argument('--seed', type=int, default=0)
  p.add_argument('--exact', action='store_true',
                 help='Enumerate all spanning trees instead of sampling.')
  p.add_argument('--tree-limit', type=int, default=10**6)
  p.add_argument('--sigmas', type=float, default=3.0)
  p.add_argument('--out', default=None)

  p = add('variance', cmd_variance, 'Edge degree variance of a complex.')
  p.add_argument('--input', required=True)
  p.add_argument('--out', default=None)

  p = add('anneal', cmd_anneal, 'Anneal the edge variance by bistellar moves.',
          (common, trials))
  p.add_argument('--input', required=True)
  p.add_argument('--out', required=True, help='Output directory.')
  p.add_argument('--direction', choices=['minimize', 'maximize'],
                 default='minimize')
  p.add_argument('--moves', type=int, default=10000)
  p.add_argument('--temperature', type=float, default=1.0)
  p.add_argument('--cooling', type=float, default=0.99)
  p.add_argument('--reheat', type=int, default=500)
  p.add_argument('--ascent-moves', type=int, default=0)
  p.add_argument('--seed', type=int, default=0)
  p.add_argument('--debug', action='store_true',
                 help='Validate the complex after every accepted move.')
  p.add_argument('--portfolio', type=int, default=1,
                 help='Number of seeds run concurrently.')
  p.add_argument('--then-estimate', type=int, default=0, metavar='N',
                 help='Maximize the variance, then estimate with N samples.')

  p = add('catalog', None, 'Obstruction catalog tools.', ())
  catalog_commands = p.add_subparsers(dest='catalog_command', required=True)

  def add_catalog(name, handler, help_text):
    q = catalog_commands.add_parser(name, parents=[common], help=help_text)
    q.set_defaults(handler=handler, command_name=f'catalog {name}')
    return q

  q = add_catalog('verify', cmd_catalog_verify, 'Verify every catalog entry.')
  q.add_argument('--orders', type=int, default=1000)
  q = add_catalog('scan', cmd_catalog_scan,
                  'Search a sphere for catalog entries.')
  q.add_argument('--input', required=True)
  q.add_argument('--workers', type=int, default=_default_workers())
  q.add_argument('--out', default=None)
  q = add_catalog('export', cmd_catalog_export,
                  'Write one facet-list file per entry.')
  q.add_argument('--out', required=True, help='Output directory.')
  q = add_catalog('identify', cmd_catalog_identify,
                  'Name the catalog entry isomorphic to a 2-complex.')
  q.add_argument('--input', required=True)

  p = add('convert', cmd_convert, 'Convert between text and JSON facet lists.')
  p.add_argument('--input', required=True)
  p.add_argument('--to', choices=['text', 'json'], required=True)
  p.add_argument('--out', default=None)
  return parser


def _settings(args: argparse.Namespace) -> dict[str, Any]:
  settings = {}
  if getattr(args, 'workers', None) is not None:
    if args.workers < 1:
      raise errors.DomainError(
          f'--workers must be positive, got {args.workers}.')
    settings['max_workers'] = args.workers
  if getattr(args, 'chunk_size', None) is not None:
    if args.chunk_size < 1:
      raise errors.DomainError(
          f'--chunk-size must be positive, got {args.chunk_size}.')
    settings['chunk_size'] = args.chunk_size
  if getattr(args, 'progress', False):
    settings['show_progress'] = True
  return settings


def _report(e: Exception) -> None:
  if isinstance(e, errors.CollapsarError):
    console.write(e.format())
  else:
    console.write(f'{e.__class__.__name__}: {e}', color='magenta')


def main(argv: Sequence[str] | None = None) -> int:
  """Runs a command; returns its exit code."""
  argv = list(sys.argv[1:] if argv is None else argv)
  try:
    args = build_parser().parse_args(argv)
  except SystemExit as e:
    return e.code if isinstance(e.code, int) else EXIT_INPUT_ERROR

  handler: Callable[[_Run], int] = args.handler
  start = time.time()
  run = None
  with logging.use_log_level(args.log_level):
    try:
      run = _Run(args, argv)
      with component.use_settings(**_settings(args)):
        code = handler(run)
    except errors.RefusalError as e:
      _report(e)
      code = EXIT_REFUSED
    except (errors.CollapsarError, OSError) as e:
      _report(e)
      code = EXIT_INPUT_ERROR
    if run is not None:
      run.finish(code, time.time() - start)
  return code
