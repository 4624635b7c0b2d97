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
"""Worker pools and progress reporting for trial batches.

Monte Carlo chunks, catalog scans and annealing portfolios are dispatched as
jobs onto a thread pool. Every job sees the settings scope of the caller, and
results are yielded as `(input, output, error)` tuples.
"""

import concurrent.futures
import dataclasses
import threading
import time
from typing import Any, Callable, Iterable, Iterator, Tuple, Type, Union

from collapsar.core import component
import pyglove as pg
from tqdm import auto as tqdm


ErrorTypes = Union[Type[Exception], Tuple[Type[Exception], ...], None]


def with_context_access(func: Callable[..., Any]) -> Callable[..., Any]:
  """Wraps `func` so it runs under the settings scope of the caller."""
  with component.context() as current_context:
    pass

  def _func(*args, **kwargs) -> Any:
    with component.context(**current_context):
      return func(*args, **kwargs)

  return _func


def index_chunks(total: int, chunk_size: int) -> list[range]:
  """Splits trial indices [0, total) into consecutive ranges.

  Args:
    total: Number of trials.
    chunk_size: Max number of trials per range.

  Returns:
    A list of ranges covering [0, total) in order.
  """
  if chunk_size < 1:
    raise ValueError(f'`chunk_size` must be positive, got {chunk_size}.')
  return [
      range(start, min(start + chunk_size, total))
      for start in range(0, total, chunk_size)
  ]


@dataclasses.dataclass
class Job:
  """One call of the mapped function."""

  func: Callable[[Any], Any]
  arg: Any
  result: Any = pg.MISSING_VALUE
  error: Exception | None = None
  elapse: float = 0.0

  def __call__(self) -> 'Job':
    start = time.time()
    try:
      self.result = self.func(self.arg)
    except Exception as e:  # pylint: disable=broad-exception-caught
      self.error = e
    finally:
      self.elapse = time.time() - start
    return self


@dataclasses.dataclass
class Progress:
  """Counts of finished jobs."""

  total: int
  succeeded: int = 0
  failed: int = 0
  last_error: Exception | None = None
  total_duration: float = 0.0

  @property
  def completed(self) -> int:
    return self.succeeded + self.failed

  @property
  def avg_duration(self) -> float:
    if self.completed == 0:
      return 0.0
    return self.total_duration / self.completed

  def update(self, job: Job) -> None:
    if job.error is None:
      self.succeeded += 1
    else:
      self.failed += 1
      self.last_error = job.error
    self.total_duration += job.elapse

  def status(self) -> dict[str, str]:
    status = {
        'Jobs': f'{self.completed}/{self.total}',
        'AvgDuration': f'{self.avg_duration:.2f} seconds',
    }
    if self.last_error is not None:
      error_text = repr(self.last_error)
      if len(error_text) >= 64:
        error_text = error_text[:64] + '...'
      status['LastError'] = error_text
    return status


class ProgressBar:
  """A tqdm bar that is only drawn from the main thread.

  Maps nested inside worker threads get a silent bar, so tqdm output is never
  interleaved across threads.
  """

  def __init__(self, label: str | None, total: int, enabled: bool = True):
    self._bar = None
    if enabled and threading.current_thread() is threading.main_thread():
      self._bar = tqdm.tqdm(total=total, desc=label)

  @property
  def visible(self) -> bool:
    return self._bar is not None

  def update(self, progress: Progress) -> None:
    if self._bar is not None:
      self._bar.update(1)
      self._bar.set_postfix(progress.status(), refresh=True)

  def close(self) -> None:
    if self._bar is not None:
      self._bar.close()
      self._bar = None


def _check_error(job: Job, silence_on_errors: ErrorTypes) -> None:
  if job.error is not None and not (
      silence_on_errors and isinstance(job.error, silence_on_errors)):
    raise job.error


def concurrent_map(
    func: Callable[[Any], Any],
    parallel_inputs: Iterable[Any],
    *,
    max_workers: int = 32,
    ordered: bool = False,
    show_progress: bool = False,
    label: str | None = None,
    silence_on_errors: ErrorTypes = Exception,
) -> Iterator[tuple[Any, Any, Exception | None]]:
  """Maps inputs through `func` on a thread pool under the current settings.

  Args:
    func: A function of one input.
    parallel_inputs: Inputs to process.
    max_workers: Number of worker threads. With 1 worker, inputs are processed
      inline in the calling thread, in order.
    ordered: Whether to yield in input order. Otherwise results are yielded
      as they complete.
    show_progress: Whether to show a progress bar.
    label: Label of the progress bar.
    silence_on_errors: Errors of these types are returned as the third
      element of the tuple. Other errors are raised. If None, every error is
      raised.

  Yields:
    (input, output, error) tuples.

  Raises:
    Exception: The first error not matched by `silence_on_errors`.
  """
  if max_workers < 1:
    raise ValueError(f'`max_workers` must be positive, got {max_workers}.')
  inputs = list(parallel_inputs)
  progress = Progress(total=len(inputs))
  bar = ProgressBar(label, len(inputs), enabled=show_progress)

  def finished(job: Job) -> tuple[Any, Any, Exception | None]:
    _check_error(job, silence_on_errors)
    progress.update(job)
    bar.update(progress)
    return job.arg, job.result, job.error

  try:
    if max_workers == 1:
      for x in inputs:
        yield finished(Job(func, x)())
      return

    executor = concurrent.futures.ThreadPoolExecutor(max_workers=max_workers)
    try:
      futures = [
          executor.submit(with_context_access(Job(func, x))) for x in inputs
      ]
      done = futures if ordered else concurrent.futures.as_completed(futures)
      for future in done:
        yield finished(future.result())
    finally:
      executor.shutdown(wait=False, cancel_futures=True)
  finally:
    bar.close()
