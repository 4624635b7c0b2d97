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
"""Tests for collapsar.core.concurrent."""

from concurrent import futures
import time
import unittest

from collapsar.core import component
from collapsar.core import concurrent


class Sampler(component.Component):
  label: str = 'trials'
  max_workers: int = component.contextual(default=1)


class WithContextAccessTest(unittest.TestCase):

  def test_context_access(self):
    inputs = [Sampler(), Sampler()]
    with futures.ThreadPoolExecutor() as executor:
      with component.use_settings(max_workers=6):
        self.assertEqual(
            list(
                executor.map(
                    concurrent.with_context_access(lambda x: x.max_workers),
                    inputs,
                )
            ),
            [6, 6],
        )


class IndexChunksTest(unittest.TestCase):

  def test_even_split(self):
    self.assertEqual(
        concurrent.index_chunks(6, 2), [range(0, 2), range(2, 4), range(4, 6)]
    )

  def test_ragged_split(self):
    chunks = concurrent.index_chunks(7, 3)
    self.assertEqual(chunks, [range(0, 3), range(3, 6), range(6, 7)])
    self.assertEqual(sum(len(c) for c in chunks), 7)

  def test_empty(self):
    self.assertEqual(concurrent.index_chunks(0, 5), [])

  def test_bad_chunk_size(self):
    with self.assertRaisesRegex(ValueError, '`chunk_size` must be positive'):
      concurrent.index_chunks(10, 0)


class ProgressTest(unittest.TestCase):

  def test_progress(self):
    p = concurrent.Progress(total=3)
    self.assertEqual(p.avg_duration, 0.0)
    p.update(concurrent.Job(lambda x: x, 1)())
    p.update(concurrent.Job(lambda x: 1 // x, 0)())

    self.assertEqual(p.succeeded, 1)
    self.assertEqual(p.failed, 1)
    self.assertEqual(p.completed, 2)
    self.assertIsInstance(p.last_error, ZeroDivisionError)
    status = p.status()
    self.assertEqual(status['Jobs'], '2/3')
    self.assertIn('ZeroDivisionError', status['LastError'])

  def test_job(self):
    job = concurrent.Job(lambda x: x * 2, 4)()
    self.assertEqual(job.result, 8)
    self.assertIsNone(job.error)
    self.assertGreaterEqual(job.elapse, 0.0)

  def test_progress_bar_off_main_thread(self):
    with futures.ThreadPoolExecutor() as executor:
      bar = executor.submit(concurrent.ProgressBar, 'scan', 3).result()
    self.assertFalse(bar.visible)
    bar.update(concurrent.Progress(total=3))
    bar.close()


class ConcurrentMapTest(unittest.TestCase):

  def test_unordered(self):
    results = sorted(
        (x, y) for x, y, _ in concurrent.concurrent_map(
            lambda x: x ** 2, range(5), max_workers=3
        )
    )
    self.assertEqual(results, [(0, 0), (1, 1), (2, 4), (3, 9), (4, 16)])

  def test_ordered(self):
    def fun(x):
      time.sleep(0.01 * (5 - x))
      return x * 10

    self.assertEqual(
        [y for _, y, _ in concurrent.concurrent_map(
            fun, range(5), max_workers=5, ordered=True)],
        [0, 10, 20, 30, 40],
    )

  def test_bad_worker_count(self):
    with self.assertRaisesRegex(ValueError, '`max_workers` must be positive'):
      list(concurrent.concurrent_map(lambda x: x, [1], max_workers=0))

  def test_inline_single_worker(self):
    self.assertEqual(
        list(concurrent.concurrent_map(lambda x: -x, [1, 2], max_workers=1)),
        [(1, -1, None), (2, -2, None)],
    )

  def test_raise_on_error(self):
    with self.assertRaises(ZeroDivisionError):
      list(concurrent.concurrent_map(
          lambda x: 1 // x, [1, 0, 2], max_workers=2, silence_on_errors=None))

  def test_silence_on_errors(self):
    results = {
        x: (y, e) for x, y, e in concurrent.concurrent_map(
            lambda x: 1 // x, [1, 0], max_workers=2)
    }
    self.assertEqual(results[1], (1, None))
    self.assertIsInstance(results[0][1], ZeroDivisionError)

  def test_settings_carried_to_workers(self):
    sampler = Sampler()
    with component.use_settings(max_workers=9):
      values = [
          y for _, y, _ in concurrent.concurrent_map(
              lambda _: sampler.max_workers, range(3), max_workers=3)
      ]
    self.assertEqual(values, [9, 9, 9])

  def test_show_progress(self):
    results = sorted(
        y for _, y, _ in concurrent.concurrent_map(
            lambda x: x + 1, range(4), max_workers=2, show_progress=True,
            label='trials',
        )
    )
    self.assertEqual(results, [1, 2, 3, 4])


if __name__ == '__main__':
  unittest.main()
