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
"""Console output for diagnostics.

Diagnostics go to stderr; stdout is reserved for command results.
"""

import sys
from typing import Any, TextIO
from collapsar.core.text_formatting import colored


def write(
    value: Any,
    *,
    title: str | None = None,
    color: str | None = None,
    styles: list[str] | None = None,
    file: TextIO | None = None,
) -> None:
  """Writes a value to the console.

  Args:
    value: The value. Non-strings are written as `str(value)`.
    title: An optional title written in bold on its own line.
    color: Text color, e.g. 'red' or 'magenta'.
    styles: Text styles, e.g. ['bold'].
    file: Target stream. Defaults to `sys.stderr` at call time.
  """
  file = file or sys.stderr
  if title is not None:
    file.write(colored(title, styles=['bold']) + '\n')
  file.write(colored(str(value), color=color, styles=styles) + '\n')


try:
  _notebook = sys.modules['IPython'].display
except Exception:  # pylint: disable=broad-except
  _notebook = None


def under_notebook() -> bool:
  return bool(_notebook)


def display(value: Any) -> None:
  """Shows a value in the current notebook cell."""
  if _notebook is not None:
    _notebook.display(value)
