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
"""Collapsar errors."""

import io
from typing import Any, Sequence
from collapsar.core import text_formatting


class CollapsarError(RuntimeError):  # pylint: disable=g-bad-exception-name
  """Base class for all errors raised by collapsar."""

  def __init__(self, message: str, *, cause: Exception | None = None):
    super().__init__(message)
    self.message = message
    self.cause = cause

  def __str__(self) -> str:
    return self.format(colored=False)

  def details(self) -> list[tuple[str, Any]]:
    """Returns (title, value) pairs rendered below the message."""
    return []

  def format(self, colored: bool = True) -> str:
    """Formats the error, optionally with ANSI colors."""
    def _c(text, color=None, styles=None):
      if not colored:
        return text
      return text_formatting.colored(text, color, styles=styles)

    r = io.StringIO()
    r.write(_c(f'{self.__class__.__name__}: {self.message}', 'magenta'))
    for title, value in self.details():
      r.write('\n')
      r.write(_c(f'[{title}]', 'blue', styles=['bold']))
      r.write(' ')
      r.write(_c(str(value), 'blue'))
    if self.cause is not None:
      r.write('\n')
      r.write(_c('[Cause]', 'red', styles=['bold']))
      r.write(' ')
      r.write(_c(f'{self.cause.__class__.__name__}: {self.cause}', 'red'))
    return r.getvalue()


class ParseError(CollapsarError):
  """Malformed facet-list input."""

  def __init__(self, reason: str, line: int | None = None, text: str = ''):
    location = f'line {line}: ' if line is not None else ''
    super().__init__(f'{location}{reason}')
    self.reason = reason
    self.line = line
    self.text = text

  def details(self) -> list[tuple[str, Any]]:
    if self.text:
      return [('Input', repr(self.text))]
    return []


class ValidationError(CollapsarError):
  """A complex violates a structural precondition."""


class NotClosedError(ValidationError):
  """A triangle is not contained in exactly two facets."""

  def __init__(self, triangle: Sequence[int], facet_count: int):
    super().__init__(
        f'triangle {tuple(triangle)} lies in {facet_count} facet(s), '
        'expected exactly 2.'
    )
    self.triangle = tuple(triangle)
    self.facet_count = facet_count


class DisconnectedError(ValidationError):
  """The complex (or its dual graph) has more than one component."""

  def __init__(self, component_count: int, what: str = 'dual graph'):
    super().__init__(
        f'{what} has {component_count} connected components, expected 1.')
    self.component_count = component_count


class TreeMismatchError(ValidationError):
  """A spanning tree does not belong to the given complex."""


class RefusalError(CollapsarError):
  """A computation was refused because its size exceeds a configured limit."""

  def __init__(self, message: str, *, count: int, limit: int):
    super().__init__(message)
    self.count = count
    self.limit = limit

  def details(self) -> list[tuple[str, Any]]:
    return [('Count', self.count), ('Limit', self.limit)]


class DomainError(CollapsarError, ValueError):
  """An argument lies outside the domain of an operation."""


class IllegalMoveError(CollapsarError):
  """A bistellar move violates its legality condition."""

  def __init__(self, move: Any, condition: str):
    super().__init__(f'{condition} ({move})')
    self.move = move
    self.condition = condition
