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
"""Collapsar components and scoped settings.

Runners such as the trial sampler are `Component`s. Attributes declared with
`contextual()` take their values from the enclosing `use_settings` scope, so a
caller can change worker counts or progress display without threading
arguments through every function:

  with collapsar.use_settings(max_workers=8, show_progress=True):
    collapsar.estimate_collapsing_probability(sphere, 10**6, base_seed=7)

Scopes are thread-local. `concurrent.with_context_access` carries the scope
of a caller into worker threads.
"""

import contextlib
import dataclasses
import threading
from typing import Annotated, Any, ContextManager, Iterator, Type
import pyglove as pg


class Component(pg.Object):
  """Base class for collapsar components."""

  # Show resolved contextual values in repr and str.
  __repr_format_kwargs__ = dict(compact=True, use_inferred=True)
  __str_format_kwargs__ = dict(compact=False, verbose=False, use_inferred=True)

  def _sym_inferred(self, key: str, **kwargs):
    """Resolves a contextual attribute.

    Lookup order: a `use_settings` override, then the containing component
    chain, then a `context` value, then the attribute default.

    Args:
      key: Attribute name.
      **kwargs: Forwarded to pyglove's inference.

    Returns:
      The resolved value.

    Raises:
      AttributeError: If the attribute is not declared.
    """
    if key not in self._sym_attributes:
      raise AttributeError(key)
    override = _scoped_settings().get(key)
    if override is not None and override.override_attrs:
      return override.value
    return super()._sym_inferred(key, context_override=override, **kwargs)


@dataclasses.dataclass(frozen=True)
class ContextualOverride:
  """A value provided for contextual attributes within a scope."""

  value: Any

  # Wins over values given by nested scopes.
  cascade: bool = False

  # Also replaces values bound on the component itself.
  override_attrs: bool = False


_tls = threading.local()


def _scoped_settings() -> dict[str, ContextualOverride]:
  return getattr(_tls, 'settings', {})


@contextlib.contextmanager
def _settings_scope(
    overrides: dict[str, ContextualOverride]
) -> Iterator[dict[str, ContextualOverride]]:
  previous = _scoped_settings()
  current = dict(previous)
  for name, override in overrides.items():
    outer = previous.get(name)
    current[name] = outer if outer is not None and outer.cascade else override
  _tls.settings = current
  try:
    yield current
  finally:
    _tls.settings = previous


def context(
    *,
    cascade: bool = False,
    override_attrs: bool = False,
    **variables,
) -> ContextManager[dict[str, ContextualOverride]]:
  """Provides values for contextual attributes within a scope.

  Args:
    cascade: Whether these values win over nested scopes.
    override_attrs: Whether these values also replace attribute values bound
      on components. Otherwise they only fill attributes left unset.
    **variables: Attribute names and values. A `ContextualOverride` is used
      as given.

  Returns:
    A context manager yielding the settings in effect inside the scope.
  """
  overrides = {
      name: v if isinstance(v, ContextualOverride) else ContextualOverride(
          v, cascade, override_attrs)
      for name, v in variables.items()
  }
  return _settings_scope(overrides)


def use_settings(
    *,
    cascade: bool = False,
    **settings,
) -> ContextManager[dict[str, ContextualOverride]]:
  """Overrides component settings (e.g. `max_workers`) within a scope."""
  return context(cascade=cascade, override_attrs=True, **settings)


_RAISE = object()


def context_value(name: str, default: Any = _RAISE) -> Any:
  """Returns a setting of the current scope, or `default` when unset."""
  override = _scoped_settings().get(name)
  if override is not None:
    return override.value
  if default is _RAISE:
    raise KeyError(f'{name!r} does not exist in current context.')
  return default


class ContextualAttribute(pg.symbolic.ValueFromParentChain):
  """An attribute whose value comes from the settings scope."""

  NO_DEFAULT = (pg.MISSING_VALUE,)

  type: Annotated[Type[Any] | None, 'An optional type constraint.'] = None

  default: Any = NO_DEFAULT

  def value_from(
      self,
      parent,
      *,
      context_override: ContextualOverride | None = None,
      **kwargs,
  ):
    if parent not in (None, self.sym_parent) and isinstance(parent, Component):
      return super().value_from(parent, **kwargs)
    if parent is None:
      if context_override:
        return context_override.value
      if self.default == ContextualAttribute.NO_DEFAULT:
        return pg.MISSING_VALUE
      return self.default
    return pg.MISSING_VALUE


def contextual(
    type: Type[Any] | None = None,  # pylint: disable=redefined-builtin
    default: Any = ContextualAttribute.NO_DEFAULT,
) -> Any:
  """Declares a contextual attribute, e.g. `contextual(default=1)`."""
  return ContextualAttribute(type=type, default=default, allow_partial=True)
