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
"""Shipped fixtures: the 8-vertex obstruction catalog and test spheres.

The catalog holds the contractible non-collapsible 2-complexes with 8
vertices and 18 triangles: 19 saw-blade complexes (Types I, II and III with
four, three and two blades) and 61 dunce hats. Data files are guarded by
sha256 checksums.
"""

import functools
import hashlib
import os
from typing import Annotated, Literal

from collapsar.core import collapse
from collapsar.core import complex as complex_lib
from collapsar.core import errors
import pyglove as pg


DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')

OBSTRUCTIONS_FILE = 'obstructions_18.txt'
OBSTRUCTIONS_SHA256 = (
    'f8dbfa1573b374437ee3faf80899b301ab9fb838d6b74f95815ceb2883b31efe')

SPHERE_15_FILE = 'sphere_15.txt'
SPHERE_15_SHA256 = (
    'dbf3ceb2794a0be2e0f8ad87f9d5640b22a733af05eac6e505ae6f8d39d5433b')

Family = Literal[
    'dunce-hat', 'saw-blade-2', 'saw-blade-3', 'saw-blade-4', 'unknown']


def _read_checked(filename: str, sha256: str) -> str:
  path = os.path.join(DATA_DIR, filename)
  content = pg.io.readfile(path, mode='rb')
  digest = hashlib.sha256(content).hexdigest()
  if digest != sha256:
    raise errors.ValidationError(
        f'checksum mismatch for {filename}: expected {sha256}, got {digest}.')
  return content.decode('utf-8')


@pg.use_init_args(['name', 'family', 'triangles'])
class ObstructionEntry(pg.Object):
  """A named contractible non-collapsible 2-complex."""

  name: Annotated[str, 'Entry name, e.g. "sawblade-I-1" or "duncehat-18-07".']
  family: Annotated[Family, 'Combinatorial family.'] = 'unknown'
  triangles: Annotated[
      list[tuple[int, int, int]], 'Triangles in listing order.'] = []

  @functools.cached_property
  def facet_tuples(self) -> tuple[complex_lib.Facet, ...]:
    return tuple(tuple(sorted(t)) for t in self.triangles)

  def two_complex(self) -> collapse.TwoComplex:
    """Returns a fresh mutable copy of the complex."""
    return collapse.TwoComplex(self.facet_tuples)

  @property
  def vertex_count(self) -> int:
    return len({x for t in self.facet_tuples for x in t})

  def to_text(self) -> str:
    lines = [f'# name: {self.name}', f'# family: {self.family}']
    lines.extend(' '.join(str(x) for x in t) for t in self.facet_tuples)
    return '\n'.join(lines) + '\n'


def parse_catalog(text: str) -> list[ObstructionEntry]:
  """Parses blocks of `# name:` / `# family:` headers and triangle lines."""
  entries = []
  name, family, block = None, 'unknown', []

  def flush():
    if name is not None:
      facets = complex_lib.read_facet_list('\n'.join(block), arity=3)
      entries.append(ObstructionEntry(name, family, facets))

  for line in text.splitlines():
    content = line.strip()
    if content.startswith('# name:'):
      flush()
      name = content[len('# name:'):].strip()
      family, block = 'unknown', []
    elif content.startswith('# family:'):
      family = content[len('# family:'):].strip()
    elif content and not content.startswith('#'):
      if name is None:
        raise errors.ParseError('triangle listed before any entry name',
                                text=line)
      block.append(content)
  flush()
  return entries


@functools.cache
def _catalog() -> tuple[ObstructionEntry, ...]:
  entries = []
  forms = set()
  for entry in parse_catalog(_read_checked(
      OBSTRUCTIONS_FILE, OBSTRUCTIONS_SHA256)):
    form = complex_lib.canonical_form(entry)
    if form not in forms:
      forms.add(form)
      entries.append(entry)
  return tuple(entries)


def load_catalog() -> list[ObstructionEntry]:
  """Returns the catalog entries, deduplicated by canonical form."""
  return list(_catalog())


def get_entry(name: str) -> ObstructionEntry:
  for entry in _catalog():
    if entry.name == name:
      return entry
  raise KeyError(f'No catalog entry named {name!r}.')


@functools.cache
def _canonical_index() -> dict[tuple[complex_lib.Facet, ...], str]:
  return {complex_lib.canonical_form(e): e.name for e in _catalog()}


def identify_obstruction(c) -> ObstructionEntry | None:
  """Returns the catalog entry isomorphic to a 2-complex, if any.

  Args:
    c: A `TwoComplex`, an entry or a triangle list.

  Returns:
    The matching entry, or None when the complex is not in the catalog.
  """
  facets = complex_lib.facet_tuples(c)
  vertices = {x for f in facets for x in f}
  if len(vertices) != 8 or len(facets) != 18:
    return None
  name = _canonical_index().get(complex_lib.canonical_form(facets))
  return None if name is None else get_entry(name)


def export_catalog(directory: str) -> list[str]:
  """Writes one facet-list file per entry; returns the file paths."""
  pg.io.mkdirs(directory, exist_ok=True)
  paths = []
  for entry in _catalog():
    path = os.path.join(directory, f'{entry.name}.facets')
    pg.io.writefile(path, entry.to_text())
    paths.append(path)
  return paths


@functools.cache
def sphere_15() -> complex_lib.Complex3:
  """The 15-vertex 3-sphere with f-vector (15, 105, 180, 90)."""
  return complex_lib.parse_facets(
      _read_checked(SPHERE_15_FILE, SPHERE_15_SHA256))


def boundary_4_simplex() -> complex_lib.Complex3:
  """The boundary of the 4-simplex, the 5-vertex 3-sphere."""
  return complex_lib.Complex3(complex_lib.boundary_of_simplex(3))
