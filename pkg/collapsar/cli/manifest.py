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
"""Run manifests written next to every command's output."""

import datetime
import hashlib
import os
from typing import Annotated, Any

import pyglove as pg


def file_sha256(path: str) -> str:
  return hashlib.sha256(pg.io.readfile(path, mode='rb')).hexdigest()


def manifest_path(out: str | None) -> str:
  """Returns `<out>.manifest.json`, or `manifest.json` without an output."""
  if out is None:
    return os.path.join(os.getcwd(), 'manifest.json')
  return f'{out.rstrip("/")}.manifest.json'


class RunManifest(pg.Object):
  """What a command read, how it was seeded and what it wrote."""

  command: Annotated[str, 'Subcommand name, e.g. "estimate".']
  argv: Annotated[list[str], 'Command-line arguments after the program.'] = []
  input_path: str | None = None
  input_sha256: str | None = None
  seed: int | None = None
  samples: int | None = None
  version: str = ''
  started_at: Annotated[
      str | None, 'ISO timestamp of the start of the run.'] = None
  wall_time: Annotated[float, 'Seconds spent.'] = 0.0
  outputs: list[str] = []
  exit_code: int = 0

  def to_json(self) -> dict[str, Any]:
    return {
        'command': self.command,
        'argv': list(self.argv),
        'input': {'path': self.input_path, 'sha256': self.input_sha256},
        'seed': self.seed,
        'samples': self.samples,
        'version': self.version,
        'started_at': self.started_at,
        'wall_time': self.wall_time,
        'outputs': list(self.outputs),
        'exit_code': self.exit_code,
    }

  def write(self, path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
      pg.io.mkdirs(parent, exist_ok=True)
    pg.io.writefile(path, pg.to_json_str(self.to_json(), json_indent=2))

  @classmethod
  def start(
      cls, command: str, argv: list[str], input_path: str | None = None,
      **kwargs) -> 'RunManifest':
    digest = None
    if input_path is not None and pg.io.path_exists(input_path):
      digest = file_sha256(input_path)
    return cls(
        command=command,
        argv=argv,
        input_path=input_path,
        input_sha256=digest,
        started_at=datetime.datetime.now().isoformat(),
        **kwargs)
