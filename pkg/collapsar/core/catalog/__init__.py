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
"""Obstruction catalog, shipped spheres and embedding search."""

# pylint: disable=g-importing-member
# pylint: disable=g-bad-import-order

from collapsar.core.catalog.base import ObstructionEntry
from collapsar.core.catalog.base import load_catalog
from collapsar.core.catalog.base import get_entry
from collapsar.core.catalog.base import parse_catalog
from collapsar.core.catalog.base import identify_obstruction
from collapsar.core.catalog.base import export_catalog
from collapsar.core.catalog.base import sphere_15
from collapsar.core.catalog.base import boundary_4_simplex

from collapsar.core.catalog.verification import Check
from collapsar.core.catalog.verification import ObstructionReport
from collapsar.core.catalog.verification import verify_obstruction
from collapsar.core.catalog.verification import verify_catalog

from collapsar.core.catalog.embedding import EmbeddingResult
from collapsar.core.catalog.embedding import ObstructionScan
from collapsar.core.catalog.embedding import iter_embeddings
from collapsar.core.catalog.embedding import find_embedding
from collapsar.core.catalog.embedding import scan_for_obstructions
from collapsar.core.catalog.embedding import scan_verdict

# pylint: enable=g-importing-member
# pylint: enable=g-bad-import-order
