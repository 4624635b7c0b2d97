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
"""Collapsar."""

# pylint: disable=g-bad-import-order
# pylint: disable=g-import-not-at-top
# pylint: disable=unused-import
from collapsar.core import *
from collapsar.core import catalog

ObstructionEntry = catalog.ObstructionEntry
load_catalog = catalog.load_catalog
verify_obstruction = catalog.verify_obstruction
find_embedding = catalog.find_embedding
scan_for_obstructions = catalog.scan_for_obstructions
sphere_15 = catalog.sphere_15
boundary_4_simplex = catalog.boundary_4_simplex

# pylint: enable=unused-import
# pylint: enable=g-import-not-at-top
# pylint: enable=g-bad-import-order

__version__ = "0.1.0"
