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
"""The core collapsar module.

Symbols with name `collapsar.core.*` are also exposed as `collapsar.*`.
"""

# pylint: disable=g-bad-import-order
# pylint: disable=g-importing-member
# pylint: disable=g-import-not-at-top

# Components with contextual settings.
from collapsar.core.component import Component
from collapsar.core.component import context
from collapsar.core.component import use_settings
from collapsar.core.component import contextual
from collapsar.core.component import context_value

# Concurrent execution.
from collapsar.core import concurrent
from collapsar.core.concurrent import concurrent_map
from collapsar.core.concurrent import with_context_access

# Console and logging.
from collapsar.core import console
from collapsar.core import logging
from collapsar.core.text_formatting import colored
from collapsar.core.text_formatting import decolored

# Errors.
from collapsar.core.errors import CollapsarError
from collapsar.core.errors import ParseError
from collapsar.core.errors import ValidationError
from collapsar.core.errors import NotClosedError
from collapsar.core.errors import DisconnectedError
from collapsar.core.errors import TreeMismatchError
from collapsar.core.errors import RefusalError
from collapsar.core.errors import DomainError
from collapsar.core.errors import IllegalMoveError

# Complexes.
from collapsar.core.complex import Complex3
from collapsar.core.complex import FVector
from collapsar.core.complex import EdgeTable
from collapsar.core.complex import DualGraph
from collapsar.core.complex import ManifoldReport
from collapsar.core.complex import read_facet_list
from collapsar.core.complex import parse_facets
from collapsar.core.complex import load_complex
from collapsar.core.complex import serialize_facets
from collapsar.core.complex import boundary_of_simplex
from collapsar.core.complex import f_vector
from collapsar.core.complex import edge_table
from collapsar.core.complex import triangle_facets
from collapsar.core.complex import dual_graph
from collapsar.core.complex import is_closed_3_manifold
from collapsar.core.complex import relabel
from collapsar.core.complex import canonical_form

# Spanning trees.
from collapsar.core.spanning import SpanningTree
from collapsar.core.spanning import TreeCount
from collapsar.core.spanning import mix_seed
from collapsar.core.spanning import wilson_sample
from collapsar.core.spanning import count_spanning_trees
from collapsar.core.spanning import enumerate_spanning_trees

# Collapses.
from collapsar.core.collapse import TwoComplex
from collapsar.core.collapse import CollapseOutcome
from collapsar.core.collapse import CollapseKernel
from collapsar.core.collapse import greedy_collapse
from collapsar.core.collapse import free_edges
from collapsar.core.collapse import replay_removal_log
from collapsar.core.collapse import collapse_along_tree
from collapsar.core.collapse import tree_collapse_sequence
from collapsar.core.collapse import trial

# Invariants.
from collapsar.core.invariants import VarianceReport
from collapsar.core.invariants import F2Homology
from collapsar.core.invariants import ObstructionBounds
from collapsar.core.invariants import f2_homology
from collapsar.core.invariants import edge_variance
from collapsar.core.invariants import variance_from_histogram
from collapsar.core.invariants import is_k_neighbourly
from collapsar.core.invariants import obstruction_size_bounds
from collapsar.core.invariants import is_consistent_with_contractible
from collapsar.core.invariants import is_certified_extendably_collapsible

# Estimation.
from collapsar.core.estimate import Estimate
from collapsar.core.estimate import ExactProbability
from collapsar.core.estimate import EdgeFreeStats
from collapsar.core.estimate import TrialRunner
from collapsar.core.estimate import chebyshev_deviation_bound
from collapsar.core.estimate import chebyshev_epsilon
from collapsar.core.estimate import free_edge_lower_bound
from collapsar.core.estimate import estimate_collapsing_probability
from collapsar.core.estimate import exact_collapsing_probability
from collapsar.core.estimate import edge_free_frequencies
from collapsar.core.estimate import exact_edge_free_frequencies

# Bistellar moves and annealing.
from collapsar.core.anneal import MoveSpec
from collapsar.core.anneal import AnnealConfig
from collapsar.core.anneal import AnnealResult
from collapsar.core.anneal import legal_moves
from collapsar.core.anneal import check_move
from collapsar.core.anneal import apply_move
from collapsar.core.anneal import anneal_edge_variance
from collapsar.core.anneal import anneal_portfolio

# Obstruction catalog.
from collapsar.core import catalog

# pylint: enable=g-import-not-at-top
# pylint: enable=g-importing-member
# pylint: enable=g-bad-import-order
