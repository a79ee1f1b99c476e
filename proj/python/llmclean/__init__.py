# Copyright 2026 The LLMClean Authors
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

"""Context-driven error detection for tabular and IoT data."""

from ._llmclean import (
    BackendError,
    Dataset,
    EnsembleConfig,
    Error,
    Finding,
    GroundTruth,
    InputError,
    ModelError,
    Report,
    Rule,
    detect,
    extract_rules,
    find_best_ensemble,
    find_consensus,
    inject_errors,
    load_csv,
    loads_csv,
    parse_rule,
    parse_rule_file,
    render_rule,
    render_rule_file,
    run_cli,
    score_detection,
    score_micro_f1,
)

__all__ = [
    "BackendError",
    "Dataset",
    "EnsembleConfig",
    "Error",
    "Finding",
    "GroundTruth",
    "InputError",
    "ModelError",
    "Report",
    "Rule",
    "detect",
    "extract_rules",
    "find_best_ensemble",
    "find_consensus",
    "inject_errors",
    "load_csv",
    "loads_csv",
    "parse_rule",
    "parse_rule_file",
    "render_rule",
    "render_rule_file",
    "run_cli",
    "score_detection",
    "score_micro_f1",
]
