// Copyright 2026 The LLMClean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "llmclean/cli.hpp"
#include "llmclean/context_gen.hpp"
#include "llmclean/context_graph.hpp"
#include "llmclean/dataset.hpp"
#include "llmclean/detection.hpp"
#include "llmclean/ensemble.hpp"
#include "llmclean/error.hpp"
#include "llmclean/eval.hpp"
#include "llmclean/rule.hpp"

namespace py = pybind11;
using namespace llmclean;

namespace {

// Python cell: None, str, float (ints accepted). Timestamps come back as
// ISO strings.
CellValue to_cell(const py::handle& v) {
  if (v.is_none()) return Missing{};
  if (py::isinstance<py::bool_>(v)) throw py::type_error("bool cells are not supported");
  if (py::isinstance<py::int_>(v) || py::isinstance<py::float_>(v)) return number_cell(v.cast<double>());
  if (py::isinstance<py::str>(v)) return v.cast<std::string>();
  throw py::type_error("cells must be None, str, int or float");
}

py::object from_cell(const CellValue& v) {
  if (is_missing(v)) return py::none();
  if (const auto* d = std::get_if<double>(&v)) return py::float_(*d);
  return py::str(render_cell(v));
}

Dataset make_dataset(std::vector<std::string> headers, const py::iterable& rows) {
  std::vector<Row> out;
  for (const auto& r : rows) {
    Row row;
    for (const auto& v : r) row.push_back(to_cell(v));
    out.push_back(std::move(row));
  }
  return Dataset(std::move(headers), std::move(out));
}

py::list rows_of(const Dataset& d) {
  py::list out;
  for (const auto& row : d.rows()) {
    py::list r;
    for (const auto& v : row) r.append(from_cell(v));
    out.append(r);
  }
  return out;
}

DependencyKind kind_arg(const std::string& name) {
  auto k = kind_from_name(name);
  if (!k) throw ArgumentError("unknown dependency kind: " + name);
  return *k;
}

std::vector<EvalRecord> records_arg(const py::iterable& items) {
  std::vector<EvalRecord> out;
  for (const auto& item : items) {
    const auto d = item.cast<py::dict>();
    EvalRecord r;
    r.instance_id = d["instance"].cast<std::string>();
    r.truth = d["truth"].cast<LabelSet>();
    r.answers = d["answers"].cast<std::map<std::string, LabelSet>>();
    out.push_back(std::move(r));
  }
  return out;
}

py::tuple scores_tuple(const Scores& s) { return py::make_tuple(s.precision, s.recall, s.f1); }

}  // namespace

PYBIND11_MODULE(_llmclean, m) {
  m.doc() = "Context-driven error detection for tabular and IoT data";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<BackendError>(m, "BackendError", base.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("headers"), py::arg("rows"))
      .def_property_readonly("headers", &Dataset::headers)
      .def_property_readonly("rows", &rows_of)
      .def("__len__", &Dataset::row_count)
      .def("to_csv", &to_csv_string)
      .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; })
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset " + std::to_string(d.row_count()) + "x" + std::to_string(d.column_count()) + ">";
      });
  m.def("load_csv", [](const std::string& path) { return normalize_missing(load_csv_file(path)); }, py::arg("path"),
        "Read a CSV file; placeholder tokens become None.");
  m.def("loads_csv", [](const std::string& text) { return normalize_missing(load_csv_string(text)); },
        py::arg("text"));

  py::class_<OfdRule>(m, "Rule")
      .def_readwrite("id", &OfdRule::id)
      .def_property_readonly("kind", [](const OfdRule& r) { return std::string(kind_name(r.kind)); })
      .def_readonly("aliases", &OfdRule::aliases)
      .def("__str__", &render_rule)
      .def("__eq__", [](const OfdRule& a, const OfdRule& b) { return a == b; })
      .def("__repr__", [](const OfdRule& r) {
        return std::string(kind_name(r.kind)) + "[" + r.id + "]: " + render_rule(r);
      });
  m.def("parse_rule", [](const std::string& text, const std::string& kind) { return parse_rule(text, kind_arg(kind)); },
        py::arg("text"), py::arg("kind") = "denial");
  m.def("render_rule", &render_rule, py::arg("rule"));
  m.def("parse_rule_file", [](const std::string& text) { return parse_rule_file(text).rules; }, py::arg("text"));
  m.def("render_rule_file", &render_rule_file, py::arg("rules"));
  m.def("extract_rules", [](const std::string& ntriples) { return extract_ofds(deserialize(ntriples)); },
        py::arg("ntriples"), "Rules encoded in an N-Triples context graph.");

  py::class_<Finding>(m, "Finding")
      .def_property_readonly("row", [](const Finding& f) { return f.cell.row; })
      .def_property_readonly("column", [](const Finding& f) { return f.cell.column; })
      .def_readonly("rule_id", &Finding::rule_id)
      .def_property_readonly("reason", [](const Finding& f) { return std::string(reason_name(f.reason)); })
      .def("__repr__", [](const Finding& f) {
        return "<Finding " + std::to_string(f.cell.row) + ":" + f.cell.column + " " + f.rule_id + " " +
               std::string(reason_name(f.reason)) + ">";
      });

  py::class_<DetectionReport>(m, "Report")
      .def_readonly("findings", &DetectionReport::findings)
      .def_property_readonly("skipped_rules",
                             [](const DetectionReport& r) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& s : r.skipped_rules) out.emplace_back(s.rule_id, s.reason);
                               return out;
                             })
      .def_readonly("uncovered_sensors", &DetectionReport::uncovered_sensors)
      .def_property_readonly("duration_s",
                             [](const DetectionReport& r) { return std::chrono::duration<double>(r.duration).count(); })
      .def("to_json", &report_to_json);

  m.def(
      "detect",
      [](const Dataset& d, const std::vector<OfdRule>& rules, const std::string& sensors_json, bool exact_matching,
         std::size_t parallel) {
        RunOptions o;
        if (!sensors_json.empty()) o.specs = parse_sensor_specs(sensors_json);
        o.sim.exact = exact_matching;
        o.parallel = parallel;
        py::gil_scoped_release release;
        return run_all(d, rules, o);
      },
      py::arg("dataset"), py::arg("rules"), py::arg("sensors_json") = "", py::arg("exact_matching") = false,
      py::arg("parallel") = 1);

  m.def("find_consensus", &find_consensus, py::arg("answers"), py::arg("threshold"));
  m.def(
      "score_micro_f1", [](const LabelSet& p, const LabelSet& t) { return scores_tuple(score_micro_f1(p, t)); },
      py::arg("predicted"), py::arg("truth"));

  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def_readonly("threshold", &EnsembleConfig::threshold)
      .def_readonly("prompts", &EnsembleConfig::prompts)
      .def_readonly("train_f1", &EnsembleConfig::train_f1)
      .def_readonly("val_f1", &EnsembleConfig::val_f1);
  m.def(
      "find_best_ensemble",
      [](const py::iterable& train, const py::iterable& val, const std::vector<std::string>& prompts,
         std::size_t tr_range, std::size_t parallel) {
        const auto t = records_arg(train);
        const auto v = records_arg(val);
        py::gil_scoped_release release;
        return find_best_ensemble(t, v, prompts, SearchSpec{tr_range}, parallel);
      },
      py::arg("train"), py::arg("val"), py::arg("prompts"), py::arg("tr_range"), py::arg("parallel") = 1,
      "Records are dicts {'instance': str, 'truth': set, 'answers': {prompt: set}}.");

  py::class_<GroundTruth>(m, "GroundTruth")
      .def("__len__", [](const GroundTruth& t) { return t.entries.size(); })
      .def("cells",
           [](const GroundTruth& t) {
             std::vector<std::pair<std::size_t, std::string>> out;
             for (const auto& c : t.cells()) out.emplace_back(c.row, c.column);
             return out;
           })
      .def("to_jsonl", &truth_to_jsonl);
  m.def(
      "inject_errors",
      [](const Dataset& clean, double missing_rate, double outlier_rate, double fd_swap_rate,
         std::vector<std::string> missing_columns, std::vector<std::string> outlier_columns,
         std::vector<std::pair<std::string, std::string>> fd_pairs, double outlier_multiplier, std::uint64_t seed) {
        ErrorSpec s;
        s.missing_rate = missing_rate;
        s.outlier_rate = outlier_rate;
        s.fd_swap_rate = fd_swap_rate;
        s.missing_columns = std::move(missing_columns);
        s.outlier_columns = std::move(outlier_columns);
        s.fd_pairs = std::move(fd_pairs);
        s.outlier_multiplier = outlier_multiplier;
        s.seed = seed;
        Injection inj = inject_errors(clean, s);
        return py::make_tuple(normalize_missing(inj.dirty), inj.truth);
      },
      py::arg("clean"), py::arg("missing_rate") = 0.0, py::arg("outlier_rate") = 0.0, py::arg("fd_swap_rate") = 0.0,
      py::arg("missing_columns") = std::vector<std::string>{}, py::arg("outlier_columns") = std::vector<std::string>{},
      py::arg("fd_pairs") = std::vector<std::pair<std::string, std::string>>{}, py::arg("outlier_multiplier") = 100.0,
      py::arg("seed") = 0, "Returns (dirty dataset, ground truth).");
  m.def(
      "score_detection",
      [](const DetectionReport& r, const GroundTruth& t, const Dataset& d) {
        return scores_tuple(score_detection(r, t, d));
      },
      py::arg("report"), py::arg("truth"), py::arg("dataset"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command line in-process; returns (exit code, stdout, stderr).");
}
