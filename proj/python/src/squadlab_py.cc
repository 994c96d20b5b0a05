// Copyright 2026 The SquadLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "squadlab/cli.h"
#include "squadlab/errors.h"
#include "squadlab/evaluator.h"
#include "squadlab/selftest.h"
#include "squadlab/squad_data.h"

namespace py = pybind11;
using namespace squadlab;

namespace {

py::dict report_dict(const EvalReport& r) {
  py::dict out;
  out["em"] = r.em;
  out["f1"] = r.f1;
  out["total"] = r.total;
  out["answerable"] = r.answerable;
  out["unanswerable"] = r.unanswerable;
  return out;
}

}  // namespace

PYBIND11_MODULE(_squadlab, m) {
  m.doc() = "Extractive question answering toolkit";
  const auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", error.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());

  m.def("version", &toolkit_version);
  m.def("normalize_answer", [](const std::string& s) { return normalize_answer(s); });
  m.def("compute_em", [](const std::string& pred, const std::vector<std::string>& golds) {
    return compute_em(pred, golds);
  });
  m.def("compute_f1", [](const std::string& pred, const std::vector<std::string>& golds) {
    return compute_f1(pred, golds);
  });
  m.def(
      "evaluate",
      [](const std::map<std::string, std::string>& predictions, const std::string& gold_path) {
        return report_dict(evaluate(predictions, load_squad_json(gold_path)));
      },
      py::arg("predictions"), py::arg("gold_path"));
  m.def(
      "toy_tokenize",
      [](const std::string& text, const std::vector<std::string>& vocab) {
        const TokenizedContext ctx = toy_tokenize(text, {vocab.begin(), vocab.end()});
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (const CharSpan& s : ctx.spans) spans.emplace_back(s.start, s.end);
        return std::make_pair(ctx.tokens, spans);
      },
      py::arg("text"), py::arg("vocab"));
  m.def(
      "selftest",
      [](std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const SelftestCheck& c : run_selftest(seed)) out.emplace_back(c.name, c.passed, c.detail);
        return out;
      },
      py::arg("seed") = 0);
  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli_dispatch(args); }, py::arg("args"),
      "Runs a command-line subcommand in-process and returns its exit code.");
}
