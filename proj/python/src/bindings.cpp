#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gecjudge/ahp.hpp"
#include "gecjudge/cli.hpp"
#include "gecjudge/meta_eval.hpp"

namespace py = pybind11;
using namespace gecjudge;

namespace {

JudgmentMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  std::vector<double> entries;
  for (const auto& row : rows) {
    if (row.size() != rows.size()) {
      throw Error(ErrorCode::InvalidMatrix, "judgment matrix must be square");
    }
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return JudgmentMatrix(rows.size(), std::move(entries));
}

std::vector<std::vector<double>> to_rows(const JudgmentMatrix& m) {
  std::vector<std::vector<double>> rows(m.order());
  for (std::size_t i = 0; i < m.order(); ++i)
    for (std::size_t j = 0; j < m.order(); ++j) rows[i].push_back(m(i, j));
  return rows;
}

py::dict report_dict(const ConsistencyReport& r) {
  py::dict d;
  d["lambda_max"] = r.lambda_max;
  d["ci"] = r.ci;
  d["cr"] = r.cr;
  d["ri"] = r.ri;
  d["consistent"] = r.consistent;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gecjudge, m) {
  m.doc() = "GEC evaluation with LLM sub-metric scores and AHP weights";

  // Messages are prefixed with the error code name, e.g. "RepairFailed: ...".
  static PyObject* error_type =
      PyErr_NewException("gecjudge._gecjudge.GecJudgeError", PyExc_RuntimeError, nullptr);
  m.attr("GecJudgeError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("principal_eigen",
        [](const std::vector<std::vector<double>>& rows, double tol, int max_iter) {
          const auto r = ahp::principal_eigen(to_matrix(rows), tol, max_iter);
          return py::make_tuple(r.lambda_max, r.weights);
        },
        py::arg("matrix"), py::arg("tol") = ahp::kDefaultEigenTolerance,
        py::arg("max_iter") = ahp::kDefaultMaxIterations,
        "(lambda_max, weights) of a positive reciprocal matrix.");

  m.def("derive_weights",
        [](const std::vector<std::vector<double>>& rows, double theta) {
          const auto w = ahp::derive_weights(to_matrix(rows), theta);
          py::dict d = report_dict(w.report());
          d["weights"] = w.weights();
          return d;
        },
        py::arg("matrix"), py::arg("theta") = ahp::kDefaultTheta);

  m.def("repair",
        [](const std::vector<std::vector<double>>& rows, double theta, int max_rounds) {
          const auto r = ahp::repair(to_matrix(rows), theta, max_rounds);
          py::dict d = report_dict(r.report);
          d["matrix"] = to_rows(r.matrix);
          d["rounds"] = r.rounds;
          d["cr_path"] = r.cr_path;
          return d;
        },
        py::arg("matrix"), py::arg("theta") = ahp::kDefaultTheta,
        py::arg("max_rounds") = ahp::kDefaultRepairRounds);

  m.def("random_index", &ahp::random_index, py::arg("n"));

  m.def("weighted_score",
        [](const std::vector<double>& weights, const std::vector<double>& scores) {
          return weighted_score(weights, scores);
        },
        py::arg("weights"), py::arg("scores"));

  m.def("pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) { return meta_eval::pearson(x, y); },
        py::arg("x"), py::arg("y"));
  m.def("spearman",
        [](const std::vector<double>& x, const std::vector<double>& y) { return meta_eval::spearman(x, y); },
        py::arg("x"), py::arg("y"));
  m.def("cronbach_alpha", &meta_eval::cronbach_alpha, py::arg("rows"),
        "Rows are observations, columns are items.");

  m.def("sentence_pairwise",
        [](const std::map<std::pair<std::string, std::string>, double>& metric,
           const std::vector<std::tuple<std::string, std::string, double>>& human_ranks) {
          std::vector<SentenceJudgments> sentences;
          std::map<std::string, std::size_t> index;
          for (const auto& [sentence, system, rank] : human_ranks) {
            auto [it, fresh] = index.emplace(sentence, sentences.size());
            if (fresh) sentences.push_back({sentence, {}});
            sentences[it->second].systems.push_back({system, rank});
          }
          const auto r = meta_eval::sentence_pairwise(metric, HumanJudgmentTable::sentence_level(sentences));
          py::dict d;
          d["accuracy"] = r.accuracy;
          d["tau"] = r.tau;
          d["concordant"] = r.concordant;
          d["discordant"] = r.discordant;
          d["metric_ties"] = r.metric_ties;
          d["ties_excluded"] = r.ties_excluded;
          d["n_pairs_compared"] = r.n_pairs_compared;
          return d;
        },
        py::arg("metric"), py::arg("human_ranks"),
        "metric maps (sentence_id, system_id) to a score; human_ranks lists "
        "(sentence_id, system_id, rank) with lower rank better.");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
