#include "gecjudge/cli.hpp"

#include <algorithm>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gecjudge/ahp.hpp"
#include "gecjudge/data_io.hpp"
#include "gecjudge/meta_eval.hpp"
#include "gecjudge/scoring.hpp"

namespace gecjudge::cli {

namespace {

struct GlobalOptions {
  bool verbose = false;
  bool strict = false;
  int parallel = 4;

  std::string backend = "mock";
  std::string endpoint;
  std::string model = "mock";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  std::string cache_dir;
  std::uint64_t seed = 0;
};

struct ScoreOptions {
  std::string in;
  std::string source;
  std::string hypothesis;
  std::string system_id = "system";
  std::string out;
  std::string manifest;
  bool avg = false;
  std::vector<double> weights;
  double theta = ahp::kDefaultTheta;
  int attempts = 2;
  int repair_rounds = ahp::kDefaultRepairRounds;
  std::string fallback = "uniform";
  std::string score_template;
  std::string weight_template;
};

struct MetaEvalOptions {
  std::string level = "system";
  std::vector<std::string> metrics;
  std::string human;
  std::string set_name;
  std::string format = "markdown";
  std::string out;
};

struct AhpCheckOptions {
  std::string matrix;
  double theta = ahp::kDefaultTheta;
  bool repair = false;
  int repair_rounds = ahp::kDefaultRepairRounds;
};

struct AlphaOptions {
  std::string in;
  std::string weights_from;
  std::string scores_from;
  std::string items;  // "sentences" or "criteria"; default depends on the source
};

struct CorrelateOptions {
  std::string in;
  std::string out;
};

llm::BackendConfig backend_config(const GlobalOptions& g) {
  llm::BackendConfig config;
  config.kind = llm::backend_kind_from_string(g.backend);
  config.endpoint_url = g.endpoint;
  config.model_name = g.model;
  config.api_key_env_var = g.api_key_env;
  config.temperature = g.temperature;
  config.request_timeout = std::chrono::milliseconds(static_cast<long long>(g.timeout_seconds * 1000.0));
  config.max_retries = g.max_retries;
  config.cache_dir = g.cache_dir;
  config.seed = g.seed;
  config.max_in_flight = g.parallel;
  config.validate();
  return config;
}

bool has_all_scores(const SentencePair& pair) {
  return std::all_of(kCriteria.begin(), kCriteria.end(),
                     [&](Criterion c) { return pair.extra.contains(std::string(to_string(c))); });
}

int cmd_score(const GlobalOptions& g, const ScoreOptions& o, std::ostream& out, std::ostream& err) {
  if (o.in.empty() == o.source.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give either --in or --source/--hypothesis");
  }
  if (!o.source.empty() && o.hypothesis.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--source needs --hypothesis");
  }

  std::vector<SentencePair> pairs = o.in.empty()
                                        ? io::load_parallel_outputs(o.source, o.hypothesis, o.system_id)
                                        : io::load_pairs_jsonl(o.in);
  if (pairs.empty()) throw Error(ErrorCode::EmptyTable, "no sentence pairs in the input");

  const bool fixed = o.avg || !o.weights.empty();
  std::vector<double> fixed_weights(scoring::kUniformWeights.begin(), scoring::kUniformWeights.end());
  if (!o.weights.empty()) fixed_weights = o.weights;

  scoring::WeightPolicy policy;
  policy.theta = o.theta;
  policy.reelicit_attempts = o.attempts;
  policy.repair_rounds = o.repair_rounds;
  if (o.fallback == "uniform") policy.fallback = scoring::FallbackMode::Uniform;
  else if (o.fallback == "fail") policy.fallback = scoring::FallbackMode::Fail;
  else throw Error(ErrorCode::InvalidArgument, "--fallback must be uniform or fail");

  scoring::PromptSet prompts;
  if (!o.score_template.empty()) prompts.scores = llm::PromptTemplate::load(o.score_template);
  if (!o.weight_template.empty()) prompts.weights = llm::PromptTemplate::load(o.weight_template);

  scoring::BatchOptions batch;
  batch.parallel = g.parallel;
  batch.strict = g.strict;
  batch.warn = [&err](std::string_view message) { err << "warning: " << message << "\n"; };

  const llm::BackendConfig config = backend_config(g);
  scoring::BatchResult result;
  std::string mode;
  if (fixed && std::all_of(pairs.begin(), pairs.end(), has_all_scores)) {
    // Already scored: re-aggregate without touching the backend.
    const auto rows = io::load_scored_jsonl(o.in);
    result.records = scoring::fixed_weight_records(rows, fixed_weights);
    mode = "fixed-rescore";
  } else {
    llm::Backend backend(config);
    if (fixed) {
      result = scoring::fixed_weight_calculation(pairs, backend, prompts, fixed_weights, batch);
      mode = "fixed";
    } else {
      result = scoring::dynamic_weight_calculation(pairs, backend, prompts, policy, batch);
      mode = "dynamic";
    }
  }

  io::write_records_jsonl(result.records, o.out);
  const std::string manifest_path = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;
  io::write_text_atomic(manifest_path,
                        scoring::run_manifest(result, config, prompts, policy, mode).dump(2) + "\n");

  if (g.verbose) {
    err << "scored " << result.records.size() << " of " << pairs.size() << " pair(s); "
        << result.requests << " request(s), " << result.cache_hits << " cache hit(s)\n";
    for (const auto& [system, score] : scoring::system_scores(result.records)) {
      out << system << "\t" << io::format_double(score) << "\n";
    }
  }
  if (!result.failures.empty()) {
    err << result.failures.size() << " pair(s) failed; see " << manifest_path << "\n";
    return kPartial;
  }
  return kSuccess;
}

std::pair<std::string, std::string> metric_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq != std::string::npos && eq > 0) return {spec.substr(0, eq), spec.substr(eq + 1)};
  return {std::filesystem::path(spec).stem().string(), spec};
}

int cmd_meta_eval(const MetaEvalOptions& o, std::ostream& out) {
  const JudgmentLevel level = judgment_level_from_string(o.level);
  const io::ReportFormat format = io::report_format_from_string(o.format);
  const HumanJudgmentTable human = io::load_human_table(o.human, level);
  const std::string set_name =
      o.set_name.empty() ? std::filesystem::path(o.human).stem().string() : o.set_name;

  std::vector<meta_eval::MetaEvalReport> reports;
  for (const auto& spec : o.metrics) {
    const auto [name, path] = metric_spec(spec);
    meta_eval::MetaEvalReport report =
        level == JudgmentLevel::System
            ? meta_eval::system_level(io::load_system_scores(path), human, name)
            : meta_eval::sentence_level(io::load_sentence_scores(path), human, name);
    report.judgment_set = set_name;
    reports.push_back(std::move(report));
  }

  if (o.out.empty()) {
    out << io::format_reports(reports, format);
  } else {
    io::write_report(reports, o.out, format);
  }
  return kSuccess;
}

int cmd_ahp_check(const AhpCheckOptions& o, std::ostream& out) {
  const JudgmentMatrix matrix = ahp::read_matrix_file(o.matrix);
  const WeightVector weights = ahp::derive_weights(matrix, o.theta);
  const auto& r = weights.report();

  out << std::setprecision(10);
  out << "order       " << matrix.order() << "\n";
  out << "lambda_max  " << r.lambda_max << "\n";
  out << "CI          " << r.ci << "\n";
  out << "RI          " << r.ri << "\n";
  out << "CR          " << r.cr << "\n";
  out << "weights    ";
  for (double w : weights.weights()) out << " " << w;
  out << "\n";
  out << "verdict     " << (r.consistent ? "consistent" : "inconsistent") << " (theta " << o.theta
      << ")\n";

  if (!r.consistent && o.repair) {
    const ahp::RepairResult repaired = ahp::repair(matrix, o.theta, o.repair_rounds);
    out << "repaired in " << repaired.rounds << " round(s), CR " << repaired.report.cr << "\n";
    out << matrix.order() << "\n";
    for (std::size_t i = 0; i < matrix.order(); ++i) {
      for (std::size_t j = 0; j < matrix.order(); ++j) {
        out << (j ? " " : "") << io::format_double(repaired.matrix(i, j));
      }
      out << "\n";
    }
  }
  return r.consistent ? kSuccess : kInconsistent;
}

int cmd_alpha(const AlphaOptions& o, std::ostream& out) {
  const int sources = !o.in.empty() + !o.weights_from.empty() + !o.scores_from.empty();
  if (sources != 1) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --in, --weights-from, --scores-from");
  }
  if (!o.items.empty() && !o.in.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--items applies to --weights-from and --scores-from");
  }
  std::vector<std::vector<double>> rows;
  if (!o.in.empty()) {
    rows = io::load_item_matrix_csv(o.in).rows;
  } else {
    // One row per sentence, one column per criterion.
    if (!o.weights_from.empty()) {
      for (const auto& record : io::load_records_jsonl(o.weights_from)) {
        rows.push_back(record.weights.weights());
      }
    } else {
      for (const auto& row : io::load_scored_jsonl(o.scores_from)) {
        rows.emplace_back(row.scores.values().begin(), row.scores.values().end());
      }
    }
    // Weight rows always sum to 1, so with criteria as items the totals are
    // constant; weights therefore default to sentences as items.
    const std::string items = !o.items.empty() ? o.items : (!o.weights_from.empty() ? "sentences" : "criteria");
    if (items == "sentences" && !rows.empty()) {
      std::vector<std::vector<double>> transposed(rows.front().size(), std::vector<double>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) transposed[j][i] = rows[i][j];
      rows = std::move(transposed);
    }
  }
  out << std::setprecision(17) << meta_eval::cronbach_alpha(rows) << "\n";
  return kSuccess;
}

int cmd_correlate(const CorrelateOptions& o, std::ostream& out) {
  std::vector<SubMetricScores> scores;
  for (const auto& row : io::load_scored_jsonl(o.in)) scores.push_back(row.scores);
  const std::string csv = io::correlation_matrix_csv(meta_eval::submetric_correlation_matrix(scores));
  if (o.out.empty()) out << csv;
  else io::write_text_atomic(o.out, csv);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-free GEC evaluation with LLM sub-metric scores and AHP weights",
               "gecjudge"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Configuration file (key = value, [section] per subcommand)");

  GlobalOptions g;
  app.add_flag("--verbose,-v", g.verbose, "Print progress and per-system scores");
  app.add_flag("--strict", g.strict, "Abort on the first pair-level failure");
  app.add_option("--parallel", g.parallel, "Concurrent backend requests")->check(CLI::Range(1, 1024));

  auto* backend_group = app.add_option_group("Backend");
  backend_group->add_option("--backend", g.backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
  backend_group->add_option("--endpoint", g.endpoint, "Chat-completion URL (http backend)");
  backend_group->add_option("--model", g.model, "Model name sent to the endpoint");
  backend_group->add_option("--api-key-env", g.api_key_env,
                            "Environment variable holding the API key ('' for none)");
  backend_group->add_option("--temperature", g.temperature, "Sampling temperature");
  backend_group->add_option("--timeout", g.timeout_seconds, "Request timeout in seconds");
  backend_group->add_option("--max-retries", g.max_retries, "Retries for failed requests");
  backend_group->add_option("--cache-dir", g.cache_dir, "Response cache directory");
  backend_group->add_option("--seed", g.seed, "Mock backend seed");

  ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "Score sentence pairs and write records JSONL");
  score_cmd->fallthrough();
  score_cmd->add_option("--in", score.in, "Sentence pairs (JSONL)");
  score_cmd->add_option("--source", score.source, "Source sentences, one per line");
  score_cmd->add_option("--hypothesis", score.hypothesis, "Corrected sentences, one per line");
  score_cmd->add_option("--system-id", score.system_id, "System id for parallel-text input");
  score_cmd->add_option("--out", score.out, "Output records (JSONL)")->required();
  score_cmd->add_option("--manifest", score.manifest, "Run manifest path (default: <out>.manifest.json)");
  score_cmd->add_flag("--avg", score.avg, "Fixed uniform weights (1/3, 1/3, 1/3)");
  score_cmd->add_option("--weights", score.weights, "Fixed weights SC,EL,FL")->delimiter(',')->expected(3);
  score_cmd->add_option("--theta", score.theta, "Consistency-ratio threshold");
  score_cmd->add_option("--attempts", score.attempts, "Re-elicitations after an inconsistent matrix");
  score_cmd->add_option("--repair-rounds", score.repair_rounds, "Deterministic repair rounds");
  score_cmd->add_option("--fallback", score.fallback, "uniform or fail")->check(CLI::IsMember({"uniform", "fail"}));
  score_cmd->add_option("--score-template", score.score_template, "Score prompt template (JSON)");
  score_cmd->add_option("--weight-template", score.weight_template, "Judgment prompt template (JSON)");

  MetaEvalOptions meta;
  auto* meta_cmd = app.add_subcommand("meta-eval", "Correlate metric scores with human judgments");
  meta_cmd->fallthrough();
  meta_cmd->add_option("--level", meta.level, "system or sentence")->check(CLI::IsMember({"system", "sentence"}));
  meta_cmd->add_option("--metric", meta.metrics, "Metric scores, [NAME=]PATH (repeatable)")->required();
  meta_cmd->add_option("--human", meta.human, "Human judgments (CSV or JSONL)")->required();
  meta_cmd->add_option("--set", meta.set_name, "Judgment-set label (default: file stem)");
  meta_cmd->add_option("--format", meta.format, "markdown, json or csv")
      ->check(CLI::IsMember({"markdown", "md", "json", "csv"}));
  meta_cmd->add_option("--out", meta.out, "Write the report here instead of stdout");

  AhpCheckOptions check;
  auto* check_cmd = app.add_subcommand("ahp-check", "Consistency check of a judgment matrix file");
  check_cmd->fallthrough();
  check_cmd->add_option("matrix,--matrix", check.matrix, "Matrix file")->required();
  check_cmd->add_option("--theta", check.theta, "Consistency-ratio threshold");
  check_cmd->add_flag("--repair", check.repair, "Print a repaired matrix when inconsistent");
  check_cmd->add_option("--repair-rounds", check.repair_rounds, "Repair rounds");

  AlphaOptions alpha;
  auto* alpha_cmd = app.add_subcommand("alpha", "Cronbach's alpha over an item matrix");
  alpha_cmd->fallthrough();
  alpha_cmd->add_option("--in", alpha.in, "CSV with a header row; rows are observations");
  alpha_cmd->add_option("--weights-from", alpha.weights_from, "Records JSONL; criterion weights per sentence");
  alpha_cmd->add_option("--scores-from", alpha.scores_from, "Score JSONL; sub-metric scores per sentence");
  alpha_cmd->add_option("--items", alpha.items,
                        "With a JSONL source: treat sentences or criteria as the items "
                        "(default: sentences for weights, criteria for scores)")
      ->check(CLI::IsMember({"sentences", "criteria"}));

  CorrelateOptions correlate;
  auto* correlate_cmd =
      app.add_subcommand("correlate-submetrics", "Pearson matrix of the three sub-metrics as CSV");
  correlate_cmd->fallthrough();
  correlate_cmd->add_option("--in", correlate.in, "Score JSONL")->required();
  correlate_cmd->add_option("--out", correlate.out, "CSV output (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kFatal;
  }

  try {
    if (score_cmd->parsed()) return cmd_score(g, score, out, err);
    if (meta_cmd->parsed()) return cmd_meta_eval(meta, out);
    if (check_cmd->parsed()) return cmd_ahp_check(check, out);
    if (alpha_cmd->parsed()) return cmd_alpha(alpha, out);
    if (correlate_cmd->parsed()) return cmd_correlate(correlate, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << " [" << to_string(e.code()) << "]\n";
    return kFatal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kFatal;
}

}  // namespace gecjudge::cli
