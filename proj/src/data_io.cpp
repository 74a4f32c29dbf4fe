#include "gecjudge/data_io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <unistd.h>

namespace gecjudge::io {

namespace {

const std::set<std::string>& pair_keys() {
  static const std::set<std::string> keys{"id", "system_id", "source", "hypothesis", "context_tag"};
  return keys;
}

const std::set<std::string>& record_keys() {
  static const std::set<std::string> keys{
      "id",      "system_id",  "source",     "hypothesis",  "context_tag", "semantic_coherence",
      "edit_level", "fluency", "weights",    "overall",     "provenance",  "consistency",
      "trace",   "rationale"};
  return keys;
}

std::string at_line(std::size_t line) {
  return line > 0 ? "line " + std::to_string(line) + ": " : std::string();
}

[[noreturn]] void schema_error(std::size_t line, const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaError, at_line(line) + what, field,
              line > 0 ? std::optional<std::size_t>(line) : std::nullopt);
}

// Re-raises a library error with the line number attached.
[[noreturn]] void rethrow_at(const Error& e, std::size_t line) {
  throw Error(e.code(), at_line(line) + e.what(), e.field(),
              line > 0 ? std::optional<std::size_t>(line) : std::nullopt);
}

std::string required_string(const Json& j, const std::string& key, std::size_t line) {
  if (!j.contains(key)) schema_error(line, key, "missing field \"" + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_string()) schema_error(line, key, "field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

double required_number(const Json& j, const std::string& key, std::size_t line) {
  if (!j.contains(key)) schema_error(line, key, "missing field \"" + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number()) schema_error(line, key, "field \"" + key + "\" must be a number");
  return v.get<double>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Lines without their terminators; CRLF and LF both accepted. A trailing
// newline does not produce an empty last line.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

// Parses each non-blank line as a JSON object; `visit(json, line_number)`.
template <typename Visit>
void for_each_jsonl(const std::filesystem::path& path, Visit&& visit) {
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(lines[i]);
    } catch (const Json::parse_error& e) {
      schema_error(line, "<json>", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) schema_error(line, "<json>", "expected a JSON object");
    visit(j, line);
  }
}

struct CsvRow {
  std::size_t line;
  std::vector<std::string> cells;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  for (auto& s : cells) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    s = first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  }
  return cells;
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::vector<CsvRow> rows;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    rows.push_back({i + 1, split_csv_line(lines[i])});
  }
  return rows;
}

double parse_cell(const CsvRow& row, std::size_t column, const std::string& field) {
  const std::string& text = row.cells.at(column);
  double value = 0.0;
  const char* begin = text.data();
  if (!text.empty() && text.front() == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    schema_error(row.line, field, "\"" + text + "\" is not a number");
  }
  return value;
}

void expect_header(const std::vector<CsvRow>& rows, const std::vector<std::string>& header,
                   const std::filesystem::path& path) {
  std::string expected;
  for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
  if (rows.empty()) {
    throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' is empty (expected header " +
                                           expected + ")");
  }
  if (rows.front().cells != header) {
    schema_error(rows.front().line, "header", "expected header '" + expected + "'");
  }
}

bool is_jsonl(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".json";
}

ScoredPair scored_from_json(const Json& j, std::size_t line) {
  SentencePair pair = pair_from_json(j, line);
  for (const auto& key : record_keys()) pair.extra.erase(key);

  std::array<double, kCriterionCount> values{};
  for (Criterion c : kCriteria) {
    values[index_of(c)] = required_number(j, std::string(to_string(c)), line);
  }
  SubMetricScores::Rationale rationale;
  if (j.contains("rationale")) {
    const Json& r = j.at("rationale");
    if (!r.is_object()) schema_error(line, "rationale", "field \"rationale\" must be an object");
    for (Criterion c : kCriteria) {
      const std::string key(to_string(c));
      if (r.contains(key) && r.at(key).is_string()) rationale[index_of(c)] = r.at(key).get<std::string>();
    }
  }

  std::optional<SubMetricScores> scores;
  try {
    scores.emplace(values, std::move(rationale));
  } catch (const Error& e) {
    rethrow_at(e, line);
  }

  ScoredPair out{std::move(pair), std::move(*scores), std::nullopt, std::nullopt};
  if (j.contains("weights")) {
    const Json& w = j.at("weights");
    if (!w.is_array()) schema_error(line, "weights", "field \"weights\" must be an array");
    std::vector<double> weights;
    for (const auto& v : w) {
      if (!v.is_number()) schema_error(line, "weights", "weights must be numbers");
      weights.push_back(v.get<double>());
    }
    out.weights = std::move(weights);
  }
  if (j.contains("overall")) out.overall = required_number(j, "overall", line);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Json pair_to_json(const SentencePair& pair) {
  Json j;
  j["id"] = pair.id;
  j["system_id"] = pair.system_id;
  j["source"] = pair.source;
  j["hypothesis"] = pair.hypothesis;
  if (pair.context_tag) j["context_tag"] = *pair.context_tag;
  for (const auto& [key, value] : pair.extra.items()) {
    if (!pair_keys().count(key)) j[key] = value;
  }
  return j;
}

SentencePair pair_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) schema_error(line, "<json>", "expected a JSON object");
  SentencePair pair;
  if (j.contains("id") && j.at("id").is_number_integer()) {
    pair.id = std::to_string(j.at("id").get<long long>());
  } else {
    pair.id = required_string(j, "id", line);
  }
  pair.system_id = required_string(j, "system_id", line);
  pair.source = required_string(j, "source", line);
  pair.hypothesis = required_string(j, "hypothesis", line);
  if (j.contains("context_tag") && !j.at("context_tag").is_null()) {
    pair.context_tag = required_string(j, "context_tag", line);
  }
  for (const auto& [key, value] : j.items()) {
    if (!pair_keys().count(key)) pair.extra[key] = value;
  }
  try {
    return validate_pair(std::move(pair));
  } catch (const Error& e) {
    rethrow_at(e, line);
  }
}

Json record_to_json(const EvaluationRecord& record) {
  Json j = pair_to_json(record.pair);
  for (const auto& key : record_keys()) {
    if (!pair_keys().count(key)) j.erase(key);
  }
  for (Criterion c : kCriteria) j[std::string(to_string(c))] = record.scores[c];
  j["weights"] = record.weights.weights();
  j["overall"] = record.overall;
  j["provenance"] = std::string(to_string(record.weights.provenance()));
  const auto& report = record.weights.report();
  j["consistency"] = {{"lambda_max", report.lambda_max},
                      {"ci", report.ci},
                      {"cr", report.cr},
                      {"ri", report.ri},
                      {"consistent", report.consistent}};
  j["trace"] = {{"elicitations", record.trace.elicitations},
                {"repair_rounds", record.trace.repair_rounds}};
  Json rationale = Json::object();
  for (Criterion c : kCriteria) {
    if (const auto& r = record.scores.rationale()[index_of(c)]) rationale[std::string(to_string(c))] = *r;
  }
  if (!rationale.empty()) j["rationale"] = std::move(rationale);
  return j;
}

std::vector<SentencePair> load_pairs_jsonl(const std::filesystem::path& path) {
  std::vector<SentencePair> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    SentencePair pair = pair_from_json(j, line);
    if (!seen.insert({pair.id, pair.system_id}).second) {
      throw Error(ErrorCode::DuplicateKey,
                  at_line(line) + "duplicate (id, system_id) = (" + pair.id + ", " +
                      pair.system_id + ")",
                  "id", line);
    }
    pairs.push_back(std::move(pair));
  });
  return pairs;
}

std::vector<ScoredPair> load_scored_jsonl(const std::filesystem::path& path) {
  std::vector<ScoredPair> rows;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    ScoredPair row = scored_from_json(j, line);
    if (!seen.insert({row.pair.id, row.pair.system_id}).second) {
      throw Error(ErrorCode::DuplicateKey,
                  at_line(line) + "duplicate (id, system_id) = (" + row.pair.id + ", " +
                      row.pair.system_id + ")",
                  "id", line);
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<EvaluationRecord> load_records_jsonl(const std::filesystem::path& path) {
  std::vector<EvaluationRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    ScoredPair row = scored_from_json(j, line);
    if (!row.weights) schema_error(line, "weights", "missing field \"weights\"");
    if (!row.overall) schema_error(line, "overall", "missing field \"overall\"");
    if (!seen.insert({row.pair.id, row.pair.system_id}).second) {
      throw Error(ErrorCode::DuplicateKey,
                  at_line(line) + "duplicate (id, system_id) = (" + row.pair.id + ", " +
                      row.pair.system_id + ")",
                  "id", line);
    }

    ConsistencyReport report;
    report.lambda_max = static_cast<double>(row.weights->size());
    if (j.contains("consistency")) {
      const Json& c = j.at("consistency");
      if (!c.is_object()) schema_error(line, "consistency", "field \"consistency\" must be an object");
      report.lambda_max = required_number(c, "lambda_max", line);
      report.ci = required_number(c, "ci", line);
      report.cr = required_number(c, "cr", line);
      report.ri = required_number(c, "ri", line);
      if (!c.contains("consistent") || !c.at("consistent").is_boolean()) {
        schema_error(line, "consistency", "field \"consistent\" must be a boolean");
      }
      report.consistent = c.at("consistent").get<bool>();
    }
    Provenance provenance = Provenance::Dynamic;
    WeightTrace trace;
    try {
      if (j.contains("provenance")) provenance = provenance_from_string(required_string(j, "provenance", line));
      if (j.contains("trace")) {
        trace.elicitations = j.at("trace").value("elicitations", 0);
        trace.repair_rounds = j.at("trace").value("repair_rounds", 0);
      }
      WeightVector weights(std::move(*row.weights), report, provenance);
      if (weights.size() != kCriterionCount) {
        schema_error(line, "weights", "expected three weights");
      }
      const double expected = weighted_score(weights.weights(), row.scores.values());
      if (std::abs(expected - *row.overall) > 1e-9) {
        schema_error(line, "overall", "overall does not equal the weighted sub-metric scores");
      }
      records.push_back(EvaluationRecord{std::move(row.pair), std::move(row.scores),
                                         std::move(weights), *row.overall, trace});
    } catch (const Error& e) {
      if (e.line()) throw;
      rethrow_at(e, line);
    } catch (const Json::exception& e) {
      schema_error(line, "trace", e.what());
    }
  });
  return records;
}

std::vector<SentencePair> load_parallel_outputs(const std::filesystem::path& source_path,
                                                const std::filesystem::path& hypothesis_path,
                                                const std::string& system_id) {
  const auto sources = split_lines(read_file(source_path));
  const auto hypotheses = split_lines(read_file(hypothesis_path));
  if (sources.size() != hypotheses.size()) {
    throw Error(ErrorCode::LineCountMismatch,
                "source has " + std::to_string(sources.size()) + " lines but hypothesis has " +
                    std::to_string(hypotheses.size()));
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    SentencePair pair;
    pair.id = std::to_string(i + 1);
    pair.system_id = system_id;
    pair.source = sources[i];
    pair.hypothesis = hypotheses[i];
    try {
      pairs.push_back(validate_pair(std::move(pair)));
    } catch (const Error& e) {
      rethrow_at(e, i + 1);
    }
  }
  return pairs;
}

// ---------------------------------------------------------------------------

HumanJudgmentTable load_human_table(const std::filesystem::path& path, JudgmentLevel level) {
  if (level == JudgmentLevel::System) {
    std::vector<std::pair<std::string, double>> scores;
    std::set<std::string> seen;
    auto add = [&](std::string system, double score, std::size_t line) {
      if (system.empty()) schema_error(line, "system_id", "empty system_id");
      if (!seen.insert(system).second) {
        schema_error(line, "system_id", "duplicate system '" + system + "'");
      }
      scores.emplace_back(std::move(system), score);
    };
    if (is_jsonl(path)) {
      for_each_jsonl(path, [&](const Json& j, std::size_t line) {
        add(required_string(j, "system_id", line), required_number(j, "score", line), line);
      });
    } else {
      const auto rows = read_csv(path);
      expect_header(rows, {"system_id", "score"}, path);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].cells.size() != 2) schema_error(rows[r].line, "row", "expected 2 columns");
        add(rows[r].cells[0], parse_cell(rows[r], 1, "score"), rows[r].line);
      }
    }
    if (scores.empty()) throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' has no rows");
    return HumanJudgmentTable::system_level(std::move(scores));
  }

  std::vector<SentenceJudgments> sentences;
  std::map<std::string, std::size_t> index;
  std::set<std::pair<std::string, std::string>> seen;
  auto add = [&](const std::string& sentence, std::string system, double rank, std::size_t line) {
    if (sentence.empty()) schema_error(line, "sentence_id", "empty sentence_id");
    if (system.empty()) schema_error(line, "system_id", "empty system_id");
    if (!seen.insert({sentence, system}).second) {
      schema_error(line, "system_id",
                   "duplicate system '" + system + "' for sentence '" + sentence + "'");
    }
    auto [it, inserted] = index.emplace(sentence, sentences.size());
    if (inserted) sentences.push_back({sentence, {}});
    sentences[it->second].systems.push_back({std::move(system), rank});
  };
  if (is_jsonl(path)) {
    for_each_jsonl(path, [&](const Json& j, std::size_t line) {
      std::string sentence;
      if (j.contains("sentence_id") && j.at("sentence_id").is_number_integer()) {
        sentence = std::to_string(j.at("sentence_id").get<long long>());
      } else {
        sentence = required_string(j, "sentence_id", line);
      }
      add(sentence, required_string(j, "system_id", line), required_number(j, "rank", line), line);
    });
  } else {
    const auto rows = read_csv(path);
    expect_header(rows, {"sentence_id", "system_id", "rank"}, path);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].cells.size() != 3) schema_error(rows[r].line, "row", "expected 3 columns");
      add(rows[r].cells[0], rows[r].cells[1], parse_cell(rows[r], 2, "rank"), rows[r].line);
    }
  }
  if (sentences.empty()) throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' has no rows");
  return HumanJudgmentTable::sentence_level(std::move(sentences));
}

std::map<std::string, double> load_system_scores(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  if (is_jsonl(path)) {
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& row : load_scored_jsonl(path)) {
      if (!row.overall) {
        throw Error(ErrorCode::SchemaError, "score record '" + row.pair.id + "' has no overall",
                    "overall");
      }
      auto& [sum, count] = sums[row.pair.system_id];
      sum += *row.overall;
      ++count;
    }
    for (const auto& [system, acc] : sums) out[system] = acc.first / static_cast<double>(acc.second);
  } else {
    const auto rows = read_csv(path);
    expect_header(rows, {"system_id", "score"}, path);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].cells.size() != 2) schema_error(rows[r].line, "row", "expected 2 columns");
      if (!out.emplace(rows[r].cells[0], parse_cell(rows[r], 1, "score")).second) {
        schema_error(rows[r].line, "system_id", "duplicate system '" + rows[r].cells[0] + "'");
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' has no scores");
  return out;
}

meta_eval::SentenceScores load_sentence_scores(const std::filesystem::path& path) {
  meta_eval::SentenceScores out;
  if (is_jsonl(path)) {
    for (const auto& row : load_scored_jsonl(path)) {
      if (!row.overall) {
        throw Error(ErrorCode::SchemaError, "score record '" + row.pair.id + "' has no overall",
                    "overall");
      }
      out[{row.pair.id, row.pair.system_id}] = *row.overall;
    }
  } else {
    const auto rows = read_csv(path);
    expect_header(rows, {"sentence_id", "system_id", "score"}, path);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].cells.size() != 3) schema_error(rows[r].line, "row", "expected 3 columns");
      if (!out.emplace(std::pair{rows[r].cells[0], rows[r].cells[1]}, parse_cell(rows[r], 2, "score"))
               .second) {
        schema_error(rows[r].line, "system_id", "duplicate (sentence_id, system_id)");
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' has no scores");
  return out;
}

ItemMatrix load_item_matrix_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' is empty");
  ItemMatrix m;
  m.items = rows.front().cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].cells.size() != m.items.size()) {
      schema_error(rows[r].line, "row", "expected " + std::to_string(m.items.size()) + " columns");
    }
    std::vector<double> values;
    for (std::size_t c = 0; c < m.items.size(); ++c) values.push_back(parse_cell(rows[r], c, m.items[c]));
    m.rows.push_back(std::move(values));
  }
  if (m.rows.empty()) throw Error(ErrorCode::EmptyTable, "'" + path.string() + "' has no data rows");
  return m;
}

// ---------------------------------------------------------------------------

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<std::uint64_t> counter{0};
  auto temp = path;
  temp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'", path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) {
      std::error_code ec;
      std::filesystem::remove(temp, ec);
      throw Error(ErrorCode::IoError, "short write to '" + path.string() + "'", path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::IoError, "cannot replace '" + path.string() + "'", path.string());
  }
}

std::string records_to_jsonl(const std::vector<EvaluationRecord>& records) {
  std::string out;
  for (const auto& record : records) {
    out += record_to_json(record).dump();
    out += '\n';
  }
  return out;
}

void write_records_jsonl(const std::vector<EvaluationRecord>& records,
                         const std::filesystem::path& path) {
  write_text_atomic(path, records_to_jsonl(records));
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  if (text == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::InvalidArgument,
              "unknown report format '" + std::string(text) + "' (json, markdown, csv)", "format");
}

namespace {

Json report_to_json(const meta_eval::MetaEvalReport& r) {
  Json j;
  j["metric"] = r.metric_name;
  j["judgment_set"] = r.judgment_set;
  j["level"] = std::string(to_string(r.level));
  if (r.level == JudgmentLevel::System) {
    j["pearson_r"] = r.pearson_r;
    j["spearman_rho"] = r.spearman_rho;
    j["n_systems"] = r.n_systems;
  } else {
    j["sentence_accuracy"] = r.sentence_accuracy;
    j["kendall_tau"] = r.kendall_tau;
    j["n_systems"] = r.n_systems;
    j["n_pairs_compared"] = r.n_pairs_compared;
    j["ties_excluded"] = r.ties_excluded;
    j["metric_ties"] = r.metric_ties;
    j["tie_rule"] = r.tie_rule;
  }
  return j;
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

// Table with one row per metric and two columns per judgment set:
// (r, rho) at system level, (Acc, tau) at sentence level.
std::string markdown_table(const std::vector<meta_eval::MetaEvalReport>& reports) {
  std::vector<std::pair<std::string, JudgmentLevel>> sets;
  std::vector<std::string> metrics;
  for (const auto& r : reports) {
    const std::pair<std::string, JudgmentLevel> key{r.judgment_set, r.level};
    if (std::find(sets.begin(), sets.end(), key) == sets.end()) sets.push_back(key);
    if (std::find(metrics.begin(), metrics.end(), r.metric_name) == metrics.end()) {
      metrics.push_back(r.metric_name);
    }
  }

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Metric"};
  for (const auto& [set, level] : sets) {
    const std::string prefix = set.empty() ? "" : set + " ";
    if (level == JudgmentLevel::System) {
      header.push_back(prefix + "r");
      header.push_back(prefix + "ρ");
    } else {
      header.push_back(prefix + "Acc");
      header.push_back(prefix + "τ");
    }
  }
  grid.push_back(header);
  for (const auto& metric : metrics) {
    std::vector<std::string> row{metric};
    for (const auto& [set, level] : sets) {
      auto it = std::find_if(reports.begin(), reports.end(), [&](const auto& r) {
        return r.metric_name == metric && r.judgment_set == set && r.level == level;
      });
      if (it == reports.end()) {
        row.insert(row.end(), {"-", "-"});
      } else if (level == JudgmentLevel::System) {
        row.insert(row.end(), {fixed3(it->pearson_r), fixed3(it->spearman_rho)});
      } else {
        row.insert(row.end(), {fixed3(it->sentence_accuracy), fixed3(it->kendall_tau)});
      }
    }
    grid.push_back(std::move(row));
  }

  // Column widths in code points so ρ and τ align.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& row) {
    os << "|";
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::size_t pad = widths[c] - width(row[c]);
      if (c == 0) os << " " << row[c] << std::string(pad, ' ') << " |";
      else os << " " << std::string(pad, ' ') << row[c] << " |";
    }
    os << "\n";
  };
  emit(grid.front());
  os << "|";
  for (std::size_t c = 0; c < widths.size(); ++c) {
    os << (c == 0 ? std::string(widths[c] + 2, '-') : std::string(widths[c] + 1, '-') + ":") << "|";
  }
  os << "\n";
  for (std::size_t r = 1; r < grid.size(); ++r) emit(grid[r]);
  return os.str();
}

}  // namespace

std::string format_reports(const std::vector<meta_eval::MetaEvalReport>& reports,
                           ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      Json j = Json::array();
      for (const auto& r : reports) j.push_back(report_to_json(r));
      return j.dump(2) + "\n";
    }
    case ReportFormat::Markdown:
      return markdown_table(reports);
    case ReportFormat::Csv: {
      std::ostringstream os;
      os << "metric,judgment_set,level,pearson_r,spearman_rho,sentence_accuracy,kendall_tau,"
            "n_systems,n_pairs_compared,ties_excluded\n";
      for (const auto& r : reports) {
        const bool system = r.level == JudgmentLevel::System;
        os << r.metric_name << "," << r.judgment_set << "," << to_string(r.level) << ","
           << (system ? format_double(r.pearson_r) : "") << ","
           << (system ? format_double(r.spearman_rho) : "") << ","
           << (system ? "" : format_double(r.sentence_accuracy)) << ","
           << (system ? "" : format_double(r.kendall_tau)) << "," << r.n_systems << ","
           << r.n_pairs_compared << "," << r.ties_excluded << "\n";
      }
      return os.str();
    }
  }
  return {};
}

void write_report(const std::vector<meta_eval::MetaEvalReport>& reports,
                  const std::filesystem::path& path, ReportFormat format) {
  write_text_atomic(path, format_reports(reports, format));
}

std::string correlation_matrix_csv(const meta_eval::CorrelationMatrix& matrix) {
  std::ostringstream os;
  os << "criterion";
  for (Criterion c : kCriteria) os << "," << to_string(c);
  os << "\n";
  for (Criterion row : kCriteria) {
    os << to_string(row);
    for (Criterion col : kCriteria) os << "," << format_double(matrix[index_of(row)][index_of(col)]);
    os << "\n";
  }
  return os.str();
}

}  // namespace gecjudge::io
