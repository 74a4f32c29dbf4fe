#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gecjudge/domain.hpp"
#include "gecjudge/meta_eval.hpp"

/// Dataset ingestion and export. Every loader either returns fully
/// validated data or throws an Error naming the first offending line and
/// field.
namespace gecjudge::io {

// ---------------------------------------------------------------------------
// JSON records
// ---------------------------------------------------------------------------

Json pair_to_json(const SentencePair& pair);
/// `line` is only used for error messages.
SentencePair pair_from_json(const Json& j, std::size_t line = 0);

Json record_to_json(const EvaluationRecord& record);

/// A pair with sub-metric scores and whatever aggregate fields the file had.
struct ScoredPair {
  SentencePair pair;
  SubMetricScores scores;
  std::optional<std::vector<double>> weights;
  std::optional<double> overall;
};

std::vector<SentencePair> load_pairs_jsonl(const std::filesystem::path& path);
std::vector<ScoredPair> load_scored_jsonl(const std::filesystem::path& path);
/// Full evaluation records, as written by write_records_jsonl.
std::vector<EvaluationRecord> load_records_jsonl(const std::filesystem::path& path);

/// One sentence per line; ids are "1".."n". CRLF and LF are equivalent and
/// a trailing newline does not add a sentence.
std::vector<SentencePair> load_parallel_outputs(const std::filesystem::path& source_path,
                                                const std::filesystem::path& hypothesis_path,
                                                const std::string& system_id);

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// CSV with header `system_id,score` (System) or `sentence_id,system_id,rank`
/// (Sentence). A `.jsonl` extension switches to one JSON object per line
/// with the same keys.
HumanJudgmentTable load_human_table(const std::filesystem::path& path, JudgmentLevel level);

/// Per-system metric scores from a `system_id,score` CSV, or from a score
/// JSONL (mean `overall` per system).
std::map<std::string, double> load_system_scores(const std::filesystem::path& path);

/// Per-(sentence, system) metric scores from a `sentence_id,system_id,score`
/// CSV or a score JSONL (`overall` keyed by id and system_id).
meta_eval::SentenceScores load_sentence_scores(const std::filesystem::path& path);

/// Numeric CSV with a header row of item names; rows are observations.
struct ItemMatrix {
  std::vector<std::string> items;
  std::vector<std::vector<double>> rows;
};
ItemMatrix load_item_matrix_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Writers (temporary file + rename; deterministic field order)
// ---------------------------------------------------------------------------

void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string records_to_jsonl(const std::vector<EvaluationRecord>& records);
void write_records_jsonl(const std::vector<EvaluationRecord>& records,
                         const std::filesystem::path& path);

enum class ReportFormat { Json, Markdown, Csv };
ReportFormat report_format_from_string(std::string_view text);

std::string format_reports(const std::vector<meta_eval::MetaEvalReport>& reports,
                           ReportFormat format);
void write_report(const std::vector<meta_eval::MetaEvalReport>& reports,
                  const std::filesystem::path& path, ReportFormat format);

std::string correlation_matrix_csv(const meta_eval::CorrelationMatrix& matrix);

/// Round-trip decimal text for a double ("%.17g", trimmed to the shortest
/// exact form).
std::string format_double(double value);

}  // namespace gecjudge::io
