#include <doctest.h>

#include "gecjudge/data_io.hpp"
#include "gecjudge/llm_backend.hpp"
#include "gecjudge/scoring.hpp"
#include "support/test_util.hpp"

using namespace gecjudge;
using namespace gecjudge::io;

namespace {

std::optional<Error> caught(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  return std::nullopt;
}

std::vector<EvaluationRecord> mock_records(std::size_t n) {
  const auto pairs = load_pairs_jsonl(testutil::data_dir() / "pairs50.jsonl");
  llm::BackendConfig config;
  config.seed = 7;
  llm::Backend backend(config);
  auto result = scoring::dynamic_weight_calculation(
      std::span(pairs).first(n), backend, scoring::PromptSet{}, scoring::WeightPolicy{});
  return result.records;
}

}  // namespace

TEST_SUITE("data_io") {

TEST_CASE("pairs jsonl") {
  testutil::TempDir dir;
  SUBCASE("two valid lines") {
    testutil::write_file(dir / "p.jsonl",
                         "{\"id\": \"1\", \"system_id\": \"t5\", \"source\": \"a\", \"hypothesis\": \"a\"}\n"
                         "{\"id\": 2, \"system_id\": \"t5\", \"source\": \"b\", \"hypothesis\": \"c\", "
                         "\"context_tag\": \"legal\", \"annotator\": {\"x\": 1}}\n");
    const auto pairs = load_pairs_jsonl(dir / "p.jsonl");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1].id == "2");
    CHECK(pairs[1].context_tag == "legal");
    CHECK(pairs[1].extra["annotator"]["x"] == 1);
    CHECK(pair_from_json(pair_to_json(pairs[1])) == pairs[1]);
  }
  SUBCASE("missing source names line and field") {
    testutil::write_file(dir / "p.jsonl", "{\"id\": \"1\", \"system_id\": \"t5\", \"hypothesis\": \"a\"}\n");
    const auto e = caught([&] { load_pairs_jsonl(dir / "p.jsonl"); });
    REQUIRE(e);
    CHECK(e->code() == ErrorCode::SchemaError);
    CHECK(e->line() == 1u);
    CHECK(e->field() == "source");
  }
  SUBCASE("empty source is reported on its line") {
    testutil::write_file(dir / "p.jsonl",
                         "{\"id\": \"1\", \"system_id\": \"t5\", \"source\": \"a\", \"hypothesis\": \"a\"}\n\n"
                         "{\"id\": \"2\", \"system_id\": \"t5\", \"source\": \"\", \"hypothesis\": \"a\"}\n");
    const auto e = caught([&] { load_pairs_jsonl(dir / "p.jsonl"); });
    REQUIRE(e);
    CHECK(e->code() == ErrorCode::EmptySource);
    CHECK(e->line() == 3u);
  }
  SUBCASE("duplicate key") {
    testutil::write_file(dir / "p.jsonl",
                         "{\"id\": \"1\", \"system_id\": \"t5\", \"source\": \"a\", \"hypothesis\": \"a\"}\n"
                         "{\"id\": \"1\", \"system_id\": \"t5\", \"source\": \"b\", \"hypothesis\": \"b\"}\n");
    CHECK_ERROR(load_pairs_jsonl(dir / "p.jsonl"), ErrorCode::DuplicateKey);
  }
  SUBCASE("bad json and missing file") {
    testutil::write_file(dir / "p.jsonl", "{\"id\": \n");
    CHECK_ERROR(load_pairs_jsonl(dir / "p.jsonl"), ErrorCode::SchemaError);
    const auto e = caught([&] { load_pairs_jsonl(dir / "nope.jsonl"); });
    REQUIRE(e);
    CHECK(e->code() == ErrorCode::IoError);
    CHECK(std::string(e->what()).find("nope.jsonl") != std::string::npos);
  }
}

TEST_CASE("parallel outputs") {
  testutil::TempDir dir;
  testutil::write_file(dir / "src.txt", "a b\nc d\ne f\n");
  testutil::write_file(dir / "hyp.txt", "a b\nc D\ne F\n");
  testutil::write_file(dir / "src_crlf.txt", "a b\r\nc d\r\ne f\r\n");
  testutil::write_file(dir / "hyp_crlf.txt", "a b\r\nc D\r\ne F");
  testutil::write_file(dir / "short.txt", "a b\nc d\n");

  const auto pairs = load_parallel_outputs(dir / "src.txt", dir / "hyp.txt", "sys");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].id == "1");
  CHECK(pairs[2].id == "3");
  CHECK(pairs[2].hypothesis == "e F");
  CHECK(load_parallel_outputs(dir / "src_crlf.txt", dir / "hyp_crlf.txt", "sys") == pairs);

  const auto e = caught([&] { load_parallel_outputs(dir / "src.txt", dir / "short.txt", "sys"); });
  REQUIRE(e);
  CHECK(e->code() == ErrorCode::LineCountMismatch);
  CHECK(std::string(e->what()).find("3") != std::string::npos);
  CHECK(std::string(e->what()).find("2") != std::string::npos);
}

TEST_CASE("human tables") {
  const auto table = load_human_table(testutil::data_dir() / "table2_human.csv", JudgmentLevel::System);
  REQUIRE(table.system_scores().size() == 15);
  CHECK(table.system_scores()[8] == std::pair<std::string, double>{"REF-F", 0.992});
  CHECK(table.system_scores()[14] == std::pair<std::string, double>{"INPUT", -0.992});

  testutil::TempDir dir;
  testutil::write_file(dir / "empty.csv", "system_id,score\n");
  CHECK_ERROR(load_human_table(dir / "empty.csv", JudgmentLevel::System), ErrorCode::EmptyTable);
  testutil::write_file(dir / "dup.csv", "system_id,score\na,1\nb,2\na,3\n");
  CHECK_ERROR(load_human_table(dir / "dup.csv", JudgmentLevel::System), ErrorCode::SchemaError);
  testutil::write_file(dir / "hdr.csv", "system,score\na,1\nb,2\n");
  CHECK_ERROR(load_human_table(dir / "hdr.csv", JudgmentLevel::System), ErrorCode::SchemaError);
  testutil::write_file(dir / "num.csv", "system_id,score\na,1\nb,high\n");
  const auto e = caught([&] { load_human_table(dir / "num.csv", JudgmentLevel::System); });
  REQUIRE(e);
  CHECK(e->code() == ErrorCode::SchemaError);
  CHECK(e->line() == 3u);

  const auto sentences =
      load_human_table(testutil::data_dir() / "sentence_human.csv", JudgmentLevel::Sentence);
  CHECK(sentences.level() == JudgmentLevel::Sentence);
  CHECK(sentences.sentences().size() == 4);
}

TEST_CASE("records round trip and byte-identical writes") {
  const auto records = mock_records(12);
  testutil::TempDir dir;
  write_records_jsonl(records, dir / "a.jsonl");
  write_records_jsonl(records, dir / "b.jsonl");
  CHECK(testutil::read_file(dir / "a.jsonl") == testutil::read_file(dir / "b.jsonl"));
  const std::string text = testutil::read_file(dir / "a.jsonl");
  CHECK(text.back() == '\n');

  const auto loaded = load_records_jsonl(dir / "a.jsonl");
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].pair == records[i].pair);
    CHECK(loaded[i].scores.values()[0] == records[i].scores.values()[0]);
    CHECK(loaded[i].weights == records[i].weights);
    CHECK(loaded[i].overall == records[i].overall);
    CHECK(loaded[i].trace == records[i].trace);
  }
  // load -> write -> load is idempotent.
  write_records_jsonl(loaded, dir / "c.jsonl");
  CHECK(testutil::read_file(dir / "c.jsonl") == text);

  const auto scored = load_scored_jsonl(dir / "a.jsonl");
  CHECK(scored.size() == records.size());
  CHECK(scored[0].overall == records[0].overall);
}

TEST_CASE("tampered overall is rejected") {
  auto records = mock_records(1);
  Json j = record_to_json(records[0]);
  j["overall"] = records[0].overall + 0.5;
  testutil::TempDir dir;
  testutil::write_file(dir / "r.jsonl", j.dump() + "\n");
  CHECK_ERROR(load_records_jsonl(dir / "r.jsonl"), ErrorCode::SchemaError);
}

TEST_CASE("writes to an impossible path raise IoError") {
  testutil::TempDir dir;
  testutil::write_file(dir / "file", "x");
  CHECK_ERROR(write_records_jsonl({}, dir / "file" / "out.jsonl"), ErrorCode::IoError);
  CHECK_ERROR(write_text_atomic("/proc/gecjudge-cannot-write", "x"), ErrorCode::IoError);
}

TEST_CASE("metric score tables") {
  const auto system = load_system_scores(testutil::data_dir() / "table2_metric.csv");
  CHECK(system.size() == 15);
  CHECK(system.at("GPT-3.5") == 9.631);

  const auto records = mock_records(10);
  testutil::TempDir dir;
  write_records_jsonl(records, dir / "r.jsonl");
  const auto means = load_system_scores(dir / "r.jsonl");
  CHECK(means == scoring::system_scores(records));
  const auto sentence = load_sentence_scores(dir / "r.jsonl");
  CHECK(sentence.size() == 10);
  CHECK(sentence.at({"s01", "sysA"}) == records[0].overall);
}

TEST_CASE("item matrix csv") {
  testutil::TempDir dir;
  testutil::write_file(dir / "m.csv", "a,b,c\n2,3,3\n4,4,5\n3,3,4\n5,5,5\n");
  const auto m = load_item_matrix_csv(dir / "m.csv");
  CHECK(m.items == std::vector<std::string>{"a", "b", "c"});
  CHECK(m.rows.size() == 4);
  testutil::write_file(dir / "ragged.csv", "a,b\n1,2\n3\n");
  CHECK_ERROR(load_item_matrix_csv(dir / "ragged.csv"), ErrorCode::SchemaError);
}

TEST_CASE("report formats") {
  meta_eval::MetaEvalReport r;
  r.metric_name = "gecjudge";
  r.judgment_set = "human";
  r.pearson_r = 0.6454038048978132;
  r.spearman_rho = 0.725;
  r.n_systems = 15;
  const std::string md = format_reports({r}, ReportFormat::Markdown);
  CHECK(md.find("| gecjudge |") != std::string::npos);
  CHECK(md.find("0.645") != std::string::npos);
  CHECK(md.find("0.725") != std::string::npos);
  const Json j = Json::parse(format_reports({r}, ReportFormat::Json));
  CHECK(j[0]["pearson_r"].get<double>() == r.pearson_r);
  const std::string csv = format_reports({r}, ReportFormat::Csv);
  CHECK(csv.find("0.6454038048978132") != std::string::npos);
  CHECK_ERROR(report_format_from_string("xml"), ErrorCode::InvalidArgument);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3, 9.631, -0.992, 1e-300, 123456789.125}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.2) == "0.2");
  CHECK(format_double(5.0) == "5");
}

}  // TEST_SUITE
