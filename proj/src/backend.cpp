#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

#include <openssl/evp.h>
#include <unistd.h>

#include "gecjudge/ahp.hpp"
#include "gecjudge/llm_backend.hpp"

namespace gecjudge::llm {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string temp_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream os;
  os << ".tmp." << ::getpid() << "." << std::hash<std::thread::id>{}(std::this_thread::get_id())
     << "." << counter.fetch_add(1);
  return os.str();
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                "cannot create cache directory '" + dir_.string() + "': " + ec.message(),
                dir_.string());
  }
}

std::string ResponseCache::key_for(std::string_view model_identity, const RenderedPrompt& prompt) {
  std::string material;
  material.reserve(model_identity.size() + prompt.system.size() + prompt.user.size() + 2);
  material.append(model_identity);
  material.push_back('\0');
  material.append(prompt.system);
  material.push_back('\0');
  material.append(prompt.user);
  return sha256_hex(material);
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const Json j = Json::parse(in);
    return j.at("response").get<std::string>();
  } catch (const Json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const std::string& response,
                          const Json& fingerprint) const {
  const auto final_path = dir_ / (key + ".json");
  const auto temp_path = dir_ / (key + ".json" + temp_suffix());

  Json j;
  j["key"] = key;
  j["fingerprint"] = fingerprint;
  j["response"] = response;
  j["timestamp"] = utc_timestamp();
  {
    std::ofstream out(temp_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write cache file '" + temp_path.string() + "'",
                  temp_path.string());
    }
    out << j.dump(2) << '\n';
    if (!out.flush()) {
      throw Error(ErrorCode::IoError, "short write to '" + temp_path.string() + "'",
                  temp_path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp_path, final_path, ec);
  if (ec) {
    std::filesystem::remove(temp_path, ec);
    throw Error(ErrorCode::IoError, "cannot publish cache file '" + final_path.string() + "'",
                final_path.string());
  }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double read_number(const Json& block, const std::string& key) {
  if (!block.contains(key)) {
    throw Error(ErrorCode::ParseError, "response JSON lacks \"" + key + "\"", key);
  }
  const Json& v = block.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return ahp::parse_ratio(trim(v.get<std::string>()));
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::ParseError, "\"" + key + "\" is not a number", key);
}

}  // namespace

JsonBlock extract_json_block(std::string_view response) {
  constexpr std::string_view fence = "```";
  std::optional<JsonBlock> found;
  std::size_t pos = 0;
  while (true) {
    const auto open = response.find(fence, pos);
    if (open == std::string_view::npos) break;
    const auto body_start = response.find('\n', open + fence.size());
    if (body_start == std::string_view::npos) break;
    const auto close = response.find(fence, body_start + 1);
    if (close == std::string_view::npos) break;

    const auto body = response.substr(body_start + 1, close - body_start - 1);
    try {
      Json value = Json::parse(body);
      if (value.is_object()) found = JsonBlock{std::move(value), trim(response.substr(0, open))};
    } catch (const Json::parse_error&) {
    }
    pos = close + fence.size();
  }
  if (!found) {
    throw Error(ErrorCode::ParseError, "response has no fenced JSON object");
  }
  return std::move(*found);
}

ParsedScores parse_scores_response(std::string_view response) {
  JsonBlock block = extract_json_block(response);
  std::array<double, kCriterionCount> values{};
  SubMetricScores::Rationale rationale;
  const Json* reasons = nullptr;
  if (block.value.contains("rationale") && block.value.at("rationale").is_object()) {
    reasons = &block.value.at("rationale");
  }
  for (Criterion c : kCriteria) {
    const std::string key(to_string(c));
    values[index_of(c)] = read_number(block.value, key);
    if (reasons && reasons->contains(key) && reasons->at(key).is_string()) {
      rationale[index_of(c)] = reasons->at(key).get<std::string>();
    }
  }
  return ParsedScores{SubMetricScores(values, std::move(rationale)), std::move(block.preamble)};
}

JudgmentMatrix parse_judgment_response(std::string_view response) {
  const JsonBlock block = extract_json_block(response);
  static const std::array<std::string, 3> keys{"semantic_coherence_vs_edit_level",
                                               "semantic_coherence_vs_fluency",
                                               "edit_level_vs_fluency"};
  std::array<double, 3> upper{};
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const double v = read_number(block.value, keys[k]);
    if (!(v >= kSaatyMin * (1.0 - 1e-12) && v <= kSaatyMax * (1.0 + 1e-12))) {
      std::ostringstream os;
      os << "\"" << keys[k] << "\" = " << v << " is outside the 1/9..9 scale";
      throw Error(ErrorCode::ScaleError, os.str(), keys[k]);
    }
    upper[k] = v;
  }
  return JudgmentMatrix::from_upper_triangle(upper, criterion_labels());
}

// ---------------------------------------------------------------------------
// Backend
// ---------------------------------------------------------------------------

std::unique_ptr<ChatTransport> make_transport(const BackendConfig& config) {
  if (config.kind == BackendKind::Mock) return std::make_unique<MockTransport>(config.seed);
  return std::make_unique<HttpChatTransport>(config);
}

Backend::Backend(BackendConfig config, std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(config_.max_in_flight) {
  config_.validate();
  if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
}

Backend::Backend(BackendConfig config) : Backend(config, make_transport(config)) {}

std::string Backend::complete(const ChatRequest& request, bool& from_cache) {
  const std::string key = ResponseCache::key_for(config_.model_identity(), request.prompt);
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      from_cache = true;
      cache_hits_.fetch_add(1);
      return *hit;
    }
  }
  from_cache = false;

  std::string response;
  {
    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{in_flight_};
    requests_.fetch_add(1);
    response = transport_->complete(request);
  }

  if (cache_) {
    Json fingerprint;
    fingerprint["model"] = config_.model_identity();
    fingerprint["template"] = request.template_name;
    fingerprint["system"] = request.prompt.system;
    fingerprint["user"] = request.prompt.user;
    cache_->store(key, response, fingerprint);
  }
  return response;
}

Elicited<SubMetricScores> Backend::elicit_scores(const PromptTemplate& tmpl,
                                                 const SentencePair& pair) {
  ChatRequest request;
  request.model = config_.model_name;
  request.prompt = tmpl.render(pair);
  request.temperature = config_.temperature;
  request.task = PromptTask::Scores;
  request.template_name = tmpl.id();
  request.pair = pair;

  bool cached = false;
  std::string raw = complete(request, cached);
  ParsedScores parsed = parse_scores_response(raw);
  return Elicited<SubMetricScores>{std::move(parsed.scores), std::move(raw),
                                   std::move(parsed.rationale), cached};
}

Elicited<JudgmentMatrix> Backend::elicit_judgment_matrix(const PromptTemplate& tmpl,
                                                         const SentencePair& pair, int attempt,
                                                         std::optional<double> previous_cr) {
  std::string note;
  if (attempt > 0) {
    std::ostringstream os;
    os << "Attempt " << (attempt + 1) << ": your previous comparisons were not consistent";
    if (previous_cr) os << " (consistency ratio " << std::setprecision(3) << *previous_cr << ")";
    os << ". If A is more important than B and B more important than C, A must also be more "
          "important than C. Please reconsider all three comparisons.";
    note = os.str();
  }

  ChatRequest request;
  request.model = config_.model_name;
  request.prompt = tmpl.render(pair, note);
  request.temperature = config_.temperature;
  request.task = PromptTask::Judgment;
  request.template_name = tmpl.id();
  request.attempt = attempt;
  request.pair = pair;

  bool cached = false;
  std::string raw = complete(request, cached);
  JudgmentMatrix matrix = parse_judgment_response(raw);
  std::string preamble = extract_json_block(raw).preamble;
  return Elicited<JudgmentMatrix>{std::move(matrix), std::move(raw), std::move(preamble), cached};
}

}  // namespace gecjudge::llm
