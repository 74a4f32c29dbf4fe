#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "gecjudge/domain.hpp"

namespace gecjudge::llm {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class BackendKind { HttpChat, Mock };

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view text);

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::string endpoint_url;
  std::string model_name = "mock";
  /// Name of the environment variable holding the API key. Empty disables
  /// the Authorization header (local endpoints).
  std::string api_key_env_var = "OPENAI_API_KEY";
  double temperature = 0.0;
  std::chrono::milliseconds request_timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{500};
  /// Empty disables response caching.
  std::filesystem::path cache_dir;
  std::uint64_t seed = 0;
  int max_in_flight = 4;

  /// Throws InvalidArgument on a negative temperature, negative retries or a
  /// missing endpoint for HttpChat.
  void validate() const;

  /// Identity used in cache keys: the model name for HTTP backends,
  /// "mock:<seed>" for the mock.
  std::string model_identity() const;

  /// Non-secret settings, for run manifests.
  Json fingerprint() const;
};

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

struct FewShotExample {
  std::string input;
  std::string output;
};

struct RenderedPrompt {
  std::string system;
  std::string user;
};

/// Prompt with {source}, {hypothesis}, {context_tag} and {few_shot_block}
/// placeholders. Any other {lower_case} token is rejected.
struct PromptTemplate {
  std::string name;
  std::string version;
  std::string system_text;
  std::string user_text;
  std::vector<FewShotExample> few_shot_examples;

  /// "name@version".
  std::string id() const;

  /// Throws TemplateError on an unknown placeholder.
  void validate() const;

  /// `note`, when non-empty, is appended to the user message as a separate
  /// paragraph (used for re-elicitation feedback).
  RenderedPrompt render(const SentencePair& pair, std::string_view note = {}) const;

  static PromptTemplate from_json(const Json& j);
  static PromptTemplate load(const std::filesystem::path& path);
  Json to_json() const;
};

/// Scores the three sub-metrics in one request; reasons come before the
/// fenced JSON answer.
PromptTemplate default_score_template();

/// Elicits the three upper-triangle pairwise comparisons on the 1-9 scale.
PromptTemplate default_weight_template();

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

enum class PromptTask { Scores, Judgment };

struct ChatRequest {
  std::string model;
  RenderedPrompt prompt;
  double temperature = 0.0;
  PromptTask task = PromptTask::Scores;
  std::string template_name;
  int attempt = 0;
  /// Available to offline generators; never sent over the wire.
  SentencePair pair;
};

class ChatTransport {
public:
  virtual ~ChatTransport() = default;
  /// Returns the assistant message text. Throws TransportError.
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// OpenAI-style chat-completion client (POST {model, temperature, messages}),
/// retrying connection failures, 429 and 5xx responses with exponential
/// backoff.
class HttpChatTransport final : public ChatTransport {
public:
  explicit HttpChatTransport(BackendConfig config);
  std::string complete(const ChatRequest& request) override;

private:
  BackendConfig config_;
};

/// Offline stand-in for a model. Responses are a pure function of
/// (seed, task, template name, attempt, pair) and mimic the format a real
/// model is asked for. Scores come from surface features of the pair;
/// judgment matrices follow the context tag.
class MockTransport final : public ChatTransport {
public:
  explicit MockTransport(std::uint64_t seed) : seed_(seed) {}
  std::string complete(const ChatRequest& request) override;

private:
  std::uint64_t seed_;
};

std::unique_ptr<ChatTransport> make_transport(const BackendConfig& config);

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data);

/// Content-addressed response store: one JSON file per key under `dir`.
/// Stores go through a temporary file and a rename, so lookups never see a
/// partial write.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string key_for(std::string_view model_identity, const RenderedPrompt& prompt);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& response, const Json& fingerprint) const;

  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

struct JsonBlock {
  Json value;
  std::string preamble;  // free text before the fence
};

/// Finds the last ```-fenced JSON object in a response. Throws ParseError.
JsonBlock extract_json_block(std::string_view response);

struct ParsedScores {
  SubMetricScores scores;
  std::string rationale;
};

/// Throws ParseError (missing block or key) or RangeError (score outside
/// [1, 10]).
ParsedScores parse_scores_response(std::string_view response);

/// Reads "semantic_coherence_vs_edit_level", "semantic_coherence_vs_fluency"
/// and "edit_level_vs_fluency" (numbers or "p/q" strings) and completes the
/// reciprocal matrix. Throws ParseError or ScaleError (outside [1/9, 9]).
JudgmentMatrix parse_judgment_response(std::string_view response);

// ---------------------------------------------------------------------------
// Backend
// ---------------------------------------------------------------------------

template <typename T>
struct Elicited {
  T value;
  std::string raw_response;
  std::string rationale;
  bool from_cache = false;
};

/// Shareable, thread-safe handle combining a transport, the response cache
/// and an in-flight limit.
class Backend {
public:
  Backend(BackendConfig config, std::shared_ptr<ChatTransport> transport);
  explicit Backend(BackendConfig config);

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  Elicited<SubMetricScores> elicit_scores(const PromptTemplate& tmpl, const SentencePair& pair);

  /// `attempt` > 0 marks a re-elicitation; `previous_cr` is reported back to
  /// the model in that case.
  Elicited<JudgmentMatrix> elicit_judgment_matrix(const PromptTemplate& tmpl,
                                                  const SentencePair& pair, int attempt = 0,
                                                  std::optional<double> previous_cr = std::nullopt);

  const BackendConfig& config() const { return config_; }

  /// Requests that reached the transport (cache hits excluded).
  std::size_t request_count() const { return requests_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

private:
  std::string complete(const ChatRequest& request, bool& from_cache);

  BackendConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  std::optional<ResponseCache> cache_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace gecjudge::llm
