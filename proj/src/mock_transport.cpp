#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "gecjudge/llm_backend.hpp"

namespace gecjudge::llm {

namespace {

// Only the raw mt19937_64 stream is used: its output is fixed by the
// standard, the library distributions are not.
class Noise {
public:
  explicit Noise(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
  std::mt19937_64 engine_;
};

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct SurfaceFeatures {
  double edit_distance;  // token-level, normalized by the longer side
  double overlap;        // Jaccard index of the token sets
  double length_ratio;   // hypothesis tokens / source tokens
  bool unchanged;
};

SurfaceFeatures features_of(const SentencePair& pair) {
  const auto src = tokenize(pair.source);
  const auto hyp = tokenize(pair.hypothesis);
  SurfaceFeatures f{};
  f.unchanged = pair.source == pair.hypothesis;
  const double longer = static_cast<double>(std::max<std::size_t>({src.size(), hyp.size(), 1}));
  f.edit_distance = static_cast<double>(levenshtein(src, hyp)) / longer;

  const std::set<std::string> s(src.begin(), src.end()), h(hyp.begin(), hyp.end());
  std::size_t common = 0;
  for (const auto& t : s) common += h.count(t);
  const std::size_t uni = s.size() + h.size() - common;
  f.overlap = uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
  f.length_ratio = src.empty() ? 1.0 : static_cast<double>(hyp.size()) / static_cast<double>(src.size());
  return f;
}

std::uint64_t derive_seed(std::uint64_t seed, const ChatRequest& request) {
  std::ostringstream material;
  material << seed << '\x1f' << (request.task == PromptTask::Scores ? "scores" : "judgment")
           << '\x1f' << request.template_name << '\x1f' << request.attempt << '\x1f'
           << request.pair.id << '\x1f' << request.pair.system_id << '\x1f' << request.pair.source
           << '\x1f' << request.pair.hypothesis << '\x1f' << request.pair.context_tag.value_or("");
  const std::string digest = sha256_hex(material.str());
  return std::stoull(digest.substr(0, 16), nullptr, 16);
}

double tenths(double v) { return std::round(std::clamp(v, kMinScore, kMaxScore) * 10.0) / 10.0; }

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

enum class Register { Casual, Formal, Technical, Unknown };

Register register_of(const std::optional<std::string>& tag) {
  if (!tag) return Register::Unknown;
  const std::string t = lowercase(*tag);
  for (const char* word : {"dialogue", "dialog", "conversation", "casual", "chat", "subtitle"}) {
    if (t.find(word) != std::string::npos) return Register::Casual;
  }
  for (const char* word : {"legal", "law", "medical", "formal", "contract"}) {
    if (t.find(word) != std::string::npos) return Register::Formal;
  }
  for (const char* word : {"technical", "wiki", "science", "academic"}) {
    if (t.find(word) != std::string::npos) return Register::Technical;
  }
  return Register::Unknown;
}

// Saaty value as JSON: integers as numbers, reciprocals as "1/k" strings.
Json saaty_json(int k) {
  if (k > 0) return k;
  return "1/" + std::to_string(-k);
}

std::string scores_response(const SentencePair& pair, Noise& noise) {
  const SurfaceFeatures f = features_of(pair);
  auto jitter = [&] { return noise.uniform() - 0.5; };

  const double semantic = tenths(2.0 + 8.0 * std::sqrt(f.overlap) + 0.6 * jitter());
  const double edit =
      f.unchanged ? kMaxScore : tenths(9.6 - 12.0 * std::max(0.0, f.edit_distance - 0.05) + jitter());
  const double fluency =
      tenths(9.0 - 3.0 * std::abs(1.0 - f.length_ratio) + (f.unchanged ? -1.5 : 0.5) + jitter());

  std::ostringstream text;
  text << "Semantic coherence: token overlap with the original is "
       << std::lround(f.overlap * 100.0) << "%. ";
  if (f.unchanged) {
    text << "Edit level: the sentence was left unchanged, so nothing was over-edited. ";
  } else {
    text << "Edit level: about " << std::lround(f.edit_distance * 100.0)
         << "% of the tokens were edited. ";
  }
  text << "Fluency: judged from the corrected sentence alone.\n";

  Json answer;
  answer["semantic_coherence"] = semantic;
  answer["edit_level"] = edit;
  answer["fluency"] = fluency;
  answer["rationale"] = {
      {"semantic_coherence", "overlap-based estimate"},
      {"edit_level", f.unchanged ? "no edits" : "edit-distance-based estimate"},
      {"fluency", "length-ratio-based estimate"}};
  text << "```json\n" << answer.dump() << "\n```\n";
  return text.str();
}

std::string judgment_response(const ChatRequest& request, Noise& noise) {
  const SentencePair& pair = request.pair;
  // Upper triangle (SC vs EL, SC vs FL, EL vs FL); negative k stands for 1/k.
  std::array<int, 3> upper{};
  std::string reasoning;

  auto choose = [&](std::initializer_list<int> options) {
    return *(options.begin() + noise.pick(options.size()));
  };

  switch (register_of(pair.context_tag)) {
    case Register::Casual:
      upper = {choose({-2, 1, 2}), choose({-3, -4, -5}), choose({-3, -4, -5})};
      reasoning = "Casual dialogue: natural flow matters most.";
      break;
    case Register::Formal:
      upper = {choose({-2, -3}), choose({1, 2, 3}), choose({3, 4, 5})};
      reasoning = "Formal text: edits must be minimal and meaning exact.";
      break;
    case Register::Technical:
      upper = {choose({2, 3}), choose({2, 3, 4}), choose({-2, 1, 2})};
      reasoning = "Technical explanation: preserving the precise meaning comes first.";
      break;
    case Register::Unknown: {
      const SurfaceFeatures f = features_of(pair);
      // Inconsistent (cyclic) judgments appear now and then, less often on
      // re-elicitation.
      const double cyclic_rate = request.attempt == 0 ? 0.3 : 0.1;
      if (noise.uniform() < cyclic_rate) {
        upper = {3, -3, 3};
        reasoning = "Meaning outranks editing, fluency outranks meaning, editing outranks fluency.";
      } else if (f.edit_distance > 0.3) {
        upper = {choose({-2, -3}), choose({1, 2}), choose({2, 3})};
        reasoning = "Heavy rewriting: the amount of editing deserves extra weight.";
      } else {
        upper = {choose({-2, 1, 2}), choose({-2, 1, 2}), choose({-2, 1, 2})};
        reasoning = "No strong reason to favour one criterion.";
      }
      break;
    }
  }

  Json answer;
  answer["semantic_coherence_vs_edit_level"] = saaty_json(upper[0]);
  answer["semantic_coherence_vs_fluency"] = saaty_json(upper[1]);
  answer["edit_level_vs_fluency"] = saaty_json(upper[2]);
  return reasoning + "\n```json\n" + answer.dump() + "\n```\n";
}

}  // namespace

std::string MockTransport::complete(const ChatRequest& request) {
  Noise noise(derive_seed(seed_, request));
  return request.task == PromptTask::Scores ? scores_response(request.pair, noise)
                                            : judgment_response(request, noise);
}

}  // namespace gecjudge::llm
