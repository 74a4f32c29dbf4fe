#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "gecjudge/llm_backend.hpp"

namespace gecjudge::llm {

namespace {

const std::set<std::string>& known_placeholders() {
  static const std::set<std::string> names{"source", "hypothesis", "context_tag", "few_shot_block"};
  return names;
}

const std::regex& placeholder_pattern() {
  static const std::regex pattern(R"(\{([a-z_]+)\})");
  return pattern;
}

std::string few_shot_block(const std::vector<FewShotExample>& examples) {
  if (examples.empty()) return "";
  std::ostringstream os;
  os << "Examples:\n";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    os << "\n### Example " << (i + 1) << "\n" << examples[i].input << "\n\n"
       << examples[i].output << "\n";
  }
  return os.str();
}

}  // namespace

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::HttpChat ? "http" : "mock";
}

BackendKind backend_kind_from_string(std::string_view text) {
  if (text == "http" || text == "http-chat") return BackendKind::HttpChat;
  if (text == "mock") return BackendKind::Mock;
  throw Error(ErrorCode::InvalidArgument,
              "unknown backend '" + std::string(text) + "' (expected http or mock)", "backend");
}

void BackendConfig::validate() const {
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0", "temperature");
  }
  if (max_retries < 0) {
    throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0", "max_retries");
  }
  if (max_in_flight < 1 || max_in_flight > 1024) {
    throw Error(ErrorCode::InvalidArgument, "in-flight limit must be in 1..1024", "parallel");
  }
  if (kind == BackendKind::HttpChat && endpoint_url.empty()) {
    throw Error(ErrorCode::InvalidArgument, "the http backend needs an endpoint URL", "endpoint");
  }
}

std::string BackendConfig::model_identity() const {
  if (kind == BackendKind::Mock) return "mock:" + std::to_string(seed);
  return model_name;
}

Json BackendConfig::fingerprint() const {
  Json j;
  j["kind"] = std::string(to_string(kind));
  j["model"] = model_identity();
  if (kind == BackendKind::HttpChat) j["endpoint"] = endpoint_url;
  j["temperature"] = temperature;
  j["max_retries"] = max_retries;
  return j;
}

// ---------------------------------------------------------------------------

std::string PromptTemplate::id() const { return name + "@" + version; }

void PromptTemplate::validate() const {
  for (const std::string* text : {&system_text, &user_text}) {
    for (std::sregex_iterator it(text->begin(), text->end(), placeholder_pattern()), end; it != end;
         ++it) {
      const std::string placeholder = (*it)[1].str();
      if (!known_placeholders().count(placeholder)) {
        throw Error(ErrorCode::TemplateError,
                    "template '" + id() + "' uses unknown placeholder {" + placeholder + "}",
                    placeholder);
      }
    }
  }
}

RenderedPrompt PromptTemplate::render(const SentencePair& pair, std::string_view note) const {
  validate();
  const std::string context =
      pair.context_tag && !pair.context_tag->empty() ? *pair.context_tag : "unspecified";
  const std::string shots = few_shot_block(few_shot_examples);

  auto substitute = [&](const std::string& text) {
    std::string out;
    auto last = text.cbegin();
    for (std::sregex_iterator it(text.begin(), text.end(), placeholder_pattern()), end; it != end;
         ++it) {
      out.append(last, text.cbegin() + it->position());
      const std::string name = (*it)[1].str();
      if (name == "source") out += pair.source;
      else if (name == "hypothesis") out += pair.hypothesis;
      else if (name == "context_tag") out += context;
      else out += shots;
      last = text.cbegin() + it->position() + it->length();
    }
    out.append(last, text.cend());
    return out;
  };

  RenderedPrompt prompt{substitute(system_text), substitute(user_text)};
  if (!note.empty()) {
    prompt.user += "\n\n";
    prompt.user += note;
  }
  return prompt;
}

PromptTemplate PromptTemplate::from_json(const Json& j) {
  try {
    PromptTemplate t;
    t.name = j.at("name").get<std::string>();
    t.version = j.value("version", std::string("1"));
    t.system_text = j.value("system", std::string());
    t.user_text = j.at("user").get<std::string>();
    if (j.contains("few_shot_examples")) {
      for (const auto& ex : j.at("few_shot_examples")) {
        t.few_shot_examples.push_back(
            {ex.at("input").get<std::string>(), ex.at("output").get<std::string>()});
      }
    }
    t.validate();
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::TemplateError, std::string("malformed prompt template: ") + e.what());
  }
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open template '" + path.string() + "'", path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::TemplateError,
                "template '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Json PromptTemplate::to_json() const {
  Json j;
  j["name"] = name;
  j["version"] = version;
  j["system"] = system_text;
  j["user"] = user_text;
  j["few_shot_examples"] = Json::array();
  for (const auto& ex : few_shot_examples) {
    j["few_shot_examples"].push_back({{"input", ex.input}, {"output", ex.output}});
  }
  return j;
}

PromptTemplate default_score_template() {
  PromptTemplate t;
  t.name = "submetric-scores";
  t.version = "1";
  t.system_text =
      "You are an experienced English teacher who grades grammatical error corrections. "
      "You compare an original sentence with a corrected version and judge the correction, "
      "not the original.";
  t.user_text = R"(Rate the corrected sentence on three criteria, each from 1 (very poor) to 10 (excellent).

- semantic_coherence: how well the corrected sentence keeps the meaning of the original. Penalize changed facts, dropped content or a different intent.
- edit_level: whether the amount of editing is appropriate. Necessary fixes are fine; rewriting correct text, changing style without need or leaving clear errors untouched lowers the score. An unchanged sentence cannot be over-edited.
- fluency: grammatical correctness and natural flow of the corrected sentence on its own.

Think step by step. First write a short reason for each criterion. Then give the final answer as a JSON object inside a ```json fenced block with the keys "semantic_coherence", "edit_level", "fluency" (numbers) and "rationale" (an object with one short string per criterion).

{few_shot_block}
Context: {context_tag}
Original: {source}
Corrected: {hypothesis})";
  t.few_shot_examples = {
      {"Context: unspecified\nOriginal: She go to school every days.\nCorrected: She goes to school every day.",
       "Both agreement errors are fixed with minimal edits and the meaning is unchanged.\n"
       "```json\n{\"semantic_coherence\": 10, \"edit_level\": 10, \"fluency\": 10, \"rationale\": "
       "{\"semantic_coherence\": \"meaning kept\", \"edit_level\": \"only necessary fixes\", "
       "\"fluency\": \"fully grammatical\"}}\n```"},
      {"Context: dialogue\nOriginal: i dont think so , maybe tomorrow we can meet .\n"
       "Corrected: I am not entirely convinced; perhaps we could arrange a meeting tomorrow.",
       "The meaning survives but the register is changed and most words were rewritten.\n"
       "```json\n{\"semantic_coherence\": 8, \"edit_level\": 4, \"fluency\": 9, \"rationale\": "
       "{\"semantic_coherence\": \"intent preserved, tone shifted\", \"edit_level\": "
       "\"heavy unnecessary rewriting\", \"fluency\": \"fluent but stiff for a chat\"}}\n```"},
  };
  return t;
}

PromptTemplate default_weight_template() {
  PromptTemplate t;
  t.name = "criteria-judgment";
  t.version = "1";
  t.system_text =
      "You help decide how a grammatical error correction should be judged. You compare the "
      "importance of evaluation criteria for one specific sentence and its setting.";
  t.user_text = R"(Three criteria are used to judge a correction:
- semantic_coherence: the corrected sentence keeps the original meaning.
- edit_level: the amount of editing is appropriate, without over-correction.
- fluency: the corrected sentence is grammatical and reads naturally.

For the sentence below, compare the criteria pairwise on the 1-9 scale: 1 means equally important, 3 moderately more important, 5 strongly, 7 very strongly, 9 extremely more important (2, 4, 6, 8 are intermediate). If the first criterion is less important, use the reciprocal, for example "1/3".
Formal text such as legal or medical writing usually calls for strict meaning preservation and minimal editing; casual dialogue usually favours fluency.

Explain your reasoning briefly, then answer with a ```json fenced block containing exactly the keys "semantic_coherence_vs_edit_level", "semantic_coherence_vs_fluency" and "edit_level_vs_fluency".

{few_shot_block}
Context: {context_tag}
Original: {source}
Corrected: {hypothesis})";
  t.few_shot_examples = {
      {"Context: dialogue\nOriginal: yeah we was there last night lol\nCorrected: Yeah, we were there last night, lol.",
       "Casual chat: reading naturally matters most; meaning and edit amount matter equally.\n"
       "```json\n{\"semantic_coherence_vs_edit_level\": 1, \"semantic_coherence_vs_fluency\": "
       "\"1/3\", \"edit_level_vs_fluency\": \"1/3\"}\n```"},
  };
  return t;
}

}  // namespace gecjudge::llm
