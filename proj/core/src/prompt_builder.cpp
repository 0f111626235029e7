#include "s2t/prompt_builder.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "s2t/error.hpp"

namespace s2t {
namespace {

constexpr std::string_view kSqlSlot = "<User's SQL Query Input>";
constexpr std::string_view kFillInMarker = "Now, fill out the form below";

std::string strip_trailing_newline(std::string body) {
  if (!body.empty() && body.back() == '\n') body.pop_back();
  if (!body.empty() && body.back() == '\r') body.pop_back();
  return body;
}

// Single pass, so placeholder-like text inside substituted values is left alone.
std::string substitute(std::string_view body, const std::map<std::string_view, std::string>& values) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      const auto close = body.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto it = values.find(body.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(body[i++]);
  }
  return out;
}

// Finds balanced top-level {...} spans that parse as JSON. Sets `prose` when
// anything other than whitespace lies outside those spans.
std::vector<nlohmann::json> extract_json_objects(std::string_view text, bool& prose) {
  std::vector<nlohmann::json> out;
  prose = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      if (!std::isspace(static_cast<unsigned char>(text[i]))) prose = true;
      ++i;
      continue;
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t j = i; j < text.size(); ++j) {
      const char c = text[j];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          end = j;
          break;
        }
      }
    }
    if (end == std::string_view::npos) {
      prose = true;
      ++i;
      continue;
    }
    auto parsed = nlohmann::json::parse(text.substr(i, end - i + 1), nullptr, false);
    if (parsed.is_discarded()) {
      prose = true;
      ++i;
      continue;
    }
    out.push_back(std::move(parsed));
    i = end + 1;
  }
  return out;
}

// Last occurrence of `key` anywhere in the object trees, in document order.
const nlohmann::json* find_key(const std::vector<nlohmann::json>& objects, std::string_view key) {
  const nlohmann::json* found = nullptr;
  std::vector<const nlohmann::json*> stack;
  for (const auto& obj : objects) {
    stack.assign(1, &obj);
    while (!stack.empty()) {
      const auto* node = stack.back();
      stack.pop_back();
      if (!node->is_object()) continue;
      if (const auto it = node->find(std::string(key)); it != node->end()) found = &*it;
      for (auto it = node->rbegin(); it != node->rend(); ++it) {
        if (it->is_object()) stack.push_back(&*it);
      }
    }
  }
  return found;
}

std::array<std::string, 3> three_strings(const nlohmann::json* value, int step) {
  const std::string key(kIterativeKeys[static_cast<std::size_t>(step - 1)]);
  if (value == nullptr) throw MalformedResponse(step, "missing \"" + key + "\"");
  if (!value->is_array() || value->size() != 3) {
    throw MalformedResponse(step, "\"" + key + "\" must be a list of exactly 3 entries");
  }
  std::array<std::string, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(*value)[i].is_string()) throw MalformedResponse(step, "entry " + std::to_string(i + 1) + " is not text");
    out[i] = (*value)[i].get<std::string>();
  }
  return out;
}

std::optional<std::string> feedback_text(const nlohmann::json& entry) {
  if (entry.is_string()) return entry.get<std::string>();
  if (entry.is_object()) {
    const auto it = entry.find("Feedback");
    if (it != entry.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

std::array<std::string, 3> parse_feedback(const nlohmann::json* value) {
  constexpr int kStep = 2;
  if (value == nullptr) throw MalformedResponse(kStep, "missing \"Review Feedback\"");
  std::array<std::string, 3> out;
  if (value->is_array()) {
    if (value->size() != 3) throw MalformedResponse(kStep, "expected 3 feedback entries");
    for (std::size_t i = 0; i < 3; ++i) {
      auto text = feedback_text((*value)[i]);
      if (!text) throw MalformedResponse(kStep, "feedback entry " + std::to_string(i + 1) + " has no text");
      out[i] = std::move(*text);
    }
    return out;
  }
  if (!value->is_object() || value->size() != 3) {
    throw MalformedResponse(kStep, "expected feedback for exactly 3 variations");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const auto it = value->find("Variation " + std::to_string(i + 1));
    if (it == value->end()) throw MalformedResponse(kStep, "no feedback for Variation " + std::to_string(i + 1));
    auto text = feedback_text(*it);
    if (!text) throw MalformedResponse(kStep, "feedback for Variation " + std::to_string(i + 1) + " has no text");
    out[i] = std::move(*text);
  }
  return out;
}

}  // namespace

TemplateRegistry TemplateRegistry::builtin() {
  TemplateRegistry registry;
  for (const auto& [id, body] : detail::builtin_template_files()) registry.add(id, body);
  return registry;
}

TemplateRegistry TemplateRegistry::from_directory(const std::filesystem::path& dir) {
  TemplateRegistry registry = builtin();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("template directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw IoError("cannot read template " + entry.path().string());
    std::ostringstream body;
    body << in.rdbuf();
    registry.add(entry.path().stem().string(), body.str());
  }
  return registry;
}

void TemplateRegistry::add(std::string id, std::string body) {
  templates_[std::move(id)] = strip_trailing_newline(std::move(body));
}

bool TemplateRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const std::string& TemplateRegistry::get(std::string_view id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw UnknownTemplate(std::string(id));
  return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

const std::string& instruction_text(const TemplateRegistry& registry, std::string_view name) {
  return registry.get("instruction_" + std::string(name));
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return static_cast<std::size_t>(std::ceil(static_cast<double>(words) * 1.3));
}

std::string render_examples(std::span<const Demo> demos) {
  std::string out;
  for (const auto& d : demos) {
    out += "SQL: ";
    out += d.sql;
    out += "\nQuestion: ";
    out += d.utterance;
    out += "\n";
  }
  return out;
}

std::string render_seed(std::string_view seed_sql) {
  return "SQL: " + std::string(seed_sql) + "\nQuestion:";
}

std::string build_icl_prompt(std::string_view instruction, std::span<const Demo> demos,
                             std::string_view seed_sql, std::string_view template_id,
                             const TemplateRegistry& registry, std::size_t context_budget) {
  const std::string& body = registry.get(template_id);
  std::string prompt = substitute(body, {{"instruction", std::string(instruction)},
                                         {"examples", render_examples(demos)},
                                         {"seed", render_seed(seed_sql)}});
  const std::size_t estimate = estimate_tokens(prompt);
  if (estimate > context_budget) throw PromptTooLong(estimate, context_budget);
  return prompt;
}

IterativePrompt build_iterative_prompt(std::string_view sql, const TemplateRegistry& registry) {
  bool blank = true;
  for (const char c : sql) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw EmptySql();

  std::string system = registry.get("iterative");
  const auto form = system.find(kFillInMarker);
  const auto slot = system.find(kSqlSlot, form == std::string::npos ? 0 : form);
  if (slot == std::string::npos) throw Error("iterative template has no SQL slot");
  const std::string quoted = nlohmann::json(std::string(sql)).dump();
  system.replace(slot, kSqlSlot.size(), quoted.substr(1, quoted.size() - 2));

  IterativePrompt prompt;
  prompt.system_text = std::move(system);
  prompt.user_text = std::string(sql);
  prompt.user_sql = std::string(sql);
  for (std::size_t i = 0; i < 3; ++i) prompt.expected_keys[i] = std::string(kIterativeKeys[i]);
  return prompt;
}

IterativePrompt build_iterative_prompt(std::string_view sql) {
  static const TemplateRegistry registry = TemplateRegistry::builtin();
  return build_iterative_prompt(sql, registry);
}

IterativeResponse parse_iterative_response(std::string_view text, bool strict) {
  bool prose = false;
  const auto objects = extract_json_objects(text, prose);
  if (strict && prose) throw MalformedResponse(1, "text outside the JSON objects (strict mode)");
  IterativeResponse out;
  out.initial = three_strings(find_key(objects, kIterativeKeys[0]), 1);
  out.feedback = parse_feedback(find_key(objects, kIterativeKeys[1]));
  out.final_variations = three_strings(find_key(objects, kIterativeKeys[2]), 3);
  return out;
}

std::string render_iterative_response(const IterativeResponse& response) {
  nlohmann::ordered_json step1;
  step1["Generated Variations"] = response.initial;
  nlohmann::ordered_json step2;
  auto& review = step2["Review Feedback"];
  for (std::size_t i = 0; i < 3; ++i) {
    review["Variation " + std::to_string(i + 1)]["Feedback"] = response.feedback[i];
  }
  nlohmann::ordered_json step3;
  step3["Final Refined Variations"] = response.final_variations;
  return "Step 1:\n```json\n" + step1.dump(4) + "\n```\n\nStep 2:\n```json\n" + step2.dump(4) +
         "\n```\n\nStep 3:\n```json\n" + step3.dump(4) + "\n```\n";
}

}  // namespace s2t
