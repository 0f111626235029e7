#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "s2t/demo_selection.hpp"

namespace s2t {

namespace detail {
// Template files compiled into the library, as (stem, body) pairs.
const std::vector<std::pair<std::string, std::string>>& builtin_template_files();
}  // namespace detail

// Named prompt templates. Bodies are UTF-8 text with {instruction},
// {examples} and {seed} placeholders; a single trailing newline is dropped on
// load. Read-only after construction.
class TemplateRegistry {
 public:
  // prefix, iterative, instruction_gpt4, instruction_default.
  static TemplateRegistry builtin();

  // Built-ins overridden/extended by every *.txt file in `dir`, keyed by stem.
  static TemplateRegistry from_directory(const std::filesystem::path& dir);

  void add(std::string id, std::string body);
  bool contains(std::string_view id) const;
  // Throws UnknownTemplate.
  const std::string& get(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

// Instruction text t stored as template "instruction_<name>".
const std::string& instruction_text(const TemplateRegistry& registry, std::string_view name);

inline constexpr std::string_view kDefaultTemplateId = "prefix";
inline constexpr std::size_t kDefaultContextBudget = 2048;

// Whitespace token count times 1.3, rounded up.
std::size_t estimate_tokens(std::string_view text);

// "SQL: <x>\nQuestion: <y>\n" per demo, in the given order.
std::string render_examples(std::span<const Demo> demos);

// "SQL: <seed>\nQuestion:"
std::string render_seed(std::string_view seed_sql);

// Prefix prompt P(t + e + s). The template determines layout; with no demos the
// examples placeholder expands to nothing. Throws UnknownTemplate or
// PromptTooLong when the estimate exceeds context_budget.
std::string build_icl_prompt(std::string_view instruction, std::span<const Demo> demos,
                             std::string_view seed_sql, std::string_view template_id,
                             const TemplateRegistry& registry,
                             std::size_t context_budget = kDefaultContextBudget);

inline constexpr std::array<std::string_view, 3> kIterativeKeys = {
    "Generated Variations", "Review Feedback", "Final Refined Variations"};

// The three-step generate / review / refine prompt.
struct IterativePrompt {
  std::string system_text;
  std::string user_text;
  std::string user_sql;
  std::array<std::string, 3> expected_keys;
};

// Substitutes the SQL into the fill-in form of the iterative template.
// Throws EmptySql.
IterativePrompt build_iterative_prompt(std::string_view sql, const TemplateRegistry& registry);
IterativePrompt build_iterative_prompt(std::string_view sql);

// Utterance sets U, F and U' from one iterative response.
struct IterativeResponse {
  std::array<std::string, 3> initial;
  std::array<std::string, 3> feedback;
  std::array<std::string, 3> final_variations;

  bool operator==(const IterativeResponse&) const = default;
};

// Extracts the three step objects from a model reply. In the default mode
// code fences and surrounding prose are ignored; strict mode rejects any text
// outside the JSON objects. Throws MalformedResponse naming the first step
// that is missing or does not have exactly three entries.
IterativeResponse parse_iterative_response(std::string_view text, bool strict = false);

// Renders a reply in the layout the iterative prompt asks for.
std::string render_iterative_response(const IterativeResponse& response);

}  // namespace s2t
