#include "s2t/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "s2t/sql_ast.hpp"

namespace s2t {

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "test"; }

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  return std::nullopt;
}

std::optional<std::string> primary_reference(const QueryRecord& record) {
  if (record.utterance && !record.utterance->empty()) return record.utterance;
  for (const auto& g : record.generated) {
    if (!g.empty()) return g;
  }
  return std::nullopt;
}

std::vector<std::string> all_references(const QueryRecord& record) {
  std::vector<std::string> out;
  if (record.utterance && !record.utterance->empty()) out.push_back(*record.utterance);
  for (const auto& g : record.generated) {
    if (!g.empty()) out.push_back(g);
  }
  return out;
}

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

// query_type is left as stored so that load(write(R)) == R; callers classify
// on demand.
void validate_sql(const QueryRecord& record, std::size_t line, std::vector<ParseFailure>& failures) {
  try {
    parse_sql(record.sql);
  } catch (const Error& e) {
    failures.push_back({record.id, line, e.what()});
  }
}

QueryRecord record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "<record>", "expected a JSON object");
  QueryRecord r;
  const auto id = j.find("id");
  if (id == j.end() || !(id->is_string() || id->is_number_integer())) {
    throw SchemaError(line, "id", "missing or not a string");
  }
  r.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
  const auto sql = j.find("sql");
  if (sql == j.end() || !sql->is_string()) throw SchemaError(line, "sql", "missing or not a string");
  r.sql = sql->get<std::string>();
  if (is_blank(r.sql)) throw SchemaError(line, "sql", "empty");
  if (const auto u = j.find("utterance"); u != j.end() && !u->is_null()) {
    if (!u->is_string()) throw SchemaError(line, "utterance", "not a string");
    r.utterance = u->get<std::string>();
  }
  if (const auto g = j.find("generated"); g != j.end() && !g->is_null()) {
    if (!g->is_array()) throw SchemaError(line, "generated", "not a list");
    if (g->size() > kMaxGeneratedUtterances) throw SchemaError(line, "generated", "more than 3 utterances");
    for (const auto& item : *g) {
      if (!item.is_string()) throw SchemaError(line, "generated", "entry is not a string");
      r.generated.push_back(item.get<std::string>());
    }
  }
  if (const auto s = j.find("split"); s != j.end() && !s->is_null()) {
    const auto split = s->is_string() ? parse_split(s->get<std::string>()) : std::nullopt;
    if (!split) throw SchemaError(line, "split", "expected \"train\" or \"test\"");
    r.split = *split;
  }
  if (const auto q = j.find("query_type"); q != j.end() && !q->is_null()) {
    const auto type = q->is_string() ? parse_query_type(q->get<std::string>()) : std::nullopt;
    if (!type) throw SchemaError(line, "query_type", "expected simple, nested or aggregate");
    r.query_type = *type;
  }
  return r;
}

std::vector<std::pair<QueryRecord, std::size_t>> load_jsonl(const std::string& text) {
  std::vector<std::pair<QueryRecord, std::size_t>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(line_no, "<line>", "not valid JSON");
    out.emplace_back(record_from_json(j, line_no), line_no);
  }
  return out;
}

// Entries are numbered from 1 in file order; "line" below is that number.
std::vector<std::pair<QueryRecord, std::size_t>> load_pairs(const std::string& text, Split split) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw SchemaError(1, "<file>", "expected a JSON array");
  std::vector<std::pair<QueryRecord, std::size_t>> out;
  std::map<std::string, std::size_t> per_db;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::size_t entry = i + 1;
    const auto& item = j[i];
    if (!item.is_object()) throw SchemaError(entry, "<entry>", "expected a JSON object");
    const nlohmann::json* source = &item;
    std::string_view sql_key = "query";
    std::string_view text_key = "question";
    if (item.contains("final")) {
      source = &item["final"];
      text_key = "utterance";
    }
    const auto sql = source->find(std::string(sql_key));
    if (sql == source->end() || !sql->is_string()) {
      throw SchemaError(entry, std::string(sql_key), "missing or not a string");
    }
    QueryRecord r;
    const std::string db = item.value("database_id", item.value("db_id", std::string("db")));
    r.id = db + "-" + std::to_string(per_db[db]++);
    r.sql = sql->get<std::string>();
    if (is_blank(r.sql)) throw SchemaError(entry, std::string(sql_key), "empty");
    if (const auto u = source->find(std::string(text_key)); u != source->end() && u->is_string()) {
      r.utterance = u->get<std::string>();
    }
    r.split = split;
    out.emplace_back(std::move(r), entry);
  }
  return out;
}

}  // namespace

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
  if (name == "s2t-jsonl") return DatasetFormat::S2tJsonl;
  if (name == "text2sql-pairs") return DatasetFormat::Text2SqlPairs;
  return std::nullopt;
}

nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["schema_version"] = m.schema_version;
  j["counts"] = {{"records", m.records}, {"sql", m.sql},     {"utterances", m.utterances},
                 {"generated", m.generated}, {"train", m.train}, {"test", m.test},
                 {"parse_failures", m.parse_failures}};
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  j["content_hash"] = m.content_hash;
  j["notes"] = m.notes;
  return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.schema_version = j.at("schema_version").get<int>();
  const auto& c = j.at("counts");
  m.records = c.at("records").get<std::size_t>();
  m.sql = c.at("sql").get<std::size_t>();
  m.utterances = c.at("utterances").get<std::size_t>();
  m.generated = c.at("generated").get<std::size_t>();
  m.train = c.at("train").get<std::size_t>();
  m.test = c.at("test").get<std::size_t>();
  m.parse_failures = c.value("parse_failures", std::size_t{0});
  if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
  m.content_hash = j.value("content_hash", std::string{});
  m.notes = j.value("notes", std::vector<std::string>{});
  return m;
}

DatasetManifest compute_manifest(std::span<const QueryRecord> records, std::string name) {
  DatasetManifest m;
  m.name = std::move(name);
  m.records = records.size();
  for (const auto& r : records) {
    if (!is_blank(r.sql)) ++m.sql;
    if (r.utterance && !r.utterance->empty()) ++m.utterances;
    m.generated += r.generated.size();
    (r.split == Split::Train ? m.train : m.test) += 1;
  }
  return m;
}

LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format, Split split) {
  const std::string text = read_file(path);
  auto entries = format == DatasetFormat::S2tJsonl ? load_jsonl(text) : load_pairs(text, split);

  LoadedDataset out;
  std::map<std::string, std::size_t> seen;
  for (auto& [record, line] : entries) {
    if (const auto [it, inserted] = seen.emplace(record.id, line); !inserted) {
      throw SchemaError(line, "id", "duplicate id " + record.id + " (first on line " +
                                        std::to_string(it->second) + ")");
    }
    validate_sql(record, line, out.parse_failures);
    out.records.push_back(std::move(record));
  }
  out.manifest = compute_manifest(out.records, path.stem().string());
  out.manifest.parse_failures = out.parse_failures.size();
  return out;
}

std::string record_to_jsonl(const QueryRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["sql"] = r.sql;
  j["utterance"] = r.utterance ? nlohmann::ordered_json(*r.utterance) : nlohmann::ordered_json(nullptr);
  j["generated"] = r.generated;
  j["split"] = split_name(r.split);
  if (r.query_type) j["query_type"] = query_type_name(*r.query_type);
  return j.dump();
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path) {
  return dataset_path.parent_path() / (dataset_path.stem().string() + ".manifest.json");
}

DatasetManifest write_dataset(std::span<const QueryRecord> records, const std::filesystem::path& path,
                              std::optional<std::uint64_t> seed) {
  std::string body;
  for (const auto& r : records) {
    if (r.generated.size() > kMaxGeneratedUtterances) {
      throw Error("record " + r.id + " has more than 3 generated utterances");
    }
    body += record_to_jsonl(r);
    body += '\n';
  }
  auto manifest = compute_manifest(records, path.stem().string());
  manifest.seed = seed;
  manifest.content_hash = text_hash(body);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::ofstream side(manifest_path(path), std::ios::binary | std::ios::trunc);
  if (!side) throw IoError("cannot write " + manifest_path(path).string());
  side << manifest_to_json(manifest).dump(2) << '\n';
  return manifest;
}

std::set<std::string> schema_terms(const QueryRecord& record) {
  std::set<std::string> out;
  try {
    for (auto& name : schema_identifiers(parse_sql(record.sql))) out.insert(std::move(name));
  } catch (const Error&) {
  }
  return out;
}

LeakageResult leakage_check(const QueryRecord& record, const std::set<std::string>& terms) {
  auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  std::vector<std::string> texts;
  if (record.utterance) texts.push_back(lower(*record.utterance));
  for (const auto& g : record.generated) texts.push_back(lower(g));

  LeakageResult result;
  for (const auto& raw : terms) {
    const std::string term = lower(raw);
    if (term.empty()) continue;
    const bool hit = std::any_of(texts.begin(), texts.end(), [&](const std::string& text) {
      for (auto pos = text.find(term); pos != std::string::npos; pos = text.find(term, pos + 1)) {
        const bool left = pos == 0 || !word_char(text[pos - 1]);
        const auto end = pos + term.size();
        const bool right = end == text.size() || !word_char(text[end]);
        if (left && right) return true;
      }
      return false;
    });
    if (hit) result.terms.push_back(term);
  }
  std::sort(result.terms.begin(), result.terms.end());
  result.terms.erase(std::unique(result.terms.begin(), result.terms.end()), result.terms.end());
  return result;
}

}  // namespace s2t
