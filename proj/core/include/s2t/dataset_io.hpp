#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2t/record.hpp"

namespace s2t {

enum class DatasetFormat {
  S2tJsonl,      // one QueryRecord per line
  Text2SqlPairs  // Spider-style JSON array (query/question) or CoSQL/SParC
                 // interactions (final.query/final.utterance)
};

std::optional<DatasetFormat> parse_dataset_format(std::string_view name);

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetManifest {
  std::string name;
  int schema_version = kDatasetSchemaVersion;
  std::size_t records = 0;
  std::size_t sql = 0;
  std::size_t utterances = 0;  // records with a gold utterance
  std::size_t generated = 0;   // total generated utterances
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t parse_failures = 0;
  std::optional<std::uint64_t> seed;
  std::string content_hash;  // of the JSONL body, when written
  std::vector<std::string> notes;

  bool operator==(const DatasetManifest&) const = default;
};

nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);

// Recounts every field from the records themselves.
DatasetManifest compute_manifest(std::span<const QueryRecord> records, std::string name);

struct ParseFailure {
  std::string id;
  std::size_t line = 0;
  std::string message;
};

struct LoadedDataset {
  std::vector<QueryRecord> records;
  DatasetManifest manifest;
  std::vector<ParseFailure> parse_failures;  // SQL the AST parser rejected
};

// Loads and validates a dataset. Unparseable SQL is collected in
// parse_failures rather than rejected. Throws SchemaError(line, field) for
// structural problems and IoError when the file cannot be read. Pair files
// take their split from `split`.
LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                           Split split = Split::Train);

// JSONL with fields in the order id, sql, utterance, generated, split,
// query_type, plus a "<stem>.manifest.json" sidecar. Throws IoError.
DatasetManifest write_dataset(std::span<const QueryRecord> records, const std::filesystem::path& path,
                              std::optional<std::uint64_t> seed = std::nullopt);

std::string record_to_jsonl(const QueryRecord& record);

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);

// Table and column names of the record's own SQL, lower-cased. Empty when the
// SQL does not parse.
std::set<std::string> schema_terms(const QueryRecord& record);

struct LeakageResult {
  std::vector<std::string> terms;  // sorted
  bool flagged() const noexcept { return !terms.empty(); }
};

// Schema identifiers that appear as whole words (case-insensitive, word
// characters [A-Za-z0-9_]) in the gold or any generated utterance.
LeakageResult leakage_check(const QueryRecord& record, const std::set<std::string>& terms);

}  // namespace s2t
