#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "s2t/dataset_io.hpp"
#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "synthetic.hpp"

namespace s2t {
namespace {

namespace fs = std::filesystem;

class DatasetIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("s2t_dataset_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_text(const std::string& name, const std::string& body) {
    std::ofstream(dir_ / name, std::ios::binary) << body;
    return dir_ / name;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::vector<QueryRecord> random_records(Rng& rng, std::size_t n) {
  const std::array<std::string, 5> odd = {"", "with \"quotes\"", "caf\xc3\xa9", "tab\there", "new\nline"};
  testdata::SyntheticOptions opt;
  opt.count = n;
  opt.seed = rng.next_u64();
  auto records = testdata::synthetic_records(opt);
  for (auto& r : records) {
    if (rng.uniform_index(5) == 0) r.utterance.reset();
    else if (rng.uniform_index(4) == 0) *r.utterance += " " + odd[rng.uniform_index(odd.size())];
    for (std::size_t g = 0, k = rng.uniform_index(4); g < k; ++g) r.generated.push_back(testdata::random_sentence(rng, 1, 9));
    if (rng.uniform_index(2) == 0) r.query_type = static_cast<QueryType>(rng.uniform_index(3));
    r.split = rng.uniform_index(2) ? Split::Test : Split::Train;
  }
  return records;
}

TEST_F(DatasetIo, RoundTrip) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto records = random_records(rng, 1 + rng.uniform_index(40));
    const auto path = dir_ / "rt.jsonl";
    const auto written = write_dataset(records, path, 9);
    const auto loaded = load_dataset(path, DatasetFormat::S2tJsonl);
    ASSERT_EQ(loaded.records, records);
    EXPECT_TRUE(loaded.parse_failures.empty());
    auto recomputed = compute_manifest(records, "rt");
    EXPECT_EQ(loaded.manifest.records, recomputed.records);
    EXPECT_EQ(written.generated, recomputed.generated);
    const auto sidecar = manifest_from_json(nlohmann::json::parse(slurp(manifest_path(path))));
    EXPECT_EQ(sidecar, written);
    EXPECT_EQ(sidecar.content_hash, text_hash(slurp(path)));
    EXPECT_EQ(sidecar.seed, 9u);
  }
}

TEST_F(DatasetIo, WritesAreByteIdentical) {
  Rng rng(77);
  const auto records = random_records(rng, 1000);
  write_dataset(records, dir_ / "a.jsonl", 1);
  write_dataset(records, dir_ / "b.jsonl", 1);
  const std::string a = slurp(dir_ / "a.jsonl");
  EXPECT_EQ(a, slurp(dir_ / "b.jsonl"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1000);
}

TEST_F(DatasetIo, FieldOrder) {
  QueryRecord r{"x1", "SELECT a FROM t", "What is a?", {"g1"}, QueryType::Simple, Split::Test};
  EXPECT_EQ(record_to_jsonl(r),
            R"({"id":"x1","sql":"SELECT a FROM t","utterance":"What is a?","generated":["g1"],"split":"test","query_type":"simple"})");
  r.utterance.reset();
  r.query_type.reset();
  EXPECT_EQ(record_to_jsonl(r), R"({"id":"x1","sql":"SELECT a FROM t","utterance":null,"generated":["g1"],"split":"test"})");
}

TEST_F(DatasetIo, SchemaErrorsNameLineAndField) {
  const auto check = [&](const std::string& body, std::size_t line, const std::string& field) {
    const auto p = write_text("bad.jsonl", body);
    try {
      load_dataset(p, DatasetFormat::S2tJsonl);
      ADD_FAILURE() << "no SchemaError for " << body;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.line(), line) << body;
      EXPECT_EQ(e.field(), field) << body;
    }
  };
  const std::string ok = R"({"id":"a","sql":"SELECT 1"})" "\n";
  check(ok + R"({"id":"b"})" "\n", 2, "sql");
  check(ok + "\n" + R"({"sql":"SELECT 1"})", 3, "id");
  check(ok + R"({"id":"a","sql":"SELECT 2"})", 2, "id");
  check(ok + R"({"id":"c","sql":"SELECT 2","generated":["1","2","3","4"]})", 2, "generated");
  check(ok + R"({"id":"c","sql":"SELECT 2","split":"dev"})", 2, "split");
  check(ok + "{not json", 2, "<line>");
  EXPECT_THROW(load_dataset(dir_ / "missing.jsonl", DatasetFormat::S2tJsonl), IoError);
}

TEST_F(DatasetIo, UnparseableSqlIsCollected) {
  const auto p = write_text("mixed.jsonl", R"({"id":"a","sql":"SELECT 1"})" "\n" R"({"id":"b","sql":"SELEC wat"})" "\n");
  const auto loaded = load_dataset(p, DatasetFormat::S2tJsonl);
  ASSERT_EQ(loaded.records.size(), 2u);
  ASSERT_EQ(loaded.parse_failures.size(), 1u);
  EXPECT_EQ(loaded.parse_failures[0].id, "b");
  EXPECT_EQ(loaded.parse_failures[0].line, 2u);
  EXPECT_EQ(loaded.manifest.parse_failures, 1u);
}

TEST_F(DatasetIo, SpiderAndCosqlPairs) {
  const auto spider = write_text("spider.json", R"([
    {"db_id": "dog_kennels", "query": "SELECT count(*) FROM Dogs", "question": "How many dogs?"},
    {"db_id": "dog_kennels", "query": "SELECT name FROM Dogs", "question": "Dog names?"},
    {"db_id": "concert_singer", "query": "SELECT count(*) FROM singer", "question": "How many singers?"}])");
  const auto s = load_dataset(spider, DatasetFormat::Text2SqlPairs, Split::Test);
  ASSERT_EQ(s.records.size(), 3u);
  EXPECT_EQ(s.records[1].id, "dog_kennels-1");
  EXPECT_EQ(s.records[2].id, "concert_singer-0");
  EXPECT_EQ(s.records[0].utterance, "How many dogs?");
  EXPECT_EQ(s.records[0].split, Split::Test);

  const auto cosql = write_text("cosql.json", R"([
    {"database_id": "flight_2", "final": {"query": "SELECT count(*) FROM flights", "utterance": "How many flights?"},
     "interaction": []}])");
  const auto c = load_dataset(cosql, DatasetFormat::Text2SqlPairs);
  ASSERT_EQ(c.records.size(), 1u);
  EXPECT_EQ(c.records[0].id, "flight_2-0");
  EXPECT_EQ(c.records[0].sql, "SELECT count(*) FROM flights");
}

TEST(Manifest, CountsForARepurposedCorpus) {
  // One repurposed split: 290 SQL queries, 281 with a gold utterance, three
  // generated utterances each.
  std::vector<QueryRecord> records;
  for (int i = 0; i < 290; ++i) {
    QueryRecord r;
    r.id = "cosql-" + std::to_string(i);
    r.sql = "SELECT a FROM t";
    if (i < 281) r.utterance = "question " + std::to_string(i);
    r.generated = {"g1", "g2", "g3"};
    r.split = Split::Test;
    records.push_back(r);
  }
  const auto m = compute_manifest(records, "CoSQL-S2T");
  EXPECT_EQ(m.sql, 290u);
  EXPECT_EQ(m.utterances, 281u);
  EXPECT_EQ(m.generated, 870u);
  EXPECT_EQ(m.test, 290u);
  EXPECT_EQ(manifest_from_json(manifest_to_json(m)), m);
}

TEST(Manifest, ThreeCorporaTotal) {
  std::size_t total = 0;
  // 293 sampled queries from each of three corpora.
  for (const std::size_t queries : {293u, 293u, 293u}) {
    std::vector<QueryRecord> records(queries, QueryRecord{"", "SELECT 1", {}, {"a", "b", "c"}, {}, Split::Test});
    total += compute_manifest(records, "x").generated;
  }
  // 879 source queries, three utterances each.
  EXPECT_EQ(total, 2637u);
}

std::vector<std::string> regex_leaks(const QueryRecord& r, const std::set<std::string>& terms) {
  std::vector<std::string> texts;
  if (r.utterance) texts.push_back(*r.utterance);
  texts.insert(texts.end(), r.generated.begin(), r.generated.end());
  std::vector<std::string> out;
  for (const auto& term : terms) {
    const std::string escaped = std::regex_replace(term, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)");
    const std::regex re("(^|[^A-Za-z0-9_])" + escaped + "($|[^A-Za-z0-9_])", std::regex::icase);
    for (const auto& t : texts) {
      if (std::regex_search(t, re)) {
        out.push_back(term);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Leakage, MatchesRegexOracle) {
  Rng rng(13);
  const std::vector<std::string> fillers = {"dogs", "Dogs", "DOG_ID", "dog", "dog_ids", "treatments.", "(age)",
                                            "x_age", "name", "names", "Singer", "t1", "how", "many", "are"};
  testdata::SyntheticOptions opt;
  opt.count = 300;
  opt.seed = 21;
  for (auto r : testdata::synthetic_records(opt)) {
    std::string u;
    for (std::size_t i = 0, n = 1 + rng.uniform_index(8); i < n; ++i) u += fillers[rng.uniform_index(fillers.size())] + " ";
    r.utterance = u;
    r.generated = {testdata::random_sentence(rng, 1, 5) + " " + fillers[rng.uniform_index(fillers.size())]};
    const auto terms = schema_terms(r);
    const auto result = leakage_check(r, terms);
    ASSERT_EQ(result.terms, regex_leaks(r, terms)) << r.sql << " | " << u;
    EXPECT_EQ(leakage_check(r, terms).terms, result.terms);
  }
}

TEST(Leakage, WholeWordCaseInsensitive) {
  QueryRecord r{"a", "SELECT count(*) FROM Dogs WHERE dog_id NOT IN (SELECT dog_id FROM Treatments)",
                "How many DOGS have no treatments?", {"Count dogs lacking a dog_id-based record"}, {}, {}};
  const auto terms = schema_terms(r);
  EXPECT_EQ(terms, (std::set<std::string>{"dog_id", "dogs", "treatments"}));
  EXPECT_EQ(leakage_check(r, terms).terms, (std::vector<std::string>{"dog_id", "dogs", "treatments"}));
  r.utterance = "How many dog records?";
  r.generated = {"dog_identifier"};
  EXPECT_FALSE(leakage_check(r, terms).flagged());
  r.sql = "not sql at all (";
  EXPECT_TRUE(schema_terms(r).empty());
}

}  // namespace
}  // namespace s2t
