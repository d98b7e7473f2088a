#include <fstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"
#include "wardboost/pews.hpp"

using namespace wardboost;
using namespace wardboost::pews;

namespace {

FeatureSnapshot vitals_snapshot(double age, std::optional<double> hr, std::optional<double> sbp,
                                std::optional<double> rr, std::optional<double> o2) {
  FeatureSnapshot s;
  s.values[kFeatAge] = age;
  s.values[kFeatHR] = hr;
  s.values[kFeatSBP] = sbp;
  s.values[kFeatRR] = rr;
  s.values[kFeatO2] = o2;
  return s;
}

int item_index(const PewsTable& table, const std::string& name) {
  for (std::size_t i = 0; i < table.items().size(); ++i) {
    if (table.items()[i].name == name) return static_cast<int>(i);
  }
  FAIL("item not found");
  return -1;
}

}  // namespace

TEST_CASE("default table loads, validates, and scores normals at zero") {
  const auto table = PewsTable::default_table();
  CHECK(table.items().size() == 4);
  CHECK(table.max_score() == 16);
  // Age-appropriate vitals for a five-year-old.
  const auto normal = vitals_snapshot(5.0, 90.0, 100.0, 20.0, 98.0);
  CHECK(table.score(normal) == 0);
}

TEST_CASE("missing items score zero and never increase the total") {
  const auto table = PewsTable::default_table();
  const auto all_missing = vitals_snapshot(5.0, {}, {}, {}, {});
  CHECK(table.score(all_missing) == 0);

  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    auto full = vitals_snapshot(rng.uniform(kMinAgeYears, kMaxAgeYears),
                                rng.uniform(20.0, 220.0), rng.uniform(40.0, 180.0),
                                rng.uniform(2.0, 90.0), rng.uniform(60.0, 100.0));
    const int with = table.score(full);
    auto dropped = full;
    const int which = rng.uniform_int(0, 3);
    const int features[] = {kFeatHR, kFeatSBP, kFeatRR, kFeatO2};
    dropped.values[features[which]].reset();
    CHECK(table.score(dropped) <= with);
  }
}

TEST_CASE("extreme values hit the table's maximum sub-score") {
  const auto table = PewsTable::default_table();
  const int hr = item_index(table, "HR");
  CHECK(table.item_subscore(hr, 240.0, 5.0) == 4);  // extreme tachycardia for age
  CHECK(table.item_subscore(hr, 20.0, 5.0) == 4);
  CHECK(table.item_subscore(hr, 90.0, 5.0) == 0);
  CHECK(table.item_subscore(hr, std::nullopt, 5.0) == 0);
}

TEST_CASE("sub-scores are age dependent for HR and not for O2") {
  const auto table = PewsTable::default_table();
  const int hr = item_index(table, "HR");
  const int o2 = item_index(table, "O2");
  CHECK(table.item_subscore(hr, 140.0, 0.1) == 0);   // infant: normal
  CHECK(table.item_subscore(hr, 140.0, 15.0) == 4);  // adolescent: extreme
  CHECK(table.item_subscore(o2, 93.0, 0.1) == table.item_subscore(o2, 93.0, 15.0));
}

TEST_CASE("scores move outward monotonically from the normal band") {
  const auto table = PewsTable::default_table();
  for (const auto& name : {"HR", "sBP", "RR", "O2"}) {
    const int item = item_index(table, name);
    for (const double age : {0.1, 0.5, 2.0, 8.0, 16.0}) {
      // Find a zero-scoring center, then sweep outward in both directions.
      double center = -1.0;
      for (double v = 0.0; v <= 260.0; v += 0.5) {
        if (table.item_subscore(item, v, age) == 0) {
          center = v;
          break;
        }
      }
      REQUIRE(center >= 0.0);
      int previous = 0;
      for (double v = center; v <= 400.0; v += 0.5) {
        const int s = table.item_subscore(item, v, age);
        CHECK(s >= previous);
        previous = s;
      }
      previous = 0;
      for (double v = center; v >= -50.0; v -= 0.5) {
        const int s = table.item_subscore(item, v, age);
        CHECK(s >= previous);
        previous = s;
      }
    }
  }
}

TEST_CASE("pews_score adds the item sub-scores") {
  const auto table = PewsTable::default_table();
  // Five-year-old: HR 115 scores 1, RR 42 scores 2, others normal.
  const auto snap = vitals_snapshot(5.0, 115.0, 100.0, 42.0, 98.0);
  CHECK(table.score(snap) == 3);
}

TEST_CASE("table validation rejects gaps, overlaps, and short coverage") {
  const char* gap = R"({"items":[{"name":"O2","age_bands":[{"lo_years":0,"hi_years":20,
    "intervals":[{"lo":null,"hi":90,"score":2},{"lo":91,"hi":null,"score":0}]}]}]})";
  CHECK_THROWS_AS(PewsTable::from_json(nlohmann::json::parse(gap)), std::invalid_argument);

  const char* overlap = R"({"items":[{"name":"O2","age_bands":[{"lo_years":0,"hi_years":20,
    "intervals":[{"lo":null,"hi":92,"score":2},{"lo":91,"hi":null,"score":0}]}]}]})";
  CHECK_THROWS_AS(PewsTable::from_json(nlohmann::json::parse(overlap)), std::invalid_argument);

  const char* open_end = R"({"items":[{"name":"O2","age_bands":[{"lo_years":0,"hi_years":20,
    "intervals":[{"lo":null,"hi":92,"score":2},{"lo":92,"hi":100,"score":0}]}]}]})";
  CHECK_THROWS_AS(PewsTable::from_json(nlohmann::json::parse(open_end)), std::invalid_argument);

  const char* short_bands = R"({"items":[{"name":"HR","age_bands":[{"lo_years":0,"hi_years":10,
    "intervals":[{"lo":null,"hi":null,"score":0}]}]}]})";
  CHECK_THROWS_AS(PewsTable::from_json(nlohmann::json::parse(short_bands)),
                  std::invalid_argument);

  const char* unknown = R"({"items":[{"name":"Lactate","age_bands":[{"lo_years":0,"hi_years":20,
    "intervals":[{"lo":null,"hi":null,"score":0}]}]}]})";
  CHECK_THROWS_AS(PewsTable::from_json(nlohmann::json::parse(unknown)), std::invalid_argument);
}

TEST_CASE("select_cutoff: separable scores pick the smallest perfect cutoff") {
  std::vector<int> scores{3, 3, 3, 0, 0, 0};
  std::vector<int> labels{+1, +1, +1, -1, -1, -1};
  CHECK(select_cutoff(scores, labels) == 1);
}

TEST_CASE("select_cutoff: identical scores across classes") {
  std::vector<int> scores{2, 2, 2, 2, 2, 2};
  std::vector<int> labels{+1, +1, +1, -1, -1, -1};
  // Candidates: c<=2 gives sens 1 / spec 0; c=3 gives sens 0 / spec 1.
  // All gaps equal 1; the sensitivity tie-break keeps c = 0.
  const int c = select_cutoff(scores, labels);
  CHECK(c == 0);
  CHECK(c == testing::oracle_select_cutoff(scores, labels));
}

TEST_CASE("select_cutoff rejects single-class input") {
  std::vector<int> scores{1, 2, 3};
  std::vector<int> labels{+1, +1, +1};
  CHECK_THROWS_AS(select_cutoff(scores, labels), std::runtime_error);
}

TEST_CASE("select_cutoff agrees with the independent sweep on random sets") {
  Rng rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.uniform_int(6, 80);
    std::vector<int> scores(n), labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.uniform_int(0, 12);
      labels[i] = rng.bernoulli(0.5) ? +1 : -1;
    }
    labels[0] = +1;
    labels[n - 1] = -1;
    CHECK(select_cutoff(scores, labels) == testing::oracle_select_cutoff(scores, labels));
  }
}

TEST_CASE("baseline classify honors the match-or-exceed rule") {
  PewsBaseline baseline;
  baseline.cutoff = 3;
  const auto warm = vitals_snapshot(5.0, 115.0, 100.0, 42.0, 98.0);  // scores 3
  const auto mild = vitals_snapshot(5.0, 115.0, 100.0, 20.0, 98.0);  // scores 1
  CHECK(classify(baseline, warm) == +1);
  CHECK(classify(baseline, mild) == -1);
  baseline.cutoff = 0;
  CHECK(classify(baseline, mild) == +1);  // zero cutoff accepts everything
}

TEST_CASE("select_cutoff wrapper scores snapshots through the table") {
  const auto table = PewsTable::default_table();
  std::vector<FeatureSnapshot> train;
  for (int i = 0; i < 10; ++i) {
    // Positives tachycardic and tachypneic, negatives normal.
    const bool pos = i % 2 == 0;
    auto s = vitals_snapshot(5.0, pos ? 140.0 : 90.0, 100.0, pos ? 45.0 : 20.0, 98.0);
    s.label = pos ? +1 : -1;
    train.push_back(std::move(s));
  }
  const int cutoff = select_cutoff(table, train);
  CHECK(cutoff >= 1);
  PewsBaseline baseline{table, cutoff};
  for (const auto& x : train) {
    CHECK(classify(baseline, x) == x.label);
  }
}

TEST_CASE("pews baseline JSON round trip") {
  PewsBaseline baseline{PewsTable::default_table(), 2};
  const auto doc = nlohmann::json::parse(baseline_to_json(baseline).dump());
  const auto loaded = baseline_from_json(doc);
  CHECK(loaded.cutoff == 2);
  Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_snapshot(rng);
    CHECK(loaded.table.score(x) == baseline.table.score(x));
  }
}

TEST_CASE("shipped config file matches the built-in table") {
  const std::string path = std::string(WARDBOOST_SOURCE_DIR) + "/config/pews_default.json";
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json doc;
  in >> doc;
  const auto from_file = PewsTable::from_json(doc);
  const auto built_in = PewsTable::default_table();
  CHECK(from_file.to_json() == built_in.to_json());
}
