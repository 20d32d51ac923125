/*
 * Copyright 2026 The Actirep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "actirep/labels.hpp"

#include <filesystem>

#include "actirep/common.hpp"
#include "actirep/rng.hpp"
#include "doctest.h"

using namespace actirep;
using ingest::SurveyRecord;
using labels::ExperimentId;
using labels::ExperimentSpec;
using labels::Outcome;

namespace {

SurveyRecord record(std::optional<int> pcl5, std::optional<double> prom,
                    std::optional<int> panic,
                    std::optional<double> sf12 = std::nullopt) {
  SurveyRecord r;
  r.participant_id = "p";
  r.pcl5 = pcl5;
  r.prom_dep8b = prom;
  r.panic_sleep_item = panic;
  r.sf12_prehealth = sf12;
  return r;
}

SurveyRecord random_record(Rng& rng) {
  SurveyRecord r;
  r.participant_id = "r";
  if (rng.uniform01() < 0.9) r.pcl5 = static_cast<int>(rng.uniform_index(81));
  if (rng.uniform01() < 0.9) r.prom_dep8b = rng.uniform(30.0, 80.0);
  if (rng.uniform01() < 0.9) {
    r.panic_sleep_item = static_cast<int>(rng.uniform_index(4));
  }
  if (rng.uniform01() < 0.9) r.sf12_prehealth = rng.uniform(20.0, 60.0);
  return r;
}

}  // namespace

TEST_SUITE("labels") {

TEST_CASE("survey thresholds") {
  CHECK(labels::score_surveys(record(29, {}, {})).ptsd == true);
  CHECK(labels::score_surveys(record(28, {}, {})).ptsd == false);
  CHECK(labels::score_surveys(record({}, 60.0, {})).depression == true);
  CHECK(labels::score_surveys(record({}, 59.9, {})).depression == false);
  CHECK(labels::score_surveys(record({}, {}, 1)).panic_sleep == true);
  CHECK(labels::score_surveys(record({}, {}, 0)).panic_sleep == false);
  const auto absent = labels::score_surveys(record({}, {}, {}));
  CHECK_FALSE(absent.ptsd.has_value());
  CHECK_FALSE(absent.depression.has_value());
  CHECK_FALSE(absent.panic_sleep.has_value());
}

TEST_CASE("experiment specs") {
  const auto e1 = ExperimentSpec::make(ExperimentId::E1);
  CHECK(e1.use_pcl5);
  CHECK_FALSE(e1.use_panic_sleep);
  CHECK_FALSE(e1.use_prom_dep8b);
  CHECK_FALSE(e1.use_sf12_feature);
  const auto e2 = ExperimentSpec::make(ExperimentId::E2);
  CHECK(e2.use_panic_sleep);
  CHECK_FALSE(e2.use_prom_dep8b);
  const auto e3 = ExperimentSpec::make(ExperimentId::E3);
  CHECK(e3.use_prom_dep8b);
  CHECK_FALSE(e3.use_sf12_feature);
  const auto e4 = ExperimentSpec::make(ExperimentId::E4);
  CHECK(e4.use_prom_dep8b);
  CHECK(e4.use_sf12_feature);
}

TEST_CASE("label assignment") {
  const auto e1 = ExperimentSpec::make(ExperimentId::E1);
  const auto e3 = ExperimentSpec::make(ExperimentId::E3);
  const auto e4 = ExperimentSpec::make(ExperimentId::E4);

  CHECK(labels::assign_label(record(40, {}, {}), e1) == Outcome::Unhealthy);
  CHECK(labels::assign_label(record(10, {}, {}), e1) == Outcome::Healthy);
  CHECK(labels::assign_label(record({}, {}, {}), e1) == Outcome::Ineligible);

  // Mixed flags under multi-survey specs.
  CHECK(labels::assign_label(record(40, 50.0, 2), e3) == Outcome::Ineligible);
  CHECK(labels::assign_label(record(40, 65.0, 2), e3) == Outcome::Unhealthy);
  CHECK(labels::assign_label(record(10, 40.0, 0), e3) == Outcome::Healthy);
  CHECK(labels::assign_label(record(40, {}, 2), e3) == Outcome::Ineligible);

  // E4 requires SF-12.
  CHECK(labels::assign_label(record(40, 65.0, 2), e4) == Outcome::Ineligible);
  CHECK(labels::assign_label(record(40, 65.0, 2, 45.0), e4) ==
        Outcome::Unhealthy);
}

TEST_CASE("exactly one outcome per record") {
  Rng rng(71);
  for (int trial = 0; trial < 500; ++trial) {
    const SurveyRecord r = random_record(rng);
    for (ExperimentId id : {ExperimentId::E1, ExperimentId::E2,
                            ExperimentId::E3, ExperimentId::E4}) {
      const Outcome outcome =
          labels::assign_label(r, ExperimentSpec::make(id));
      const bool valid = outcome == Outcome::Healthy ||
                         outcome == Outcome::Unhealthy ||
                         outcome == Outcome::Ineligible;
      CHECK(valid);
    }
  }
}

TEST_CASE("threshold monotonicity") {
  Rng rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    SurveyRecord r = random_record(rng);
    if (!r.pcl5.has_value()) continue;
    bool previous = false;
    for (int score = 0; score <= 80; ++score) {
      r.pcl5 = score;
      const auto flag = labels::score_surveys(r).ptsd;
      REQUIRE(flag.has_value());
      if (previous) CHECK(*flag);  // never flips true -> false
      previous = *flag;
    }
  }
}

TEST_CASE("unhealthy class shrinks as surveys are added") {
  Rng rng(79);
  int n1 = 0, n2 = 0, n3 = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const SurveyRecord r = random_record(rng);
    const bool u1 = labels::assign_label(
                        r, ExperimentSpec::make(ExperimentId::E1)) ==
                    Outcome::Unhealthy;
    const bool u2 = labels::assign_label(
                        r, ExperimentSpec::make(ExperimentId::E2)) ==
                    Outcome::Unhealthy;
    const bool u3 = labels::assign_label(
                        r, ExperimentSpec::make(ExperimentId::E3)) ==
                    Outcome::Unhealthy;
    if (u2) CHECK(u1);  // E2 unhealthy implies E1 unhealthy
    if (u3) CHECK(u2);
    n1 += u1 ? 1 : 0;
    n2 += u2 ? 1 : 0;
    n3 += u3 ? 1 : 0;
  }
  CHECK(n1 >= n2);
  CHECK(n2 >= n3);
}

TEST_CASE("feature vectors") {
  vae::LatentCode code;
  code.mu = {0.1f, -0.5f, 2.0f, 0.0f, 1.0f, -1.0f, 0.25f, 0.75f};
  code.log_var.assign(8, 0.0f);
  const auto e3 = ExperimentSpec::make(ExperimentId::E3);
  const auto e4 = ExperimentSpec::make(ExperimentId::E4);

  const auto raw3 = labels::raw_features(code, record(40, 65.0, 2), e3);
  CHECK(raw3.size() == 8);
  const auto raw4 =
      labels::raw_features(code, record(40, 65.0, 2, 47.5), e4);
  CHECK(raw4.size() == 9);
  CHECK(raw4.back() == 47.5);
  CHECK_THROWS_AS(labels::raw_features(code, record(40, 65.0, 2), e4), Error);
}

TEST_CASE("standardizer centers training features") {
  const std::vector<std::vector<double>> rows{{1.0, 10.0}, {3.0, 30.0},
                                              {5.0, 50.0}};
  const auto standardizer = labels::Standardizer::fit(rows);
  CHECK(standardizer.mean[0] == 3.0);
  CHECK(standardizer.mean[1] == 30.0);
  const auto centered = standardizer.transform({3.0, 30.0});
  CHECK(centered[0] == 0.0);  // value equal to the training mean
  CHECK(centered[1] == 0.0);
  const auto z = standardizer.transform({5.0, 10.0});
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(-1.0));
}

TEST_CASE("labels csv round trip") {
  const std::vector<std::pair<std::string, Outcome>> rows{
      {"a", Outcome::Healthy},
      {"b", Outcome::Unhealthy},
      {"c", Outcome::Ineligible}};
  const auto path = std::filesystem::temp_directory_path() / "labels_test.csv";
  labels::write_labels_csv(rows, ExperimentId::E3, path);
  const auto loaded = labels::read_labels_csv(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0] == rows[0]);
  CHECK(loaded[1] == rows[1]);
  CHECK(loaded[2] == rows[2]);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
