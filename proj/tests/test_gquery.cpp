//
// Copyright 2026 The PACAS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include <gtest/gtest.h>

#include "pacas/error.hpp"
#include "pacas/gquery.hpp"
#include "support/testkit.hpp"

using namespace pacas;

namespace {

GeneralizedQuery migraine_query(int med_level) {
  return {{{"DIAG", "migraine"}}, {"GEN", "MED"}, {0, med_level}};
}

}  // namespace

TEST(GQuery, GroundAndLiftedAnswers) {
  const auto master = testkit::golden_master();
  const Answer ground = {{"female", "naproxen"}, {"male", "dolex"}};
  EXPECT_EQ(eval_ground(migraine_query(1), *master), ground);
  EXPECT_EQ(eval_gq(migraine_query(0), *master), ground);
  EXPECT_EQ(eval_gq(migraine_query(1), *master), (Answer{{"female", "NSAID"}, {"male", "acetaminophen"}}));
  EXPECT_EQ(eval_gq(migraine_query(3), *master), (Answer{{"female", "*"}, {"male", "*"}}));
}

TEST(GQuery, AnswersAreSets) {
  const auto master = testkit::golden_master();
  const GeneralizedQuery g{{{"GEN", "male"}}, {"MED"}, {1}};
  // ibuprofen twice and dolex collapse to two lifted values.
  EXPECT_EQ(eval_gq(g, *master), (Answer{{"NSAID"}, {"acetaminophen"}}));
  const GeneralizedQuery none{{{"DIAG", "hypertension"}}, {"MED"}, {0}};
  EXPECT_TRUE(eval_gq(none, *master).empty());
}

TEST(GQuery, SelectionIsSyntactic) {
  const Relation pub = testkit::golden_public();
  const GeneralizedQuery g{{{"AGE", "[31,60]"}}, {"MED"}, {0}};
  EXPECT_EQ(eval_gq(g, pub).size(), 3u);
  const GeneralizedQuery ground{{{"AGE", "45"}}, {"MED"}, {0}};
  EXPECT_TRUE(eval_gq(ground, pub).empty());
}

TEST(GQuery, LevelBelowStoredValue) {
  const Relation pub = testkit::golden_public();
  const GeneralizedQuery g{{}, {"AGE"}, {0}};
  try {
    eval_gq(g, pub);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLevelBelowValue);
  }
  EXPECT_EQ(eval_gq(GeneralizedQuery{{}, {"AGE"}, {1}}, pub), (Answer{{"[31,60]"}, {"[61,90]"}}));
}

TEST(GQuery, RejectsBadLevels) {
  const auto master = testkit::golden_master();
  EXPECT_THROW(eval_gq(GeneralizedQuery{{}, {"MED"}, {4}}, *master), Error);
  EXPECT_THROW(eval_gq(GeneralizedQuery{{}, {"MED"}, {-1}}, *master), Error);
  EXPECT_THROW(eval_gq(GeneralizedQuery{{}, {"MED", "GEN"}, {0}}, *master), Error);
  EXPECT_THROW(eval_gq(GeneralizedQuery{{{"SSN", "1"}}, {"MED"}, {0}}, *master), Error);
}

TEST(GQuery, XGroupQuery) {
  const auto master = testkit::golden_master();
  const GeneralizedQuery g = xgroup_query(*master, 0, {"GEN"}, {"MED"}, {1});
  EXPECT_EQ(g.selection, (std::vector<Predicate>{{"GEN", "male"}}));
  EXPECT_EQ(g.projection, std::vector<std::string>{"MED"});
  EXPECT_EQ(eval_gq(g, *master), (Answer{{"NSAID"}, {"acetaminophen"}}));
}

TEST(GQuery, FingerprintIgnoresSelectionOrder) {
  const GeneralizedQuery a{{{"GEN", "male"}, {"DIAG", "ulcer"}}, {"MED"}, {1}};
  const GeneralizedQuery b{{{"DIAG", "ulcer"}, {"GEN", "male"}}, {"MED"}, {1}};
  const GeneralizedQuery c{{{"DIAG", "ulcer"}, {"GEN", "male"}}, {"MED"}, {0}};
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(GQuery, CompiledMatchesInterpreted) {
  const auto master = testkit::golden_master();
  const GeneralizedQuery g{{{"GEN", "female"}}, {"DIAG", "MED"}, {1, 2}};
  const CompiledQuery compiled(g, *master);
  EXPECT_EQ(compiled.eval(*master), eval_gq(g, *master));
  EXPECT_TRUE(compiled.matches(master->row(1)));
  EXPECT_FALSE(compiled.matches(master->row(0)));
  EXPECT_EQ(compiled.project(master->row(1)), (std::vector<std::string>{"musculoskeletal", "analgesic"}));
}
