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

#include <random>

#include "pacas/anonymity.hpp"
#include "pacas/error.hpp"
#include "support/testkit.hpp"

using namespace pacas;

namespace {

const std::vector<std::string> kQi = {"GEN", "AGE", "ZIP"};

}  // namespace

TEST(Anonymity, PublicTableExamples) {
  const Relation pub = testkit::golden_public();
  EXPECT_TRUE(is_xy_anonymous(pub, kQi, {"MED"}, 3));
  EXPECT_FALSE(is_xy_anonymous(pub, kQi, {"MED"}, 4));
  EXPECT_FALSE(is_xyl_anonymous(pub, {kQi, {"MED"}, {1}, 3}));
  EXPECT_FALSE(is_xy_anonymous(pub, {"DIAG"}, {"MED"}, 3));
  EXPECT_EQ(group_sizes(pub, {kQi, {"MED"}, {0}, 3}), (std::vector<size_t>(6, 3)));
  // g1..g3 roll up to NSAID; g4..g6 to acetaminophen and NSAID.
  EXPECT_EQ(group_sizes(pub, {kQi, {"MED"}, {1}, 3}), (std::vector<size_t>{1, 1, 1, 2, 2, 2}));
}

TEST(Anonymity, SpecValidation) {
  const Relation pub = testkit::golden_public();
  EXPECT_THROW((AnonymitySpec{kQi, {"MED"}, {0, 1}, 3}.validate(pub)), Error);
  EXPECT_THROW((AnonymitySpec{kQi, {"MED"}, {0}, 0}.validate(pub)), Error);
  EXPECT_THROW((AnonymitySpec{{"SSN"}, {"MED"}, {0}, 1}.validate(pub)), Error);
  EXPECT_THROW((AnonymitySpec{kQi, {"MED"}, {9}, 1}.validate(pub)), Error);
  EXPECT_NO_THROW((AnonymitySpec{kQi, {"MED"}, {1}, 1}.validate(pub)));
}

TEST(Anonymity, AgreesWithBruteForce) {
  const auto world = testkit::RandomWorld::make();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 60; ++i) {
    const Relation r = world.relation(rng, 8, 0.0);
    const int k = 1 + static_cast<int>(rng() % 4);
    const int level = static_cast<int>(rng() % 3);
    const AnonymitySpec spec{{"A"}, {"B", "C"}, {level, 0}, k};
    EXPECT_EQ(is_xyl_anonymous(r, spec), testkit::oracle::xyl_anonymous(r, spec.x, spec.y, spec.levels, k));
    EXPECT_EQ(is_xy_anonymous(r, {"A", "D"}, {"B"}, k), testkit::oracle::xy_anonymous(r, {"A", "D"}, {"B"}, k));
  }
}

TEST(Anonymity, HigherLevelsNeverHelp) {
  const auto world = testkit::RandomWorld::make();
  std::mt19937_64 rng(12);
  for (int i = 0; i < 60; ++i) {
    const Relation r = world.relation(rng, 8, 0.0);
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int high = 0; high <= 2; ++high) {
      if (!is_xyl_anonymous(r, {{"A"}, {"B"}, {high}, k})) continue;
      for (int low = 0; low <= high; ++low) EXPECT_TRUE(is_xyl_anonymous(r, {{"A"}, {"B"}, {low}, k}));
      EXPECT_TRUE(is_xy_anonymous(r, {"A"}, {"B"}, k));
    }
  }
}

TEST(SafeQuery, UnionOverAgreeingInstances) {
  const auto master = testkit::golden_master();
  const AnonymitySpec spec{{"GEN"}, {"MED"}, {0}, 3};
  // Adds naproxen to the male group and changes the male osteoarthritis answer.
  Relation swapped = *master;
  swapped.set(0, master->schema().index("MED"), "naproxen");
  const GeneralizedQuery g0{{{"GEN", "male"}, {"DIAG", "osteoarthritis"}}, {"MED"}, {0}};
  const GeneralizedQuery g1{{{"GEN", "male"}, {"DIAG", "osteoarthritis"}}, {"MED"}, {1}};
  // At level 0 the swapped instance disagrees, so the male group sees 2 values.
  EXPECT_FALSE(is_safe_query(g0, *master, {master.get(), &swapped}, spec));
  // At level 1 both agree and their union gives males 3 values.
  EXPECT_TRUE(is_safe_query(g1, *master, {master.get(), &swapped}, spec));
  try {
    is_safe_query(g1, *master, {}, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInstanceSet);
  }
}

TEST(SafeQuery, GroupIndexAnswersXGroups) {
  const auto master = testkit::golden_master();
  const AnonymitySpec spec{{"GEN"}, {"MED"}, {1}, 2};
  const GroupIndex index = GroupIndex::over(*master, spec);
  EXPECT_EQ(index.answers({"male"}), (Answer{{"NSAID"}, {"acetaminophen"}}));
  EXPECT_TRUE(index.answers({"robot"}).empty());
  EXPECT_TRUE(unions_reach_k(*master, spec, {&index}));
  EXPECT_FALSE(unions_reach_k(*master, {{"GEN"}, {"MED"}, {1}, 3}, {&index}));
}
