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
#include "pacas/provider.hpp"
#include "support/testkit.hpp"

using namespace pacas;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kProtocol;
}

struct ProviderTest : ::testing::Test {
  std::shared_ptr<const Relation> master = testkit::golden_master();
  Relation client = testkit::golden_client();
  Constraints constraints = testkit::golden_constraints();

  ProviderSession session(int k) {
    return ProviderSession(master, testkit::golden_support(master), {{"GEN"}, {"MED"}, {0}, k}, constraints.mds);
  }
  ClientTuple tuple(const std::string& id) { return client_tuple(client, client.row_of(id)); }
};

}  // namespace

TEST_F(ProviderTest, TranslateWithGenderAndAgeMd) {
  const std::vector<MD> mds = {MD{{{"GEN", "GEN", "exact"}, {"AGE", "AGE", "exact"}}, "MED", "MED"}};
  const GeneralizedQuery g = translate_request({"t2", "MED", 1}, tuple("t2"), mds);
  EXPECT_EQ(g.selection, (std::vector<Predicate>{{"GEN", "male"}, {"AGE", "79"}}));
  EXPECT_EQ(g.projection, std::vector<std::string>{"MED"});
  EXPECT_EQ(g.levels, std::vector<int>{1});
  EXPECT_EQ(select_answer(g, *master), "NSAID");
}

TEST_F(ProviderTest, TranslateSingleClauseAndRenames) {
  const std::vector<MD> mds = {MD{{{"DIAG", "DIAG", "exact"}}, "DIAG", "DIAG"},
                               MD{{{"GEN", "SEX", "exact"}}, "MED", "DRUG"}};
  const GeneralizedQuery g = translate_request({"t4", "MED", 0}, tuple("t4"), mds);
  EXPECT_EQ(g.selection, (std::vector<Predicate>{{"SEX", "female"}}));
  EXPECT_EQ(g.projection, std::vector<std::string>{"DRUG"});
  EXPECT_EQ(code_of([&] { translate_request({"t4", "AGE", 0}, tuple("t4"), mds); }), ErrorCode::kNoApplicableMd);
}

TEST_F(ProviderTest, AnswerSelectionPrefersSupportThenName) {
  // Males: ibuprofen twice, dolex once.
  EXPECT_EQ(select_answer({{{"GEN", "male"}}, {"MED"}, {0}}, *master), "ibuprofen");
  // Females at level 1: NSAID twice, acetaminophen once.
  EXPECT_EQ(select_answer({{{"GEN", "female"}}, {"MED"}, {1}}, *master), "NSAID");
  // One each: lexicographic.
  EXPECT_EQ(select_answer({{{"DIAG", "migraine"}}, {"MED"}, {0}}, *master), "dolex");
  EXPECT_EQ(select_answer({{{"DIAG", "hypertension"}}, {"MED"}, {0}}, *master), std::nullopt);
}

TEST_F(ProviderTest, PayDisclosesGeneralValue) {
  ProviderSession s = session(3);
  const ValueRequest r{"t2", "MED", 1};
  const Price p = s.ask_price(r, tuple("t2"));
  ASSERT_EQ(p, Money());
  EXPECT_EQ(s.pay(*p, r, tuple("t2")), (Disclosure{"NSAID", 1}));
  ASSERT_EQ(s.ledger().size(), 2u);
  EXPECT_TRUE(s.ledger().back().paid);
  EXPECT_EQ(s.ledger().back().value, "NSAID");
}

TEST_F(ProviderTest, PayErrors) {
  ProviderSession s = session(3);
  // Level 0 is gated at k = 3.
  EXPECT_EQ(s.ask_price({"t2", "MED", 0}, tuple("t2")), std::nullopt);
  EXPECT_EQ(code_of([&] { s.pay(Money::units(5), {"t2", "MED", 0}, tuple("t2")); }), ErrorCode::kUnsafeRequest);
  ProviderSession s1 = session(1);
  EXPECT_EQ(code_of([&] { s1.pay(Money::units(5), {"t2", "MED", 0}, tuple("t2")); }), ErrorCode::kQuoteMismatch);
  // Hypertension has no master tuple.
  const ValueRequest nothing{"t8", "MED", 0};
  const Price p = s1.ask_price(nothing, tuple("t8"));
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(code_of([&] { s1.pay(*p, nothing, tuple("t8")); }), ErrorCode::kNoMatch);
  EXPECT_EQ(s1.support().size(), 6u);
  EXPECT_TRUE(s1.sold().empty());
}

TEST_F(ProviderTest, RepeatPurchaseIsFreeAndIdentical) {
  ProviderSession s = session(1);
  const ValueRequest r{"t1", "MED", 0};
  const Price p = s.ask_price(r, tuple("t1"));
  ASSERT_EQ(p, Money::units(1));
  const Disclosure first = s.pay(*p, r, tuple("t1"));
  EXPECT_EQ(first.value, "ibuprofen");
  EXPECT_EQ(s.support().size(), 5u);
  EXPECT_EQ(s.ask_price(r, tuple("t1")), Money());
  EXPECT_EQ(s.pay(Money(), r, tuple("t1")), first);
  EXPECT_EQ(s.support().size(), 5u);
  EXPECT_EQ(s.sold().size(), 2u);
}

TEST_F(ProviderTest, QuotesHaveNoSideEffects) {
  ProviderSession s = session(3);
  s.ask_price({"t2", "MED", 0}, tuple("t2"));
  s.ask_price({"t4", "MED", 0}, tuple("t4"));
  EXPECT_EQ(s.support().size(), 6u);
  EXPECT_EQ(s.support().epoch(), 0u);
}

TEST_F(ProviderTest, SessionPreconditions) {
  const Relation pub = testkit::golden_public();
  auto general = std::make_shared<const Relation>(pub);
  EXPECT_THROW(ProviderSession(general, SupportSet(general, {}, 0), {{"GEN"}, {"MED"}, {0}, 1}, constraints.mds),
               Error);
  EXPECT_THROW(ProviderSession(master, testkit::golden_support(master), {{"GEN"}, {"MED"}, {0}, 0}, constraints.mds),
               Error);
}

TEST(ValueRequestJson, RoundTripAndErrors) {
  const ValueRequest r{"t2", "MED", 1};
  EXPECT_EQ(ValueRequest::from_json(r.to_json()), r);
  EXPECT_EQ(code_of([] { ValueRequest::from_json({{"tuple_id", "t"}}); }), ErrorCode::kProtocol);
  EXPECT_EQ(code_of([] { ValueRequest::from_json({{"tuple_id", "t"}, {"attr", "A"}, {"level", -1}}); }),
            ErrorCode::kProtocol);
}
