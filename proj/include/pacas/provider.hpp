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
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacas/anonymity.hpp"
#include "pacas/gquery.hpp"
#include "pacas/money.hpp"
#include "pacas/pricing.hpp"
#include "pacas/relation.hpp"

namespace pacas {

// (t, A, l): the value of attribute A for client tuple t, at level l.
struct ValueRequest {
  std::string tuple_id;
  std::string attribute;
  int level = 0;

  nlohmann::json to_json() const;
  static ValueRequest from_json(const nlohmann::json& j);  // throws kProtocol

  friend bool operator==(const ValueRequest&, const ValueRequest&) = default;
};

// Client tuple as sent over the wire: attribute -> value.
using ClientTuple = std::map<std::string, std::string>;

ClientTuple client_tuple(const Relation& r, size_t row);

// Selection from the first MD targeting the requested attribute, bound to the
// client tuple's values; projection of the provider-side target at r.level.
// Throws kNoApplicableMd.
GeneralizedQuery translate_request(const ValueRequest& r, const ClientTuple& t, const std::vector<MD>& mds);

struct Disclosure {
  std::string value;
  int level = 0;

  friend bool operator==(const Disclosure&, const Disclosure&) = default;
};

struct LedgerEntry {
  ValueRequest request;
  std::string fingerprint;
  Price quote;
  bool paid = false;
  std::optional<std::string> value;
};

// Among the lifted values of the rows matched by g, the one with the most
// matching rows; ties go to the lexicographically smallest. nullopt when
// nothing matches.
std::optional<std::string> select_answer(const GeneralizedQuery& g, const Relation& master);

// Provider state for one client: master relation, pricing state and the
// append-only ledger. Not thread-safe; one session per connection.
class ProviderSession {
 public:
  ProviderSession(std::shared_ptr<const Relation> master, SupportSet support, AnonymitySpec spec,
                  std::vector<MD> mds);

  // Free and leaves the support set untouched.
  Price ask_price(const ValueRequest& r, const ClientTuple& t);
  // Throws kUnsafeRequest, kQuoteMismatch or kNoMatch; nothing is committed
  // on failure.
  Disclosure pay(Money price, const ValueRequest& r, const ClientTuple& t);

  const Relation& master() const { return *master_; }
  const SupportSet& support() const { return pricer_.support(); }
  const AnonymitySpec& spec() const { return pricer_.spec(); }
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }
  // Queries of all completed sales, in order.
  const std::vector<GeneralizedQuery>& sold() const { return sold_; }

 private:
  GeneralizedQuery translate(const ValueRequest& r, const ClientTuple& t) const;

  std::shared_ptr<const Relation> master_;
  Pricer pricer_;
  std::vector<MD> mds_;
  std::vector<LedgerEntry> ledger_;
  std::vector<GeneralizedQuery> sold_;
};

// What the cleaner talks to: a session in this process or across a socket.
class ProviderEndpoint {
 public:
  virtual ~ProviderEndpoint() = default;
  virtual Price ask_price(const ValueRequest& r, const ClientTuple& t) = 0;
  virtual Disclosure pay(Money price, const ValueRequest& r, const ClientTuple& t) = 0;
  // Current total weight of the provider's support set; fractional budgets
  // are taken of this.
  virtual Money support_weight() = 0;
};

class EmbeddedProvider : public ProviderEndpoint {
 public:
  explicit EmbeddedProvider(ProviderSession& session) : session_(session) {}

  Price ask_price(const ValueRequest& r, const ClientTuple& t) override { return session_.ask_price(r, t); }
  Disclosure pay(Money price, const ValueRequest& r, const ClientTuple& t) override {
    return session_.pay(price, r, t);
  }
  Money support_weight() override { return session_.support().total_weight(); }

 private:
  ProviderSession& session_;
};

}  // namespace pacas
