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
#include "pacas/provider.hpp"

#include <spdlog/spdlog.h>

#include "pacas/error.hpp"

namespace pacas {

nlohmann::json ValueRequest::to_json() const { return {{"tuple_id", tuple_id}, {"attr", attribute}, {"level", level}}; }

ValueRequest ValueRequest::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kProtocol, "request must be an object");
  ValueRequest r;
  try {
    r.tuple_id = j.at("tuple_id").get<std::string>();
    r.attribute = j.at("attr").get<std::string>();
    r.level = j.at("level").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("bad request: ") + e.what());
  }
  return r;
}

ClientTuple client_tuple(const Relation& r, size_t row) {
  ClientTuple t;
  for (size_t c = 0; c < r.width(); ++c) t.emplace(r.schema().attributes[c], r.at(row, c));
  return t;
}

GeneralizedQuery translate_request(const ValueRequest& r, const ClientTuple& t, const std::vector<MD>& mds) {
  for (const auto& md : mds) {
    if (md.target_client != r.attribute) continue;
    GeneralizedQuery g;
    for (const auto& clause : md.clauses) {
      auto it = t.find(clause.client_attr);
      if (it == t.end()) {
        throw Error(ErrorCode::kProtocol, "client tuple lacks match attribute '" + clause.client_attr + "'");
      }
      g.selection.push_back({clause.provider_attr, it->second});
    }
    g.projection = {md.target_provider};
    g.levels = {r.level};
    return g;
  }
  throw Error(ErrorCode::kNoApplicableMd, "no matching dependency targets '" + r.attribute + "'");
}

std::optional<std::string> select_answer(const GeneralizedQuery& g, const Relation& master) {
  const CompiledQuery q(g, master);
  std::map<std::string, int> support;
  for (size_t row = 0; row < master.size(); ++row) {
    if (q.matches(master.row(row))) ++support[q.project(master.row(row)).front()];
  }
  std::optional<std::string> best;
  int best_count = 0;
  // Map order is lexicographic, so a strict comparison keeps the smallest.
  for (const auto& [value, count] : support) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

ProviderSession::ProviderSession(std::shared_ptr<const Relation> master, SupportSet support, AnonymitySpec spec,
                                 std::vector<MD> mds)
    : master_(std::move(master)), pricer_(std::move(support), std::move(spec)), mds_(std::move(mds)) {
  if (!master_->is_ground()) throw Error(ErrorCode::kInvalidArgument, "provider relation must be ground");
  if (&pricer_.support().reference() != master_.get() && !(pricer_.support().reference() == *master_)) {
    throw Error(ErrorCode::kInvalidArgument, "support set is not built over the provider relation");
  }
}

GeneralizedQuery ProviderSession::translate(const ValueRequest& r, const ClientTuple& t) const {
  GeneralizedQuery g = translate_request(r, t, mds_);
  const size_t c = master_->schema().index(g.projection.front());
  if (r.level < 0 || r.level > master_->hierarchy(c).height()) {
    throw Error(ErrorCode::kInvalidArgument, "level " + std::to_string(r.level) + " is not a level of " + r.attribute);
  }
  return g;
}

Price ProviderSession::ask_price(const ValueRequest& r, const ClientTuple& t) {
  const GeneralizedQuery g = translate(r, t);
  PriceQuote q = pricer_.quote(g);
  ledger_.push_back({r, q.fingerprint, q.amount, false, std::nullopt});
  spdlog::debug("quote {}[{}]@{} -> {}", r.tuple_id, r.attribute, r.level, price_str(q.amount));
  return q.amount;
}

Disclosure ProviderSession::pay(Money price, const ValueRequest& r, const ClientTuple& t) {
  const GeneralizedQuery g = translate(r, t);
  PriceQuote q = pricer_.quote(g);
  if (!q.amount) throw Error(ErrorCode::kUnsafeRequest, "request would break anonymity");
  if (*q.amount != price) {
    throw Error(ErrorCode::kQuoteMismatch, "offered " + price.str() + ", current price is " + q.amount->str());
  }
  auto value = select_answer(g, *master_);
  if (!value) throw Error(ErrorCode::kNoMatch, "no provider tuple matches " + g.fingerprint());
  pricer_.commit(q.partition);
  ledger_.push_back({r, q.fingerprint, q.amount, true, value});
  sold_.push_back(g);
  spdlog::debug("sold {}[{}]@{} = {} for {}", r.tuple_id, r.attribute, r.level, *value, price.str());
  return {*value, r.level};
}

}  // namespace pacas
