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
#include "pacas/pricing.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "pacas/error.hpp"

namespace pacas {

namespace {

const char* kind_name(DeltaKind k) {
  switch (k) {
    case DeltaKind::kUpdate: return "update";
    case DeltaKind::kInsert: return "insert";
    case DeltaKind::kDelete: return "delete";
  }
  return "?";
}

DeltaKind kind_from_name(const std::string& s) {
  if (s == "update") return DeltaKind::kUpdate;
  if (s == "insert") return DeltaKind::kInsert;
  if (s == "delete") return DeltaKind::kDelete;
  throw Error(ErrorCode::kMalformedInput, "unknown delta kind '" + s + "'");
}

// Identity of the instance a delta produces; inserted ids do not matter.
std::string instance_key(const Delta& d) {
  switch (d.kind) {
    case DeltaKind::kUpdate: return "u\x1f" + d.tuple_id + "\x1f" + d.attribute + "\x1f" + d.value;
    case DeltaKind::kDelete: return "d\x1f" + d.tuple_id;
    case DeltaKind::kInsert: {
      std::string key = "i";
      for (const auto& v : d.values) key += "\x1f" + v;
      return key;
    }
  }
  return {};
}

template <class Rng>
size_t pick(Rng& rng, size_t n) {
  return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
}

}  // namespace

nlohmann::json Delta::to_json() const {
  nlohmann::json j = {{"kind", kind_name(kind)}, {"tuple", tuple_id}};
  if (kind == DeltaKind::kUpdate) {
    j["attr"] = attribute;
    j["value"] = value;
  } else if (kind == DeltaKind::kInsert) {
    j["values"] = values;
  }
  return j;
}

Delta Delta::from_json(const nlohmann::json& j) {
  Delta d;
  try {
    d.kind = kind_from_name(j.at("kind").get<std::string>());
    d.tuple_id = j.at("tuple").get<std::string>();
    if (d.kind == DeltaKind::kUpdate) {
      d.attribute = j.at("attr").get<std::string>();
      d.value = j.at("value").get<std::string>();
    } else if (d.kind == DeltaKind::kInsert) {
      d.values = j.at("values").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad delta: ") + e.what());
  }
  return d;
}

SupportSet::SupportSet(std::shared_ptr<const Relation> reference, std::vector<Member> members, std::uint64_t seed)
    : reference_(std::move(reference)), members_(std::move(members)), seed_(seed) {
  const Relation& ref = *reference_;
  std::set<std::string> keys;
  for (const auto& m : members_) {
    if (m.weight <= Money()) throw Error(ErrorCode::kInvalidArgument, "member weights must be positive");
    const Delta& d = m.delta;
    if (d.kind == DeltaKind::kInsert) {
      if (d.values.size() != ref.width()) throw Error(ErrorCode::kSchemaMismatch, "inserted tuple has wrong width");
      for (size_t c = 0; c < d.values.size(); ++c) {
        if (!ref.hierarchy(c).contains(d.values[c])) {
          throw Error(ErrorCode::kUnknownValue, "inserted value '" + d.values[c] + "' is not in the hierarchy");
        }
      }
      if (ref.find(d.tuple_id)) throw Error(ErrorCode::kDuplicateTupleId, "inserted id '" + d.tuple_id + "' exists");
    } else {
      const size_t row = ref.row_of(d.tuple_id);
      if (d.kind == DeltaKind::kUpdate) {
        const size_t c = ref.schema().index(d.attribute);
        if (!ref.hierarchy(c).contains(d.value)) {
          throw Error(ErrorCode::kUnknownValue, "update value '" + d.value + "' is not in the hierarchy");
        }
        if (ref.at(row, c) == d.value) throw Error(ErrorCode::kInvalidArgument, "update leaves the instance unchanged");
      }
    }
    if (!keys.insert(instance_key(d)).second) throw Error(ErrorCode::kInvalidArgument, "support members repeat");
  }
}

SupportSet SupportSet::build(std::shared_ptr<const Relation> reference, size_t size, std::uint64_t seed,
                             const NeighborMix& mix) {
  const Relation& ref = *reference;
  if (ref.empty()) throw Error(ErrorCode::kEmptyRelation, "cannot sample neighbours of an empty relation");
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "support size must be at least 1");

  std::vector<std::vector<std::string>> domains(ref.width());
  for (size_t c = 0; c < ref.width(); ++c) {
    std::set<std::string> seen;
    for (size_t r = 0; r < ref.size(); ++r) {
      if (ref.hierarchy(c).is_ground(ref.at(r, c))) seen.insert(ref.at(r, c));
    }
    domains[c].assign(seen.begin(), seen.end());
  }

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> kind_dist({mix.update, mix.insert, mix.remove});
  std::vector<Member> members;
  std::set<std::string> keys;
  size_t next_insert = 0;
  const size_t max_attempts = 1000 + 100 * size;
  for (size_t attempt = 0; members.size() < size; ++attempt) {
    if (attempt == max_attempts) {
      throw Error(ErrorCode::kInvalidArgument,
                  "could only draw " + std::to_string(members.size()) + " distinct neighbours");
    }
    Delta d;
    d.kind = static_cast<DeltaKind>(kind_dist(rng));
    if (d.kind == DeltaKind::kUpdate) {
      const size_t row = pick(rng, ref.size());
      const size_t c = pick(rng, ref.width());
      if (domains[c].size() < 2) continue;
      std::string v = domains[c][pick(rng, domains[c].size())];
      if (v == ref.at(row, c)) continue;
      d.tuple_id = ref.id(row);
      d.attribute = ref.schema().attributes[c];
      d.value = std::move(v);
    } else if (d.kind == DeltaKind::kDelete) {
      d.tuple_id = ref.id(pick(rng, ref.size()));
    } else {
      for (size_t c = 0; c < ref.width(); ++c) {
        if (domains[c].empty()) break;
        d.values.push_back(domains[c][pick(rng, domains[c].size())]);
      }
      if (d.values.size() != ref.width()) continue;
      do {
        d.tuple_id = "+" + std::to_string(++next_insert);
      } while (ref.find(d.tuple_id));
    }
    if (!keys.insert(instance_key(d)).second) continue;
    members.push_back({members.size() + 1, std::move(d), Money::units(1)});
  }
  return SupportSet(std::move(reference), std::move(members), seed);
}

Money SupportSet::total_weight() const {
  Money sum;
  for (const auto& m : members_) sum += m.weight;
  return sum;
}

Relation SupportSet::materialize(size_t i) const {
  Relation out(reference_->schema(), reference_->hierarchies_ptr());
  const Delta& d = members_[i].delta;
  for (size_t r = 0; r < reference_->size(); ++r) {
    const std::string& id = reference_->id(r);
    if (d.kind == DeltaKind::kDelete && id == d.tuple_id) continue;
    auto row = reference_->row(r);
    if (d.kind == DeltaKind::kUpdate && id == d.tuple_id) row[reference_->schema().index(d.attribute)] = d.value;
    out.add(id, std::move(row));
  }
  if (d.kind == DeltaKind::kInsert) out.add(d.tuple_id, d.values);
  return out;
}

void SupportSet::retain(const std::vector<std::uint64_t>& ids) {
  const std::set<std::uint64_t> keep(ids.begin(), ids.end());
  const size_t before = members_.size();
  std::erase_if(members_, [&](const Member& m) { return !keep.count(m.id); });
  if (members_.size() != before) ++epoch_;
}

nlohmann::json SupportSet::to_json() const {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : members_) {
    members.push_back({{"id", m.id}, {"weight", price_to_json(m.weight)}, {"delta", m.delta.to_json()}});
  }
  return {{"seed", seed_}, {"epoch", epoch_}, {"members", members}};
}

SupportSet SupportSet::from_json(const nlohmann::json& j, std::shared_ptr<const Relation> reference) {
  std::vector<Member> members;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  try {
    seed = j.value("seed", std::uint64_t{0});
    epoch = j.value("epoch", std::uint64_t{0});
    for (const auto& m : j.at("members")) {
      Member member;
      member.id = m.at("id").get<std::uint64_t>();
      if (m.contains("weight")) {
        auto w = price_from_json(m["weight"]);
        if (!w) throw Error(ErrorCode::kMalformedInput, "member weight cannot be infinite");
        member.weight = *w;
      }
      member.delta = Delta::from_json(m.at("delta"));
      members.push_back(std::move(member));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad support set: ") + e.what());
  }
  SupportSet s(std::move(reference), std::move(members), seed);
  s.epoch_ = epoch;
  return s;
}

namespace {

Answer member_answer(const CompiledQuery& q, const SupportSet& s, size_t i) {
  Answer out;
  s.for_each_row(i, [&](const std::vector<std::string>& row) {
    if (q.matches(row)) out.insert(q.project(row));
  });
  return out;
}

}  // namespace

Money baseline_price(const GeneralizedQuery& q, const Relation& d, const SupportSet& s) {
  const CompiledQuery compiled(q, d);
  const Answer truth = compiled.eval(d);
  Money price;
  for (size_t i = 0; i < s.size(); ++i) {
    if (member_answer(compiled, s, i) != truth) price += s.members()[i].weight;
  }
  return price;
}

namespace {

PriceQuote price_with(const GeneralizedQuery& g, const Relation& r, const SupportSet& s, const AnonymitySpec& spec,
                      const std::vector<GroupIndex>& indexes) {
  const CompiledQuery compiled(g, r);
  const Answer truth = compiled.eval(r);
  PriceQuote quote;
  quote.fingerprint = g.fingerprint();
  quote.partition.epoch = s.epoch();
  Money price;
  std::vector<const GroupIndex*> agreeing;
  for (size_t i = 0; i < s.size(); ++i) {
    const Member& m = s.members()[i];
    if (member_answer(compiled, s, i) == truth) {
      quote.partition.agree.push_back(m.id);
      agreeing.push_back(&indexes[i]);
    } else {
      quote.partition.conflict.push_back(m.id);
      price += m.weight;
    }
  }
  if (unions_reach_k(r, spec, agreeing)) quote.amount = price;
  return quote;
}

std::vector<GroupIndex> member_indexes(const SupportSet& s, const AnonymitySpec& spec) {
  std::vector<GroupIndex> out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    GroupIndex index(s.reference(), spec);
    s.for_each_row(i, [&](const std::vector<std::string>& row) { index.add(row); });
    out.push_back(std::move(index));
  }
  return out;
}

}  // namespace

PriceQuote safe_price(const GeneralizedQuery& g, const Relation& r, const SupportSet& s, const AnonymitySpec& spec) {
  spec.validate(r);
  return price_with(g, r, s, spec, member_indexes(s, spec));
}

void commit_sale(SupportSet& s, const Partition& partition) {
  if (partition.epoch != s.epoch()) {
    throw Error(ErrorCode::kStalePartition, "support set changed since the quote was issued");
  }
  s.retain(partition.agree);
}

Pricer::Pricer(SupportSet support, AnonymitySpec spec) : support_(std::move(support)), spec_(std::move(spec)) {
  spec_.validate(support_.reference());
  indexes_ = member_indexes(support_, spec_);
}

PriceQuote Pricer::quote(const GeneralizedQuery& g) const {
  return price_with(g, support_.reference(), support_, spec_, indexes_);
}

void Pricer::commit(const Partition& partition) {
  const auto before = support_.members();
  commit_sale(support_, partition);
  if (support_.size() == before.size()) return;
  std::vector<GroupIndex> kept;
  size_t j = 0;
  for (size_t i = 0; i < before.size() && j < support_.size(); ++i) {
    if (before[i].id == support_.members()[j].id) {
      kept.push_back(std::move(indexes_[i]));
      ++j;
    }
  }
  indexes_ = std::move(kept);
}

}  // namespace pacas
