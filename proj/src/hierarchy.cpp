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
#include "pacas/hierarchy.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "pacas/error.hpp"

namespace pacas {

namespace {

[[noreturn]] void malformed(const std::string& attribute, const std::string& reason) {
  throw Error(ErrorCode::kMalformedHierarchy, "hierarchy '" + attribute + "': " + reason);
}

}  // namespace

Hierarchy Hierarchy::from_json(const nlohmann::json& doc) {
  Hierarchy h;
  if (!doc.is_object()) malformed("?", "document is not an object");
  if (!doc.contains("attribute") || !doc["attribute"].is_string()) malformed("?", "missing attribute name");
  h.attribute_ = doc["attribute"].get<std::string>();
  if (!doc.contains("levels") || !doc["levels"].is_number_integer()) malformed(h.attribute_, "missing level count");
  const int level_count = doc["levels"].get<int>();
  if (level_count < 1) malformed(h.attribute_, "level count must be at least 1");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) malformed(h.attribute_, "missing node list");

  std::vector<std::optional<std::string>> parent_names;
  for (const auto& entry : doc["nodes"]) {
    if (!entry.is_object() || !entry.contains("value") || !entry["value"].is_string() ||
        !entry.contains("level") || !entry["level"].is_number_integer()) {
      malformed(h.attribute_, "node entries need string 'value' and integer 'level'");
    }
    Node node;
    node.value = entry["value"].get<std::string>();
    node.level = entry["level"].get<int>();
    if (node.level < 0 || node.level >= level_count) {
      malformed(h.attribute_, "node '" + node.value + "' has level outside [0, levels)");
    }
    if (h.index_.count(node.value)) malformed(h.attribute_, "duplicate value '" + node.value + "'");
    h.index_.emplace(node.value, static_cast<NodeId>(h.nodes_.size()));
    h.nodes_.push_back(std::move(node));
    const auto parent = entry.find("parent");
    if (parent == entry.end() || parent->is_null()) {
      parent_names.emplace_back(std::nullopt);
    } else if (parent->is_string()) {
      parent_names.emplace_back(parent->get<std::string>());
    } else {
      malformed(h.attribute_, "parent of '" + h.nodes_.back().value + "' must be a string or null");
    }
  }

  for (size_t i = 0; i < h.nodes_.size(); ++i) {
    Node& node = h.nodes_[i];
    if (!parent_names[i]) {
      if (h.root_ != -1) {
        malformed(h.attribute_, "multiple roots ('" + h.nodes_[h.root_].value + "', '" + node.value + "')");
      }
      if (node.level != level_count - 1) malformed(h.attribute_, "root must sit at the top level");
      h.root_ = static_cast<NodeId>(i);
      continue;
    }
    auto it = h.index_.find(*parent_names[i]);
    if (it == h.index_.end()) malformed(h.attribute_, "unknown parent '" + *parent_names[i] + "'");
    if (h.nodes_[it->second].level != node.level + 1) {
      malformed(h.attribute_, "edge '" + node.value + "' -> '" + *parent_names[i] + "' skips levels");
    }
    node.parent = it->second;
    h.nodes_[it->second].children.push_back(static_cast<NodeId>(i));
  }
  if (h.root_ == -1) malformed(h.attribute_, "missing root");

  // Parent levels strictly increase, so every chain ends at the root; a cycle
  // would need a non-increasing edge and has already been rejected.
  h.levels_.assign(level_count, {});
  for (size_t i = 0; i < h.nodes_.size(); ++i) {
    Node& node = h.nodes_[i];
    if (node.children.empty() && node.level != 0) {
      malformed(h.attribute_, "leaf '" + node.value + "' is not at the ground level");
    }
    h.levels_[node.level].push_back(static_cast<NodeId>(i));
    for (NodeId a = static_cast<NodeId>(i); a != -1; a = h.nodes_[a].parent) node.ancestors.push_back(a);
    if (h.nodes_[node.ancestors.back()].level != level_count - 1) {
      malformed(h.attribute_, "'" + node.value + "' is not connected to the root");
    }
  }
  for (int l = 0; l < level_count; ++l) {
    if (h.levels_[l].empty()) malformed(h.attribute_, "level " + std::to_string(l) + " has no values");
  }
  for (NodeId leaf : h.levels_[0]) {
    for (NodeId a : h.nodes_[leaf].ancestors) h.nodes_[a].leaves.push_back(leaf);
  }
  return h;
}

Hierarchy Hierarchy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedHierarchy, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHierarchy, path + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Hierarchy::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : nodes_) {
    nodes.push_back({{"value", n.value},
                     {"level", n.level},
                     {"parent", n.parent == -1 ? nlohmann::json(nullptr) : nlohmann::json(nodes_[n.parent].value)}});
  }
  return {{"attribute", attribute_}, {"levels", static_cast<int>(levels_.size())}, {"nodes", nodes}};
}

bool Hierarchy::contains(std::string_view value) const { return index_.count(std::string(value)) != 0; }

Hierarchy::NodeId Hierarchy::id(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownValue, "'" + std::string(value) + "' is not in the hierarchy of " + attribute_);
  }
  return it->second;
}

std::optional<std::string> Hierarchy::parent(std::string_view value) const {
  const Node& n = nodes_[id(value)];
  if (n.parent == -1) return std::nullopt;
  return nodes_[n.parent].value;
}

std::vector<std::string> Hierarchy::children(std::string_view value) const {
  std::vector<std::string> out;
  for (NodeId c : nodes_[id(value)].children) out.push_back(nodes_[c].value);
  return out;
}

const std::vector<Hierarchy::NodeId>& Hierarchy::level_members(int l) const {
  if (l < 0 || l > height()) {
    throw Error(ErrorCode::kInvalidArgument, "level " + std::to_string(l) + " outside hierarchy of " + attribute_);
  }
  return levels_[l];
}

std::vector<std::string> Hierarchy::ground_domain() const {
  std::vector<std::string> out;
  for (NodeId g : levels_.front()) out.push_back(nodes_[g].value);
  return out;
}

std::vector<std::string> Hierarchy::base(std::string_view value) const {
  std::vector<std::string> out;
  for (NodeId leaf : nodes_[id(value)].leaves) out.push_back(nodes_[leaf].value);
  return out;
}

bool Hierarchy::generalizes(NodeId u, NodeId v) const {
  const Node& nu = nodes_[u];
  const int offset = nodes_[v].level - nu.level;
  return offset >= 0 && nu.ancestors[offset] == v;
}

bool Hierarchy::generalizes(std::string_view u, std::string_view v) const { return generalizes(id(u), id(v)); }

bool Hierarchy::comparable(std::string_view u, std::string_view v) const {
  const NodeId a = id(u);
  const NodeId b = id(v);
  return generalizes(a, b) || generalizes(b, a);
}

Hierarchy::NodeId Hierarchy::lca(NodeId u, NodeId v) const {
  int l = std::max(nodes_[u].level, nodes_[v].level);
  for (; l <= height(); ++l) {
    const NodeId a = generalize_to(u, l);
    if (a == generalize_to(v, l)) return a;
  }
  return root_;
}

std::string Hierarchy::lca(std::string_view u, std::string_view v) const { return nodes_[lca(id(u), id(v))].value; }

Hierarchy::NodeId Hierarchy::generalize_to(NodeId node, int l) const {
  const Node& n = nodes_[node];
  if (l > height()) {
    throw Error(ErrorCode::kInvalidArgument,
                "level " + std::to_string(l) + " exceeds height " + std::to_string(height()) + " of " + attribute_);
  }
  if (l < n.level) {
    throw Error(ErrorCode::kLevelBelowValue, "'" + n.value + "' sits at level " + std::to_string(n.level) +
                                                 ", above requested level " + std::to_string(l));
  }
  return n.ancestors[l - n.level];
}

const std::string& Hierarchy::generalize_to(std::string_view value, int l) const {
  return nodes_[generalize_to(id(value), l)].value;
}

void HierarchySet::add(Hierarchy h) {
  const std::string name = h.attribute();
  by_attribute_[name] = std::make_shared<const Hierarchy>(std::move(h));
}

bool HierarchySet::contains(std::string_view attribute) const { return by_attribute_.find(attribute) != by_attribute_.end(); }

const Hierarchy& HierarchySet::at(std::string_view attribute) const {
  auto it = by_attribute_.find(attribute);
  if (it == by_attribute_.end()) {
    throw Error(ErrorCode::kUnknownAttribute, "no hierarchy for attribute '" + std::string(attribute) + "'");
  }
  return *it->second;
}

std::vector<std::string> HierarchySet::attributes() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : by_attribute_) out.push_back(name);
  return out;
}

std::shared_ptr<const HierarchySet> HierarchySet::load(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  auto set = std::make_shared<HierarchySet>();
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) set->add(Hierarchy::load(f.string()));
    } else {
      set->add(Hierarchy::load(p));
    }
  }
  return set;
}

}  // namespace pacas
