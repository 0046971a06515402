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
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace pacas {

// A level l^A_i of an attribute's domain generalization hierarchy. Index 0 is
// the ground level; levels of one attribute are totally ordered by index.
struct Level {
  std::string attribute;
  int index = 0;

  friend bool operator==(const Level&, const Level&) = default;
};

// Value generalization hierarchy of one attribute: a strict tree whose leaves
// are the ground domain and whose edges only join adjacent levels. Immutable
// once built, so it can be shared freely between sessions and threads.
class Hierarchy {
 public:
  using NodeId = int;

  // Validates and builds from the JSON hierarchy document:
  //   {"attribute": str, "levels": int,
  //    "nodes": [{"value": str, "level": int, "parent": str|null}]}
  // Throws Error(kMalformedHierarchy) on any structural violation.
  static Hierarchy from_json(const nlohmann::json& doc);
  static Hierarchy load(const std::string& path);
  nlohmann::json to_json() const;

  const std::string& attribute() const { return attribute_; }
  // h^A: index of the maximal level (the root's level).
  int height() const { return static_cast<int>(levels_.size()) - 1; }
  size_t size() const { return nodes_.size(); }

  bool contains(std::string_view value) const;
  NodeId id(std::string_view value) const;  // throws kUnknownValue
  const std::string& value(NodeId id) const { return nodes_[id].value; }

  const std::string& root() const { return nodes_[root_].value; }
  int level(std::string_view value) const { return nodes_[id(value)].level; }
  int level(NodeId id) const { return nodes_[id].level; }
  bool is_ground(std::string_view value) const { return level(value) == 0; }
  std::optional<std::string> parent(std::string_view value) const;
  std::vector<std::string> children(std::string_view value) const;

  // Values of level l in document order.
  const std::vector<NodeId>& level_members(int l) const;
  const std::vector<NodeId>& ground_ids() const { return levels_.front(); }
  std::vector<std::string> ground_domain() const;

  // base(v): ground values u with u ⪯ v, in document order.
  std::vector<std::string> base(std::string_view value) const;
  const std::vector<NodeId>& base_ids(NodeId id) const { return nodes_[id].leaves; }

  // u ⪯ v: v lies on the path from u to the root (reflexive).
  bool generalizes(std::string_view u, std::string_view v) const;
  bool generalizes(NodeId u, NodeId v) const;
  // Either value generalizes the other.
  bool comparable(std::string_view u, std::string_view v) const;

  std::string lca(std::string_view u, std::string_view v) const;
  NodeId lca(NodeId u, NodeId v) const;

  // Unique ancestor of v at level l. Throws kLevelBelowValue if l < level(v)
  // and kInvalidArgument if l exceeds the height.
  const std::string& generalize_to(std::string_view value, int l) const;
  NodeId generalize_to(NodeId id, int l) const;

 private:
  struct Node {
    std::string value;
    int level = 0;
    NodeId parent = -1;
    std::vector<NodeId> children;
    std::vector<NodeId> leaves;
    // ancestors[l - level] is the ancestor at level l.
    std::vector<NodeId> ancestors;
  };

  std::string attribute_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<NodeId>> levels_;
  NodeId root_ = -1;
};

// attribute name -> hierarchy.
class HierarchySet {
 public:
  HierarchySet() = default;

  void add(Hierarchy h);
  bool contains(std::string_view attribute) const;
  const Hierarchy& at(std::string_view attribute) const;  // throws kUnknownAttribute
  std::vector<std::string> attributes() const;

  // Loads every *.json file in a directory, or a single file.
  static std::shared_ptr<const HierarchySet> load(const std::vector<std::string>& paths);

 private:
  std::map<std::string, std::shared_ptr<const Hierarchy>, std::less<>> by_attribute_;
};

}  // namespace pacas
