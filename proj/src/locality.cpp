#include "pgas/locality.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pgas {

namespace {

using nlohmann::json;

std::size_t nesting_depth(const json& node) {
  if (!node.is_array()) return 0;
  if (node.empty()) throw usage_error("locality map: empty group");
  std::size_t d = nesting_depth(node[0]);
  for (const auto& child : node) {
    if (nesting_depth(child) != d)
      throw usage_error("locality map: all branches must have equal depth");
  }
  return d + 1;
}

void collect_leaves(const json& node, std::vector<std::uint32_t>& out) {
  if (node.is_array()) {
    for (const auto& child : node) collect_leaves(child, out);
    return;
  }
  if (!node.is_number_unsigned()) throw usage_error("locality map: unit ids must be integers");
  out.push_back(node.get<std::uint32_t>());
}

void collect_level(const json& node, std::size_t level,
                   std::vector<std::vector<std::uint32_t>>& out) {
  if (level == 0) {
    std::vector<std::uint32_t> leaves;
    collect_leaves(node, leaves);
    out.push_back(std::move(leaves));
    return;
  }
  for (const auto& child : node) collect_level(child, level - 1, out);
}

}  // namespace

LocalityMap LocalityMap::parse(const std::string& json_text, std::uint32_t n_units) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw usage_error(std::string("locality map: invalid JSON: ") + e.what());
  }
  if (!root.is_array()) throw usage_error("locality map: top level must be an array");

  std::size_t depth = nesting_depth(root);
  if (depth < 2) throw usage_error("locality map: expected nested arrays of unit ids");

  LocalityMap map;
  // depth counts array levels; groups exist at levels 0 .. depth-2.
  for (std::size_t level = 0; level + 1 < depth; ++level) {
    std::vector<std::vector<std::uint32_t>> groups;
    for (const auto& child : root) collect_level(child, level, groups);
    std::set<std::uint32_t> seen;
    std::size_t count = 0;
    for (const auto& g : groups) {
      for (auto u : g) {
        if (u >= n_units)
          throw usage_error("locality map: unit id " + std::to_string(u) + " out of range");
        if (!seen.insert(u).second)
          throw usage_error("locality map: unit id " + std::to_string(u) + " appears twice");
        ++count;
      }
    }
    if (count != n_units)
      throw usage_error("locality map: level " + std::to_string(level) +
                        " does not cover all units");
    map.levels_.push_back(std::move(groups));
  }
  return map;
}

LocalityMap LocalityMap::load_file(const std::string& path, std::uint32_t n_units) {
  std::ifstream in(path);
  if (!in) throw usage_error("locality map: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), n_units);
}

const std::vector<std::vector<std::uint32_t>>& LocalityMap::groups(std::size_t level) const {
  if (level >= levels_.size())
    throw usage_error("locality map: level " + std::to_string(level) + " deeper than map");
  return levels_[level];
}

std::optional<std::vector<std::uint32_t>> LocalityMap::group_of(std::size_t level,
                                                                std::uint32_t unit) const {
  for (const auto& g : groups(level)) {
    if (std::find(g.begin(), g.end(), unit) != g.end()) return g;
  }
  return std::nullopt;
}

}  // namespace pgas
