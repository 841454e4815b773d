#ifndef PGAS_LOCALITY_HPP
#define PGAS_LOCALITY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgas/types.hpp"

namespace pgas {

/// Hierarchical grouping of unit ids, loaded from a JSON file of nested
/// arrays, e.g. [[0,1],[2,3]] or [[[0],[1]],[[2],[3]]]. Every level must
/// partition the full unit set {0..n-1} and all branches have equal depth.
class LocalityMap {
 public:
  LocalityMap() = default;

  static LocalityMap parse(const std::string& json_text, std::uint32_t n_units);
  static LocalityMap load_file(const std::string& path, std::uint32_t n_units);

  std::size_t depth() const { return levels_.size(); }

  /// Groups at a level, each an ordered list of global unit ids.
  const std::vector<std::vector<std::uint32_t>>& groups(std::size_t level) const;

  /// The group containing `unit` at `level`; nullopt if absent.
  std::optional<std::vector<std::uint32_t>> group_of(std::size_t level, std::uint32_t unit) const;

 private:
  // levels_[L] = list of groups at depth L+1 of the nesting.
  std::vector<std::vector<std::vector<std::uint32_t>>> levels_;
};

}  // namespace pgas

#endif  // PGAS_LOCALITY_HPP
