#include "pgas/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <optional>

namespace pgas {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return b == 0 ? 0 : (a + b - 1) / b; }

// Dimension visit order from most to least significant.
std::size_t sig_dim(MemoryOrder order, std::size_t ndim, std::size_t j) {
  return order == MemoryOrder::RowMajor ? j : ndim - 1 - j;
}

std::uint64_t linearize(std::span<const std::uint64_t> x, std::span<const std::uint64_t> extents,
                        MemoryOrder order) {
  std::uint64_t acc = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    std::size_t k = sig_dim(order, x.size(), j);
    acc = acc * extents[k] + x[k];
  }
  return acc;
}

Coords delinearize(std::uint64_t index, std::span<const std::uint64_t> extents,
                   MemoryOrder order) {
  Coords out = Coords::zeros(extents.size());
  for (std::size_t j = extents.size(); j-- > 0;) {
    std::size_t k = sig_dim(order, extents.size(), j);
    if (extents[k] == 0) continue;
    out[k] = index % extents[k];
    index /= extents[k];
  }
  return out;
}

}  // namespace

TeamSpec::TeamSpec(std::initializer_list<std::uint32_t> extents) : extents_(extents) {}

TeamSpec::TeamSpec(std::span<const std::uint32_t> extents)
    : extents_(extents.begin(), extents.end()) {}

TeamSpec TeamSpec::default_for(std::span<const DistributionSpec> dists, std::size_t ndim,
                               std::uint32_t team_size) {
  std::vector<std::uint32_t> ext(ndim, 1);
  std::size_t target = 0;
  for (std::size_t k = 0; k < ndim; ++k) {
    if (dists.size() > k && dists[k].kind != Dist::None) {
      target = k;
      break;
    }
  }
  ext[target] = team_size;
  return TeamSpec(std::span<const std::uint32_t>(ext));
}

std::uint32_t TeamSpec::size() const {
  std::uint32_t p = 1;
  for (auto e : extents_) p *= e;
  return p;
}

std::uint32_t TeamSpec::rank_of(std::span<const std::uint32_t> grid_coord) const {
  std::uint32_t acc = 0;
  for (std::size_t k = 0; k < extents_.size(); ++k) acc = acc * extents_[k] + grid_coord[k];
  return acc;
}

Coords TeamSpec::grid_coord_of(std::uint32_t rank) const {
  Coords out = Coords::zeros(extents_.size());
  for (std::size_t k = extents_.size(); k-- > 0;) {
    out[k] = rank % extents_[k];
    rank /= extents_[k];
  }
  return out;
}

Pattern::Pattern(std::vector<std::uint64_t> extents, std::vector<DistributionSpec> dists,
                 TeamSpec teamspec, MemoryOrder order)
    : extents_(std::move(extents)),
      dists_(std::move(dists)),
      teamspec_(std::move(teamspec)),
      order_(order) {
  validate();
  block_.resize(extents_.size());
  for (std::size_t k = 0; k < extents_.size(); ++k) {
    const std::uint64_t n = extents_[k];
    const std::uint32_t t = teamspec_.extent(k);
    switch (dists_[k].kind) {
      case Dist::Blocked:
        block_[k] = std::max<std::uint64_t>(1, ceil_div(n, t));
        break;
      case Dist::BlockCyclic:
      case Dist::Tile:
        block_[k] = dists_[k].param;
        break;
      case Dist::None:
        block_[k] = std::max<std::uint64_t>(1, n);
        break;
    }
    tiled_ = tiled_ || dists_[k].kind == Dist::Tile;
  }
  total_ = 1;
  for (auto n : extents_) total_ *= n;
}

Pattern Pattern::make_1d(std::uint64_t n, DistributionSpec dist, std::uint32_t team_size) {
  return Pattern({n}, {dist}, TeamSpec({team_size}));
}

void Pattern::validate() const {
  if (extents_.empty() || extents_.size() > kMaxDims)
    throw usage_error("pattern rank must be between 1 and " + std::to_string(kMaxDims));
  if (dists_.size() != extents_.size())
    throw usage_error("one distribution specifier required per dimension");
  if (teamspec_.ndim() != extents_.size())
    throw usage_error("teamspec rank must match pattern rank");
  if (teamspec_.size() == 0) throw usage_error("teamspec must contain at least one unit");
  for (const auto& d : dists_) {
    if ((d.kind == Dist::BlockCyclic || d.kind == Dist::Tile) && d.param == 0)
      throw usage_error("block size parameter must be positive");
  }
  for (std::size_t k = 0; k < teamspec_.ndim(); ++k) {
    if (teamspec_.extent(k) == 0) throw usage_error("teamspec extents must be positive");
  }
}

std::uint64_t Pattern::num_blocks(std::size_t dim) const {
  return ceil_div(extents_[dim], block_[dim]);
}

std::uint32_t Pattern::unit_of(std::span<const std::uint64_t> coord) const {
  if (coord.size() != ndim()) throw usage_error("coordinate rank mismatch");
  std::array<std::uint32_t, kMaxDims> grid{};
  for (std::size_t k = 0; k < ndim(); ++k) {
    if (coord[k] >= extents_[k]) throw range_error("coordinate out of range");
    if (dists_[k].kind == Dist::None) {
      grid[k] = 0;
    } else {
      grid[k] = static_cast<std::uint32_t>((coord[k] / block_[k]) % teamspec_.extent(k));
    }
  }
  return teamspec_.rank_of({grid.data(), ndim()});
}

std::uint64_t Pattern::local_extent_dim(std::size_t dim, std::uint32_t grid_coord) const {
  const std::uint64_t n = extents_[dim];
  if (dists_[dim].kind == Dist::None) return grid_coord == 0 ? n : 0;
  const std::uint64_t b = block_[dim];
  const std::uint64_t t = teamspec_.extent(dim);
  const std::uint64_t cycle = b * t;
  const std::uint64_t full = n / cycle;
  const std::uint64_t rem = n % cycle;
  const std::uint64_t start = grid_coord * b;
  const std::uint64_t extra = rem <= start ? 0 : std::min(rem - start, b);
  return full * b + extra;
}

Coords Pattern::local_extents(std::uint32_t unit) const {
  Coords grid = teamspec_.grid_coord_of(unit);
  Coords out = Coords::zeros(ndim());
  for (std::size_t k = 0; k < ndim(); ++k)
    out[k] = local_extent_dim(k, static_cast<std::uint32_t>(grid[k]));
  return out;
}

std::uint64_t Pattern::local_size(std::uint32_t unit) const {
  Coords ext = local_extents(unit);
  std::uint64_t p = 1;
  for (std::size_t k = 0; k < ndim(); ++k) p *= ext[k];
  return p;
}

// Offset of a coordinate inside the tile-contiguous local layout: tiles are
// stored in global tile iteration order (MemoryOrder over the tile grid),
// elements within a tile again by MemoryOrder. Only the globally last tile
// along a dimension can be truncated, so the cumulative width of the owned
// tiles preceding tile tau along one dimension is exactly tau * B.
std::uint64_t Pattern::tile_local_offset(std::span<const std::uint64_t> coord,
                                         const Coords& grid) const {
  const std::size_t d = ndim();
  std::array<std::uint64_t, kMaxDims> tau{};    // local tile coordinate
  std::array<std::uint64_t, kMaxDims> width{};  // actual width of this tile
  std::array<std::uint64_t, kMaxDims> intile{};
  std::array<std::uint64_t, kMaxDims> local_ext{};
  for (std::size_t k = 0; k < d; ++k) {
    const std::uint64_t b = block_[k];
    const std::uint64_t t = teamspec_.extent(k);
    const std::uint64_t g = coord[k] / b;
    tau[k] = dists_[k].kind == Dist::None ? 0 : g / t;
    width[k] = std::min(b, extents_[k] - g * b);
    intile[k] = coord[k] % b;
    local_ext[k] = local_extent_dim(k, static_cast<std::uint32_t>(grid[k]));
  }
  // Sum over significance positions: tiles that precede ours lexicographically.
  std::uint64_t prefix = 0;
  std::uint64_t fixed = 1;  // product of widths of already-fixed outer dims
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t k = sig_dim(order_, d, j);
    std::uint64_t rest = 1;
    for (std::size_t i = j + 1; i < d; ++i) rest *= local_ext[sig_dim(order_, d, i)];
    prefix += fixed * (tau[k] * block_[k]) * rest;
    fixed *= width[k];
  }
  return prefix + linearize({intile.data(), d}, {width.data(), d}, order_);
}

LocalPos Pattern::local_index_of(std::span<const std::uint64_t> coord) const {
  const std::uint32_t unit = unit_of(coord);
  Coords grid = teamspec_.grid_coord_of(unit);
  if (tiled_) return {unit, tile_local_offset(coord, grid)};
  std::array<std::uint64_t, kMaxDims> local{};
  for (std::size_t k = 0; k < ndim(); ++k) {
    if (dists_[k].kind == Dist::None) {
      local[k] = coord[k];
    } else {
      const std::uint64_t b = block_[k];
      const std::uint64_t cycle = b * teamspec_.extent(k);
      local[k] = (coord[k] / cycle) * b + coord[k] % b;
    }
  }
  Coords ext = local_extents(unit);
  return {unit, linearize({local.data(), ndim()}, ext.view(), order_)};
}

Coords Pattern::tile_coord_of_local(const Coords& grid, std::uint64_t offset) const {
  const std::size_t d = ndim();
  std::array<std::uint64_t, kMaxDims> local_ext{};
  std::array<std::uint64_t, kMaxDims> tile_count{};
  for (std::size_t k = 0; k < d; ++k) {
    local_ext[k] = local_extent_dim(k, static_cast<std::uint32_t>(grid[k]));
    tile_count[k] = ceil_div(local_ext[k], block_[k]);
  }
  std::array<std::uint64_t, kMaxDims> tau{};
  std::array<std::uint64_t, kMaxDims> width{};
  std::uint64_t fixed = 1;
  std::uint64_t rem = offset;
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t k = sig_dim(order_, d, j);
    std::uint64_t rest = 1;
    for (std::size_t i = j + 1; i < d; ++i) rest *= local_ext[sig_dim(order_, d, i)];
    const std::uint64_t full_band = fixed * block_[k] * rest;
    std::uint64_t q = full_band == 0 ? 0 : rem / full_band;
    if (tile_count[k] > 0 && q >= tile_count[k]) q = tile_count[k] - 1;
    tau[k] = q;
    rem -= q * full_band;
    width[k] = std::min(block_[k], local_ext[k] - q * block_[k]);
    fixed *= width[k];
  }
  Coords intile = delinearize(rem, {width.data(), d}, order_);
  Coords coord = Coords::zeros(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::uint64_t t = dists_[k].kind == Dist::None ? 1 : teamspec_.extent(k);
    const std::uint64_t u = dists_[k].kind == Dist::None ? 0 : grid[k];
    coord[k] = (tau[k] * t + u) * block_[k] + intile[k];
  }
  return coord;
}

Coords Pattern::global_coord_of(std::uint32_t unit, std::uint64_t local_offset) const {
  if (unit >= team_size()) throw usage_error("unit rank out of range");
  if (local_offset >= local_size(unit)) throw range_error("local offset out of range");
  Coords grid = teamspec_.grid_coord_of(unit);
  if (tiled_) return tile_coord_of_local(grid, local_offset);
  Coords ext = local_extents(unit);
  Coords local = delinearize(local_offset, ext.view(), order_);
  Coords coord = Coords::zeros(ndim());
  for (std::size_t k = 0; k < ndim(); ++k) {
    if (dists_[k].kind == Dist::None) {
      coord[k] = local[k];
    } else {
      const std::uint64_t b = block_[k];
      const std::uint64_t cycle = b * teamspec_.extent(k);
      coord[k] = (local[k] / b) * cycle + grid[k] * b + local[k] % b;
    }
  }
  return coord;
}

std::uint64_t Pattern::linear_of(std::span<const std::uint64_t> coord) const {
  return linearize(coord, extents_, order_);
}

Coords Pattern::coord_of_linear(std::uint64_t index) const {
  return delinearize(index, extents_, order_);
}

LocalPos Pattern::map_linear(std::uint64_t index) const {
  if (ndim() == 1) return local_index_of(std::span<const std::uint64_t>(&index, 1));
  Coords c = coord_of_linear(index);
  return local_index_of(c.view());
}

std::uint64_t Pattern::linear_of_local(std::uint32_t unit, std::uint64_t local_offset) const {
  Coords c = global_coord_of(unit, local_offset);
  return linear_of(c.view());
}

std::uint32_t Pattern::unit_of(std::uint64_t index) const {
  return unit_of(std::span<const std::uint64_t>(&index, 1));
}

LocalPos Pattern::local_index_of(std::uint64_t index) const {
  return local_index_of(std::span<const std::uint64_t>(&index, 1));
}

bool operator==(const Pattern& a, const Pattern& b) {
  if (a.extents_ != b.extents_ || a.order_ != b.order_) return false;
  if (a.dists_.size() != b.dists_.size()) return false;
  for (std::size_t k = 0; k < a.dists_.size(); ++k)
    if (!(a.dists_[k] == b.dists_[k])) return false;
  return std::ranges::equal(a.teamspec_.extents(), b.teamspec_.extents());
}

namespace {

struct SpecParser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  bool peek_char(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool consume_char(char c) {
    if (!peek_char(c)) return false;
    ++pos;
    return true;
  }

  std::uint64_t parse_number() {
    skip_ws();
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data() + pos)
      throw parse_error("expected a number", pos);
    pos = static_cast<std::size_t>(ptr - text.data());
    return value;
  }

  std::string parse_word() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && (std::isalpha(static_cast<unsigned char>(text[pos])) ||
                                 text[pos] == '_'))
      ++pos;
    return std::string(text.substr(start, pos - start));
  }

  DistributionSpec parse_dist() {
    skip_ws();
    std::size_t start = pos;
    std::string word = parse_word();
    std::string upper;
    for (char c : word) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "BLOCKED") return DistributionSpec::blocked();
    if (upper == "CYCLIC") return DistributionSpec::cyclic();
    if (upper == "NONE") return DistributionSpec::none();
    if (upper == "BLOCKCYCLIC" || upper == "TILE") {
      if (!consume_char('(')) throw parse_error("expected '(' after " + upper, pos);
      std::uint64_t b = parse_number();
      if (!consume_char(')')) throw parse_error("expected ')'", pos);
      if (b == 0) throw parse_error("block size must be positive", start);
      return upper == "TILE" ? DistributionSpec::tile(b) : DistributionSpec::block_cyclic(b);
    }
    throw parse_error("unknown keyword '" + word + "'", start);
  }
};

}  // namespace

Pattern parse_pattern_spec(std::string_view text, std::uint32_t default_team_size) {
  SpecParser p{text};

  std::vector<std::uint64_t> extents;
  extents.push_back(p.parse_number());
  while (p.consume_char('x')) extents.push_back(p.parse_number());

  std::vector<DistributionSpec> dists;
  dists.push_back(p.parse_dist());
  while (p.consume_char(',')) dists.push_back(p.parse_dist());
  if (dists.size() != extents.size())
    throw parse_error("expected " + std::to_string(extents.size()) +
                          " distribution specifiers, got " + std::to_string(dists.size()),
                      p.pos);

  std::optional<TeamSpec> teamspec;
  MemoryOrder order = MemoryOrder::RowMajor;
  while (!p.at_end()) {
    std::size_t start = p.pos;
    std::string word = p.parse_word();
    if (word == "team") {
      std::vector<std::uint32_t> ext;
      ext.push_back(static_cast<std::uint32_t>(p.parse_number()));
      while (p.consume_char('x')) ext.push_back(static_cast<std::uint32_t>(p.parse_number()));
      if (ext.size() != extents.size())
        throw parse_error("teamspec rank must match pattern rank", start);
      teamspec = TeamSpec(std::span<const std::uint32_t>(ext));
    } else if (word == "row") {
      order = MemoryOrder::RowMajor;
    } else if (word == "col") {
      order = MemoryOrder::ColMajor;
    } else {
      throw parse_error("unknown keyword '" + word + "'", start);
    }
  }
  if (!teamspec)
    teamspec = TeamSpec::default_for(dists, extents.size(), default_team_size);

  try {
    return Pattern(std::move(extents), std::move(dists), std::move(*teamspec), order);
  } catch (const usage_error& e) {
    throw parse_error(e.what(), 0);
  }
}

}  // namespace pgas
