#include "pgas/pattern_viz.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace pgas {

namespace {

char unit_char(std::uint32_t u) {
  if (u < 10) return static_cast<char>('0' + u);
  if (u < 36) return static_cast<char>('a' + (u - 10));
  return '?';
}

struct Grid {
  std::uint64_t rows;
  std::uint64_t cols;
  bool one_dim;
};

Grid grid_of(const Pattern& p) {
  if (p.ndim() == 1) return {1, p.extent(0), true};
  if (p.ndim() == 2) return {p.extent(0), p.extent(1), false};
  throw usage_error("only 1-D and 2-D patterns can be rendered");
}

std::uint64_t coord_unit(const Pattern& p, const Grid& g, std::uint64_t r, std::uint64_t c) {
  if (g.one_dim) {
    std::uint64_t coord[1] = {c};
    return p.unit_of({coord, 1});
  }
  std::uint64_t coord[2] = {r, c};
  return p.unit_of({coord, 2});
}

// local offset within unit 0, or -1 if the cell is owned elsewhere
std::int64_t unit0_offset(const Pattern& p, const Grid& g, std::uint64_t r, std::uint64_t c) {
  LocalPos pos;
  if (g.one_dim) {
    std::uint64_t coord[1] = {c};
    pos = p.local_index_of({coord, 1});
  } else {
    std::uint64_t coord[2] = {r, c};
    pos = p.local_index_of({coord, 2});
  }
  return pos.unit == 0 ? static_cast<std::int64_t>(pos.offset) : -1;
}

}  // namespace

std::string render_pattern_text(const Pattern& pattern) {
  Grid g = grid_of(pattern);
  std::ostringstream out;
  for (std::uint64_t r = 0; r < g.rows; ++r) {
    for (std::uint64_t c = 0; c < g.cols; ++c)
      out << unit_char(static_cast<std::uint32_t>(coord_unit(pattern, g, r, c)));
    out << '\n';
  }

  std::uint64_t max_local = pattern.local_size(0);
  std::size_t width = std::to_string(max_local == 0 ? 0 : max_local - 1).size();
  out << "\nunit 0 local order:\n";
  for (std::uint64_t r = 0; r < g.rows; ++r) {
    for (std::uint64_t c = 0; c < g.cols; ++c) {
      if (c > 0) out << ' ';
      std::int64_t off = unit0_offset(pattern, g, r, c);
      std::string cell = off < 0 ? "." : std::to_string(off);
      out << std::string(width > cell.size() ? width - cell.size() : 0, ' ') << cell;
    }
    out << '\n';
  }
  return out.str();
}

std::string render_pattern_svg(const Pattern& pattern) {
  Grid g = grid_of(pattern);
  static const char* kPalette[4] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759"};
  const int cell = 28;
  const int margin = 6;
  const int w = margin * 2 + static_cast<int>(g.cols) * cell;
  const int h = margin * 2 + static_cast<int>(g.rows) * cell;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  for (std::uint64_t r = 0; r < g.rows; ++r) {
    for (std::uint64_t c = 0; c < g.cols; ++c) {
      std::uint64_t u = coord_unit(pattern, g, r, c);
      out << "  <rect x=\"" << margin + c * cell << "\" y=\"" << margin + r * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
          << kPalette[u % 4] << "\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n";
    }
  }

  // unit 0's storage order: white dots connected in local-offset order
  std::vector<std::pair<int, int>> centers(pattern.local_size(0), {0, 0});
  for (std::uint64_t r = 0; r < g.rows; ++r) {
    for (std::uint64_t c = 0; c < g.cols; ++c) {
      std::int64_t off = unit0_offset(pattern, g, r, c);
      if (off >= 0)
        centers[static_cast<std::size_t>(off)] = {
            margin + static_cast<int>(c) * cell + cell / 2,
            margin + static_cast<int>(r) * cell + cell / 2};
    }
  }
  if (!centers.empty()) {
    out << "  <polyline fill=\"none\" stroke=\"#ffffff\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (i) out << ' ';
      out << centers[i].first << ',' << centers[i].second;
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < centers.size(); ++i) {
      out << "  <circle cx=\"" << centers[i].first << "\" cy=\"" << centers[i].second
          << "\" r=\"6\" fill=\"#ffffff\"/>\n"
          << "  <text x=\"" << centers[i].first << "\" y=\"" << centers[i].second + 3
          << "\" font-size=\"7\" font-family=\"sans-serif\" text-anchor=\"middle\">" << i
          << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace pgas
