#include <doctest.h>

#include "pgas/pattern_viz.hpp"

using namespace pgas;

namespace {

std::string owner_line(const std::string& rendered, std::size_t row = 0) {
  std::size_t pos = 0;
  for (std::size_t r = 0; r < row; ++r) pos = rendered.find('\n', pos) + 1;
  return rendered.substr(pos, rendered.find('\n', pos) - pos);
}

}  // namespace

TEST_CASE("text rendering pins the 1-D figure rows") {
  auto blocked = render_pattern_text(parse_pattern_spec("20 BLOCKED team 4"));
  CHECK(owner_line(blocked) == "00000111112222233333");

  auto cyclic = render_pattern_text(parse_pattern_spec("20 CYCLIC team 4"));
  CHECK(owner_line(cyclic) == "01230123012301230123");

  auto bc3 = render_pattern_text(parse_pattern_spec("20 BLOCKCYCLIC(3) team 4"));
  CHECK(owner_line(bc3) == "00011122233300011122");

  auto fig4 = render_pattern_text(parse_pattern_spec("14 BLOCKED team 4"));
  CHECK(owner_line(fig4) == "00001111222233");
}

TEST_CASE("text rendering pins the 2-D figure grids") {
  auto left = render_pattern_text(parse_pattern_spec("16x10 BLOCKED,NONE team 4x1"));
  CHECK(owner_line(left, 0) == "0000000000");
  CHECK(owner_line(left, 4) == "1111111111");
  CHECK(owner_line(left, 8) == "2222222222");
  CHECK(owner_line(left, 12) == "3333333333");

  auto middle = render_pattern_text(parse_pattern_spec("16x10 NONE,BLOCKED team 1x4"));
  for (std::size_t r = 0; r < 16; ++r) CHECK(owner_line(middle, r) == "0001112223");

  auto right = render_pattern_text(parse_pattern_spec("16x10 TILE(4),TILE(2) team 2x2 col"));
  CHECK(owner_line(right, 0) == "0011001100");
  CHECK(owner_line(right, 4) == "2233223322");
  CHECK(owner_line(right, 8) == "0011001100");
  CHECK(owner_line(right, 12) == "2233223322");
  // unit 0's first tile is column-major: rows 0..3 of column 0 then column 1
  CHECK(owner_line(right, 18) == " 0  4  .  . 16 20  .  . 32 36");
  CHECK(owner_line(right, 19) == " 1  5  .  . 17 21  .  . 33 37");
}

TEST_CASE("rendering is a pure function of the spec") {
  for (const char* spec :
       {"20 BLOCKCYCLIC(3) team 4", "16x10 TILE(4),TILE(2) team 2x2 col"}) {
    Pattern p1 = parse_pattern_spec(spec);
    Pattern p2 = parse_pattern_spec(spec);
    CHECK(render_pattern_text(p1) == render_pattern_text(p2));
    CHECK(render_pattern_svg(p1) == render_pattern_svg(p2));
  }
}

TEST_CASE("svg output is well-formed svg 1.1 with the fixed palette") {
  auto svg = render_pattern_svg(parse_pattern_spec("20 BLOCKED team 4"));
  CHECK(svg.find("<?xml version=\"1.0\"") == 0);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg.find("#4e79a7") != std::string::npos);
  CHECK(svg.find("#e15759") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("3-D patterns are not renderable") {
  CHECK_THROWS_AS(render_pattern_text(parse_pattern_spec("4x4x4 BLOCKED,NONE,NONE team 2x1x1")),
                  usage_error);
}
