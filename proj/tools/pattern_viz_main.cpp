// Renders a data-distribution pattern as a text grid or SVG.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pgas/pattern_viz.hpp"

int main(int argc, char** argv) {
  CLI::App app{"data distribution pattern visualizer"};
  std::string spec;
  std::string format = "text";
  std::string out_path;
  std::uint32_t units = 4;
  app.add_option("--spec", spec,
                 "pattern spec, e.g. \"16x10 TILE(4),TILE(2) team 2x2 col\"")
      ->required();
  app.add_option("--format", format, "text or svg")->check(CLI::IsMember({"text", "svg"}));
  app.add_option("-o,--output", out_path, "output file (default stdout)");
  app.add_option("--units", units, "team size when the spec has no team clause");
  CLI11_PARSE(app, argc, argv);

  std::string rendered;
  try {
    pgas::Pattern pattern = pgas::parse_pattern_spec(spec, units);
    rendered = format == "svg" ? pgas::render_pattern_svg(pattern)
                               : pgas::render_pattern_text(pattern);
  } catch (const pgas::parse_error& e) {
    std::fprintf(stderr, "pattern-viz: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pattern-viz: %s\n", e.what());
    return 1;
  }

  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_path);
    out << rendered;
  }
  return 0;
}
