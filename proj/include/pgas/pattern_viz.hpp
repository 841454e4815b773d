#ifndef PGAS_PATTERN_VIZ_HPP
#define PGAS_PATTERN_VIZ_HPP

#include <string>

#include "pgas/pattern.hpp"

namespace pgas {

/// Unit-ownership grid (one base-36 character per element) followed by unit
/// 0's local memory order as a numbered trace. 1-D and 2-D patterns only.
/// Output is a pure function of the pattern.
std::string render_pattern_text(const Pattern& pattern);

/// SVG 1.1 rendering: colored cells per owning unit (fixed 4-color cycling
/// palette) plus white dots and connecting lines tracing unit 0's local
/// storage order.
std::string render_pattern_svg(const Pattern& pattern);

}  // namespace pgas

#endif  // PGAS_PATTERN_VIZ_HPP
