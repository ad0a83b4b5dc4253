#pragma once

// RateCurve serialization.
//
// CSV: UTF-8, LF line endings. Optional metadata comment lines
// ("# scenario: ...", "# seed: ...", "# sigma_rel: ...") precede the header
// row `t,gamma_ratio`; numbers use 17 significant digits.
//
// JSON: {"metadata": {...}, "samples": [{"gamma_ratio": r, "t": t}, ...]}
// with keys in sorted order.

#include <iosfwd>
#include <string>
#include <string_view>

#include "purcell/sweep.hpp"

namespace purcell {

enum class CurveFormat { Csv, Json };

CurveFormat parse_format(std::string_view name);

/// Picks JSON when the first non-blank character is '{', CSV otherwise.
CurveFormat sniff_format(std::string_view text);

std::string to_csv(const RateCurve& curve);
std::string to_json(const RateCurve& curve);

RateCurve from_csv(std::string_view text);
RateCurve from_json(std::string_view text);

void export_curve(std::ostream& os, const RateCurve& curve, CurveFormat format);
RateCurve import_curve(std::istream& is);

}  // namespace purcell
