#pragma once

#include <filesystem>
#include <string>

#include "modeloc/align.hpp"
#include "modeloc/types.hpp"

namespace modeloc {

/// SVG compass plot: unit circle, one arrow per shared channel for each shape
/// (forced arrows rotated by alignment.delta, lengths normalized to the
/// largest magnitude), top-ranked channel highlighted.
///
/// Arrows are <line> elements with class "arrow forced" or "arrow natural"
/// (plus "highlight") and a data-channel attribute.
std::string compass_svg(const ModeShape& forced, const ModeShape& natural,
                        const AlignmentResult& alignment);

void render_compass(const ModeShape& forced, const ModeShape& natural,
                    const AlignmentResult& alignment, const std::filesystem::path& path);

}  // namespace modeloc
