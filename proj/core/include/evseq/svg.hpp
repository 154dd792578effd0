#pragma once

#include <string>
#include <vector>

#include "evseq/eventbox.hpp"

namespace evseq {

/// Drawing scale shared with the browser client: x maps affinely onto
/// `plot_width` pixels, y onto container.height / units_per_pixel pixels.
struct SvgLayout {
  double plot_width = 600;
  double units_per_pixel = 2.5;
  double histogram_depth = 60;
  double margin = 30;
};

/// Pixel x of a p_h value inside the container.
double svg_x(const EventBox& box, double value, const SvgLayout& layout = {});

/// Static rendering of the container, quartile bands, points and both
/// histograms. Outlier points and the area past the upper fence are omitted
/// when show_outliers is off.
std::string render_eventbox_svg(const EventBox& box, const SvgLayout& layout = {});

/// Boxes stacked top to bottom on a shared x scale, e.g. breakdown children.
std::string render_eventbox_stack_svg(const std::vector<EventBox>& boxes, const SvgLayout& layout = {});

}  // namespace evseq
