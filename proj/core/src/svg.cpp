#include "evseq/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <sstream>

namespace evseq {

namespace {

constexpr std::array<const char*, 10> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                               "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Span {
  double lo, hi;
};

Span x_span(const EventBox& box) { return {box.container.x_origin, box.container.width}; }

double visible_max(const EventBox& box) {
  return box.config.show_outliers ? box.summary.max : std::min(box.summary.max, box.fences.upper);
}

double box_height(const EventBox& box, const SvgLayout& l) {
  return std::max(8.0, box.container.height / l.units_per_pixel);
}

class Palette {
 public:
  const char* operator()(const std::string& key) {
    auto it = index_.find(key);
    if (it == index_.end()) it = index_.emplace(key, index_.size()).first;
    return kPalette[it->second % kPalette.size()];
  }

 private:
  std::map<std::string, std::size_t> index_;
};

double draw_box(std::ostringstream& out, const EventBox& box, const SvgLayout& l, double top, Span span, Palette& colors) {
  const double left = l.margin;
  const double w = l.plot_width;
  const double h = box_height(box, l);
  auto px = [&](double v) { return left + (span.hi > span.lo ? (v - span.lo) / (span.hi - span.lo) * w : 0.0); };
  const auto& s = box.summary;
  const double vmax = visible_max(box);

  out << "<g class=\"eventbox\" data-event-type=\"" << escape(box.event_type) << "\"";
  if (box.breakdown_value) out << " data-breakdown=\"" << escape(*box.breakdown_value) << "\"";
  out << ">\n";
  out << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top - 4) << "\" font-size=\"11\">" << escape(box.event_type);
  if (box.breakdown_value) out << " | " << escape(*box.breakdown_value);
  out << " (N=" << s.n << ")</text>\n";
  out << "<rect class=\"container\" x=\"" << fmt(px(span.lo)) << "\" y=\"" << fmt(top) << "\" width=\""
      << fmt(px(vmax) - px(span.lo)) << "\" height=\"" << fmt(h) << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // Alternating bands between consecutive quartile lines.
  const std::array<double, 5> stops{s.min, s.q1, s.q2, s.q3, std::min(s.max, vmax)};
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    const double a = std::min(stops[i], vmax), b = std::min(stops[i + 1], vmax);
    out << "<rect class=\"band\" x=\"" << fmt(px(a)) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(px(b) - px(a))
        << "\" height=\"" << fmt(h) << "\" fill=\"" << (i % 2 ? "#e8e8e8" : "#f6f6f6") << "\"/>\n";
  }
  if (box.config.show_outliers && !box.outliers.empty()) {
    if (box.fences.upper < s.max)
      out << "<rect class=\"beyond-fence\" x=\"" << fmt(px(box.fences.upper)) << "\" y=\"" << fmt(top) << "\" width=\""
          << fmt(px(s.max) - px(box.fences.upper)) << "\" height=\"" << fmt(h) << "\" fill=\"#d3d3d3\"/>\n";
    if (box.fences.lower > s.min)
      out << "<rect class=\"beyond-fence\" x=\"" << fmt(px(s.min)) << "\" y=\"" << fmt(top) << "\" width=\""
          << fmt(px(box.fences.lower) - px(s.min)) << "\" height=\"" << fmt(h) << "\" fill=\"#d3d3d3\"/>\n";
  }
  for (double q : {s.q1, s.q2, s.q3}) {
    if (q > vmax) continue;
    out << "<line class=\"quartile\" x1=\"" << fmt(px(q)) << "\" x2=\"" << fmt(px(q)) << "\" y1=\"" << fmt(top)
        << "\" y2=\"" << fmt(top + h) << "\" stroke=\"#333\"/>\n";
  }

  // Points: y over the observed p_v range, or category slots.
  double ylo = 0, yhi = 1;
  if (!box.y_categories.empty()) {
    yhi = static_cast<double>(box.y_categories.size());
  } else if (box.config.p_v == kStartTimeOfDay) {
    yhi = 1440;
  } else {
    bool first = true;
    for (const auto& p : box.points)
      if (p.y) {
        ylo = first ? *p.y : std::min(ylo, *p.y);
        yhi = first ? *p.y : std::max(yhi, *p.y);
        first = false;
      }
    if (yhi <= ylo) yhi = ylo + 1;
  }
  for (const auto& p : box.points) {
    if (p.outlier && !box.config.show_outliers) continue;
    if (!p.y) continue;
    const double yv = box.y_categories.empty() ? *p.y : *p.y + 0.5;
    const double py = top + h - (yv - ylo) / (yhi - ylo) * h;
    out << "<circle cx=\"" << fmt(px(p.x)) << "\" cy=\"" << fmt(py) << "\" r=\"1.5\" fill=\""
        << (p.color ? colors(*p.color) : "#333") << "\"/>\n";
  }

  // Horizontal histogram under the container.
  const double base = top + h + l.histogram_depth;
  std::size_t hmax = 1;
  for (const auto& bar : box.hist_h.bars) hmax = std::max(hmax, bar.total);
  for (const auto& bar : box.hist_h.bars) {
    if (!bar.lo || !bar.hi || *bar.lo >= vmax) continue;
    const double x0 = px(*bar.lo), x1 = px(std::min(*bar.hi, vmax));
    double y = base;
    auto draw = [&](std::size_t count, const char* fill) {
      const double hh = static_cast<double>(count) / static_cast<double>(hmax) * (l.histogram_depth - 4);
      out << "<rect class=\"hist-h\" x=\"" << fmt(x0) << "\" y=\"" << fmt(y - hh) << "\" width=\"" << fmt(x1 - x0)
          << "\" height=\"" << fmt(hh) << "\" fill=\"" << fill << "\"/>\n";
      y -= hh;
    };
    if (bar.stacks.empty()) draw(bar.total, "#888");
    for (const auto& seg : bar.stacks) draw(seg.count, colors(seg.key));
  }

  // Vertical histogram right of the container.
  const double right = left + w + 4;
  std::size_t vmaxc = 1;
  for (const auto& bar : box.hist_v.bars) vmaxc = std::max(vmaxc, bar.total);
  const std::size_t nbars = box.hist_v.bars.size();
  for (std::size_t i = 0; i < nbars; ++i) {
    const auto& bar = box.hist_v.bars[i];
    const double slot = h / static_cast<double>(std::max<std::size_t>(1, nbars));
    const double y0 = top + h - static_cast<double>(i + 1) * slot;
    double x = right;
    auto draw = [&](std::size_t count, const char* fill) {
      const double ww = static_cast<double>(count) / static_cast<double>(vmaxc) * (l.histogram_depth - 4);
      out << "<rect class=\"hist-v\" x=\"" << fmt(x) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(ww)
          << "\" height=\"" << fmt(slot) << "\" fill=\"" << fill << "\"/>\n";
      x += ww;
    };
    if (bar.stacks.empty()) draw(bar.total, "#888");
    for (const auto& seg : bar.stacks) draw(seg.count, colors(seg.key));
  }
  out << "</g>\n";
  return h + l.histogram_depth;
}

std::string render(const std::vector<EventBox>& boxes, const SvgLayout& l) {
  if (boxes.empty()) throw EmptyInputError("nothing to render");
  Span span = x_span(boxes.front());
  for (const auto& b : boxes) {
    span.lo = std::min(span.lo, x_span(b).lo);
    span.hi = std::max(span.hi, b.config.show_outliers ? x_span(b).hi : visible_max(b));
  }
  std::ostringstream body;
  Palette colors;
  double top = l.margin;
  for (const auto& b : boxes) top += draw_box(body, b, l, top, span, colors) + l.margin;
  const double width = l.margin * 2 + l.plot_width + l.histogram_depth + 4;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(top) << "\" viewBox=\"0 0 "
      << fmt(width) << " " << fmt(top) << "\">\n"
      << body.str() << "</svg>\n";
  return out.str();
}

}  // namespace

double svg_x(const EventBox& box, double value, const SvgLayout& layout) {
  Span span = x_span(box);
  if (!box.config.show_outliers) span.hi = visible_max(box);
  return layout.margin + (span.hi > span.lo ? (value - span.lo) / (span.hi - span.lo) * layout.plot_width : 0.0);
}

std::string render_eventbox_svg(const EventBox& box, const SvgLayout& layout) { return render({box}, layout); }

std::string render_eventbox_stack_svg(const std::vector<EventBox>& boxes, const SvgLayout& layout) {
  return render(boxes, layout);
}

}  // namespace evseq
