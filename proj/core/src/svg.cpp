#include "gfanm/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gfanm::svg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Chart::Chart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void Chart::write(std::ostream& os) const {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  auto fy = [&](double y) { return log_y_ ? std::log10(std::max(y, 1e-300)) : y; };
  auto extend = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, fy(y));
    y_hi = std::max(y_hi, fy(y));
  };
  for (const Series& s : series_) {
    for (const Point& p : s.points) extend(p.x, p.y);
  }
  for (const Box& b : boxes_) {
    extend(b.x, b.min);
    extend(b.x, b.max);
  }
  if (y_range_) {
    y_lo = fy(y_range_->x);
    y_hi = fy(y_range_->y);
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!std::isfinite(y_lo)) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi <= x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi <= y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (fy(y) - y_lo) / (y_hi - y_lo)) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title_) << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 5.0;
    const double px = kLeft + pw * i / 5.0;
    const double py = kTop + ph * (1.0 - i / 5.0);
    os << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px)
       << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(px) << "\" y=\"" << num(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft)
       << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">"
       << (log_y_ ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15)
     << "\" text-anchor=\"middle\">" << escape(x_label_) << "</text>\n";
  os << "<text transform=\"translate(18," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label_) << "</text>\n";

  for (std::size_t k = 0; k < series_.size(); ++k) {
    const char* color = kPalette[k % kPalette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const Point& p : series_[k].points) {
      if (std::isfinite(p.y)) os << num(sx(p.x)) << ',' << num(sy(p.y)) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(kWidth - kRight + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(kWidth - kRight + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kWidth - kRight + 38) << "\" y=\"" << num(ly + 4) << "\">"
       << escape(series_[k].label) << "</text>\n";
  }

  const double half = boxes_.size() > 1 ? 0.3 * pw / static_cast<double>(boxes_.size()) : 12.0;
  for (const Box& b : boxes_) {
    const double cx = sx(b.x);
    os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(sy(b.min)) << "\" x2=\"" << num(cx)
       << "\" y2=\"" << num(sy(b.max)) << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(sy(b.q3)) << "\" width=\""
       << num(2 * half) << "\" height=\"" << num(std::max(0.0, sy(b.q1) - sy(b.q3)))
       << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(sy(b.median)) << "\" x2=\""
       << num(cx + half) << "\" y2=\"" << num(sy(b.median)) << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace gfanm::svg
