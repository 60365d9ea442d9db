#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gfanm::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string label;
  std::vector<Point> points;
};

struct Box {
  double x = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Minimal self-contained SVG chart: polylines and box plots on linear axes.
class Chart {
 public:
  Chart(std::string title, std::string x_label, std::string y_label);

  void add_series(Series series) { series_.push_back(std::move(series)); }
  void add_box(const Box& box) { boxes_.push_back(box); }
  void set_y_range(double lo, double hi) { y_range_ = {lo, hi}; }
  void set_log_y(bool on) { log_y_ = on; }

  void write(std::ostream& os) const;

 private:
  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> series_;
  std::vector<Box> boxes_;
  std::optional<Point> y_range_;
  bool log_y_ = false;
};

}  // namespace gfanm::svg
