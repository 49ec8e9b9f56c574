#include "envdiff/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace envdiff::render {

namespace {

class Svg {
 public:
  Svg(int width, int height) : width_(width), height_(height) {}

  void line(double x1, double y1, double x2, double y2, const char* stroke, double w = 1) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"%.2f\"/>", x1, y1, x2,
        y2, stroke, w);
  }
  void rect(double x, double y, double w, double h, const char* fill, const char* stroke = "none",
            double opacity = 1) {
    add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\" stroke=\"%s\" fill-opacity=\"%.2f\"/>",
        x, y, w, std::max(h, 0.0), fill, stroke, opacity);
  }
  void circle(double x, double y, double r, const char* fill, double opacity = 1) {
    add("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\" fill-opacity=\"%.2f\"/>", x, y, r, fill, opacity);
  }
  void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "middle") {
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"%d\" font-family=\"sans-serif\" text-anchor=\"%s\">%s</text>", x, y,
        size, anchor, escape(s).c_str());
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke, double w = 1.5) {
    std::string d;
    char buf[48];
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
      d += buf;
    }
    body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + std::to_string(w) +
             "\" points=\"" + d + "\"/>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) + "\" height=\"" +
           std::to_string(height_) + "\" viewBox=\"0 0 " + std::to_string(width_) + " " + std::to_string(height_) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

 private:
  template <typename... Args>
  void add(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    body_ += buf;
    body_ += '\n';
  }

  static std::string escape(const std::string& s) {
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

  int width_, height_;
  std::string body_;
};

std::string fmt(double v, const char* f = "%.2f") {
  char buf[32];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Deterministic horizontal jitter in [-1, 1].
double jitter(std::size_t i) {
  std::uint64_t x = i * 0x9E3779B97F4A7C15ull;
  x ^= x >> 29;
  return static_cast<double>(x % 2001) / 1000.0 - 1.0;
}

}  // namespace

std::string distribution_svg(const experiment::Records& records, const std::string& title) {
  const auto set = analysis::slice(records);
  const auto acc = analysis::accumulate(set);
  const auto env = analysis::envelopes(acc);
  const auto counts = analysis::unique_counts_by_k(records);

  int kmin = set.slices.empty() ? 0 : set.slices.begin()->first;
  int kmax = set.slices.empty() ? 0 : set.slices.rbegin()->first;
  const int columns = kmax - kmin + 1 + (set.rnd.rewards.empty() ? 0 : 1);

  const double left = 60, right = 20, top = 110, bottom = 50, plot_h = 360;
  const double col_w = std::clamp(700.0 / std::max(columns, 1), 14.0, 60.0);
  const int width = static_cast<int>(left + right + col_w * columns);
  const int height = static_cast<int>(top + plot_h + bottom);
  Svg svg(width, height);

  auto x_of = [&](int column) { return left + (column + 0.5) * col_w; };
  auto y_of = [&](double r) { return top + (1.0 - r) * plot_h; };

  if (!title.empty()) svg.text(width / 2.0, 18, title, 14);
  svg.line(left, top, left, top + plot_h, "black");
  svg.line(left, top + plot_h, width - right, top + plot_h, "black");
  for (int t = 0; t <= 10; t += 2) {
    const double r = t / 10.0;
    svg.line(left - 4, y_of(r), left, y_of(r), "black");
    svg.text(left - 8, y_of(r) + 4, fmt(r, "%.1f"), 10, "end");
  }
  svg.text(18, top + plot_h / 2, "R", 12);

  // Generated (orange) and distinct (pink) counts per complexity.
  std::size_t max_count = 1;
  for (const auto& [k, c] : counts) max_count = std::max(max_count, c.generated);
  const double bar_h = 60, bar_base = top - 15;
  for (const auto& [k, c] : counts) {
    const double x = x_of(k - kmin);
    const double hg = bar_h * static_cast<double>(c.generated) / static_cast<double>(max_count);
    const double hd = bar_h * static_cast<double>(c.distinct) / static_cast<double>(max_count);
    svg.rect(x - col_w * 0.35, bar_base - hg, col_w * 0.35, hg, "#f28e2b");
    svg.rect(x, bar_base - hd, col_w * 0.35, hd, "#e377c2");
  }
  svg.text(left, top - 85, "generated / distinct per k (max " + std::to_string(max_count) + ")", 10, "start");

  // Boxes over the accumulated slices.
  for (const auto& [k, s] : acc) {
    if (s.rewards.empty()) continue;
    const auto b = analysis::box_stats(s.rewards);
    const double x = x_of(k - kmin), w = col_w * 0.6;
    svg.line(x, y_of(b.whisker_lo), x, y_of(b.whisker_hi), "#555555");
    svg.rect(x - w / 2, y_of(b.q3), w, y_of(b.q1) - y_of(b.q3), "#cfe2f3", "#555555", 0.8);
    svg.line(x - w / 2, y_of(b.median), x + w / 2, y_of(b.median), "#1f3b73", 2);
  }

  // Scatter of individual policies.
  std::size_t idx = 0;
  for (const auto& [k, s] : set.slices) {
    for (const auto& r : s.rewards) {
      svg.circle(x_of(k - kmin) + 0.25 * col_w * jitter(idx++), y_of(r.to_double()), 1.6, "#333333", 0.35);
    }
  }
  if (!set.rnd.rewards.empty()) {
    const int column = kmax - kmin + 1;
    for (const auto& r : set.rnd.rewards) {
      svg.circle(x_of(column) + 0.25 * col_w * jitter(idx++), y_of(r.to_double()), 1.8, "#7b3294", 0.6);
    }
    svg.text(x_of(column), top + plot_h + 16, "rnd", 10);
  }

  std::vector<std::pair<double, double>> pmax, pmean, pmin;
  for (const auto& e : env) {
    pmax.emplace_back(x_of(e.k - kmin), y_of(e.max.to_double()));
    pmean.emplace_back(x_of(e.k - kmin), y_of(e.mean.to_double()));
    pmin.emplace_back(x_of(e.k - kmin), y_of(e.min.to_double()));
  }
  svg.polyline(pmax, "#d62728");
  svg.polyline(pmean, "#2ca02c");
  svg.polyline(pmin, "#1f77b4");

  for (int k = kmin; k <= kmax; ++k) {
    if (col_w < 20 && (k - kmin) % 2) continue;
    svg.text(x_of(k - kmin), top + plot_h + 16, std::to_string(k), 10);
  }
  svg.text(left + (width - left - right) / 2, height - 12, "k", 12);
  return svg.str();
}

std::string histogram_svg(const analysis::Histogram& h, const std::string& title) {
  const double left = 60, top = 40, plot_w = 600, plot_h = 300;
  Svg svg(static_cast<int>(left + plot_w + 30), static_cast<int>(top + plot_h + 50));
  std::size_t peak = 1;
  for (std::size_t i = 0; i < h.programmed.size(); ++i) peak = std::max({peak, h.programmed[i], h.random_walk[i]});
  const double bw = plot_w / static_cast<double>(h.programmed.size());
  auto y_of = [&](std::size_t c) { return top + plot_h * (1.0 - static_cast<double>(c) / static_cast<double>(peak)); };
  if (!title.empty()) svg.text(left + plot_w / 2, 20, title, 14);
  for (std::size_t i = 0; i < h.programmed.size(); ++i) {
    const double x = left + bw * static_cast<double>(i);
    svg.rect(x + 1, y_of(h.programmed[i]), bw - 2, top + plot_h - y_of(h.programmed[i]), "#9ecae1", "#3182bd");
    svg.rect(x + bw * 0.4, y_of(h.random_walk[i]), bw * 0.2, top + plot_h - y_of(h.random_walk[i]), "#7b3294");
  }
  svg.line(left, top + plot_h, left + plot_w, top + plot_h, "black");
  svg.line(left, top, left, top + plot_h, "black");
  for (int t = 0; t <= 10; t += 2) {
    svg.text(left + plot_w * t / 10.0, top + plot_h + 16, fmt(t / 10.0, "%.1f"), 10);
  }
  svg.text(left - 8, top + 4, std::to_string(peak), 10, "end");
  svg.text(left - 8, top + plot_h, "0", 10, "end");
  svg.text(left + plot_w / 2, top + plot_h + 40, "R", 12);
  return svg.str();
}

std::vector<ResponseRow> read_response_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("theta,R_raw,R_normalized,branch", 0) != 0) {
    throw std::runtime_error("response CSV: expected header theta,R_raw,R_normalized,branch");
  }
  std::vector<ResponseRow> rows;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string theta, raw, norm, branch;
    if (!std::getline(ss, theta, ',') || !std::getline(ss, raw, ',') || !std::getline(ss, norm, ',') ||
        !std::getline(ss, branch)) {
      throw std::runtime_error("response CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      rows.push_back({std::stod(theta), std::stod(raw), std::stod(norm), branch == "pos"});
    } catch (const std::exception&) {
      throw std::runtime_error("response CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

std::string response_svg(const std::vector<ResponseRow>& rows, const std::string& title) {
  const double left = 60, top = 40, plot_w = 600, plot_h = 300;
  Svg svg(static_cast<int>(left + plot_w + 30), static_cast<int>(top + plot_h + 50));
  if (rows.empty()) return svg.str();
  double tmin = rows.front().theta, tmax = rows.front().theta;
  for (const auto& r : rows) {
    tmin = std::min(tmin, r.theta);
    tmax = std::max(tmax, r.theta);
  }
  if (tmax == tmin) tmax = tmin + 1;
  auto x_of = [&](double t) { return left + plot_w * (t - tmin) / (tmax - tmin); };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - (v + 1.0) / 2.0); };
  if (!title.empty()) svg.text(left + plot_w / 2, 20, title, 14);
  svg.line(left, top, left, top + plot_h, "black");
  svg.line(left, y_of(0), left + plot_w, y_of(0), "#999999");
  svg.line(x_of(0), top, x_of(0), top + plot_h, "#999999");
  for (int v = -1; v <= 1; ++v) svg.text(left - 8, y_of(v) + 4, std::to_string(v), 10, "end");
  for (double t = std::ceil(tmin); t <= tmax; t += 2) svg.text(x_of(t), top + plot_h + 16, fmt(t, "%.0f"), 10);
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(x_of(r.theta), y_of(r.normalized));
  svg.polyline(pts, "#d62728", 2);
  svg.text(left + plot_w / 2, top + plot_h + 40, "theta", 12);
  return svg.str();
}

}  // namespace envdiff::render
