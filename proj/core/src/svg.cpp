#include "oblab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oblab/util.hpp"

namespace oblab {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// Round-ish tick positions: 5 evenly spaced values across the range.
std::vector<double> linear_ticks(double lo, double hi) {
  std::vector<double> t;
  for (int k = 0; k <= 4; ++k) t.push_back(lo + (hi - lo) * k / 4.0);
  return t;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool log_x)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
      log_x_(log_x) {}

void SvgPlot::add_series(const std::string& name, const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("svg series: x/y size mismatch");
  series_.push_back({name, x, y, true});
}

void SvgPlot::add_points(const std::string& name, const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("svg points: x/y size mismatch");
  series_.push_back({name, x, y, false});
}

void SvgPlot::write(const std::string& path) const {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series_)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      double xv = log_x_ ? std::log10(std::max(s.x[k], 1e-300)) : s.x[k];
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  if (xmin > xmax) {  // empty plot: still emit a valid file
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  double pad = (ymax - ymin < 1e-12) ? 0.5 : 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double xv) {
    double v = log_x_ ? std::log10(std::max(xv, 1e-300)) : xv;
    return kLeft + (v - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double yv) {
    return kHeight - kBottom - (yv - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
      << "font-family=\"sans-serif\">" << title_ << "</text>\n";

  // axes
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (double t : linear_ticks(xmin, xmax)) {
    double X = kLeft + (t - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
    out << "<line x1=\"" << X << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << X << "\" y2=\""
        << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
    double shown = log_x_ ? std::pow(10.0, t) : t;
    out << "<text x=\"" << X << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << tick_label(shown) << "</text>\n";
  }
  for (double t : linear_ticks(ymin, ymax)) {
    double Y = py(t);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << Y << "\" x2=\"" << kLeft << "\" y2=\"" << Y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << Y + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << tick_label(t)
        << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << xlabel_
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 16 "
      << (kTop + kHeight - kBottom) / 2 << ")\">" << ylabel_ << "</text>\n";

  int ci = 0;
  double ly = kTop + 6;
  for (const auto& s : series_) {
    const char* color = kPalette[ci % 6];
    if (s.line && s.x.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k)
        out << px(s.x[k]) << "," << py(s.y[k]) << (k + 1 < s.x.size() ? " " : "");
      out << "\"/>\n";
    } else {
      for (std::size_t k = 0; k < s.x.size(); ++k)
        out << "<circle cx=\"" << px(s.x[k]) << "\" cy=\"" << py(s.y[k])
            << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
    }
    if (!s.name.empty()) {
      out << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << ly - 9
          << "\" width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << kWidth - kRight - 133 << "\" y=\"" << ly - 3
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.name << "</text>\n";
      ly += 16;
    }
    ++ci;
  }
  out << "</svg>\n";

  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << out.str();
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace oblab
