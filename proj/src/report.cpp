#include "qsceom/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qsceom {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the table header");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw std::out_of_range("no column '" + name + "'");
}

const std::string& Table::cell(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }

double Table::number(std::size_t row, const std::string& name) const { return std::stod(cell(row, name)); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

std::string fmt(long long v) { return std::to_string(v); }

void write_csv(const std::filesystem::path& path, const Table& table, const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# config_hash=" << config_hash << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      cells.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (header) {
      t.columns = std::move(cells);
      header = false;
    } else {
      t.add_row(std::move(cells));
    }
  }
  return t;
}

// ---------------------------------------------------------------- SVG

namespace {

constexpr double kWidth = 720, kHeight = 480, kLeft = 90, kRight = 190, kTop = 50, kBottom = 60;
const std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

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

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (spec.log_y && s.y[i] <= 0)) continue;
      const double e = s.err.empty() ? 0.0 : s.err[i];
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      const double lo = spec.log_y && s.y[i] - e <= 0 ? s.y[i] : s.y[i] - e;
      ymin = std::min(ymin, ty(lo));
      ymax = std::max(ymax, ty(s.y[i] + e));
    }
  for (const auto& [y, label] : spec.hlines) {
    if (spec.log_y && y <= 0) continue;
    ymin = std::min(ymin, ty(y));
    ymax = std::max(ymax, ty(y));
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (ymax - ty(y)) / (ymax - ymin) * ph; };
  auto pyt = [&](double t) { return kTop + (ymax - t) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
    << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(xmin, xmax)) {
    o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(px(t)) << "\" y2=\"" << kTop + ph + 5
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(px(t)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax)) {
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(pyt(t)) << "\" x2=\"" << kLeft << "\" y2=\"" << num(pyt(t))
      << "\" stroke=\"black\"/>";
    o << "<line x1=\"" << kLeft << "\" y1=\"" << num(pyt(t)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << num(pyt(t))
      << "\" stroke=\"#eeeeee\"/>";
    const std::string label = spec.log_y ? "1e" + num(t) : num(t);
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(pyt(t) + 4) << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(20," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";
  for (const auto& [y, label] : spec.hlines) {
    if (spec.log_y && y <= 0) continue;
    o << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << num(py(y))
      << "\" stroke=\"black\" stroke-dasharray=\"2,3\"/>";
    o << "<text x=\"" << kLeft + pw - 4 << "\" y=\"" << num(py(y) - 4) << "\" text-anchor=\"end\" font-size=\"10\">"
      << escape(label) << "</text>\n";
  }
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kPalette[k % kPalette.size()];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && !(spec.log_y && s.y[i] <= 0)) pts.emplace_back(s.x[i], s.y[i]);
    if (s.line && pts.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
      if (s.dashed) o << " stroke-dasharray=\"6,4\"";
      o << " points=\"";
      for (const auto& [x, y] : pts) o << num(px(x)) << "," << num(py(y)) << " ";
      o << "\"/>\n";
    }
    if (!s.err.empty())
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double lo = s.y[i] - s.err[i], hi = s.y[i] + s.err[i];
        if (spec.log_y && lo <= 0) continue;
        o << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(lo)) << "\" x2=\"" << num(px(s.x[i]))
          << "\" y2=\"" << num(py(hi)) << "\" stroke=\"" << color << "\"/>\n";
      }
    if (s.markers)
      for (const auto& [x, y] : pts)
        o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\""
          << (s.dashed ? "white" : color) << "\" stroke=\"" << color << "\"/>\n";
    const double ly = kTop + 10 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 34 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>";
    o << "<text x=\"" << kLeft + pw + 40 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(spec);
}

}  // namespace qsceom
