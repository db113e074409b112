#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace latticevar::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 130.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

[[noreturn]] void schema(const std::string& what) {
  throw CliError(kSchemaError, "schema error: " + what);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# latticevar-csv v1") schema("missing latticevar-csv v1 tag");
  Table t;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) schema("row width differs from header");
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) schema("missing header");
  if (t.rows.empty()) schema("no data rows");
  return t;
}

double number(const std::string& cell) {
  if (cell == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) schema("not a number: " + cell);
    return v;
  } catch (const std::logic_error&) {
    schema("not a number: " + cell);
  }
}

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", v);
  return buffer;
}

std::string px(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double sx(double x) const {
    return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight);
  }
  double sy(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
  }
};

std::string open_svg() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
         px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  s += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(right - left) +
       "\" height=\"" + px(bottom - top) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + px(f.sx(xv)) + "\" y=\"" + px(bottom + 16) + "\" text-anchor=\"middle\">" +
         fmt(xv) + "</text>\n";
    s += "<text x=\"" + px(left - 6) + "\" y=\"" + px(f.sy(yv) + 4) + "\" text-anchor=\"end\">" +
         fmt(yv) + "</text>\n";
  }
  s += "<text x=\"" + px((left + right) / 2) + "\" y=\"" + px(kHeight - 10) +
       "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  s += "<text x=\"16\" y=\"" + px((top + bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       px((top + bottom) / 2) + ")\">" + escape(ylabel) + "</text>\n";
  return s;
}

std::string gradient(double t) {
  static const std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                            {59, 82, 139},
                                                            {33, 145, 140},
                                                            {94, 201, 98},
                                                            {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double w = t - static_cast<double>(i);
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] * (1 - w) + stops[i + 1][0] * w)),
                static_cast<int>(std::lround(stops[i][1] * (1 - w) + stops[i + 1][1] * w)),
                static_cast<int>(std::lround(stops[i][2] * (1 - w) + stops[i + 1][2] * w)));
  return buffer;
}

const std::map<std::string, std::string>& phase_colors() {
  static const std::map<std::string, std::string> colors{
      {"MI", "#1f77b4"}, {"DW", "#d62728"}, {"SF", "#2ca02c"}, {"SS", "#ff7f0e"}, {"NA", "#7f7f7f"}};
  return colors;
}

std::string heatmap(const Table& t, const std::string& column) {
  const int xi = t.column("x"), yi = t.column("y");
  const int ci = t.column(column);
  if (ci < 0) schema("no column " + column);
  std::set<double> xs, ys;
  std::vector<std::array<double, 2>> at;
  for (const auto& r : t.rows) {
    if (r[static_cast<std::size_t>(yi)].empty()) schema("heatmap needs two axes");
    const double x = number(r[static_cast<std::size_t>(xi)]);
    const double y = number(r[static_cast<std::size_t>(yi)]);
    xs.insert(x);
    ys.insert(y);
    at.push_back({x, y});
  }
  const bool categorical = column == "phase" || column == "error";
  double lo = INFINITY, hi = -INFINITY;
  if (!categorical) {
    for (const auto& r : t.rows) {
      const double v = number(r[static_cast<std::size_t>(ci)]);
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  const std::vector<double> xv(xs.begin(), xs.end()), yv(ys.begin(), ys.end());
  const Frame f{xv.front(), xv.back(), yv.front(), yv.back()};
  const double cw = (kWidth - kLeft - kRight) / static_cast<double>(xv.size());
  const double ch = (kHeight - kTop - kBottom) / static_cast<double>(yv.size());
  const auto index = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  std::string s = open_svg();
  std::set<std::string> used;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const std::string& cell = t.rows[k][static_cast<std::size_t>(ci)];
    std::string color;
    if (categorical) {
      const auto& c = phase_colors();
      const std::string key = column == "error" ? (cell.empty() ? "SF" : "DW") : cell;
      color = c.contains(key) ? c.at(key) : "#000000";
      used.insert(cell);
    } else {
      const double v = number(cell);
      color = std::isfinite(v) ? gradient(hi > lo ? (v - lo) / (hi - lo) : 0.5) : "#000000";
    }
    const double x = kLeft + index(xv, at[k][0]) * cw;
    const double y = kHeight - kBottom - (index(yv, at[k][1]) + 1) * ch;
    s += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(cw) + "\" height=\"" +
         px(ch) + "\" fill=\"" + color + "\"/>\n";
  }
  // Tick labels sit at cell centres, so the frame is shrunk by half a cell.
  Frame g = f;
  if (xv.size() > 1) {
    const double dx = (f.x1 - f.x0) / (static_cast<double>(xv.size()) - 1) / 2.0;
    g.x0 -= dx;
    g.x1 += dx;
  }
  if (yv.size() > 1) {
    const double dy = (f.y1 - f.y0) / (static_cast<double>(yv.size()) - 1) / 2.0;
    g.y0 -= dy;
    g.y1 += dy;
  }
  s += axes(g, t.rows.front()[static_cast<std::size_t>(t.column("x_name"))],
            t.rows.front()[static_cast<std::size_t>(t.column("y_name"))]);
  const double lx = kWidth - kRight + 15;
  double ly = kTop + 10;
  if (categorical) {
    for (const auto& label : used) {
      const auto& c = phase_colors();
      const std::string key = column == "error" ? (label.empty() ? "SF" : "DW") : label;
      s += "<rect x=\"" + px(lx) + "\" y=\"" + px(ly) + "\" width=\"14\" height=\"14\" fill=\"" +
           (c.contains(key) ? c.at(key) : "#000000") + "\"/>\n";
      s += "<text x=\"" + px(lx + 20) + "\" y=\"" + px(ly + 11) + "\">" +
           escape(label.empty() ? "ok" : label) + "</text>\n";
      ly += 20;
    }
  } else {
    for (int i = 0; i <= 10; ++i) {
      s += "<rect x=\"" + px(lx) + "\" y=\"" + px(ly + (10 - i) * 16) +
           "\" width=\"14\" height=\"16\" fill=\"" + gradient(i / 10.0) + "\"/>\n";
    }
    s += "<text x=\"" + px(lx + 20) + "\" y=\"" + px(ly + 10) + "\">" + fmt(hi) + "</text>\n";
    s += "<text x=\"" + px(lx + 20) + "\" y=\"" + px(ly + 176) + "\">" + fmt(lo) + "</text>\n";
    s += "<text x=\"" + px(lx) + "\" y=\"" + px(ly + 200) + "\">" + escape(column) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string lines(const Table& t, const std::string& xcol, const std::string& ycol,
                  const std::string& xlabel, const std::string& ylabel) {
  const int xi = t.column(xcol), yi = t.column(ycol);
  if (xi < 0 || yi < 0) schema("no column " + (xi < 0 ? xcol : ycol));
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : t.rows) {
    const double x = number(r[static_cast<std::size_t>(xi)]);
    const double y = number(r[static_cast<std::size_t>(yi)]);
    if (std::isfinite(x) && std::isfinite(y)) pts.emplace_back(x, y);
  }
  if (pts.empty()) schema("no finite points to draw");
  Frame f{INFINITY, -INFINITY, INFINITY, -INFINITY};
  for (const auto& [x, y] : pts) {
    f.x0 = std::min(f.x0, x);
    f.x1 = std::max(f.x1, x);
    f.y0 = std::min(f.y0, y);
    f.y1 = std::max(f.y1, y);
  }
  std::string s = open_svg() + axes(f, xlabel, ylabel);
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += (i ? " " : "") + px(f.sx(pts[i].first)) + "," + px(f.sy(pts[i].second));
  }
  s += "\"/>\n";
  for (const auto& [x, y] : pts) {
    s += "<circle cx=\"" + px(f.sx(x)) + "\" cy=\"" + px(f.sy(y)) + "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  return s + "</svg>\n";
}

}  // namespace

std::string render_plot(const std::string& csv_text, const PlotOptions& options) {
  const Table t = parse(csv_text);
  if (!options.kind.empty() && options.kind != "heatmap" && options.kind != "lines") {
    throw CliError(kConfigError, "plot kind must be heatmap or lines");
  }
  const std::vector<std::string> scan{"x_name", "x",     "y_name", "y",     "energy",    "phase",
                                      "phi_o",  "phi_e", "rho_o",  "rho_e", "converged", "error"};
  const std::vector<std::string> boundary{"sweep_name", "sweep",      "critical_name",
                                          "critical",   "iterations", "error"};
  const std::vector<std::string> fss{"L", "mu_c"};
  if (t.header == scan) {
    const bool two_axes = !t.rows.front()[3].empty();
    const std::string kind = options.kind.empty() ? (two_axes ? "heatmap" : "lines") : options.kind;
    if (kind == "heatmap") return heatmap(t, options.column.empty() ? "phase" : options.column);
    const std::string col = options.column.empty() ? "energy" : options.column;
    return lines(t, "x", col, t.rows.front()[0], col);
  }
  if (t.header == boundary) {
    if (options.kind == "heatmap") schema("boundary CSV only supports lines");
    const std::string col = options.column.empty() ? "critical" : options.column;
    return lines(t, "sweep", col, t.rows.front()[0], col == "critical" ? t.rows.front()[2] : col);
  }
  if (t.header == fss) {
    if (options.kind == "heatmap") schema("fss CSV only supports lines");
    return lines(t, "L", options.column.empty() ? "mu_c" : options.column, "L", "mu_c");
  }
  schema("unrecognised header");
}

}  // namespace latticevar::cli
