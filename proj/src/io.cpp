#include "tcsampler/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tcsampler/errors.hpp"

namespace tcs {

std::string format_double(double value) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

void append_cell(std::string& out, const CsvCell& cell) {
  if (const auto* u = std::get_if<std::uint64_t>(&cell)) {
    out += std::to_string(*u);
  } else if (const auto* d = std::get_if<double>(&cell)) {
    out += format_double(*d);
  } else {
    out += std::get<std::string>(cell);
  }
}

CsvCell parse_cell(std::string_view s) {
  if (s.empty()) {
    return std::string();
  }
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::uint64_t u = 0;
    const auto [ptr, ec] = std::from_chars(first, last, u);
    if (ec == std::errc() && ptr == last) {
      return u;
    }
  }
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, d);
  if (ec == std::errc() && ptr == last) {
    return d;
  }
  return std::string(s);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

double as_double(const CsvCell& cell) {
  if (const auto* u = std::get_if<std::uint64_t>(&cell)) {
    return static_cast<double>(*u);
  }
  if (const auto* d = std::get_if<double>(&cell)) {
    return *d;
  }
  throw InvalidArgument("csv: expected a number, got '" + std::get<std::string>(cell) + "'");
}

}  // namespace

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j > 0) {
      out += ',';
    }
    out += table.header[j];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) {
        out += ',';
      }
      append_cell(out, row[j]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (first) {
      for (auto c : cells) {
        table.header.emplace_back(c);
      }
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InvalidArgument("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
    }
    auto& row = table.rows.emplace_back();
    row.reserve(cells.size());
    for (auto c : cells) {
      row.push_back(parse_cell(c));
    }
  }
  return table;
}

CsvTable skeleton_table(const PathSkeleton& path) {
  CsvTable table;
  const std::size_t d = path.dim();
  table.header = {"t", "kind"};
  for (std::size_t i = 0; i < d; ++i) {
    table.header.push_back("x_" + std::to_string(i));
  }
  for (std::size_t i = 0; i < d; ++i) {
    table.header.push_back("v_" + std::to_string(i));
  }
  table.rows.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    auto& row = table.rows.emplace_back();
    row.reserve(2 + 2 * d);
    row.emplace_back(path.time(k));
    row.emplace_back(std::string(to_string(path.kind(k))));
    const auto x = path.position_after(k);
    const auto v = path.velocity_after(k);
    for (std::size_t i = 0; i < d; ++i) {
      row.emplace_back(x[static_cast<Eigen::Index>(i)]);
    }
    for (std::size_t i = 0; i < d; ++i) {
      row.emplace_back(v[static_cast<Eigen::Index>(i)]);
    }
  }
  return table;
}

PathSkeleton skeleton_from_table(const CsvTable& table, Dynamics dynamics, double step) {
  if (table.header.size() < 4 || (table.header.size() - 2) % 2 != 0 || table.rows.size() < 2) {
    throw InvalidArgument("skeleton csv: unexpected layout");
  }
  const std::size_t d = (table.header.size() - 2) / 2;
  PathSkeleton path(d, dynamics, step);
  Vec x(static_cast<Eigen::Index>(d));
  Vec v(static_cast<Eigen::Index>(d));
  auto load = [&](const std::vector<CsvCell>& row) {
    for (std::size_t i = 0; i < d; ++i) {
      x[static_cast<Eigen::Index>(i)] = as_double(row[2 + i]);
      v[static_cast<Eigen::Index>(i)] = as_double(row[2 + d + i]);
    }
  };
  load(table.rows.front());
  path.start(x, v);
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    const double t = as_double(row[0]);
    const EventKind kind = event_kind_from_string(std::get<std::string>(row[1]));
    // Pre-event state: advance the previous post-event state along its segment.
    const std::size_t last = path.size() - 1;
    State before{Vec(path.position_after(last)), Vec(path.velocity_after(last))};
    if (dynamics == Dynamics::constant_velocity) {
      before.position += (t - path.time(last)) * before.velocity;
    }
    load(row);
    if (kind == EventKind::horizon) {
      path.close(t, x, v);
      break;
    }
    int coord = -1;
    if (kind == EventKind::flip) {
      for (std::size_t i = 0; i < d; ++i) {
        if (before.velocity[static_cast<Eigen::Index>(i)] != v[static_cast<Eigen::Index>(i)]) {
          coord = static_cast<int>(i);
          break;
        }
      }
    }
    path.push(t, kind, coord, before.position, before.velocity, x, v);
  }
  return path;
}

CsvTable report_table(const std::vector<EstimatorReport>& reports) {
  CsvTable table;
  table.header = {"strategy", "estimate", "avar", "ess", "n_events", "horizon", "seed"};
  for (const auto& r : reports) {
    table.rows.push_back({r.strategy, r.estimate, r.batch_means_variance, r.effective_sample_size,
                          r.n_events, r.horizon, r.seed});
  }
  return table;
}

std::string ramp_colour(int k) {
  // Piecewise-linear blend through dark blue, teal, green and yellow.
  static constexpr std::array<std::array<double, 3>, 5> anchors{{{68, 1, 84},
                                                                 {59, 82, 139},
                                                                 {33, 145, 140},
                                                                 {94, 201, 98},
                                                                 {253, 231, 37}}};
  k = std::clamp(k, 0, 255);
  const double pos = k / 255.0 * (anchors.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), anchors.size() - 2);
  const double w = pos - static_cast<double>(i);
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    // Truncation keeps all 256 steps distinct; rounding merges two at an anchor.
    rgb[c] = static_cast<int>(std::floor((1 - w) * anchors[i][c] + w * anchors[i + 1][c] + 1e-9));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

namespace {

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

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg(const SvgPlot& plot) {
  if (plot.x.size() != plot.y.size() ||
      (!plot.log_speed.empty() && plot.log_speed.size() != plot.x.size())) {
    throw InvalidArgument("render_svg: series lengths differ");
  }
  constexpr double width = 640;
  constexpr double height = 480;
  constexpr double margin = 56;
  auto finite_range = [](const std::vector<double>& v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double a : v) {
      if (std::isfinite(a)) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
    }
    if (!(lo <= hi)) {
      lo = 0;
      hi = 1;
    }
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    return std::pair{lo, hi};
  };
  const auto [x0, x1] = finite_range(plot.x);
  const auto [y0, y1] = finite_range(plot.y);
  const auto [s0, s1] = finite_range(plot.log_speed);
  auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
  auto py = [&](double y) { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); };
  auto colour = [&](std::size_t i) {
    if (plot.log_speed.empty()) {
      return ramp_colour(64);
    }
    return ramp_colour(static_cast<int>(std::floor(255.999 * (plot.log_speed[i] - s0) / (s1 - s0))));
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(plot.title) << "</text>\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
      << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(plot.x_label) << " ["
      << format_double(x0) << ", " << format_double(x1) << "]</text>\n";
  out << "<text x=\"16\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
      << height / 2 << ")\" text-anchor=\"middle\">" << escape(plot.y_label) << " ["
      << format_double(y0) << ", " << format_double(y1) << "]</text>\n";
  const std::size_t n = plot.x.size();
  if (plot.polyline) {
    for (std::size_t i = 1; i < n; ++i) {
      out << "<line x1=\"" << fmt(px(plot.x[i - 1])) << "\" y1=\"" << fmt(py(plot.y[i - 1]))
          << "\" x2=\"" << fmt(px(plot.x[i])) << "\" y2=\"" << fmt(py(plot.y[i])) << "\" stroke=\""
          << colour(i - 1) << "\" stroke-width=\"1\"/>\n";
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out << "<circle cx=\"" << fmt(px(plot.x[i])) << "\" cy=\"" << fmt(py(plot.y[i]))
          << "\" r=\"1.5\" fill=\"" << colour(i) << "\"/>\n";
    }
  }
  if (!plot.log_speed.empty()) {
    // Colour bar for log-speed.
    const double bx = width - margin + 12;
    const double bh = (height - 2 * margin) / 256.0;
    for (int k = 0; k < 256; ++k) {
      out << "<rect x=\"" << bx << "\" y=\"" << fmt(height - margin - (k + 1) * bh)
          << "\" width=\"10\" height=\"" << fmt(bh + 0.05) << "\" fill=\"" << ramp_colour(k)
          << "\"/>\n";
    }
    out << "<text x=\"" << bx << "\" y=\"" << margin - 6 << "\" font-size=\"10\">ln s "
        << format_double(s1) << "</text>\n";
    out << "<text x=\"" << bx << "\" y=\"" << height - margin + 14 << "\" font-size=\"10\">"
        << format_double(s0) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tcs
