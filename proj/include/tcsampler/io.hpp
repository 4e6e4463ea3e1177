#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tcsampler/estimators.hpp"
#include "tcsampler/skeleton.hpp"

namespace tcs {

/// Shortest form that never loses bits: printf("%.17g").
std::string format_double(double value);

/// Unsigned integers stay exact (seeds exceed 2^53); other numbers are doubles.
using CsvCell = std::variant<std::uint64_t, double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

/// Comma separated, UNIX newlines, no quoting (cells never contain commas).
std::string to_csv(const CsvTable& table);
/// Inverse of to_csv. Cells that parse completely as numbers become numbers.
/// Throws InvalidArgument on ragged rows.
CsvTable parse_csv(std::string_view text);

/// Header t,kind,x_0..x_{d-1},v_0..v_{d-1}; one row per record with the state
/// after the event.
CsvTable skeleton_table(const PathSkeleton& path);
/// Rebuilds a skeleton from skeleton_table output.
PathSkeleton skeleton_from_table(const CsvTable& table, Dynamics dynamics, double step = 0.0);

/// Header strategy,estimate,avar,ess,n_events,horizon,seed.
CsvTable report_table(const std::vector<EstimatorReport>& reports);

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  /// ln of the speed at each point; empty draws a single colour.
  std::vector<double> log_speed;
  /// Joins consecutive points when true, scatter otherwise.
  bool polyline = true;
};

/// Standalone SVG document; colours follow a 256-step ramp over log-speed.
std::string render_svg(const SvgPlot& plot);

/// Colour of ramp step k in [0, 255] as "#rrggbb".
std::string ramp_colour(int k);

}  // namespace tcs
