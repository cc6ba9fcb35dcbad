#pragma once

#include "conical/measure.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace conical::io {

/// Point-cloud CSV: header `x0,...,x{d-1},w`, one atom per row. Rejects
/// malformed rows and non-positive weights.
DiscreteMeasure read_points_csv(const std::string& path, int dim_param);
DiscreteMeasure parse_points_csv(std::istream& in, int dim_param, const std::string& source);

/// Writes with 17 significant digits so that reading back is bit-exact.
void write_points_csv(const std::string& path, const DiscreteMeasure& m);
std::string format_points_csv(const DiscreteMeasure& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// FNV-1a 64-bit hash, lowercase hex; used to join reports on the same input.
std::string content_hash(std::string_view bytes);

std::string format_double(double v);

}  // namespace conical::io
