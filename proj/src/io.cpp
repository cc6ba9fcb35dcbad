#include "conical/io.hpp"

#include "conical/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace conical::io {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t c = line.find(',', pos);
    std::string_view tok = line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
    out.push_back(tok);
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DiscreteMeasure parse_points_csv(std::istream& in, int dim_param, const std::string& source) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::io, source + ": empty file");
  auto header = split_commas(line);
  require(header.size() >= 2 && header.back() == "w", Errc::io,
          source + ": header must be x0,...,x{d-1},w");
  const std::size_t d = header.size() - 1;
  for (std::size_t k = 0; k < d; ++k)
    require(header[k] == "x" + std::to_string(k), Errc::io,
            source + ": header column " + std::to_string(k) + " must be x" + std::to_string(k));
  std::vector<double> coords;
  std::vector<double> weights;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cols = split_commas(line);
    require(cols.size() == d + 1, Errc::io,
            source + ": row " + std::to_string(row) + " has " + std::to_string(cols.size()) + " columns");
    for (std::size_t k = 0; k <= d; ++k) {
      double v = 0.0;
      auto res = std::from_chars(cols[k].data(), cols[k].data() + cols[k].size(), v);
      require(!cols[k].empty() && res.ec == std::errc() && res.ptr == cols[k].data() + cols[k].size(),
              Errc::io, source + ": row " + std::to_string(row) + " bad number '" + std::string(cols[k]) + "'");
      if (k < d)
        coords.push_back(v);
      else
        weights.push_back(v);
    }
    require(weights.back() > 0.0, Errc::invalid_params,
            source + ": row " + std::to_string(row) + " has non-positive weight");
  }
  require(!weights.empty(), Errc::io, source + ": no atoms");
  Mat pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i)
    for (std::size_t k = 0; k < d; ++k)
      pts(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = coords[i * d + k];
  return DiscreteMeasure(std::move(pts), std::move(weights), dim_param);
}

DiscreteMeasure read_points_csv(const std::string& path, int dim_param) {
  std::ifstream in(path);
  require(in.good(), Errc::io, "cannot open points file '" + path + "'");
  return parse_points_csv(in, dim_param, path);
}

std::string format_points_csv(const DiscreteMeasure& m) {
  std::string out;
  for (int k = 0; k < m.ambient_dim(); ++k) out += "x" + std::to_string(k) + ",";
  out += "w\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (int k = 0; k < m.ambient_dim(); ++k) {
      out += format_double(m.point(i)[k]);
      out += ',';
    }
    out += format_double(m.weight(i));
    out += '\n';
  }
  return out;
}

void write_points_csv(const std::string& path, const DiscreteMeasure& m) {
  write_file(path, format_points_csv(m));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  require(out.good(), Errc::io, "write failed for '" + path + "'");
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace conical::io
