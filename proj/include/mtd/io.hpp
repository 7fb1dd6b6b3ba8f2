#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mtd/phantom.hpp"
#include "mtd/types.hpp"

namespace mtd {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
// Strict parse of a full field; throws a data error on trailing characters.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  // Column position by header name; throws a data error when absent.
  std::size_t column(std::string_view name) const;
};

// Comma-separated, no quoting; blank lines and lines starting with '#' are skipped. Rows whose
// field count differs from the header raise a data error naming the line.
CsvTable read_csv(std::istream& in, const std::string& source_name);
CsvTable read_csv_file(const std::filesystem::path& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

// Dose volume binary: "MTDD" | u32 version | i32 nx | i32 ny | i32 nz | f64 voxel size x3 |
// f64 dose[nx ny nz] in linear voxel order, all little-endian.
void write_dose_volume(const std::filesystem::path& path, const GridDims& dims,
                       const std::array<double, 3>& voxel_size, const Vector& dose);

struct DoseVolume {
  GridDims dims;
  std::array<double, 3> voxel_size{};
  Vector dose;
};

DoseVolume read_dose_volume(const std::filesystem::path& path);

}  // namespace mtd
