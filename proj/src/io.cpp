#include "mtd/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mtd/error.hpp"

namespace mtd {

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  std::array<char, 32> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

}  // namespace

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return kInfinity;
  if (text == "-inf") return -kInfinity;
  double value = 0.0;
  const char* begin = text.data();
  if (!text.empty() && text.front() == '+') ++begin;
  const auto result = std::from_chars(begin, text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw_data("not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw_data("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw_data("missing CSV column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source_name) {
  CsvTable table;
  std::string line;
  int line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split_fields(view);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw_data(source_name + ":" + std::to_string(line_number) + ": expected " +
                 std::to_string(table.header.size()) + " fields, found " +
                 std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_number);
  }
  if (!have_header) throw_data(source_name + ": empty CSV file");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_data("cannot open '" + path.string() + "'");
  return read_csv(in, path.string());
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (!first_) out_ << ',';
  out_ << text;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::field(long long value) {
  return field(std::string_view(std::to_string(value)));
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian hosts");

namespace {

constexpr std::array<char, 4> kDoseMagic{'M', 'T', 'D', 'D'};
constexpr std::uint32_t kDoseVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& name) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw_data(name + ": truncated dose volume");
  return value;
}

}  // namespace

void write_dose_volume(const std::filesystem::path& path, const GridDims& dims,
                       const std::array<double, 3>& voxel_size, const Vector& dose) {
  if (dose.size() != dims.count()) throw_data("dose length does not match the grid");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("cannot write '" + path.string() + "'");
  out.write(kDoseMagic.data(), kDoseMagic.size());
  put(out, kDoseVersion);
  put(out, static_cast<std::int32_t>(dims.nx));
  put(out, static_cast<std::int32_t>(dims.ny));
  put(out, static_cast<std::int32_t>(dims.nz));
  for (double s : voxel_size) put(out, s);
  out.write(reinterpret_cast<const char*>(dose.data()),
            static_cast<std::streamsize>(sizeof(double) * dose.size()));
}

DoseVolume read_dose_volume(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open '" + name + "'");
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kDoseMagic) throw_data(name + ": not a dose volume file");
  if (get<std::uint32_t>(in, name) != kDoseVersion) throw_data(name + ": unsupported version");
  DoseVolume volume;
  volume.dims.nx = get<std::int32_t>(in, name);
  volume.dims.ny = get<std::int32_t>(in, name);
  volume.dims.nz = get<std::int32_t>(in, name);
  if (volume.dims.nx <= 0 || volume.dims.ny <= 0 || volume.dims.nz <= 0) {
    throw_data(name + ": invalid grid dimensions");
  }
  for (double& s : volume.voxel_size) s = get<double>(in, name);
  volume.dose.resize(volume.dims.count());
  in.read(reinterpret_cast<char*>(volume.dose.data()),
          static_cast<std::streamsize>(sizeof(double) * volume.dose.size()));
  if (!in) throw_data(name + ": truncated dose volume");
  return volume;
}

}  // namespace mtd
