#include "mtd/dose_cache.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "mtd/error.hpp"

namespace mtd {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian hosts");

namespace {

constexpr std::array<char, 4> kMagic{'M', 'T', 'D', 'P'};
constexpr std::uint32_t kVersion = 1;

class ByteSink {
 public:
  template <typename T>
  void put(const T& value) {
    const auto* bytes = reinterpret_cast<const char*>(&value);
    buffer_.insert(buffer_.end(), bytes, bytes + sizeof(T));
  }
  void put(const std::string& text) {
    put(static_cast<std::uint64_t>(text.size()));
    buffer_.insert(buffer_.end(), text.begin(), text.end());
  }
  const std::vector<char>& bytes() const { return buffer_; }

 private:
  std::vector<char> buffer_;
};

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw_data("truncated dose influence file");
  return value;
}

}  // namespace

std::string dose_influence_key(const Phantom& phantom, const MachineModel& machine,
                               const KernelParams& kernel) {
  ByteSink sink;
  sink.put(std::string("mtd-dose-influence-v1"));
  sink.put(phantom.dims().nx);
  sink.put(phantom.dims().ny);
  sink.put(phantom.dims().nz);
  for (double s : phantom.voxel_size()) sink.put(s);
  sink.put(machine.num_beams);
  sink.put(machine.leaf_pairs);
  sink.put(machine.bixels_per_row);
  sink.put(machine.bixel_width_mm);
  sink.put(machine.leaf_width_mm);
  for (double a : machine.beam_angles_deg) sink.put(a);
  sink.put(kernel.sigma_mm);
  sink.put(kernel.attenuation_per_mm);
  sink.put(kernel.cutoff);

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), sink.bytes().data(), sink.bytes().size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw_internal("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

void write_dose_influence(const DoseInfluence& influence, std::ostream& out) {
  SparseMatrix m = influence.matrix;
  m.makeCompressed();
  out.write(kMagic.data(), kMagic.size());
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::int64_t>(m.rows()));
  write_raw(out, static_cast<std::int64_t>(m.cols()));
  write_raw(out, static_cast<std::int32_t>(influence.num_beams));
  write_raw(out, static_cast<std::int32_t>(influence.leaf_pairs));
  write_raw(out, static_cast<std::int32_t>(influence.bixels_per_row));
  write_raw(out, static_cast<std::int64_t>(m.nonZeros()));
  for (Index r = 0; r <= m.rows(); ++r) write_raw(out, static_cast<std::int64_t>(m.outerIndexPtr()[r]));
  for (Index k = 0; k < m.nonZeros(); ++k) write_raw(out, static_cast<std::int64_t>(m.innerIndexPtr()[k]));
  out.write(reinterpret_cast<const char*>(m.valuePtr()),
            static_cast<std::streamsize>(sizeof(double) * m.nonZeros()));
}

DoseInfluence read_dose_influence(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw_data("not a dose influence file");
  if (read_raw<std::uint32_t>(in) != kVersion) throw_data("unsupported dose influence version");
  const auto rows = read_raw<std::int64_t>(in);
  const auto cols = read_raw<std::int64_t>(in);
  DoseInfluence influence;
  influence.num_beams = read_raw<std::int32_t>(in);
  influence.leaf_pairs = read_raw<std::int32_t>(in);
  influence.bixels_per_row = read_raw<std::int32_t>(in);
  const auto nnz = read_raw<std::int64_t>(in);
  if (rows < 0 || cols < 0 || nnz < 0) throw_data("corrupt dose influence header");
  std::vector<std::int64_t> outer(rows + 1);
  for (auto& o : outer) o = read_raw<std::int64_t>(in);
  std::vector<std::int64_t> inner(nnz);
  for (auto& i : inner) i = read_raw<std::int64_t>(in);
  std::vector<double> values(nnz);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(sizeof(double) * nnz));
  if (!in) throw_data("truncated dose influence file");
  if (outer.front() != 0 || outer.back() != nnz) throw_data("corrupt dose influence index");

  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t k = outer[r]; k < outer[r + 1]; ++k) {
      if (inner[k] < 0 || inner[k] >= cols) throw_data("corrupt dose influence column");
      triplets.emplace_back(r, inner[k], values[k]);
    }
  }
  influence.matrix.resize(rows, cols);
  influence.matrix.setFromTriplets(triplets.begin(), triplets.end());
  influence.matrix.makeCompressed();
  return influence;
}

DoseInfluence load_or_compute_dose_influence(const Phantom& phantom, const MachineModel& machine,
                                             const KernelParams& kernel,
                                             const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return compute_dose_influence(phantom, machine, kernel);
  const auto path = cache_dir / (dose_influence_key(phantom, machine, kernel) + ".mtdp");
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    try {
      return read_dose_influence(in);
    } catch (const Error&) {
      // Unreadable cache entries are recomputed and overwritten.
    }
  }
  DoseInfluence influence = compute_dose_influence(phantom, machine, kernel);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) write_dose_influence(influence, out);
  }
  std::filesystem::rename(tmp, path, ec);
  return influence;
}

}  // namespace mtd
