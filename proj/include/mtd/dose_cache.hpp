#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mtd/phantom.hpp"

namespace mtd {

// Hex SHA-256 over a canonical byte serialization of every input that determines P.
std::string dose_influence_key(const Phantom& phantom, const MachineModel& machine,
                               const KernelParams& kernel);

// Binary layout (little-endian): "MTDP" | u32 version | i64 rows | i64 cols | i32 beams |
// i32 leaf pairs | i32 bixels per row | i64 nnz | i64 outer[rows+1] | i64 inner[nnz] | f64 values[nnz].
void write_dose_influence(const DoseInfluence& influence, std::ostream& out);
DoseInfluence read_dose_influence(std::istream& in);

// Loads P from cache_dir/<key>.mtdp when present, otherwise computes and stores it.
// An empty cache_dir disables caching.
DoseInfluence load_or_compute_dose_influence(const Phantom& phantom, const MachineModel& machine,
                                             const KernelParams& kernel,
                                             const std::filesystem::path& cache_dir);

}  // namespace mtd
