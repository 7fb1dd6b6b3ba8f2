#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtd/types.hpp"

namespace mtd {

struct GridDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  Index count() const { return Index{nx} * ny * nz; }
  Index linear(int i, int j, int k) const { return i + Index{nx} * (j + Index{ny} * k); }
  std::array<int, 3> ijk(Index linear_index) const;
};

enum class RoiKind { kTarget, kOrganAtRisk, kRing };

std::string_view to_string(RoiKind kind);
RoiKind roi_kind_from_string(std::string_view text);

// A region of interest: sorted voxel list with relative volume weights that sum to one.
struct Roi {
  std::string name;
  RoiKind kind = RoiKind::kOrganAtRisk;
  std::vector<Index> voxels;
  std::vector<double> weights;
  // Absolute volume covered by the ROI, used to convert cc-based criteria.
  double volume_mm3 = 0.0;
};

// Normalizes raw overlap volumes into relative volume weights.
// Throws if any raw volume is not strictly positive.
std::vector<double> normalize_weights(std::span<const double> raw_volumes);

class Phantom {
 public:
  Phantom() = default;
  Phantom(GridDims dims, std::array<double, 3> voxel_size_mm, std::vector<Roi> rois);

  const GridDims& dims() const { return dims_; }
  const std::array<double, 3>& voxel_size() const { return voxel_size_; }
  Index num_voxels() const { return dims_.count(); }
  double voxel_volume() const { return voxel_size_[0] * voxel_size_[1] * voxel_size_[2]; }

  const std::vector<Roi>& rois() const { return rois_; }
  const Roi& roi(std::string_view name) const;
  bool has_roi(std::string_view name) const;
  bool has_target() const;

  // Voxel center in mm, with the isocenter at the center of the grid.
  std::array<double, 3> voxel_center(Index linear_index) const;

 private:
  GridDims dims_;
  std::array<double, 3> voxel_size_{1.0, 1.0, 1.0};
  std::vector<Roi> rois_;
};

// Dense-semantics weight vector over every voxel of the grid; zero outside the ROI.
Vector roi_weight_vector(const Phantom& phantom, std::string_view roi_name);

// ---- Geometry description used to voxelize ROIs -------------------------------------------

struct BoxShape {
  std::array<double, 3> min_mm{};
  std::array<double, 3> max_mm{};
};

struct SphereShape {
  std::array<double, 3> center_mm{};
  double radius_mm = 0.0;
};

// Cylinder with its axis parallel to z.
struct CylinderShape {
  std::array<double, 3> center_mm{};
  double radius_mm = 0.0;
  double half_length_mm = 0.0;
};

// Points with inner < |p - center| <= outer.
struct ShellShape {
  std::array<double, 3> center_mm{};
  double inner_mm = 0.0;
  double outer_mm = 0.0;
};

// Voxels outside the listed ROIs whose center lies within (inner, outer] mm of one of their voxel
// centers.
struct RingShape {
  std::vector<std::string> around;
  double inner_mm = 0.0;
  double outer_mm = 0.0;
};

// Voxels given explicitly with raw overlap volumes in mm^3.
struct ExplicitShape {
  std::vector<Index> voxels;
  std::vector<double> volumes_mm3;
};

using RoiShape =
    std::variant<BoxShape, SphereShape, CylinderShape, ShellShape, RingShape, ExplicitShape>;

struct RoiSpec {
  std::string name;
  RoiKind kind = RoiKind::kOrganAtRisk;
  RoiShape shape;
  // Previously defined ROIs whose voxels are removed from this one.
  std::vector<std::string> subtract;
};

struct PhantomSpec {
  GridDims dims;
  std::array<double, 3> voxel_size_mm{1.0, 1.0, 1.0};
  // Sub-voxel samples per axis used to estimate partial volumes; odd so the center is sampled.
  int subsamples = 3;
  std::vector<RoiSpec> rois;
};

Phantom build_phantom(const PhantomSpec& spec);

// ---- Machine and dose deposition -----------------------------------------------------------

struct MachineModel {
  int num_beams = 1;
  int leaf_pairs = 1;
  int bixels_per_row = 1;
  double traverse_time_s = 1.0;
  double min_gap_fraction = 0.5;
  double transmission = 0.0;
  double dose_rate = 1.0;
  double max_time_s = 100.0;
  std::vector<double> beam_angles_deg{0.0};
  // Bixel geometry at the isocenter plane.
  double bixel_width_mm = 5.0;
  double leaf_width_mm = 5.0;

  Index num_bixels() const { return Index{num_beams} * leaf_pairs * bixels_per_row; }
  Index bixel_column(int beam, int leaf, int bixel) const {
    return (Index{beam} * leaf_pairs + leaf) * bixels_per_row + bixel;
  }
  // Throws a config error when an invariant is not met.
  void validate() const;
};

// Equally spaced angles over a full turn, starting at start_deg.
std::vector<double> equally_spaced_angles(int num_beams, double start_deg = 0.0);

struct KernelParams {
  double sigma_mm = 3.0;
  double attenuation_per_mm = 0.005;
  // Entries below cutoff are dropped from the sparse matrix.
  double cutoff = 1e-3;
};

struct DoseInfluence {
  // voxels x bixels, nonnegative.
  SparseMatrix matrix;
  int num_beams = 0;
  int leaf_pairs = 0;
  int bixels_per_row = 0;

  Index column(int beam, int leaf, int bixel) const {
    return (Index{beam} * leaf_pairs + leaf) * bixels_per_row + bixel;
  }
  int beam_of_column(Index column) const {
    return static_cast<int>(column / (Index{leaf_pairs} * bixels_per_row));
  }
};

DoseInfluence compute_dose_influence(const Phantom& phantom, const MachineModel& machine,
                                     const KernelParams& kernel);

}  // namespace mtd
