#include "mtd/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <unordered_set>

#include "mtd/error.hpp"

namespace mtd {

std::array<int, 3> GridDims::ijk(Index linear_index) const {
  const Index plane = Index{nx} * ny;
  const auto k = static_cast<int>(linear_index / plane);
  const Index rest = linear_index % plane;
  return {static_cast<int>(rest % nx), static_cast<int>(rest / nx), k};
}

std::string_view to_string(RoiKind kind) {
  switch (kind) {
    case RoiKind::kTarget:
      return "target";
    case RoiKind::kOrganAtRisk:
      return "organ-at-risk";
    case RoiKind::kRing:
      return "ring";
  }
  return "unknown";
}

RoiKind roi_kind_from_string(std::string_view text) {
  if (text == "target") return RoiKind::kTarget;
  if (text == "organ-at-risk" || text == "oar") return RoiKind::kOrganAtRisk;
  if (text == "ring") return RoiKind::kRing;
  throw_config("unknown ROI kind '" + std::string(text) + "'");
}

std::vector<double> normalize_weights(std::span<const double> raw_volumes) {
  if (raw_volumes.empty()) throw_config("cannot normalize an empty weight list");
  double total = 0.0;
  for (double v : raw_volumes) {
    if (!(v > 0.0) || !std::isfinite(v)) throw_config("raw volumes must be strictly positive");
    total += v;
  }
  std::vector<double> weights(raw_volumes.size());
  std::transform(raw_volumes.begin(), raw_volumes.end(), weights.begin(),
                 [total](double v) { return v / total; });
  return weights;
}

Phantom::Phantom(GridDims dims, std::array<double, 3> voxel_size_mm, std::vector<Roi> rois)
    : dims_(dims), voxel_size_(voxel_size_mm), rois_(std::move(rois)) {
  if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0) throw_config("grid dimensions must be positive");
  for (double s : voxel_size_) {
    if (!(s > 0.0)) throw_config("voxel size must be positive");
  }
  std::set<std::string> names;
  for (const Roi& roi : rois_) {
    if (!names.insert(roi.name).second) throw_config("duplicate ROI name '" + roi.name + "'");
    if (roi.voxels.empty()) throw_config("ROI '" + roi.name + "' is empty");
    if (roi.voxels.size() != roi.weights.size()) {
      throw_config("ROI '" + roi.name + "' has mismatched voxel and weight counts");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < roi.voxels.size(); ++i) {
      if (roi.voxels[i] < 0 || roi.voxels[i] >= dims_.count()) {
        throw_config("ROI '" + roi.name + "' references a voxel outside the grid");
      }
      if (i > 0 && roi.voxels[i] <= roi.voxels[i - 1]) {
        throw_config("ROI '" + roi.name + "' voxel list must be sorted without duplicates");
      }
      if (!(roi.weights[i] > 0.0)) throw_config("ROI '" + roi.name + "' has a non-positive weight");
      total += roi.weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw_config("ROI '" + roi.name + "' weights do not sum to one");
    }
  }
}

const Roi& Phantom::roi(std::string_view name) const {
  for (const Roi& roi : rois_) {
    if (roi.name == name) return roi;
  }
  throw_config("unknown ROI '" + std::string(name) + "'");
}

bool Phantom::has_roi(std::string_view name) const {
  return std::any_of(rois_.begin(), rois_.end(), [&](const Roi& r) { return r.name == name; });
}

bool Phantom::has_target() const {
  return std::any_of(rois_.begin(), rois_.end(),
                     [](const Roi& r) { return r.kind == RoiKind::kTarget; });
}

std::array<double, 3> Phantom::voxel_center(Index linear_index) const {
  const auto [i, j, k] = dims_.ijk(linear_index);
  return {(i + 0.5) * voxel_size_[0] - 0.5 * dims_.nx * voxel_size_[0],
          (j + 0.5) * voxel_size_[1] - 0.5 * dims_.ny * voxel_size_[1],
          (k + 0.5) * voxel_size_[2] - 0.5 * dims_.nz * voxel_size_[2]};
}

Vector roi_weight_vector(const Phantom& phantom, std::string_view roi_name) {
  const Roi& roi = phantom.roi(roi_name);
  Vector w = Vector::Zero(phantom.num_voxels());
  for (std::size_t i = 0; i < roi.voxels.size(); ++i) w[roi.voxels[i]] = roi.weights[i];
  return w;
}

namespace {

using Point = std::array<double, 3>;

double squared_distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct InsideTest {
  bool operator()(const BoxShape& s, const Point& p) const {
    for (int a = 0; a < 3; ++a) {
      if (p[a] < s.min_mm[a] || p[a] > s.max_mm[a]) return false;
    }
    return true;
  }
  bool operator()(const SphereShape& s, const Point& p) const {
    return squared_distance(p, s.center_mm) <= s.radius_mm * s.radius_mm;
  }
  bool operator()(const CylinderShape& s, const Point& p) const {
    const double dx = p[0] - s.center_mm[0];
    const double dy = p[1] - s.center_mm[1];
    return dx * dx + dy * dy <= s.radius_mm * s.radius_mm &&
           std::abs(p[2] - s.center_mm[2]) <= s.half_length_mm;
  }
  bool operator()(const ShellShape& s, const Point& p) const {
    const double d2 = squared_distance(p, s.center_mm);
    return d2 > s.inner_mm * s.inner_mm && d2 <= s.outer_mm * s.outer_mm;
  }
};

// Membership by voxel center; weight by the fraction of sub-voxel samples inside the shape.
template <typename Shape>
void voxelize_solid(const Phantom& grid, int subsamples, const Shape& shape,
                    std::vector<Index>& voxels, std::vector<double>& raw) {
  const InsideTest inside;
  const auto& size = grid.voxel_size();
  const double voxel_volume = grid.voxel_volume();
  const int s = subsamples;
  for (Index v = 0; v < grid.num_voxels(); ++v) {
    const Point c = grid.voxel_center(v);
    if (!inside(shape, c)) continue;
    int hits = 0;
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        for (int e = 0; e < s; ++e) {
          const Point p{c[0] + ((a + 0.5) / s - 0.5) * size[0],
                        c[1] + ((b + 0.5) / s - 0.5) * size[1],
                        c[2] + ((e + 0.5) / s - 0.5) * size[2]};
          if (inside(shape, p)) ++hits;
        }
      }
    }
    voxels.push_back(v);
    raw.push_back(voxel_volume * hits / static_cast<double>(s * s * s));
  }
}

void voxelize_ring(const Phantom& grid, const std::vector<Roi>& built, const RingShape& ring,
                   std::vector<Index>& voxels, std::vector<double>& raw) {
  std::unordered_set<Index> core;
  std::vector<Point> core_centers;
  for (const std::string& name : ring.around) {
    auto it = std::find_if(built.begin(), built.end(), [&](const Roi& r) { return r.name == name; });
    if (it == built.end()) throw_config("ring references undefined ROI '" + name + "'");
    for (Index v : it->voxels) {
      if (core.insert(v).second) core_centers.push_back(grid.voxel_center(v));
    }
  }
  const double inner2 = ring.inner_mm * ring.inner_mm;
  const double outer2 = ring.outer_mm * ring.outer_mm;
  for (Index v = 0; v < grid.num_voxels(); ++v) {
    if (core.contains(v)) continue;
    const Point c = grid.voxel_center(v);
    double best = kInfinity;
    for (const Point& q : core_centers) best = std::min(best, squared_distance(c, q));
    if (best > inner2 && best <= outer2) {
      voxels.push_back(v);
      raw.push_back(grid.voxel_volume());
    }
  }
}

}  // namespace

Phantom build_phantom(const PhantomSpec& spec) {
  if (spec.dims.nx <= 0 || spec.dims.ny <= 0 || spec.dims.nz <= 0) {
    throw_config("phantom grid dimensions must be positive");
  }
  if (spec.subsamples < 1 || spec.subsamples % 2 == 0) {
    throw_config("phantom subsamples must be a positive odd number");
  }
  // Grid-only phantom for geometry queries while ROIs are being built.
  const Phantom grid(spec.dims, spec.voxel_size_mm, {});
  std::vector<Roi> rois;
  std::set<std::string> names;
  for (const RoiSpec& rs : spec.rois) {
    if (!names.insert(rs.name).second) throw_config("duplicate ROI name '" + rs.name + "'");
    std::vector<Index> voxels;
    std::vector<double> raw;
    std::visit(
        [&](const auto& shape) {
          using S = std::decay_t<decltype(shape)>;
          if constexpr (std::is_same_v<S, RingShape>) {
            voxelize_ring(grid, rois, shape, voxels, raw);
          } else if constexpr (std::is_same_v<S, ExplicitShape>) {
            if (shape.voxels.size() != shape.volumes_mm3.size()) {
              throw_config("ROI '" + rs.name + "': voxel and volume lists differ in length");
            }
            std::vector<std::size_t> order(shape.voxels.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return shape.voxels[a] < shape.voxels[b]; });
            for (std::size_t i : order) {
              const Index v = shape.voxels[i];
              if (v < 0 || v >= grid.num_voxels()) {
                throw_config("ROI '" + rs.name + "' references a voxel outside the grid");
              }
              if (!voxels.empty() && voxels.back() == v) {
                throw_config("ROI '" + rs.name + "' lists a voxel twice");
              }
              voxels.push_back(v);
              raw.push_back(shape.volumes_mm3[i]);
            }
          } else {
            voxelize_solid(grid, spec.subsamples, shape, voxels, raw);
          }
        },
        rs.shape);

    for (const std::string& other : rs.subtract) {
      auto it = std::find_if(rois.begin(), rois.end(), [&](const Roi& r) { return r.name == other; });
      if (it == rois.end()) throw_config("ROI '" + rs.name + "' subtracts undefined ROI '" + other + "'");
      std::vector<Index> kept;
      std::vector<double> kept_raw;
      for (std::size_t i = 0; i < voxels.size(); ++i) {
        if (!std::binary_search(it->voxels.begin(), it->voxels.end(), voxels[i])) {
          kept.push_back(voxels[i]);
          kept_raw.push_back(raw[i]);
        }
      }
      voxels = std::move(kept);
      raw = std::move(kept_raw);
    }
    if (voxels.empty()) throw_config("ROI '" + rs.name + "' is empty after voxelization");

    Roi roi;
    roi.name = rs.name;
    roi.kind = rs.kind;
    roi.volume_mm3 = std::accumulate(raw.begin(), raw.end(), 0.0);
    roi.weights = normalize_weights(raw);
    roi.voxels = std::move(voxels);
    rois.push_back(std::move(roi));
  }
  return Phantom(spec.dims, spec.voxel_size_mm, std::move(rois));
}

void MachineModel::validate() const {
  if (num_beams < 1 || leaf_pairs < 1 || bixels_per_row < 1) {
    throw_config("machine: beams, leaf pairs and bixels per row must be positive");
  }
  if (!(traverse_time_s > 0.0)) throw_config("machine: traverse time must be positive");
  if (!(min_gap_fraction > 0.0 && min_gap_fraction < 1.0)) {
    throw_config("machine: min gap fraction must lie in (0,1)");
  }
  if (!(transmission >= 0.0 && transmission < 1.0)) {
    throw_config("machine: transmission must lie in [0,1)");
  }
  if (!(dose_rate > 0.0)) throw_config("machine: dose rate must be positive");
  if (!(max_time_s > 0.0)) throw_config("machine: max treatment time must be positive");
  if (static_cast<int>(beam_angles_deg.size()) != num_beams) {
    throw_config("machine: number of beam angles must equal number of beams");
  }
  if (!(bixel_width_mm > 0.0) || !(leaf_width_mm > 0.0)) {
    throw_config("machine: bixel and leaf widths must be positive");
  }
}

std::vector<double> equally_spaced_angles(int num_beams, double start_deg) {
  std::vector<double> angles(static_cast<std::size_t>(std::max(num_beams, 0)));
  for (int b = 0; b < num_beams; ++b) angles[b] = start_deg + 360.0 * b / num_beams;
  return angles;
}

namespace {

// Box of the given width convolved with a Gaussian of standard deviation sigma.
double blurred_box(double offset, double width, double sigma) {
  const double scale = 1.0 / (std::numbers::sqrt2 * sigma);
  return 0.5 * (std::erf((offset + 0.5 * width) * scale) - std::erf((offset - 0.5 * width) * scale));
}

}  // namespace

DoseInfluence compute_dose_influence(const Phantom& phantom, const MachineModel& machine,
                                     const KernelParams& kernel) {
  machine.validate();
  if (!(kernel.sigma_mm > 0.0)) throw_config("kernel: lateral sigma must be positive");
  if (!(kernel.attenuation_per_mm >= 0.0)) throw_config("kernel: attenuation must be nonnegative");
  if (!(kernel.cutoff >= 0.0)) throw_config("kernel: cutoff must be nonnegative");

  const int num_beams = machine.num_beams;
  const int leaf_pairs = machine.leaf_pairs;
  const int bixels = machine.bixels_per_row;
  const auto& dims = phantom.dims();
  const auto& size = phantom.voxel_size();
  const double entry_depth = 0.5 * std::hypot(dims.nx * size[0], dims.ny * size[1]);

  std::vector<double> lateral_center(bixels);
  for (int j = 0; j < bixels; ++j) lateral_center[j] = (j - 0.5 * (bixels - 1)) * machine.bixel_width_mm;
  std::vector<double> axial_center(leaf_pairs);
  for (int n = 0; n < leaf_pairs; ++n) axial_center[n] = (n - 0.5 * (leaf_pairs - 1)) * machine.leaf_width_mm;

  std::vector<double> cos_a(num_beams), sin_a(num_beams);
  for (int b = 0; b < num_beams; ++b) {
    const double rad = machine.beam_angles_deg[b] * std::numbers::pi / 180.0;
    cos_a[b] = std::cos(rad);
    sin_a[b] = std::sin(rad);
  }

  std::vector<Triplet> triplets;
  std::vector<double> beam_total(num_beams, 0.0);
  std::vector<double> lateral(bixels), axial(leaf_pairs);
  for (Index v = 0; v < phantom.num_voxels(); ++v) {
    const auto p = phantom.voxel_center(v);
    for (int n = 0; n < leaf_pairs; ++n) {
      axial[n] = blurred_box(p[2] - axial_center[n], machine.leaf_width_mm, kernel.sigma_mm);
    }
    for (int b = 0; b < num_beams; ++b) {
      // Source on the +direction side; the beam travels towards -direction.
      const double along = p[0] * cos_a[b] + p[1] * sin_a[b];
      const double across = -p[0] * sin_a[b] + p[1] * cos_a[b];
      const double depth = std::max(entry_depth - along, 0.0);
      const double attenuation = std::exp(-kernel.attenuation_per_mm * depth);
      for (int j = 0; j < bixels; ++j) {
        lateral[j] = blurred_box(across - lateral_center[j], machine.bixel_width_mm, kernel.sigma_mm);
      }
      for (int n = 0; n < leaf_pairs; ++n) {
        if (axial[n] == 0.0) continue;
        for (int j = 0; j < bixels; ++j) {
          const double value = attenuation * lateral[j] * axial[n];
          if (value > 0.0 && value >= kernel.cutoff) {
            triplets.emplace_back(v, machine.bixel_column(b, n, j), value);
            beam_total[b] += value;
          }
        }
      }
    }
  }
  for (int b = 0; b < num_beams; ++b) {
    if (beam_total[b] == 0.0) {
      throw_config("beam " + std::to_string(b) + " misses the phantom grid entirely");
    }
  }

  DoseInfluence influence;
  influence.num_beams = num_beams;
  influence.leaf_pairs = leaf_pairs;
  influence.bixels_per_row = bixels;
  influence.matrix.resize(phantom.num_voxels(), machine.num_bixels());
  influence.matrix.setFromTriplets(triplets.begin(), triplets.end());
  influence.matrix.makeCompressed();
  return influence;
}

}  // namespace mtd
