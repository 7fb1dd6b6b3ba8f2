#include "mtd/case_file.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mtd/dmlc.hpp"
#include "mtd/dose_cache.hpp"
#include "mtd/error.hpp"
#include "mtd/io.hpp"

namespace mtd {

namespace {

using nlohmann::json;

// Collects schema problems with their field paths instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  bool expect_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void allowed_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) return;
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown field");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  std::optional<double> number(const json& j, const std::string& path, const char* key, bool required) {
    const std::string p = join(path, key);
    if (!j.contains(key) || j[key].is_null()) {
      if (required) fail(p, "required number is missing");
      return std::nullopt;
    }
    if (!j[key].is_number()) {
      fail(p, "expected a number");
      return std::nullopt;
    }
    const double value = j[key].get<double>();
    if (!std::isfinite(value)) {
      fail(p, "must be finite");
      return std::nullopt;
    }
    return value;
  }

  double number_or(const json& j, const std::string& path, const char* key, double fallback) {
    return number(j, path, key, false).value_or(fallback);
  }

  std::optional<int> integer(const json& j, const std::string& path, const char* key, bool required) {
    const std::string p = join(path, key);
    if (!j.contains(key) || j[key].is_null()) {
      if (required) fail(p, "required integer is missing");
      return std::nullopt;
    }
    if (!j[key].is_number_integer()) {
      fail(p, "expected an integer");
      return std::nullopt;
    }
    return j[key].get<int>();
  }

  std::optional<std::string> string(const json& j, const std::string& path, const char* key, bool required) {
    const std::string p = join(path, key);
    if (!j.contains(key) || j[key].is_null()) {
      if (required) fail(p, "required string is missing");
      return std::nullopt;
    }
    if (!j[key].is_string()) {
      fail(p, "expected a string");
      return std::nullopt;
    }
    return j[key].get<std::string>();
  }

  std::array<double, 3> vec3(const json& j, const std::string& path, const char* key,
                             std::optional<std::array<double, 3>> fallback = std::nullopt) {
    const std::string p = join(path, key);
    std::array<double, 3> out = fallback.value_or(std::array<double, 3>{0, 0, 0});
    if (!j.contains(key)) {
      if (!fallback) fail(p, "required 3-vector is missing");
      return out;
    }
    const json& a = j[key];
    if (!a.is_array() || a.size() != 3) {
      fail(p, "expected an array of 3 numbers");
      return out;
    }
    for (int i = 0; i < 3; ++i) {
      if (!a[i].is_number()) {
        fail(p + "[" + std::to_string(i) + "]", "expected a number");
      } else {
        out[i] = a[i].get<double>();
      }
    }
    return out;
  }

  std::vector<std::string> strings(const json& j, const std::string& path, const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    const json& a = j[key];
    if (!a.is_array()) {
      fail(join(path, key), "expected an array of strings");
      return out;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_string()) {
        fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a string");
      } else {
        out.push_back(a[i].get<std::string>());
      }
    }
    return out;
  }

  std::vector<double> numbers(const json& j, const std::string& path, const char* key, bool required) {
    std::vector<double> out;
    if (!j.contains(key)) {
      if (required) fail(join(path, key), "required array is missing");
      return out;
    }
    const json& a = j[key];
    if (!a.is_array()) {
      fail(join(path, key), "expected an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) {
        fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
      } else {
        out.push_back(a[i].get<double>());
      }
    }
    return out;
  }
};

RoiShape parse_shape(Reader& r, const json& j, const std::string& path) {
  if (!r.expect_object(j, path)) return BoxShape{};
  const std::string type = r.string(j, path, "type", true).value_or("");
  if (type == "box") {
    r.allowed_keys(j, path, {"type", "min_mm", "max_mm"});
    BoxShape s{r.vec3(j, path, "min_mm"), r.vec3(j, path, "max_mm")};
    for (int a = 0; a < 3; ++a) {
      if (s.min_mm[a] > s.max_mm[a]) r.fail(path, "box min_mm exceeds max_mm");
    }
    return s;
  }
  if (type == "sphere") {
    r.allowed_keys(j, path, {"type", "center_mm", "radius_mm"});
    SphereShape s{r.vec3(j, path, "center_mm", std::array<double, 3>{0, 0, 0}),
                  r.number(j, path, "radius_mm", true).value_or(0.0)};
    if (s.radius_mm < 0) r.fail(Reader::join(path, "radius_mm"), "must be >= 0");
    return s;
  }
  if (type == "cylinder") {
    r.allowed_keys(j, path, {"type", "center_mm", "radius_mm", "half_length_mm"});
    CylinderShape s{r.vec3(j, path, "center_mm", std::array<double, 3>{0, 0, 0}),
                    r.number(j, path, "radius_mm", true).value_or(0.0),
                    r.number(j, path, "half_length_mm", true).value_or(0.0)};
    if (s.radius_mm < 0) r.fail(Reader::join(path, "radius_mm"), "must be >= 0");
    if (s.half_length_mm < 0) r.fail(Reader::join(path, "half_length_mm"), "must be >= 0");
    return s;
  }
  if (type == "shell") {
    r.allowed_keys(j, path, {"type", "center_mm", "inner_mm", "outer_mm"});
    ShellShape s{r.vec3(j, path, "center_mm", std::array<double, 3>{0, 0, 0}),
                 r.number(j, path, "inner_mm", true).value_or(0.0),
                 r.number(j, path, "outer_mm", true).value_or(0.0)};
    if (!(s.inner_mm >= 0 && s.outer_mm > s.inner_mm)) r.fail(path, "shell needs 0 <= inner_mm < outer_mm");
    return s;
  }
  if (type == "ring") {
    r.allowed_keys(j, path, {"type", "around", "inner_mm", "outer_mm"});
    RingShape s{r.strings(j, path, "around"), r.number_or(j, path, "inner_mm", 0.0),
                r.number(j, path, "outer_mm", true).value_or(0.0)};
    if (s.around.empty()) r.fail(Reader::join(path, "around"), "ring must surround at least one ROI");
    if (!(s.inner_mm >= 0 && s.outer_mm > s.inner_mm)) r.fail(path, "ring needs 0 <= inner_mm < outer_mm");
    return s;
  }
  if (type == "explicit") {
    r.allowed_keys(j, path, {"type", "voxels", "volumes_mm3"});
    ExplicitShape s;
    for (double v : r.numbers(j, path, "voxels", true)) {
      if (v < 0 || v != std::floor(v)) {
        r.fail(Reader::join(path, "voxels"), "voxel indices must be nonnegative integers");
        break;
      }
      s.voxels.push_back(static_cast<Index>(v));
    }
    s.volumes_mm3 = r.numbers(j, path, "volumes_mm3", false);
    if (s.volumes_mm3.empty()) s.volumes_mm3.assign(s.voxels.size(), 1.0);
    if (s.volumes_mm3.size() != s.voxels.size()) {
      r.fail(Reader::join(path, "volumes_mm3"), "length differs from voxels");
    }
    return s;
  }
  r.fail(Reader::join(path, "type"), "unknown shape type '" + type + "'");
  return BoxShape{};
}

void parse_phantom(Reader& r, const json& j, CaseDefinition& def) {
  const std::string path = "phantom";
  if (!r.expect_object(j, path)) return;
  r.allowed_keys(j, path, {"dims", "voxel_size_mm", "subsamples", "rois"});
  const std::vector<double> dims = r.numbers(j, path, "dims", true);
  if (dims.size() == 3) {
    for (double d : dims) {
      if (!(d >= 1 && d == std::floor(d))) r.fail(path + ".dims", "dimensions must be positive integers");
    }
    def.phantom.dims = {static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2])};
  } else if (!dims.empty()) {
    r.fail(path + ".dims", "expected 3 dimensions");
  }
  def.phantom.voxel_size_mm = r.vec3(j, path, "voxel_size_mm", std::array<double, 3>{1, 1, 1});
  for (double s : def.phantom.voxel_size_mm) {
    if (!(s > 0)) r.fail(path + ".voxel_size_mm", "voxel sizes must be positive");
  }
  def.phantom.subsamples = r.integer(j, path, "subsamples", false).value_or(3);
  if (def.phantom.subsamples < 1 || def.phantom.subsamples % 2 == 0) {
    r.fail(path + ".subsamples", "must be a positive odd integer");
  }
  if (!j.contains("rois") || !j["rois"].is_array() || j["rois"].empty()) {
    r.fail(path + ".rois", "expected a non-empty array");
    return;
  }
  const json& rois = j["rois"];
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const std::string p = path + ".rois[" + std::to_string(i) + "]";
    if (!r.expect_object(rois[i], p)) continue;
    r.allowed_keys(rois[i], p, {"name", "kind", "shape", "subtract"});
    RoiSpec spec;
    spec.name = r.string(rois[i], p, "name", true).value_or("");
    const std::string kind = r.string(rois[i], p, "kind", false).value_or("organ-at-risk");
    try {
      spec.kind = roi_kind_from_string(kind);
    } catch (const Error&) {
      r.fail(p + ".kind", "unknown ROI kind '" + kind + "'");
    }
    if (rois[i].contains("shape")) {
      spec.shape = parse_shape(r, rois[i]["shape"], p + ".shape");
    } else {
      r.fail(p + ".shape", "required object is missing");
    }
    spec.subtract = r.strings(rois[i], p, "subtract");
    def.phantom.rois.push_back(std::move(spec));
  }
}

void parse_machine(Reader& r, const json& j, CaseDefinition& def) {
  const std::string path = "machine";
  if (!r.expect_object(j, path)) return;
  r.allowed_keys(j, path,
                 {"num_beams", "leaf_pairs", "bixels_per_row", "traverse_time_s", "min_gap_fraction",
                  "transmission", "dose_rate", "max_time_s", "beam_angles_deg", "first_angle_deg",
                  "bixel_width_mm", "leaf_width_mm"});
  MachineModel& m = def.machine;
  m.num_beams = r.integer(j, path, "num_beams", true).value_or(1);
  m.leaf_pairs = r.integer(j, path, "leaf_pairs", true).value_or(1);
  m.bixels_per_row = r.integer(j, path, "bixels_per_row", true).value_or(1);
  m.traverse_time_s = r.number(j, path, "traverse_time_s", true).value_or(1.0);
  m.min_gap_fraction = r.number(j, path, "min_gap_fraction", true).value_or(0.5);
  m.transmission = r.number_or(j, path, "transmission", 0.0);
  m.dose_rate = r.number(j, path, "dose_rate", true).value_or(1.0);
  m.max_time_s = r.number(j, path, "max_time_s", true).value_or(1.0);
  m.bixel_width_mm = r.number_or(j, path, "bixel_width_mm", 5.0);
  m.leaf_width_mm = r.number_or(j, path, "leaf_width_mm", 5.0);
  auto positive_int = [&](int value, const char* key) {
    if (value < 1) r.fail(path + "." + key, "must be >= 1");
  };
  positive_int(m.num_beams, "num_beams");
  positive_int(m.leaf_pairs, "leaf_pairs");
  positive_int(m.bixels_per_row, "bixels_per_row");
  if (!(m.traverse_time_s > 0)) r.fail(path + ".traverse_time_s", "must be > 0");
  if (!(m.min_gap_fraction > 0 && m.min_gap_fraction < 1)) r.fail(path + ".min_gap_fraction", "must lie in (0,1)");
  if (!(m.transmission >= 0 && m.transmission < 1)) r.fail(path + ".transmission", "must lie in [0,1)");
  if (!(m.dose_rate > 0)) r.fail(path + ".dose_rate", "must be > 0");
  if (!(m.max_time_s > 0)) r.fail(path + ".max_time_s", "must be > 0");
  if (!(m.bixel_width_mm > 0)) r.fail(path + ".bixel_width_mm", "must be > 0");
  if (!(m.leaf_width_mm > 0)) r.fail(path + ".leaf_width_mm", "must be > 0");
  if (j.contains("beam_angles_deg")) {
    m.beam_angles_deg = r.numbers(j, path, "beam_angles_deg", true);
    if (static_cast<int>(m.beam_angles_deg.size()) != m.num_beams) {
      r.fail(path + ".beam_angles_deg", "length must equal num_beams");
    }
  } else if (m.num_beams >= 1) {
    m.beam_angles_deg = equally_spaced_angles(m.num_beams, r.number_or(j, path, "first_angle_deg", 0.0));
  }
}

void parse_kernel(Reader& r, const json& j, CaseDefinition& def) {
  const std::string path = "kernel";
  if (!r.expect_object(j, path)) return;
  r.allowed_keys(j, path, {"sigma_mm", "attenuation_per_mm", "cutoff"});
  def.kernel.sigma_mm = r.number_or(j, path, "sigma_mm", def.kernel.sigma_mm);
  def.kernel.attenuation_per_mm = r.number_or(j, path, "attenuation_per_mm", def.kernel.attenuation_per_mm);
  def.kernel.cutoff = r.number_or(j, path, "cutoff", def.kernel.cutoff);
  if (!(def.kernel.sigma_mm > 0)) r.fail(path + ".sigma_mm", "must be > 0");
  if (!(def.kernel.attenuation_per_mm >= 0)) r.fail(path + ".attenuation_per_mm", "must be >= 0");
  if (!(def.kernel.cutoff >= 0)) r.fail(path + ".cutoff", "must be >= 0");
}

void parse_criteria(Reader& r, const json& j, CaseDefinition& def) {
  if (!j.is_array() || j.empty()) {
    r.fail("criteria", "expected a non-empty array");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "criteria[" + std::to_string(i) + "]";
    const json& c = j[i];
    if (!r.expect_object(c, p)) continue;
    r.allowed_keys(c, p, {"label", "roi", "type", "v", "v_cc", "l", "u", "l_hat", "u_hat", "objective"});
    const std::size_t errors_before = r.errors.size();
    CriterionEntry entry;
    Criterion& k = entry.criterion;
    k.roi = r.string(c, p, "roi", true).value_or("");
    k.label = r.string(c, p, "label", false).value_or(k.roi);
    const std::string type = r.string(c, p, "type", true).value_or("");
    try {
      k.type = criterion_type_from_string(type);
    } catch (const Error&) {
      if (!type.empty()) r.fail(p + ".type", "unknown criterion type '" + type + "'");
    }
    const auto v = r.number(c, p, "v", false);
    entry.volume_cc = r.number(c, p, "v_cc", false);
    if (is_dose_at_volume(k.type)) {
      if (v && entry.volume_cc) {
        r.fail(p, "give either v or v_cc, not both");
      } else if (v) {
        if (!(*v > 0.0 && *v < 1.0)) r.fail(p + ".v", "volume fraction must lie in (0,1), got " + format_double(*v));
        k.volume_fraction = *v;
      } else if (entry.volume_cc) {
        if (!(*entry.volume_cc > 0.0)) r.fail(p + ".v_cc", "volume must be > 0 cc");
      } else {
        r.fail(p + ".v", "dose-at-volume criterion needs a volume fraction v or v_cc");
      }
    } else if (v || entry.volume_cc) {
      r.fail(p + ".v", "only dose-at-volume criteria take a volume");
    }
    k.lower = r.number(c, p, "l", false);
    k.upper = r.number(c, p, "u", false);
    k.utopian_lower = r.number(c, p, "l_hat", false);
    k.utopian_upper = r.number(c, p, "u_hat", false);
    k.objective = r.integer(c, p, "objective", false);
    if (!type.empty() && r.errors.size() == errors_before) {
      Criterion probe = k;
      if (entry.volume_cc) probe.volume_fraction = 0.5;
      for (const std::string& problem : check_criterion(probe)) {
        const auto colon = problem.find(": ");
        r.fail(p, colon == std::string::npos ? problem : problem.substr(colon + 2));
      }
    }
    def.criteria.push_back(std::move(entry));
  }
}

void parse_quality(Reader& r, const json& j, CaseDefinition& def) {
  if (!j.is_array()) {
    r.fail("quality_indices", "expected an array");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "quality_indices[" + std::to_string(i) + "]";
    const json& q = j[i];
    if (!r.expect_object(q, p)) continue;
    r.allowed_keys(q, p, {"label", "roi", "kind", "v", "low", "high", "aim"});
    QualityIndexSpec spec;
    spec.roi = r.string(q, p, "roi", true).value_or("");
    spec.label = r.string(q, p, "label", false).value_or(spec.roi);
    const std::string kind = r.string(q, p, "kind", true).value_or("");
    if (kind == "dose-at-volume") {
      spec.kind = QualityKind::kDoseAtVolume;
      spec.volume_fraction = r.number(q, p, "v", true).value_or(0.5);
      if (!(spec.volume_fraction > 0 && spec.volume_fraction < 1)) r.fail(p + ".v", "must lie in (0,1)");
    } else if (kind == "average") {
      spec.kind = QualityKind::kAverage;
    } else if (kind == "homogeneity") {
      spec.kind = QualityKind::kHomogeneity;
      spec.hi_low = r.number(q, p, "low", true).value_or(0.01);
      spec.hi_high = r.number(q, p, "high", true).value_or(0.99);
      if (!(spec.hi_low > 0 && spec.hi_low < spec.hi_high && spec.hi_high < 1)) {
        r.fail(p, "homogeneity needs 0 < low < high < 1");
      }
    } else if (!kind.empty()) {
      r.fail(p + ".kind", "unknown quality index kind '" + kind + "'");
    }
    const std::string aim = r.string(q, p, "aim", false).value_or("minimize");
    if (aim == "minimize") {
      spec.aim = Aim::kMinimize;
    } else if (aim == "maximize") {
      spec.aim = Aim::kMaximize;
    } else {
      r.fail(p + ".aim", "expected 'minimize' or 'maximize'");
    }
    def.quality_indices.push_back(std::move(spec));
  }
}

void parse_solver(Reader& r, const json& j, CaseDefinition& def) {
  const std::string path = "solver";
  if (!r.expect_object(j, path)) return;
  r.allowed_keys(j, path,
                 {"dose_tolerance_gy", "feasibility_tolerance", "max_iterations", "step_fraction",
                  "centering_exponent", "regularization", "dense_schur_limit"});
  SolverSettings& s = def.solver;
  s.dose_tolerance = r.number_or(j, path, "dose_tolerance_gy", s.dose_tolerance);
  s.feasibility_tolerance = r.number_or(j, path, "feasibility_tolerance", s.feasibility_tolerance);
  s.max_iterations = r.integer(j, path, "max_iterations", false).value_or(s.max_iterations);
  s.step_fraction = r.number_or(j, path, "step_fraction", s.step_fraction);
  s.centering_exponent = r.number_or(j, path, "centering_exponent", s.centering_exponent);
  s.regularization = r.number_or(j, path, "regularization", s.regularization);
  s.schur.dense_limit = r.integer(j, path, "dense_schur_limit", false).value_or(static_cast<int>(s.schur.dense_limit));
  if (!(s.dose_tolerance > 0)) r.fail(path + ".dose_tolerance_gy", "must be > 0");
  if (!(s.feasibility_tolerance > 0)) r.fail(path + ".feasibility_tolerance", "must be > 0");
  if (s.max_iterations < 1) r.fail(path + ".max_iterations", "must be >= 1");
  if (!(s.step_fraction > 0 && s.step_fraction < 1)) r.fail(path + ".step_fraction", "must lie in (0,1)");
  if (!(s.centering_exponent >= 1)) r.fail(path + ".centering_exponent", "must be >= 1");
  if (!(s.regularization >= 0)) r.fail(path + ".regularization", "must be >= 0");
}

}  // namespace

CaseDefinition parse_case(const std::string& json_text, const std::string& source_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw_config(source_name + ": invalid JSON: " + e.what());
  }
  Reader r;
  CaseDefinition def;
  if (!root.is_object()) throw_config(source_name + ": top level must be an object");
  r.allowed_keys(root, "",
                 {"name", "phantom", "machine", "kernel", "criteria", "objectives", "quality_indices", "solver",
                  "pareto", "evaluation"});
  def.name = r.string(root, "", "name", false).value_or("case");
  if (root.contains("phantom")) {
    parse_phantom(r, root["phantom"], def);
  } else {
    r.fail("phantom", "required section is missing");
  }
  if (root.contains("machine")) {
    parse_machine(r, root["machine"], def);
  } else {
    r.fail("machine", "required section is missing");
  }
  if (root.contains("kernel")) parse_kernel(r, root["kernel"], def);
  if (root.contains("criteria")) {
    parse_criteria(r, root["criteria"], def);
  } else {
    r.fail("criteria", "required section is missing");
  }
  if (root.contains("objectives")) {
    const json& o = root["objectives"];
    if (!o.is_array()) r.fail("objectives", "expected an array");
    for (std::size_t i = 0; o.is_array() && i < o.size(); ++i) {
      const std::string p = "objectives[" + std::to_string(i) + "]";
      if (!r.expect_object(o[i], p)) continue;
      r.allowed_keys(o[i], p, {"name"});
      def.objective_names.push_back(r.string(o[i], p, "name", true).value_or(""));
    }
  }
  if (root.contains("quality_indices")) parse_quality(r, root["quality_indices"], def);
  if (root.contains("solver")) parse_solver(r, root["solver"], def);
  if (root.contains("pareto")) {
    const json& p = root["pareto"];
    if (r.expect_object(p, "pareto")) {
      r.allowed_keys(p, "pareto", {"grid_order", "workers"});
      def.grid_order = r.integer(p, "pareto", "grid_order", false).value_or(def.grid_order);
      def.workers = r.integer(p, "pareto", "workers", false).value_or(def.workers);
      if (def.grid_order < 1) r.fail("pareto.grid_order", "must be >= 1");
      if (def.workers < 1) r.fail("pareto.workers", "must be >= 1");
    }
  }
  if (root.contains("evaluation")) {
    const json& e = root["evaluation"];
    if (r.expect_object(e, "evaluation")) {
      r.allowed_keys(e, "evaluation", {"dvh_step_gy"});
      def.dvh_step_gy = r.number_or(e, "evaluation", "dvh_step_gy", def.dvh_step_gy);
      if (!(def.dvh_step_gy > 0)) r.fail("evaluation.dvh_step_gy", "must be > 0");
    }
  }
  if (r.errors.empty()) {
    std::vector<Criterion> plain;
    for (const CriterionEntry& e : def.criteria) plain.push_back(e.criterion);
    try {
      const int k = count_objectives(plain);
      if (!def.objective_names.empty() && static_cast<int>(def.objective_names.size()) != k) {
        r.fail("objectives", "lists " + std::to_string(def.objective_names.size()) + " names but criteria use " +
                                 std::to_string(k) + " objectives");
      }
      if (k == 0) r.fail("criteria", "no criterion carries an objective index");
    } catch (const Error& e) {
      r.fail("criteria", e.what());
    }
  }
  if (!r.errors.empty()) {
    std::string message = source_name + ": invalid case file";
    for (const std::string& e : r.errors) message += "\n  " + e;
    throw_config(message);
  }
  return def;
}

CaseDefinition load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_config("cannot open case file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_case(buffer.str(), path.string());
}

PlanningCase build_planning_case(const CaseDefinition& def, const std::filesystem::path& cache_dir) {
  PlanningCase pc;
  pc.name = def.name;
  pc.phantom = build_phantom(def.phantom);
  pc.machine = def.machine;
  pc.machine.validate();
  pc.kernel = def.kernel;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < def.criteria.size(); ++i) {
    Criterion c = def.criteria[i].criterion;
    if (!pc.phantom.has_roi(c.roi)) {
      problems.push_back("criteria[" + std::to_string(i) + "].roi: unknown ROI '" + c.roi + "'");
    } else if (def.criteria[i].volume_cc) {
      const double v = cc_to_fraction(pc.phantom.roi(c.roi), *def.criteria[i].volume_cc);
      if (!(v > 0.0 && v < 1.0)) {
        problems.push_back("criteria[" + std::to_string(i) + "].v_cc: " + format_double(*def.criteria[i].volume_cc) +
                           " cc is " + format_double(v) + " of the ROI, outside (0,1)");
      }
      c.volume_fraction = v;
    }
    pc.criteria.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < def.quality_indices.size(); ++i) {
    if (!pc.phantom.has_roi(def.quality_indices[i].roi)) {
      problems.push_back("quality_indices[" + std::to_string(i) + "].roi: unknown ROI '" +
                         def.quality_indices[i].roi + "'");
    }
  }
  if (!problems.empty()) {
    std::string message = "case '" + def.name + "' is inconsistent with its phantom";
    for (const std::string& p : problems) message += "\n  " + p;
    throw_config(message);
  }
  pc.quality_indices = def.quality_indices;
  pc.solver = def.solver;
  pc.dvh_step_gy = def.dvh_step_gy;
  pc.grid_order = def.grid_order;
  pc.workers = def.workers;
  pc.influence = load_or_compute_dose_influence(pc.phantom, pc.machine, pc.kernel, cache_dir);
  return pc;
}

std::vector<Diagnostic> validate_planning_case(const PlanningCase& pc) {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& m) { out.push_back({Diagnostic::Level::kError, m}); };
  auto warn = [&](const std::string& m) { out.push_back({Diagnostic::Level::kWarning, m}); };
  if (!pc.phantom.has_target()) error("phantom has no target ROI");
  for (std::size_t i = 0; i < pc.criteria.size(); ++i) {
    for (const std::string& p : check_criterion(pc.criteria[i])) error("criteria[" + std::to_string(i) + "] " + p);
  }
  int objectives = 0;
  try {
    objectives = count_objectives(pc.criteria);
  } catch (const Error& e) {
    error(e.what());
  }
  if (!pc.quality_indices.empty() && static_cast<int>(pc.quality_indices.size()) != objectives) {
    warn("case has " + std::to_string(pc.quality_indices.size()) + " quality indices but " +
         std::to_string(objectives) + " objectives; hull and shift reports need one index per objective");
  }

  // Target rows without any dose make lower bounds unattainable.
  const SparseMatrix& P = pc.influence.matrix;
  for (const Roi& roi : pc.phantom.rois()) {
    if (roi.kind != RoiKind::kTarget) continue;
    Index empty = 0;
    for (Index v : roi.voxels) empty += P.row(v).nonZeros() == 0 ? 1 : 0;
    if (empty > 0) warn("target '" + roi.name + "' has " + std::to_string(empty) + " voxels no bixel reaches");
  }

  // Sweep-time bound for a uniform reference fluence whose mean target dose meets the largest
  // target lower bound.
  double needed = 0.0;
  std::string needed_roi;
  for (const Criterion& c : pc.criteria) {
    if (!pc.phantom.has_roi(c.roi) || pc.phantom.roi(c.roi).kind != RoiKind::kTarget) continue;
    if (c.lower && *c.lower > needed) {
      needed = *c.lower;
      needed_roi = c.roi;
    }
  }
  const FluenceMap zero{std::vector<double>(static_cast<std::size_t>(pc.machine.num_bixels()), 0.0)};
  const SweepBound idle = sweep_time_lower_bound(zero, pc.machine);
  if (idle.total > pc.machine.max_time_s) {
    error("T_max " + format_double(pc.machine.max_time_s) + " s is below the leaf traversal time " +
          format_double(idle.total) + " s");
  }
  if (needed > 0.0) {
    const Vector unit = P * Vector::Ones(P.cols());
    const Roi& roi = pc.phantom.roi(needed_roi);
    double mean = 0.0;
    for (std::size_t i = 0; i < roi.voxels.size(); ++i) mean += roi.weights[i] * unit[roi.voxels[i]];
    if (mean > 0.0) {
      const FluenceMap reference{std::vector<double>(static_cast<std::size_t>(pc.machine.num_bixels()), needed / mean)};
      const SweepBound bound = sweep_time_lower_bound(reference, pc.machine);
      if (bound.total > pc.machine.max_time_s) {
        warn("T_max " + format_double(pc.machine.max_time_s) + " s is below the sweep-time lower bound " +
             format_double(bound.total) + " s of a uniform fluence reaching " + format_double(needed) +
             " Gy mean dose in '" + needed_roi + "'");
      }
    } else {
      error("target '" + needed_roi + "' receives no dose from any bixel");
    }
  }
  return out;
}

}  // namespace mtd
