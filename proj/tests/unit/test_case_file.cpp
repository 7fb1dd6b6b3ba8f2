#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mtd/case_file.hpp"
#include "mtd/error.hpp"

namespace mtd {
namespace {

using json = nlohmann::json;

json toy_json() {
  std::ifstream in(MTD_SOURCE_DIR "/cases/toy.json");
  return json::parse(in);
}

std::string config_error_message(const json& j) {
  try {
    parse_case(j.dump(), "case.json");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return {};
}

TEST(CaseFile, BundledCasesParseAndValidate) {
  for (const char* name : {"toy", "prostate_demo"}) {
    const CaseDefinition def = load_case_file(std::string(MTD_SOURCE_DIR "/cases/") + name + ".json");
    EXPECT_EQ(def.name, name);
    EXPECT_EQ(def.objective_names.size(), 3u);
    const PlanningCase pc = build_planning_case(def);
    EXPECT_EQ(pc.num_objectives(), 3);
    EXPECT_EQ(pc.machine.beam_angles_deg.size(), static_cast<std::size_t>(pc.machine.num_beams));
    EXPECT_EQ(pc.influence.matrix.rows(), pc.phantom.num_voxels());
    EXPECT_EQ(pc.influence.matrix.cols(), pc.machine.num_bixels());
    for (const Diagnostic& d : validate_planning_case(pc)) {
      EXPECT_NE(d.level, Diagnostic::Level::kError) << name << ": " << d.message;
    }
  }
}

TEST(CaseFile, ReportsFieldPaths) {
  json j = toy_json();
  j["criteria"][1]["v"] = 1.2;
  EXPECT_NE(config_error_message(j).find("criteria[1].v"), std::string::npos);

  j = toy_json();
  j["criteria"][0]["typo"] = 3;
  j["machine"]["transmission"] = "high";
  const std::string both = config_error_message(j);
  EXPECT_NE(both.find("criteria[0].typo"), std::string::npos);
  EXPECT_NE(both.find("machine.transmission"), std::string::npos);

  j = toy_json();
  j["criteria"][2]["v"] = 0.5;  // average criterion takes no volume
  EXPECT_NE(config_error_message(j).find("criteria[2].v"), std::string::npos);

  j = toy_json();
  j["criteria"][0].erase("v");
  EXPECT_NE(config_error_message(j).find("criteria[0].v"), std::string::npos);

  EXPECT_THROW(parse_case("{not json", "x"), Error);
  EXPECT_THROW(load_case_file(MTD_SOURCE_DIR "/cases/missing.json"), Error);
}

TEST(CaseFile, VolumeInCcIsResolved) {
  json j = toy_json();
  j["criteria"][4].erase("v");
  j["criteria"][4]["v_cc"] = 0.128;  // two 4 mm voxels
  const PlanningCase pc = build_planning_case(parse_case(j.dump()));
  const Roi& oar = pc.phantom.roi("OAR");
  EXPECT_NEAR(pc.criteria[4].volume_fraction, 128.0 / oar.volume_mm3, 1e-12);
}

TEST(CaseFile, MaxTimeWarningNamesBothValues) {
  json j = toy_json();
  j["machine"]["max_time_s"] = 12.0;
  const PlanningCase pc = build_planning_case(parse_case(j.dump()));
  bool found = false;
  for (const Diagnostic& d : validate_planning_case(pc)) {
    if (d.message.find("T_max 12 s") != std::string::npos && d.message.find("sweep-time lower bound") !=
                                                                    std::string::npos) {
      found = true;
      EXPECT_EQ(d.level, Diagnostic::Level::kWarning);
    }
  }
  EXPECT_TRUE(found);

  j["machine"]["max_time_s"] = 0.5;  // below the idle traverse time of 6 bixels
  bool error = false;
  for (const Diagnostic& d : validate_planning_case(build_planning_case(parse_case(j.dump())))) {
    error = error || d.level == Diagnostic::Level::kError;
  }
  EXPECT_TRUE(error);
}

}  // namespace
}  // namespace mtd
