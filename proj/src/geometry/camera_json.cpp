#include "egostereo/geometry/camera_json.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "egostereo/errors.hpp"

namespace egostereo {

namespace {
using nlohmann::json;
}

std::string rig_to_json(const RigDescription& rig) {
  json j;
  j["focal_scale"] = rig.camera.focal_scale;
  j["principal_point"] = {rig.camera.principal_point.x(),
                          rig.camera.principal_point.y()};
  j["resolution"] = {rig.camera.width, rig.camera.height};
  j["fov_deg"] = rig.camera.fov_rad * 180.0 / M_PI;
  j["baseline_m"] = rig.rig.baseline;
  return j.dump(2) + "\n";
}

RigDescription rig_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("rig json: parse failure: ") + e.what());
  }
  RigDescription out;
  try {
    out.camera.focal_scale = j.at("focal_scale").get<double>();
    out.camera.principal_point.x() = j.at("principal_point").at(0).get<double>();
    out.camera.principal_point.y() = j.at("principal_point").at(1).get<double>();
    out.camera.width = j.at("resolution").at(0).get<int>();
    out.camera.height = j.at("resolution").at(1).get<int>();
    out.camera.fov_rad = j.at("fov_deg").get<double>() * M_PI / 180.0;
    out.rig.baseline = j.at("baseline_m").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("rig json: missing/bad field: ") + e.what());
  }
  out.camera.validate();
  if (!(out.rig.baseline > 0.0)) {
    throw ConfigError("rig json: baseline_m must be positive");
  }
  return out;
}

RigDescription load_rig_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("rig json: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return rig_from_json(text);
}

void save_rig_json(const std::string& path, const RigDescription& rig) {
  std::ofstream out(path);
  if (!out) throw DataError("rig json: cannot write " + path);
  out << rig_to_json(rig);
}

}  // namespace egostereo
