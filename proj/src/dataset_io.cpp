#include "sixcal/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sixcal/experiments.hpp"

namespace sixcal {

const char* const kDatasetSchemaText =
    "dataset JSON (version 1):\n"
    "  version       1\n"
    "  seed          unsigned integer\n"
    "  K             3x3 array of numbers\n"
    "  cameras       [{\"R\": 3x3, \"t\": [x, y, z]}, ...], at least 3\n"
    "  points        [[X, Y, Z], ...], at least 6\n"
    "  observations  [[view, point, u, v], ...], one per (view, point)\n"
    "  outlier_mask  [[bool per point], ...] per view (optional)\n"
    "  noise_px      number (optional)\n";

namespace {

using nlohmann::json;

json Mat3(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

json Vec3(const Eigen::Vector3d& v) { return json{v(0), v(1), v(2)}; }

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const json& Field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) Fail(where, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

double Number(const json& j, const std::string& where) {
  if (!j.is_number()) Fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) Fail(where, "expected a finite number");
  return v;
}

Eigen::Vector3d ReadVec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) Fail(where, "expected an array of 3 numbers");
  return {Number(j[0], where), Number(j[1], where), Number(j[2], where)};
}

Eigen::Matrix3d ReadMat3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) Fail(where, "expected a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) = ReadVec3(j[r], where).transpose();
  return m;
}

int Index(const json& j, int limit, const std::string& where) {
  if (!j.is_number_integer()) Fail(where, "expected an integer index");
  const long long v = j.get<long long>();
  if (v < 0 || v >= limit) Fail(where, "index out of range");
  return static_cast<int>(v);
}

}  // namespace

json DatasetToJson(const SyntheticDataset& ds) {
  json cams = json::array();
  for (const CameraPose& c : ds.cameras) cams.push_back({{"R", Mat3(c.R)}, {"t", Vec3(c.t)}});
  json pts = json::array();
  for (const Eigen::Vector3d& p : ds.points) pts.push_back(Vec3(p));
  json obs = json::array();
  for (int v = 0; v < ds.NumViews(); ++v) {
    for (int p = 0; p < ds.NumPoints(); ++p) {
      obs.push_back({v, p, ds.observations[v][p](0), ds.observations[v][p](1)});
    }
  }
  json mask = json::array();
  for (const auto& row : ds.outlier_mask) {
    json r = json::array();
    for (bool b : row) r.push_back(b);
    mask.push_back(r);
  }
  return json{{"version", kDatasetVersion},
              {"seed", ds.seed},
              {"K", Mat3(ds.K)},
              {"image_size", {ds.image_width, ds.image_height}},
              {"cameras", cams},
              {"points", pts},
              {"observations", obs},
              {"outlier_mask", mask},
              {"noise_px", ds.noise_px}};
}

SyntheticDataset DatasetFromJson(const json& j) {
  if (!j.is_object()) Fail("dataset", "expected a JSON object");
  const json& ver = Field(j, "version", "dataset");
  if (!ver.is_number_integer() || ver.get<int>() != kDatasetVersion) {
    Fail("version", "unsupported version (expected 1)");
  }
  SyntheticDataset ds;
  const json& seed = Field(j, "seed", "dataset");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    Fail("seed", "expected a non-negative integer");
  }
  ds.seed = seed.get<std::uint64_t>();
  ds.K = ReadMat3(Field(j, "K", "dataset"), "K");
  if (j.contains("image_size")) {
    const json& sz = j.at("image_size");
    if (!sz.is_array() || sz.size() != 2) Fail("image_size", "expected [width, height]");
    ds.image_width = Number(sz[0], "image_size");
    ds.image_height = Number(sz[1], "image_size");
  }

  const json& cams = Field(j, "cameras", "dataset");
  if (!cams.is_array() || cams.size() < 3) Fail("cameras", "expected an array of at least 3");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const std::string where = "cameras[" + std::to_string(i) + "]";
    CameraPose c;
    c.R = ReadMat3(Field(cams[i], "R", where), where + ".R");
    c.t = ReadVec3(Field(cams[i], "t", where), where + ".t");
    ds.cameras.push_back(c);
  }
  const json& pts = Field(j, "points", "dataset");
  if (!pts.is_array() || pts.size() < 6) Fail("points", "expected an array of at least 6");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ds.points.push_back(ReadVec3(pts[i], "points[" + std::to_string(i) + "]"));
  }

  const int nv = ds.NumViews();
  const int np = ds.NumPoints();
  ds.clean.assign(nv, std::vector<Eigen::Vector2d>(np));
  for (int v = 0; v < nv; ++v) {
    for (int p = 0; p < np; ++p) {
      const Eigen::Vector3d h = ds.K * (ds.cameras[v].R * ds.points[p] + ds.cameras[v].t);
      ds.clean[v][p] = h.head<2>() / h(2);
    }
  }

  const json& obs = Field(j, "observations", "dataset");
  if (!obs.is_array()) Fail("observations", "expected an array");
  ds.observations.assign(nv, std::vector<Eigen::Vector2d>(np));
  std::vector<std::vector<bool>> seen(nv, std::vector<bool>(np, false));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string where = "observations[" + std::to_string(i) + "]";
    const json& o = obs[i];
    if (!o.is_array() || o.size() != 4) Fail(where, "expected [view, point, u, v]");
    const int v = Index(o[0], nv, where);
    const int p = Index(o[1], np, where);
    if (seen[v][p]) Fail(where, "duplicate (view, point)");
    seen[v][p] = true;
    ds.observations[v][p] = {Number(o[2], where), Number(o[3], where)};
  }
  for (int v = 0; v < nv; ++v) {
    for (int p = 0; p < np; ++p) {
      if (!seen[v][p]) {
        Fail("observations", "missing view " + std::to_string(v) + " point " + std::to_string(p));
      }
    }
  }

  ds.outlier_mask.assign(nv, std::vector<bool>(np, false));
  if (j.contains("outlier_mask")) {
    const json& m = j.at("outlier_mask");
    if (!m.is_array() || static_cast<int>(m.size()) != nv) {
      Fail("outlier_mask", "expected one row per camera");
    }
    for (int v = 0; v < nv; ++v) {
      if (!m[v].is_array() || static_cast<int>(m[v].size()) != np) {
        Fail("outlier_mask", "expected one flag per point");
      }
      for (int p = 0; p < np; ++p) {
        if (!m[v][p].is_boolean()) Fail("outlier_mask", "expected booleans");
        ds.outlier_mask[v][p] = m[v][p].get<bool>();
      }
    }
  }
  if (j.contains("noise_px")) ds.noise_px = Number(j.at("noise_px"), "noise_px");
  return ds;
}

SyntheticDataset LoadDataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": not valid JSON (" + e.what() + ")");
  }
  try {
    return DatasetFromJson(j);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void SaveDataset(const SyntheticDataset& ds, const std::string& path) {
  WriteTextFile(path, DatasetToJson(ds).dump(2) + "\n");
}

json CalibrationToJson(const CalibrationResult& r) {
  return json{{"K", Mat3(r.K)},
              {"R2", Mat3(r.R2)},
              {"t2", Vec3(r.t2)},
              {"R3", Mat3(r.R3)},
              {"t3", Vec3(r.t3)},
              {"plane_at_infinity", Vec3(r.p)},
              {"lambda", r.lambda},
              {"mu", r.mu},
              {"root_index", r.root_index},
              {"reflected", r.reflected},
              {"constraint_residual", r.constraint_residual},
              {"rotation_defect", r.rotation_defect},
              {"residual_px", r.residual_px}};
}

}  // namespace sixcal
