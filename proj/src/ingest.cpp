#include <annulus/ingest.hpp>

#include <annulus/error.hpp>
#include <annulus/io.hpp>

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>

namespace annulus {

using nlohmann::json;

namespace {

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

Eigen::Vector3d read_vec3(const json& j, const char* field) {
    if (!j.is_array() || j.size() != 3)
        throw Error(ErrorKind::Schema, std::string(field) + " must be an array of 3 numbers");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw Error(ErrorKind::Schema, std::string(field) + " must hold numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

double read_number(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number())
        throw Error(ErrorKind::Schema, std::string("missing numeric field '") + field + "'");
    return it->get<double>();
}

bool valid_view(const std::string& view) { return view == "2ch" || view == "3ch" || view == "4ch"; }

ViewGeometry read_geometry(const json& g) {
    if (!g.is_object()) throw Error(ErrorKind::Schema, "geometry must be an object");
    ViewGeometry geom;
    geom.origin = read_vec3(g.at("origin"), "origin");
    geom.row_dir = read_vec3(g.at("row_dir"), "row_dir");
    geom.col_dir = read_vec3(g.at("col_dir"), "col_dir");
    geom.row_spacing = read_number(g, "row_spacing");
    geom.col_spacing = read_number(g, "col_spacing");
    geom.validate();
    return geom;
}

LandmarkSet parse_patient(const json& p) {
    if (!p.is_object()) throw Error(ErrorKind::Schema, "patient entry must be an object");
    LandmarkSet set;
    auto id = p.find("id");
    if (id == p.end() || !id->is_string()) throw Error(ErrorKind::Schema, "patient without string 'id'");
    set.patient_id = id->get<std::string>();

    auto label = p.find("label");
    if (label == p.end() || !label->is_number_integer())
        throw Error(ErrorKind::Schema, "label must be 0 or 1");
    const auto lv = label->get<long long>();
    if (lv != 0 && lv != 1) throw Error(ErrorKind::Schema, "label must be 0 or 1");
    set.label = static_cast<ClassLabel>(lv);

    std::map<std::string, ViewGeometry> views;
    if (auto v = p.find("views"); v != p.end()) {
        if (!v->is_array()) throw Error(ErrorKind::Schema, "views must be an array");
        for (const auto& view : *v) {
            const auto name = view.at("view").get<std::string>();
            if (!valid_view(name)) throw Error(ErrorKind::Schema, "unknown view '" + name + "'");
            views[name] = read_geometry(view.at("geometry"));
        }
    }

    auto pts = p.find("points");
    if (pts == p.end() || !pts->is_array()) throw Error(ErrorKind::Schema, "points must be an array");

    std::array<std::array<bool, kNumPoints>, kNumPhases> seen{};
    std::optional<bool> uses_pixels;
    for (const auto& entry : *pts) {
        const auto name = entry.at("name").get<std::string>();
        if (name.size() != 2 || name[0] != 'P' || name[1] < '0' || name[1] > '5')
            throw Error(ErrorKind::Schema, "unknown point name '" + name + "'");
        const std::size_t point = static_cast<std::size_t>(name[1] - '0');

        if (!entry.at("phase").is_number_integer())
            throw Error(ErrorKind::Schema, "phase must be an integer");
        const int phase = entry.at("phase").get<int>();
        const int pi = phase_index(phase);
        if (pi < 0)
            throw Error(ErrorKind::Schema, "phase " + std::to_string(phase) +
                                               " not in {0,5,10,15,20,25}");

        const bool has_pixel = entry.contains("pixel");
        const bool has_xyz = entry.contains("patient_xyz");
        if (has_pixel == has_xyz)
            throw Error(ErrorKind::Schema,
                        name + "/CP" + std::to_string(phase) + ": exactly one of pixel or patient_xyz required");
        if (uses_pixels && *uses_pixels != has_pixel)
            throw Error(ErrorKind::Input, "mixed pixel and patient_xyz coordinates");
        uses_pixels = has_pixel;

        Eigen::Vector3d xyz;
        if (has_xyz) {
            xyz = read_vec3(entry.at("patient_xyz"), "patient_xyz");
        } else {
            const auto& px = entry.at("pixel");
            const auto view = px.at("view").get<std::string>();
            auto g = views.find(view);
            if (g == views.end()) throw Error(ErrorKind::Schema, "no geometry for view '" + view + "'");
            xyz = pixel_to_patient({read_number(px, "row"), read_number(px, "col")}, g->second);
        }
        if (!finite(xyz))
            throw Error(ErrorKind::Input, name + "/CP" + std::to_string(phase) + ": non-finite coordinate");
        if (seen[pi][point])
            throw Error(ErrorKind::Structural, "duplicate " + name + "/CP" + std::to_string(phase));
        seen[pi][point] = true;
        set.points[pi][point] = xyz;
    }

    for (std::size_t pi = 0; pi < kNumPhases; ++pi)
        for (std::size_t point = 0; point < kNumPoints; ++point)
            if (!seen[pi][point])
                throw Error(ErrorKind::Structural,
                            "missing " + point_name(point) + "/CP" + std::to_string(kPhases[pi]));
    return set;
}

} // namespace

void ViewGeometry::validate() const {
    constexpr double tol = 1e-6;
    if (!origin.allFinite() || !row_dir.allFinite() || !col_dir.allFinite() ||
        !std::isfinite(row_spacing) || !std::isfinite(col_spacing))
        throw Error(ErrorKind::Input, "view geometry has non-finite values");
    if (std::abs(row_dir.norm() - 1.0) > tol || std::abs(col_dir.norm() - 1.0) > tol)
        throw Error(ErrorKind::Input, "view direction cosines must be unit vectors");
    if (std::abs(row_dir.dot(col_dir)) > tol)
        throw Error(ErrorKind::Input, "view direction cosines must be orthogonal");
    if (!(row_spacing > 0.0) || !(col_spacing > 0.0))
        throw Error(ErrorKind::Input, "pixel spacing must be positive");
}

Eigen::Vector3d pixel_to_patient(const PixelCoordinate& pixel, const ViewGeometry& geom) {
    if (!std::isfinite(pixel.row) || !std::isfinite(pixel.col))
        throw Error(ErrorKind::Input, "non-finite pixel coordinate");
    geom.validate();
    return geom.origin + (pixel.col * geom.col_spacing) * geom.row_dir +
           (pixel.row * geom.row_spacing) * geom.col_dir;
}

std::vector<LandmarkSet> parse_dataset(const std::string& text, std::vector<PatientError>* errors) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("landmark file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != kLandmarkSchema)
        throw Error(ErrorKind::Schema, std::string("expected schema '") + kLandmarkSchema + "'");
    if (!doc.contains("patients") || !doc["patients"].is_array())
        throw Error(ErrorKind::Schema, "missing 'patients' array");

    std::vector<LandmarkSet> sets;
    std::size_t index = 0;
    for (const auto& p : doc["patients"]) {
        std::string id = "#" + std::to_string(index++);
        if (p.is_object() && p.contains("id") && p["id"].is_string()) id = p["id"].get<std::string>();
        try {
            try {
                sets.push_back(parse_patient(p));
            } catch (const json::exception& e) {
                throw Error(ErrorKind::Schema, e.what());
            }
        } catch (const Error& e) {
            if (!errors) throw Error(e.kind(), "patient " + id + ": " + e.what());
            errors->push_back({id, e.what()});
        }
    }
    return sets;
}

std::vector<LandmarkSet> load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path), nullptr);
}

std::vector<LandmarkSet> load_dataset(const std::filesystem::path& path,
                                      std::vector<PatientError>& errors) {
    return parse_dataset(read_file(path), &errors);
}

std::string serialize_dataset(const std::vector<LandmarkSet>& sets, const Provenance* prov) {
    json patients = json::array();
    for (const auto& set : sets) {
        json points = json::array();
        for (std::size_t pi = 0; pi < kNumPhases; ++pi)
            for (std::size_t point = 0; point < kNumPoints; ++point) {
                const auto& v = set.points[pi][point];
                points.push_back({{"name", point_name(point)},
                                  {"phase", kPhases[pi]},
                                  {"patient_xyz", {v.x(), v.y(), v.z()}}});
            }
        patients.push_back(
            {{"id", set.patient_id}, {"label", static_cast<int>(set.label)}, {"points", std::move(points)}});
    }
    json doc = {{"schema", kLandmarkSchema}, {"patients", std::move(patients)}};
    if (prov)
        doc["provenance"] = {{"tool", kToolName}, {"version", kToolVersion}, {"seed", prov->seed},
                             {"config", prov->config_hash}};
    return doc.dump(1) + "\n";
}

void save_dataset(const std::filesystem::path& path, const std::vector<LandmarkSet>& sets,
                  const Provenance* prov) {
    write_file_atomic(path, serialize_dataset(sets, prov));
}

} // namespace annulus
