#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <annulus/io.hpp>
#include <annulus/landmarks.hpp>

namespace annulus {

inline constexpr const char* kLandmarkSchema = "annulus-landmarks/1";

/// In-plane geometry of one long-axis view, as carried by the DICOM
/// ImagePositionPatient / ImageOrientationPatient / PixelSpacing attributes.
struct ViewGeometry {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d row_dir = Eigen::Vector3d::UnitX(); // direction of increasing column index
    Eigen::Vector3d col_dir = Eigen::Vector3d::UnitY(); // direction of increasing row index
    double row_spacing = 1.0;                           // mm between rows
    double col_spacing = 1.0;                           // mm between columns

    /// Throws Error(Input) unless the direction cosines are orthonormal
    /// within 1e-6 and both spacings are positive.
    void validate() const;
};

struct PixelCoordinate {
    double row = 0.0;
    double col = 0.0;
};

/// origin + col * col_spacing * row_dir + row * row_spacing * col_dir
Eigen::Vector3d pixel_to_patient(const PixelCoordinate& pixel, const ViewGeometry& geom);

struct PatientError {
    std::string patient_id;
    std::string message;
};

/// Strict loader: the first malformed patient aborts with an Error.
std::vector<LandmarkSet> load_dataset(const std::filesystem::path& path);

/// Lenient loader: malformed patients are reported in `errors` and skipped.
/// File-level problems (unreadable, wrong schema tag) still throw.
std::vector<LandmarkSet> load_dataset(const std::filesystem::path& path,
                                      std::vector<PatientError>& errors);

/// Parses a landmark document already held in memory.
std::vector<LandmarkSet> parse_dataset(const std::string& text, std::vector<PatientError>* errors);

/// Serializes landmark sets as patient_xyz entries (shortest round-trip decimals).
/// A provenance block is added when `prov` is given.
std::string serialize_dataset(const std::vector<LandmarkSet>& sets, const Provenance* prov = nullptr);

void save_dataset(const std::filesystem::path& path, const std::vector<LandmarkSet>& sets,
                  const Provenance* prov = nullptr);

} // namespace annulus
