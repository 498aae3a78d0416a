#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace annulus {

inline constexpr const char* kToolName = "annulus";
inline constexpr const char* kToolVersion = ANNULUS_VERSION;

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Parses a full-precision decimal; throws Error(Schema) on malformed text.
double parse_double(std::string_view text);

/// 64-bit FNV-1a, rendered as 16 hex digits; used to fingerprint run configs.
std::string config_hash(std::string_view canonical_config);

} // namespace annulus

namespace annulus {

/// Run fingerprint embedded in every emitted artifact.
struct Provenance {
    std::uint64_t seed = 42;
    std::string config_hash;

    /// "annulus <version> seed=<seed> config=<hash>"
    std::string tag() const;
};

} // namespace annulus
