#pragma once

// JSON encodings of cavity profiles and perturbation directions.
//
// Profile:   {"version", "c", "eps_outer", "eps_lo", "eps_hi",
//             "layers": [{"thickness", "eps"}], "metadata": {string: string}}
// Direction: {"version", "segments": [{"length", "value"}]}
//
// Floats are written with 17 significant digits in scientific notation so
// that every double survives a round trip.

#include <filesystem>
#include <map>
#include <string>

#include "qnm/cavity.hpp"

namespace qnm {

inline constexpr const char* kProfileVersion = "1";

struct ProfileDocument {
  std::string version = kProfileVersion;
  Cavity cavity;
  std::map<std::string, std::string> metadata;
};

/// "%.16e": 17 significant digits.
std::string format_double(double value);

std::string to_json(const ProfileDocument& doc);
ProfileDocument profile_from_json(const std::string& text);

std::string to_json(const StepFunction& direction);
StepFunction direction_from_json(const std::string& text);

ProfileDocument read_profile(const std::filesystem::path& path);
void write_profile(const std::filesystem::path& path, const ProfileDocument& doc);
StepFunction read_direction(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qnm
