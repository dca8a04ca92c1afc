#include "qnm/profile_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qnm {

namespace {

using nlohmann::json;

std::string quoted(const std::string& s) { return json(s).dump(); }

double number_field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw StructuralError(std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw StructuralError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("malformed JSON: ") + e.what());
  }
}

std::string version_field(const json& root) {
  if (!root.contains("version")) throw StructuralError("missing field 'version'");
  const auto& v = root.at("version");
  if (!v.is_string()) throw StructuralError("field 'version' must be a string");
  auto version = v.get<std::string>();
  if (version != kProfileVersion) throw StructuralError("unsupported document version '" + version + "'");
  return version;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

std::string to_json(const ProfileDocument& doc) {
  const auto& cav = doc.cavity;
  std::ostringstream out;
  out << "{\n";
  out << "  \"version\": " << quoted(doc.version) << ",\n";
  out << "  \"c\": " << format_double(cav.c()) << ",\n";
  out << "  \"eps_outer\": " << format_double(cav.eps_outer()) << ",\n";
  out << "  \"eps_lo\": " << format_double(cav.eps_lo()) << ",\n";
  out << "  \"eps_hi\": " << format_double(cav.eps_hi()) << ",\n";
  out << "  \"layers\": [\n";
  const auto& layers = cav.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out << "    {\"thickness\": " << format_double(layers[i].thickness)
        << ", \"eps\": " << format_double(layers[i].eps) << "}" << (i + 1 < layers.size() ? "," : "") << "\n";
  }
  out << "  ],\n";
  out << "  \"metadata\": {";
  bool first = true;
  for (const auto& [key, value] : doc.metadata) {
    out << (first ? "\n" : ",\n") << "    " << quoted(key) << ": " << quoted(value);
    first = false;
  }
  out << (first ? "}" : "\n  }") << "\n}\n";
  return out.str();
}

ProfileDocument profile_from_json(const std::string& text) {
  const json root = parse(text);
  if (!root.is_object()) throw StructuralError("profile must be a JSON object");
  auto version = version_field(root);
  if (!root.contains("layers") || !root.at("layers").is_array()) {
    throw StructuralError("profile needs a 'layers' array");
  }
  std::vector<Layer> layers;
  for (const auto& item : root.at("layers")) {
    if (!item.is_object()) throw StructuralError("each layer must be an object");
    layers.push_back({number_field(item, "thickness"), number_field(item, "eps")});
  }
  const double c = root.contains("c") ? number_field(root, "c") : 1.0;
  Cavity cavity(std::move(layers), number_field(root, "eps_outer"), number_field(root, "eps_lo"),
                number_field(root, "eps_hi"), c);
  std::map<std::string, std::string> metadata;
  if (root.contains("metadata")) {
    const auto& meta = root.at("metadata");
    if (!meta.is_object()) throw StructuralError("'metadata' must be an object");
    for (auto it = meta.begin(); it != meta.end(); ++it) {
      if (!it.value().is_string()) throw StructuralError("metadata values must be strings");
      metadata.emplace(it.key(), it.value().get<std::string>());
    }
  }
  return {std::move(version), std::move(cavity), std::move(metadata)};
}

std::string to_json(const StepFunction& direction) {
  std::ostringstream out;
  out << "{\n  \"version\": " << quoted(kProfileVersion) << ",\n  \"segments\": [\n";
  const auto& steps = direction.steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out << "    {\"length\": " << format_double(steps[i].length) << ", \"value\": " << format_double(steps[i].value)
        << "}" << (i + 1 < steps.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

StepFunction direction_from_json(const std::string& text) {
  const json root = parse(text);
  if (!root.is_object()) throw StructuralError("direction must be a JSON object");
  version_field(root);
  if (!root.contains("segments") || !root.at("segments").is_array()) {
    throw StructuralError("direction needs a 'segments' array");
  }
  std::vector<Step> steps;
  for (const auto& item : root.at("segments")) {
    if (!item.is_object()) throw StructuralError("each segment must be an object");
    steps.push_back({number_field(item, "length"), number_field(item, "value")});
  }
  return StepFunction(std::move(steps));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw StructuralError("write to '" + path.string() + "' failed");
}

ProfileDocument read_profile(const std::filesystem::path& path) { return profile_from_json(read_text_file(path)); }

void write_profile(const std::filesystem::path& path, const ProfileDocument& doc) {
  write_text_file(path, to_json(doc));
}

StepFunction read_direction(const std::filesystem::path& path) { return direction_from_json(read_text_file(path)); }

}  // namespace qnm
