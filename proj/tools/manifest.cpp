#include "manifest.hpp"

#include <json.hpp>

#include "confls/errors.hpp"
#include "confls/text_io.hpp"

namespace confls::cli {

std::vector<std::string> RunManifest::to_args() const {
  std::vector<std::string> args{command};
  for (const auto& [flag, value] : flags) {
    args.push_back("--" + flag);
    args.push_back(value);
  }
  return args;
}

std::string serialize_manifest(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["tool"] = "confls";
  j["version"] = manifest.tool_version;
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  for (const auto& [flag, value] : manifest.flags) flags[flag] = value;
  j["flags"] = std::move(flags);
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& in : manifest.inputs) {
    inputs.push_back({{"flag", in.flag}, {"path", in.path}, {"fnv1a64", in.digest}});
  }
  j["inputs"] = std::move(inputs);
  j["outputs"] = manifest.outputs;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text, const std::string& source) {
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    RunManifest m;
    m.tool_version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [flag, value] : j.at("flags").items()) m.flags.emplace_back(flag, value.get<std::string>());
    for (const auto& in : j.at("inputs")) {
      m.inputs.push_back({in.at("flag").get<std::string>(), in.at("path").get<std::string>(),
                          in.at("fnv1a64").get<std::string>()});
    }
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const std::exception& e) {
    throw DataError(source + ": bad manifest: " + e.what());
  }
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_file(path, serialize_manifest(manifest));
}

RunManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

std::string file_digest(const std::filesystem::path& path) { return fnv1a_hex(read_file(path)); }

}  // namespace confls::cli
