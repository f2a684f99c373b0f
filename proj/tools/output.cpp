#include "output.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "scene.hpp"

namespace casimir::cli {

void Timings::start(const std::string& stage) {
  current_ = stage;
  t0_ = std::chrono::steady_clock::now();
}

void Timings::stop() {
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  stages_.emplace_back(current_ + "_s", s);
}

void Metadata::describe(const Assembly& assembly) {
  meshes.clear();
  for (const auto& b : assembly.bodies()) meshes.push_back({b.num_vertices(), b.num_edges(), b.num_triangles()});
  if (assembly.size() > 1) delta = min_separation(assembly);
}

nlohmann::json Metadata::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = config_hash(config);
  j["meshes"] = nlohmann::json::array();
  for (const auto& m : meshes) j["meshes"].push_back({{"V", m[0]}, {"E", m[1]}, {"F", m[2]}});
  j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json(nullptr);
  j["timings"] = nlohmann::json::object();
  for (const auto& [name, s] : timings.stages()) j["timings"][name] = s;
  return j;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw std::logic_error("CSV row width does not match the header");
  rows_.push_back(values);
}

void CsvTable::write(std::ostream& out, const Metadata& meta) const {
  out << "# command: " << meta.command << '\n';
  out << "# config_hash: " << config_hash(meta.config) << '\n';
  for (std::size_t j = 0; j < meta.meshes.size(); ++j) {
    const auto& m = meta.meshes[j];
    out << "# body " << j + 1 << ": V=" << m[0] << " E=" << m[1] << " F=" << m[2] << '\n';
  }
  if (meta.delta) out << "# delta: " << format_double(*meta.delta) << '\n';
  for (const auto& [name, s] : meta.timings.stages()) out << "# timing " << name << ": " << format_double(s) << '\n';
  out << "# config: " << meta.config.dump() << '\n';
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Metadata& meta, const nlohmann::json& result) {
  nlohmann::json doc = meta.to_json();
  doc["result"] = result;
  out << doc.dump(2) << '\n';
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write(out);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

}  // namespace casimir::cli
