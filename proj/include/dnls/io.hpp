#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "dnls/modulation.hpp"
#include "dnls/nls_solver.hpp"

namespace dnls {

inline constexpr int kSchemaVersion = 1;

// Round to 12 significant digits so repeated runs serialize identically.
double round12(double v);
// Recursively rounds every floating-point number in a JSON document.
nlohmann::json rounded(const nlohmann::json& j);

// Writes {"schema_version", "config", ...body} with rounded numbers.
void write_json_report(const std::filesystem::path& path, const nlohmann::json& config, const nlohmann::json& body);

// CSV files start with "# schema_version: N" and "# config: {...}" comment lines.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const nlohmann::json& config, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  size_t ncol_;
};

void write_profile_csv(const std::filesystem::path& path, const nlohmann::json& config, const Field& Q);
void write_trajectory_csv(const std::filesystem::path& path, const nlohmann::json& config, const Trajectory& tr);
void write_modulation_csv(const std::filesystem::path& path, const nlohmann::json& config,
                          const ModulationTrajectory& mt);

struct SnapshotHeader {
  std::uint32_t schema_version = kSchemaVersion;
  double L = 0;
  std::int64_t N = 0;
  double q = 0;
  std::int32_t p = 0;
  double mu = 0;
  double dt = 0;
  std::int64_t stride = 1;
  std::int64_t count = 0;
  std::uint8_t precision = 16;  // bytes per complex sample: 8 (complex64) or 16 (complex128)
};

inline constexpr char kSnapshotMagic[8] = {'D', 'N', 'L', 'S', 'S', 'N', 'A', 'P'};

// Header, then `count` rows of N complex samples, then a trailer holding the config JSON
// (uint64 length followed by the text). The count is patched on close.
class SnapshotWriter {
 public:
  SnapshotWriter(const std::filesystem::path& path, SnapshotHeader header, const nlohmann::json& config);
  ~SnapshotWriter();
  void write(const Field& u);
  void close();

 private:
  std::ofstream out_;
  SnapshotHeader h_;
  std::string config_;
  std::streampos count_pos_;
  bool closed_ = false;
};

struct SnapshotFile {
  SnapshotHeader header;
  std::vector<CVec> rows;
  nlohmann::json config;
};
SnapshotFile read_snapshots(const std::filesystem::path& path);

}  // namespace dnls
