#include "dnls/io.hpp"

#include <cmath>
#include <cstdio>

#include "dnls/errors.hpp"

namespace dnls {

double round12(double v) {
  if (!std::isfinite(v) || v == 0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json rounded(const nlohmann::json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : j) out.push_back(rounded(e));
    return out;
  }
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
    return out;
  }
  return j;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_json_report(const std::filesystem::path& path, const nlohmann::json& config, const nlohmann::json& body) {
  nlohmann::json doc = body;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = config;
  auto out = open_out(path);
  out << rounded(doc).dump(2) << '\n';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const nlohmann::json& config,
                     const std::vector<std::string>& columns)
    : out_(open_out(path)), ncol_(columns.size()) {
  out_ << "# schema_version: " << kSchemaVersion << '\n';
  out_ << "# config: " << rounded(config).dump() << '\n';
  for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncol_) throw std::logic_error("CSV row width mismatch");
  char buf[32];
  for (size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", values[i]);
    out_ << (i ? "," : "") << buf;
  }
  out_ << '\n';
}

void write_profile_csv(const std::filesystem::path& path, const nlohmann::json& config, const Field& Q) {
  CsvWriter w(path, config, {"x", "re_Q", "im_Q"});
  for (int j = 0; j < Q.size(); ++j) w.row({Q.grid()->x(j), Q[j].real(), Q[j].imag()});
}

void write_trajectory_csv(const std::filesystem::path& path, const nlohmann::json& config, const Trajectory& tr) {
  CsvWriter w(path, config, {"t", "mass", "energy", "abs_u0"});
  for (size_t m = 0; m < tr.times.size(); ++m) w.row({tr.times[m], tr.mass[m], tr.energy[m], tr.origin_modulus[m]});
}

void write_modulation_csv(const std::filesystem::path& path, const nlohmann::json& config,
                          const ModulationTrajectory& mt) {
  CsvWriter w(path, config, {"t", "re_z", "im_z", "E", "re_zeta", "im_zeta", "ode_residual"});
  for (size_t m = 0; m < mt.t.size(); ++m)
    w.row({mt.t[m], mt.z[m].real(), mt.z[m].imag(), mt.E[m], mt.zeta[m].real(), mt.zeta[m].imag(),
           m < mt.ode_residual.size() ? mt.ode_residual[m] : 0.0});
}

namespace {

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("truncated snapshot file");
  return v;
}

}  // namespace

SnapshotWriter::SnapshotWriter(const std::filesystem::path& path, SnapshotHeader header, const nlohmann::json& config)
    : out_(open_out(path, std::ios::binary | std::ios::out)), h_(header), config_(rounded(config).dump()) {
  if (h_.precision != 8 && h_.precision != 16) throw ConfigError("snapshot precision must be 8 or 16 bytes");
  h_.count = 0;
  out_.write(kSnapshotMagic, 8);
  put(out_, h_.schema_version);
  put(out_, h_.L);
  put(out_, h_.N);
  put(out_, h_.q);
  put(out_, h_.p);
  put(out_, h_.mu);
  put(out_, h_.dt);
  put(out_, h_.stride);
  count_pos_ = out_.tellp();
  put(out_, h_.count);
  put(out_, h_.precision);
}

SnapshotWriter::~SnapshotWriter() {
  try {
    close();
  } catch (...) {
  }
}

void SnapshotWriter::write(const Field& u) {
  if (u.size() != h_.N) throw ConfigError("snapshot width does not match header N");
  if (h_.precision == 16) {
    out_.write(reinterpret_cast<const char*>(u.data()), sizeof(cplx) * u.size());
  } else {
    std::vector<std::complex<float>> buf(u.size());
    for (int j = 0; j < u.size(); ++j) buf[j] = std::complex<float>(u[j]);
    out_.write(reinterpret_cast<const char*>(buf.data()), sizeof(std::complex<float>) * buf.size());
  }
  ++h_.count;
}

void SnapshotWriter::close() {
  if (closed_) return;
  closed_ = true;
  const std::uint64_t len = config_.size();
  put(out_, len);
  out_.write(config_.data(), config_.size());
  out_.seekp(count_pos_);
  put(out_, h_.count);
  out_.close();
}

SnapshotFile read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot file " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, kSnapshotMagic)) throw ConfigError("not a snapshot file: bad magic");
  SnapshotFile f;
  auto& h = f.header;
  h.schema_version = get<std::uint32_t>(in);
  h.L = get<double>(in);
  h.N = get<std::int64_t>(in);
  h.q = get<double>(in);
  h.p = get<std::int32_t>(in);
  h.mu = get<double>(in);
  h.dt = get<double>(in);
  h.stride = get<std::int64_t>(in);
  h.count = get<std::int64_t>(in);
  h.precision = get<std::uint8_t>(in);
  if (h.schema_version != kSchemaVersion) throw ConfigError("unsupported snapshot schema version");
  for (std::int64_t m = 0; m < h.count; ++m) {
    CVec row(h.N);
    if (h.precision == 16) {
      in.read(reinterpret_cast<char*>(row.data()), sizeof(cplx) * h.N);
    } else {
      std::vector<std::complex<float>> buf(h.N);
      in.read(reinterpret_cast<char*>(buf.data()), sizeof(std::complex<float>) * h.N);
      for (std::int64_t j = 0; j < h.N; ++j) row[j] = cplx(buf[j]);
    }
    if (!in) throw ConfigError("truncated snapshot file");
    f.rows.push_back(std::move(row));
  }
  const auto len = get<std::uint64_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw ConfigError("truncated snapshot trailer");
  f.config = nlohmann::json::parse(text);
  return f;
}

}  // namespace dnls
