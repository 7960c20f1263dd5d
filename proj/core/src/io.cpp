#include "lyapvec/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lyapvec/error.hpp"

namespace lyapvec::io {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'Y', 'A', 'P', 'V', 'E', 'C', '\0'};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void header(PayloadKind kind) {
    bytes_.insert(bytes_.end(), kMagic.begin(), kMagic.end());
    u32(kFormatVersion);
    u32(static_cast<std::uint32_t>(kind));
  }
  // Row-major regardless of Eigen's storage order.
  void matrix(const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  void header(PayloadKind expected) {
    need(kMagic.size());
    if (std::memcmp(bytes_.data(), kMagic.data(), kMagic.size()) != 0) {
      throw Error(ErrorCode::kIo, "not a lyapvec container (bad magic)");
    }
    pos_ = kMagic.size();
    const auto version = u32();
    if (version != kFormatVersion) throw Error(ErrorCode::kIo, "unsupported container version " + std::to_string(version));
    const auto kind = u32();
    if (kind != static_cast<std::uint32_t>(expected)) {
      throw Error(ErrorCode::kIo, "container holds payload kind " + std::to_string(kind) + ", expected " +
                                      std::to_string(static_cast<std::uint32_t>(expected)));
    }
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    }
    return m;
  }
  void finish() const {
    if (pos_ != bytes_.size()) throw Error(ErrorCode::kIo, "trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorCode::kIo, "truncated container");
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// -----------------------------------------------------------------------------
// Trajectory body: u32 model kind | u32 d | u32 n_params | f64 params[n_params] | f64 t0 |
//                  f64 solver_step | f64 save_interval | u32 dynamical | u64 count | f64 states[count][d]

std::vector<std::uint8_t> encode_trajectory(const models::Trajectory& trajectory) {
  Writer w;
  w.header(PayloadKind::kTrajectory);
  const auto& model = trajectory.model();
  w.u32(static_cast<std::uint32_t>(model.kind()));
  w.u32(static_cast<std::uint32_t>(model.dimension()));
  w.u32(static_cast<std::uint32_t>(model.params().size()));
  for (double p : model.params()) w.f64(p);
  w.f64(trajectory.t0());
  w.f64(trajectory.solver_step());
  w.f64(trajectory.save_interval());
  w.u32(trajectory.dynamical() ? 1U : 0U);
  w.u64(trajectory.size());
  w.matrix(trajectory.states().transpose());
  return w.take();
}

void write_trajectory(const std::filesystem::path& path, const models::Trajectory& trajectory) {
  write_bytes(path, encode_trajectory(trajectory));
}

models::Trajectory read_trajectory(const std::filesystem::path& path) {
  Reader r(read_bytes(path));
  r.header(PayloadKind::kTrajectory);
  const auto kind = static_cast<models::ModelKind>(r.u32());
  if (kind != models::ModelKind::kLorenz63 && kind != models::ModelKind::kLorenz96) {
    throw Error(ErrorCode::kIo, "unknown model kind in trajectory container");
  }
  const auto d = static_cast<int>(r.u32());
  std::vector<double> params(r.u32());
  for (double& p : params) p = r.f64();
  const double t0 = r.f64();
  const double solver_step = r.f64();
  const double save_interval = r.f64();
  const bool dynamical = r.u32() != 0;
  const auto count = static_cast<Eigen::Index>(r.u64());
  Matrix states = r.matrix(count, d).transpose();
  r.finish();
  return models::Trajectory(models::ModelSpec::from_parts(kind, d, std::move(params)), t0, solver_step,
                            save_interval, std::move(states), dynamical);
}

// -----------------------------------------------------------------------------
// LyapunovSet body: u32 d | u32 m | u64 frames | u32 qr_interval | u64 first_sample | f64 save_interval |
//                   f64 t_first | f64 exponents[m] | per frame: B[d][m], U[m][m], C[d][m]

std::vector<std::uint8_t> encode_lyapunov_set(const ginelli::LyapunovSet& set) {
  Writer w;
  w.header(PayloadKind::kLyapunovSet);
  w.u32(static_cast<std::uint32_t>(set.dimension()));
  w.u32(static_cast<std::uint32_t>(set.vectors()));
  w.u64(set.size());
  w.u32(static_cast<std::uint32_t>(set.qr_interval));
  w.u64(set.first_sample);
  w.f64(set.save_interval);
  w.f64(set.t_first);
  for (Eigen::Index i = 0; i < set.exponents.size(); ++i) w.f64(set.exponents(i));
  for (std::size_t k = 0; k < set.size(); ++k) {
    w.matrix(set.blvs[k]);
    w.matrix(set.coefficients[k]);
    w.matrix(set.clvs[k]);
  }
  return w.take();
}

void write_lyapunov_set(const std::filesystem::path& path, const ginelli::LyapunovSet& set) {
  write_bytes(path, encode_lyapunov_set(set));
}

ginelli::LyapunovSet read_lyapunov_set(const std::filesystem::path& path) {
  Reader r(read_bytes(path));
  r.header(PayloadKind::kLyapunovSet);
  ginelli::LyapunovSet set;
  const auto d = static_cast<Eigen::Index>(r.u32());
  const auto m = static_cast<Eigen::Index>(r.u32());
  const auto frames = r.u64();
  set.qr_interval = static_cast<int>(r.u32());
  set.first_sample = r.u64();
  set.save_interval = r.f64();
  set.t_first = r.f64();
  set.exponents.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) set.exponents(i) = r.f64();
  for (std::uint64_t k = 0; k < frames; ++k) {
    set.blvs.push_back(r.matrix(d, m));
    set.coefficients.push_back(r.matrix(m, m));
    set.clvs.push_back(r.matrix(d, m));
  }
  r.finish();
  return set;
}

// -----------------------------------------------------------------------------
// Observations body: u32 d | u32 p | f64 H[p][d] | f64 noise_std | f64 obs_interval | u64 seed |
//                    f64 t0 | u64 count | f64 values[count][p]

void write_observations(const std::filesystem::path& path, const enkf::ObservationSet& obs) {
  Writer w;
  w.header(PayloadKind::kObservations);
  w.u32(static_cast<std::uint32_t>(obs.model.h.cols()));
  w.u32(static_cast<std::uint32_t>(obs.model.h.rows()));
  w.matrix(obs.model.h);
  w.f64(obs.model.noise_std);
  w.f64(obs.model.obs_interval);
  w.u64(obs.seed);
  w.f64(obs.t0);
  w.u64(obs.size());
  w.matrix(obs.values.transpose());
  write_bytes(path, w.take());
}

enkf::ObservationSet read_observations(const std::filesystem::path& path) {
  Reader r(read_bytes(path));
  r.header(PayloadKind::kObservations);
  enkf::ObservationSet obs;
  const auto d = static_cast<Eigen::Index>(r.u32());
  const auto p = static_cast<Eigen::Index>(r.u32());
  obs.model.h = r.matrix(p, d);
  obs.model.noise_std = r.f64();
  obs.model.obs_interval = r.f64();
  obs.seed = r.u64();
  obs.t0 = r.f64();
  const auto count = static_cast<Eigen::Index>(r.u64());
  obs.values = r.matrix(count, p).transpose();
  r.finish();
  return obs;
}

// -----------------------------------------------------------------------------

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

ResultTable::ResultTable(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "table " + name_ + ": row width does not match the header");
  }
  for (const auto& c : cells) {
    if (c == "nan" || c == "-nan") throw Error(ErrorCode::kNonFinite, "table " + name_ + ": NaN in a published row");
  }
  rows_.push_back(std::move(cells));
}

void ResultTable::append(const ResultTable& other) {
  if (other.columns_ != columns_) throw Error(ErrorCode::kInvalidArgument, "append: schema mismatch");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << '\n';
  }
  return out.str();
}

void ResultTable::write_csv(const std::filesystem::path& path) const { write_text(path, to_csv()); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace lyapvec::io
