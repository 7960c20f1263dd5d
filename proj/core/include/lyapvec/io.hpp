#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lyapvec/enkf.hpp"
#include "lyapvec/ginelli.hpp"
#include "lyapvec/models.hpp"

namespace lyapvec::io {

// Binary container, little-endian throughout:
//   magic "LYAPVEC\0" (8 bytes) | u32 version | u32 payload kind | kind-specific body
// Matrices are written row-major as IEEE-754 binary64; see docs/formats.md.
inline constexpr std::uint32_t kFormatVersion = 1;

enum class PayloadKind : std::uint32_t { kTrajectory = 1, kLyapunovSet = 2, kObservations = 3 };

void write_trajectory(const std::filesystem::path& path, const models::Trajectory& trajectory);
models::Trajectory read_trajectory(const std::filesystem::path& path);

void write_lyapunov_set(const std::filesystem::path& path, const ginelli::LyapunovSet& set);
ginelli::LyapunovSet read_lyapunov_set(const std::filesystem::path& path);

void write_observations(const std::filesystem::path& path, const enkf::ObservationSet& obs);
enkf::ObservationSet read_observations(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_trajectory(const models::Trajectory& trajectory);
std::vector<std::uint8_t> encode_lyapunov_set(const ginelli::LyapunovSet& set);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// CSV table with a fixed header; cells are stored already formatted.
class ResultTable {
 public:
  ResultTable(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void add_row(std::vector<std::string> cells);
  void append(const ResultTable& other);
  void set_unit(const std::string& column, const std::string& unit) { units_[column] = unit; }
  const std::map<std::string, std::string>& units() const { return units_; }

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::map<std::string, std::string> units_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lyapvec::io
