#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nldiff/integrator.hpp"
#include "nldiff/spectral.hpp"

namespace nldiff {

/// RFC-4180 style CSV writer (CRLF rows, numeric cells printed with %.17g so
/// reruns are byte-identical). Optional leading '#' metadata lines.
class CsvWriter {
public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void comment(const std::string& text);
  void row(const std::vector<std::string>& cells);
  void numeric_row(const std::vector<double>& cells);

  static std::string format(double v);

private:
  void* file_;
};

/// Trajectory table with header t, coeff_1..coeff_N, l2_sq, grad_sq, ht_sq.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& metadata = {});

/// Binary snapshot: magic "NLDIFF1", little-endian u64 mode count and state
/// count, then per state the time followed by the coefficients.
void write_snapshot(const std::string& path, const Trajectory& traj);
Trajectory read_snapshot(const std::string& path, const SpectrumPtr& spectrum);

/// FNV-1a 64-bit digest, used to stamp outputs with their config identity.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace nldiff
