#include "nldiff/io.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "nldiff/errors.hpp"

namespace nldiff {

namespace {
constexpr char kMagic[7] = {'N', 'L', 'D', 'I', 'F', 'F', '1'};
}

CsvWriter::CsvWriter(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  file_ = f;
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(static_cast<FILE*>(file_));
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvWriter::comment(const std::string& text) {
  std::fprintf(static_cast<FILE*>(file_), "# %s\r\n", text.c_str());
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  FILE* f = static_cast<FILE*>(file_);
  for (std::size_t i = 0; i < cells.size(); ++i)
    std::fprintf(f, "%s%s", i ? "," : "", cells[i].c_str());
  std::fputs("\r\n", f);
}

void CsvWriter::numeric_row(const std::vector<double>& cells) {
  FILE* f = static_cast<FILE*>(file_);
  char buf[40];
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", cells[i]);
    std::fprintf(f, "%s%s", i ? "," : "", buf);
  }
  std::fputs("\r\n", f);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& metadata) {
  CsvWriter csv(path);
  for (const auto& m : metadata) csv.comment(m);
  const int n = traj.states.empty() ? 0 : traj.states.front().u.size();
  std::vector<std::string> header;
  header.emplace_back("t");
  for (int i = 1; i <= n; ++i) header.push_back("coeff_" + std::to_string(i));
  header.emplace_back("l2_sq");
  header.emplace_back("grad_sq");
  header.emplace_back("ht_sq");
  csv.row(header);
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    std::vector<double> cells;
    cells.reserve(static_cast<std::size_t>(n) + 4);
    cells.push_back(traj.states[s].t);
    for (double c : traj.states[s].u.coeffs) cells.push_back(c);
    const auto& row = traj.ledger[s];
    cells.push_back(row.l2_sq);
    cells.push_back(row.grad_sq);
    cells.push_back(row.l2_sq + row.eps_grad_sq);
    csv.numeric_row(cells);
  }
}

void write_snapshot(const std::string& path, const Trajectory& traj) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fwrite(kMagic, 1, sizeof kMagic, f);
  const std::uint64_t n = traj.states.empty() ? 0 : static_cast<std::uint64_t>(traj.states.front().u.size());
  const std::uint64_t count = static_cast<std::uint64_t>(traj.states.size());
  std::fwrite(&n, sizeof n, 1, f);
  std::fwrite(&count, sizeof count, 1, f);
  for (const auto& st : traj.states) {
    std::fwrite(&st.t, sizeof(double), 1, f);
    std::fwrite(st.u.coeffs.data(), sizeof(double), st.u.coeffs.size(), f);
  }
  std::fclose(f);
}

Trajectory read_snapshot(const std::string& path, const SpectrumPtr& spectrum) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[sizeof kMagic];
  if (std::fread(magic, 1, sizeof magic, f) != sizeof magic ||
      std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    std::fclose(f);
    throw std::runtime_error(path + ": not a snapshot file");
  }
  std::uint64_t n = 0, count = 0;
  if (std::fread(&n, sizeof n, 1, f) != 1 || std::fread(&count, sizeof count, 1, f) != 1) {
    std::fclose(f);
    throw std::runtime_error(path + ": truncated snapshot header");
  }
  if (static_cast<int>(n) != spectrum->mode_count()) {
    std::fclose(f);
    throw std::invalid_argument(path + ": snapshot mode count does not match the spectrum");
  }
  Trajectory traj;
  traj.scheme_id = "snapshot";
  for (std::uint64_t s = 0; s < count; ++s) {
    double t = 0.0;
    std::vector<double> coeffs(n);
    if (std::fread(&t, sizeof(double), 1, f) != 1 ||
        std::fread(coeffs.data(), sizeof(double), coeffs.size(), f) != coeffs.size()) {
      std::fclose(f);
      throw std::runtime_error(path + ": truncated snapshot payload");
    }
    traj.states.push_back({t, SpectralField(spectrum, std::move(coeffs))});
    traj.ledger.push_back({});
  }
  std::fclose(f);
  return traj;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace nldiff
