#pragma once

// Persistence: atomic file writes, CSV series, JSON documents and binary
// checkpoints.
//
// Checkpoint layout (little-endian, as written by the host):
//   char[8]  "QNLSCKPT"
//   uint32   format version (1)
//   uint32   n
//   float64  L
//   float64  t
//   uint64   FNV-1a hash of the coefficients (params_hash)
//   complex128[3][n][n]  u_1, u_2, u_3, row-major

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/diagnose.hpp"
#include "qnls/grid.hpp"
#include "qnls/model.hpp"
#include "qnls/profile.hpp"

namespace qnls {

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// Columns t, sup_u, sup_u_t, sup_u_tlogt, ledger, ledger_drift_rel, phi,
/// logt_sqrtphi, logt2_phi, r_sup, xnorm_ms0, xnorm_m0s.
std::string diagnostics_csv(const DiagnosticsSeries& series);

/// Columns tau, re_a1, im_a1, re_a2, im_a2, re_a3, im_a3, nu_A, tau_nu_A, tau2_phi.
std::string profile_csv(const std::vector<ProfileState>& trajectory, const SystemParams& p);

std::uint64_t params_hash(const SystemParams& p);

struct Checkpoint {
  FieldState state;
  std::uint64_t params_hash = 0;
};

void write_checkpoint(const std::filesystem::path& path, const FieldState& state,
                      const SystemParams& p);
/// Throws ParseError on a malformed or truncated file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace qnls
