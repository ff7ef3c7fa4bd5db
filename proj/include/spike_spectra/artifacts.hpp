#pragma once

#include <cstdint>
#include <string>

#include "spike_spectra/configuration.hpp"
#include "spike_spectra/ground_state.hpp"
#include "spike_spectra/kernels.hpp"
#include "spike_spectra/matrices.hpp"
#include "spike_spectra/spectral.hpp"

namespace spikes {

inline constexpr int kSchemaVersion = 1;

// FNV-1a 64-bit content fingerprint, rendered as 16 hex digits. Used for
// config hashes and stage caching; not cryptographic.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);
std::string file_hash(const std::string& path);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& contents);

// Shortest round-trip double formatting (%.17g with exactness check).
std::string format_double(double x);

// profile.json
std::string profile_to_json(const RadialProfile& profile,
                            const std::string& config_hash);
RadialProfile profile_from_json(const std::string& json_text);

// kernels.csv: comment line with metadata, then header s,psi,psi1,psi2.
std::string kernel_table_to_csv(const KernelTable& table,
                                const std::string& config_hash,
                                const std::string& profile_hash);
KernelTable kernel_table_from_csv(const std::string& csv_text);

// config.json
std::string configuration_to_json(const SpikeConfiguration& config,
                                  const std::string& config_hash);
SpikeConfiguration configuration_from_json(const std::string& json_text);

// matrix CSV (dense values) + JSON manifest (layout, scale, sigmas).
std::string matrix_to_csv(const BlockMatrix& matrix,
                          const std::string& config_hash);
std::string matrix_manifest_json(const BlockMatrix& matrix,
                                 const std::string& config_hash);

// per-frequency determinant table CSV: j, det_numeric, det_closed_form, rel_err
std::string det_table_to_csv(const std::vector<DetComparison>& rows,
                             const std::string& matrix_id,
                             const std::string& config_hash);

// gap plot data CSV: matrix_id, ell, kernel_dim, gap
std::string gap_rows_to_csv(const std::vector<std::tuple<std::string, double, int, double>>& rows,
                            const std::string& config_hash);

std::string spectral_report_to_json(const NondegeneracyReport& report,
                                    const std::string& config_hash);

}  // namespace spikes
