#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pdmfc/config.hpp"
#include "pdmfc/dual.hpp"
#include "pdmfc/fields.hpp"
#include "pdmfc/simulator.hpp"

namespace pdmfc {

/// Write named columns of equal length as CSV (header + %.10g rows).
/// Output depends only on the values, so identical runs produce identical bytes.
void write_series_csv(const std::string& path, const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns);

/// Read back a numeric CSV written by this module. Returns per-column data and
/// optionally the header names. Throws IoError on malformed input.
std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  std::vector<std::string>* names = nullptr);

/// Long-format dump of a value or density field: time_h, mode, theta_C, value.
void write_field_csv(const std::string& path, const ValueField& field,
                     const std::string& value_name);

/// Long-format dump of switching rates with the safety part alongside:
/// time_h, from_mode, to_mode, theta_C, alpha, alpha_hat, total. Off-diagonal
/// pairs only.
void write_control_csv(const std::string& path, const ControlField& alpha,
                       const ScenarioConfig& cfg);

/// Sampled paths, long format: trajectory, time_h, mode, theta_C.
void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs,
                            const Grid& g);

/// Dual-loop history: iteration, grad_norm, w_estimate, tracking_rmse, wallclock_s.
void write_history_csv(const std::string& path, const std::vector<UzawaIterationRow>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// FNV-1a 64-bit content hash (stable across platforms; used in manifests).
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

} // namespace pdmfc
