#pragma once

#include <filesystem>
#include <string>

#include "rbm/adjoint.hpp"
#include "rbm/optimizer.hpp"

namespace rbm {

/// Legacy-VTK (ASCII, STRUCTURED_POINTS) writer: cell data for scalars,
/// velocity interpolated to cell centers.
void write_vtk(const std::filesystem::path& path, const BoxGrid& g,
               const StateSolution& s, const std::string& title = "state");

/// RFC-4180 CSV writers: one row per cell with coordinates (state), one row
/// per face (boundary fields), one row per iterate (histories).
void write_state_csv(const std::filesystem::path& path, const BoxGrid& g,
                     const StateSolution& s);
void write_boundary_csv(const std::filesystem::path& path, const BoundaryField& f,
                        const std::string& value_prefix);
void write_history_csv(const std::filesystem::path& path,
                       const std::vector<double>& cost,
                       const std::vector<double>& steps,
                       const std::vector<double>& vi_residuals);

/// JSON reports with stable key order (UTF-8).
std::string solve_report_json(const SolveReport& rep);
std::string optimality_report_json(const OptimalityReport& rep);
std::string cost_breakdown_json(const CostBreakdown& cb);

void write_text(const std::filesystem::path& path, const std::string& body);

/// FNV-1a 64-bit content hash used by run manifests.
std::uint64_t fnv1a64(const std::string& data);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

/// Writes manifest.json: echo of the configuration plus per-artifact hashes.
void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& config_echo,
                    const std::vector<std::filesystem::path>& artifacts);

std::string format_double(double v);

}  // namespace rbm
