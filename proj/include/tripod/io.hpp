#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tripod/kernel.hpp"
#include "tripod/model.hpp"
#include "tripod/spectral.hpp"

namespace tripod {

/// Run configuration loaded from a flat key = value text file.
/// Unknown keys are rejected with a diagnostic naming the key.
struct RunConfig {
  PhysicalParams params;
  double T = 7.5;
  double L = 5.8;
  std::size_t n_t = 256;
  std::size_t n_z = 256;

  /// Drive specification: either a splitting angle or the explicit Rabi
  /// quadruple (mutually exclusive). Unset means theta = 0.
  std::optional<double> theta;
  std::optional<double> omega_r1, omega_r2, omega_r3, omega_r4;
  std::optional<double> omega_w1, omega_w2;

  double sweep_t_min = 1.0;
  double sweep_t_max = 30.0;
  std::size_t sweep_t_points = 10;
  double sweep_l_min = 0.5;
  double sweep_l_max = 10.0;
  std::size_t sweep_l_points = 10;
  std::size_t sweep_n = 128;

  std::size_t workers = 0;  ///< 0 = machine parallelism
  std::size_t mode_index = 0;
  std::string output_dir = ".";
  double balance_tol = 1e-6;  ///< conservation-check gate in `validate`

  Grid grid() const { return Grid::uniform(T, L, n_t, n_z); }
  DriveSetting drive() const;
};

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin);
RunConfig parse_config_file(const std::string& path);

/// Round-trip-exact float formatting (17 significant digits).
std::string fmt17(double v);
/// Human-table formatting (6 significant digits).
std::string fmt6(double v);

/// Writes via a temp file in the same directory plus an atomic rename, so
/// failed runs leave no partial output.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer);

void write_envelope_csv(const std::string& path, const FieldEnvelope& env);
FieldEnvelope read_envelope_csv(const std::string& path, const Grid& grid);

void write_kernel_csv(const std::string& path, const KernelMatrix& kernel);
KernelMatrix read_kernel_csv(const std::string& path);

void write_sweep_csv(const std::string& path, const SweepTable& table);
void write_eigenvalues_csv(const std::string& path, const ModeBasis& basis);
/// Mode-shape table: time nodes plus the leading `max_modes` eigenmodes.
void write_modes_csv(const std::string& path, const ModeBasis& basis,
                     std::size_t max_modes = 8);

}  // namespace tripod
