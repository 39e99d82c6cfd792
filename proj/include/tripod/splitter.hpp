#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tripod/model.hpp"
#include "tripod/solver.hpp"
#include "tripod/spectral.hpp"

namespace tripod {

struct ProtocolDiagnostics {
  double mp1_balance = 0.0;
  double mp2_balance = 0.0;
  double mp1_residual_c = 0.0;  ///< coherence norm discarded after MP1
  double mp2_residual_c = 0.0;
  double input_energy = 0.0;
  double output_energy = 0.0;
  std::vector<std::string> warnings;
};

struct ProtocolResult {
  FieldEnvelope a_plus;
  FieldEnvelope a_minus;
  ProtocolDiagnostics diag;
};

/// Full four-stage run: MP1 writes a1 with omega_w1, MP2 writes a2 with
/// omega_w2, RP1 reads the in-phase mixture backward with (omega_r1,
/// omega_r2), RP2 reads the counter-phase mixture backward with
/// (omega_r3, omega_r4). Residual excited-state coherence is discarded
/// between stages and surfaced in the diagnostics.
ProtocolResult run_protocol(const PhysicalParams& params, const Grid& grid,
                            const DriveSetting& drive,
                            const FieldEnvelope& a1, const FieldEnvelope& a2,
                            const StageOptions& opts = {});

/// Mode-wise 2x2 input-output matrix. `theta` is the drive's direction
/// angle; rows and columns follow (plus, minus) x (input 1, input 2).
struct SplitterMatrix {
  Eigen::Matrix2d entries = Eigen::Matrix2d::Zero();
  int mode_index = -1;        ///< 0-based; -1 for a parameterized ideal matrix
  double lambda = 1.0;
  double vacuum_budget = 0.0; ///< sqrt(1 - lambda)
  double theta = 0.0;
  double energy_ratio = 1.0;  ///< measured ||outputs||^2 / ||inputs||^2
  bool leakage_warning = false;

  /// max_k | sum_j entries(k,j)^2 + vacuum_budget^2 - 1 |
  double row_completeness_defect() const;
};

/// Measures the matrix by running the protocol with the mode-i envelope
/// on each input port in turn and projecting both outputs onto the mode
/// (on the output time axis). Sets leakage_warning when off-mode output
/// energy exceeds 5% of the on-mode energy.
SplitterMatrix empirical_matrix(const PhysicalParams& params, const Grid& grid,
                                const DriveSetting& drive,
                                const ModeBasis& basis, std::size_t mode_index,
                                const StageOptions& opts = {});

/// sqrt(lambda) * [[cos t, sin t], [sin t, -cos t]].
SplitterMatrix ideal_matrix(double theta, double lambda_i,
                            int mode_index = -1);

struct CompareReport {
  double max_entry_error = 0.0;
  double empirical_energy_ratio = 0.0;
  double expected_energy_ratio = 0.0;  ///< lambda of the ideal matrix
  double energy_ratio_error = 0.0;
  double orthogonality_defect = 0.0;  ///< ||M M^T - lambda I||_F
  double row_completeness_defect = 0.0;
  bool leakage_warning = false;
};

CompareReport compare(const SplitterMatrix& empirical,
                      const SplitterMatrix& ideal);

}  // namespace tripod
