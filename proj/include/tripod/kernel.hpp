#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tripod/model.hpp"
#include "tripod/solver.hpp"

namespace tripod {

enum class Axis { time_in, time_out, space };

/// Dense discretization of a stage Green's function: entries(i, j) is the
/// Nystrom kernel value, so applying the operator to a sampled function u
/// is   out_i = sum_j entries(i, j) * col_weights_j * u_j ,
/// which reproduces the discrete solver exactly (columns are built from
/// unit-norm impulse responses, rescaled by the bin weight).
///
/// `input_time_reversed` marks kernels whose input axis is reversed time
/// (the full-cycle convention); it is set by compose_full_cycle only, and
/// apply() folds the reversal in exactly once.
struct KernelMatrix {
  Eigen::MatrixXd entries;  // rows = output bins, cols = input bins
  Axis row_axis = Axis::time_out;
  Axis col_axis = Axis::time_in;
  Eigen::VectorXd row_weights;
  Eigen::VectorXd col_weights;
  bool input_time_reversed = false;
  Direction direction = Direction::forward;  // retrieval direction (readout/cycle)
  Grid grid;
  PhysicalParams params;
};

/// Stored-spin-wave response (n_z x n_t) of the mapping stage with drive
/// omega_w. Column j is the b-profile produced by a unit-norm box impulse
/// in time bin j, divided by sqrt(w_j) (Nystrom scaling).
KernelMatrix build_mapping_kernel(const PhysicalParams& params,
                                  const Grid& grid, double omega_w,
                                  std::size_t workers = 1);

/// Emitted-envelope response (n_t x n_z) of a readout stage with effective
/// drive rabi_base. Column k is the envelope emitted by a unit-norm box
/// spin-wave impulse at space bin k (reflected first for backward
/// retrieval), divided by sqrt(w_k).
KernelMatrix build_readout_kernel(const PhysicalParams& params,
                                  const Grid& grid, Direction direction,
                                  std::size_t workers = 1);

/// Full-memory-cycle kernel (n_t x n_t): quadrature-weighted product of
/// the readout and mapping kernels with the input time axis reversed.
/// Requires a backward-retrieval readout kernel; the result is symmetric
/// under the weighted inner product.
KernelMatrix compose_full_cycle(const KernelMatrix& mapping,
                                const KernelMatrix& readout);

/// Nystrom application; folds in the stored time reversal when flagged.
std::vector<Complex> apply(const KernelMatrix& kernel,
                           const std::vector<Complex>& input);

/// Convenience wrapper for full-cycle kernels acting on envelopes.
FieldEnvelope apply_cycle(const KernelMatrix& cycle,
                          const FieldEnvelope& input);

/// Frobenius asymmetry of the weighted operator sqrt(W) K sqrt(W),
/// relative to its norm (0 for an all-zero kernel).
double symmetry_defect(const KernelMatrix& cycle);

/// Singular values of the weighted operator (passivity diagnostics).
Eigen::VectorXd weighted_singular_values(const KernelMatrix& kernel);

/// Worst relative L2 error between the kernel-pipeline output and a
/// direct two-stage simulation over the trial inputs.
double verify_composition(const PhysicalParams& params, const Grid& grid,
                          const DriveSetting& drive,
                          const std::vector<FieldEnvelope>& trial_inputs);

/// Same, reusing a prebuilt full-cycle kernel.
double verify_composition(const KernelMatrix& cycle,
                          const PhysicalParams& params, const Grid& grid,
                          const std::vector<FieldEnvelope>& trial_inputs);

}  // namespace tripod
