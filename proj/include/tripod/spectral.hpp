#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tripod/kernel.hpp"
#include "tripod/model.hpp"

namespace tripod {

/// Eigenmodes of the full-memory-cycle operator: cycle efficiencies
/// lambda_i (descending) with eigenfunctions phi_i sampled on the time
/// nodes, orthonormal under the weighted inner product.
struct ModeBasis {
  Grid grid;
  Eigen::VectorXd eigenvalues;      ///< lambda_i, descending
  Eigen::MatrixXd modes;            ///< n_t x n_t, column i = phi_i
  Eigen::MatrixXd weighted_kernel;  ///< sqrt(W) K sqrt(W) of the source kernel
  double symmetry_defect = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  /// Energy-weighted temporal centroid of mode i.
  double centroid(std::size_t i) const;
};

/// Mode coefficients of an envelope, e_i = <phi_i, a>_w.
struct ModeAmplitudes {
  std::vector<Complex> coefficients;
};

/// Solves the symmetric weighted eigenproblem of a full-cycle kernel.
/// The weighted-operator eigenvalues are sqrt(lambda_i); reported
/// eigenvalues are their squares. Throws AsymmetricKernel when the
/// symmetry defect exceeds 1e-3 or the operator is indefinite beyond
/// 1e-9 (both signal a wrong retrieval direction), NonConvergence on
/// eigensolver failure.
ModeBasis decompose(const KernelMatrix& cycle);

/// Rank-m truncation sum_{i<m} sqrt(lambda_i) phi_i phi_i^T, returned as
/// kernel-space entries together with the absolute Frobenius residual of
/// the weighted truncation against the stored weighted kernel.
std::pair<Eigen::MatrixXd, double> reconstruct(const ModeBasis& basis,
                                               std::size_t m);

ModeAmplitudes project(const FieldEnvelope& envelope, const ModeBasis& basis);

FieldEnvelope synthesize(const ModeBasis& basis, const ModeAmplitudes& amps);

/// The matched write-stage input for mode i: the eigenmode reversed onto
/// the input time axis (backward retrieval emits phi_i on the output
/// axis from this input).
FieldEnvelope mode_input_envelope(const ModeBasis& basis, std::size_t i);

struct SweepRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 1;
};

struct SweepRow {
  double T = 0.0;
  double L = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // row-major over (T, L)
  std::size_t t_points = 0;
  std::size_t l_points = 0;
  std::size_t best_index = 0;  // maximizing lambda1 (first on ties)

  const SweepRow& best() const { return rows.at(best_index); }
};

/// Builds the full-cycle kernel at every (T, L) grid point with
/// n_t = n_z = n_bins and records the top three efficiencies. Points are
/// independent jobs; rows are assembled by index, so the table does not
/// depend on the worker count.
SweepTable sweep(const PhysicalParams& params, const SweepRange& t_range,
                 const SweepRange& l_range, std::size_t n_bins,
                 std::size_t workers = 0);

}  // namespace tripod
