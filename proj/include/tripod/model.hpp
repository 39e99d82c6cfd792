#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "tripod/errors.hpp"

namespace tripod {

using Complex = std::complex<double>;

/// Physical constants of the memory cell in simulation units.
/// `coupling` is the collective coupling g*sqrt(N); `rabi_base` is the
/// common drive Rabi frequency Omega. The default convention sets both
/// to 1 and sweeps only the dimensionless cell length L and stage
/// duration T. coupling = 0 is allowed (decoupled medium, all-zero
/// kernels); rabi_base must stay positive.
struct PhysicalParams {
  double coupling = 1.0;
  double rabi_base = 1.0;
};

/// Discretization of one stage: n_t time samples over [0, T] and n_z
/// space samples over [0, L].
///
/// Sampling convention: time samples sit on the two Gauss-Legendre
/// collocation nodes of each of the n_t/2 steps (uniform weights T/n_t);
/// space samples sit on bin midpoints (uniform weights L/n_z). Both
/// weight sets are strictly positive and sum exactly to T and L. This
/// pairing makes the discrete excitation balance exact (see solver) and
/// the full-cycle operator contractive by construction.
class Grid {
 public:
  Grid() = default;
  /// Builds the uniform grid. n_t must be even (two collocation nodes
  /// per time step); n_t, n_z >= 2.
  static Grid uniform(double duration, double length, std::size_t n_t,
                      std::size_t n_z);

  double duration() const { return duration_; }
  double length() const { return length_; }
  std::size_t n_t() const { return n_t_; }
  std::size_t n_z() const { return n_z_; }

  const std::vector<double>& time_nodes() const { return time_nodes_; }
  const std::vector<double>& space_nodes() const { return space_nodes_; }
  const std::vector<double>& time_weights() const { return time_weights_; }
  const std::vector<double>& space_weights() const { return space_weights_; }

  /// Step length of the time integrator (two samples per step).
  double time_step() const { return duration_ * 2.0 / static_cast<double>(n_t_); }
  double space_step() const { return length_ / static_cast<double>(n_z_); }

  bool same_as(const Grid& other, double rel_tol = 1e-12) const;

  /// Collects violated invariants (empty when the grid is valid).
  std::vector<std::string> violations() const;

 private:
  double duration_ = 0.0;
  double length_ = 0.0;
  std::size_t n_t_ = 0;
  std::size_t n_z_ = 0;
  std::vector<double> time_nodes_, space_nodes_;
  std::vector<double> time_weights_, space_weights_;
};

/// Drive Rabi frequencies of the four protocol stages. All values are
/// real; the counter-phase of the second readout enters as the explicit
/// minus sign in the spin-wave mixing, not as a complex phase.
struct DriveSetting {
  double omega_w1 = 1.0;
  double omega_w2 = 1.0;
  double omega_r1 = 1.0;
  double omega_r2 = 0.0;
  double omega_r3 = 0.0;
  double omega_r4 = 1.0;

  /// True iff omega_r4 == omega_r1 and omega_r3 == omega_r2 (relative
  /// tolerance 1e-12 against rabi_base), i.e. the 2x2 mode map is
  /// orthogonal up to the sqrt(lambda) contraction.
  bool unitary_mode(double rabi_base, double rel_tol = 1e-12) const;

  std::vector<std::string> violations(double rabi_base,
                                      double rel_tol = 1e-12) const;
};

/// Complex signal-field amplitude sampled on the grid's time nodes at a
/// fixed cell face.
struct FieldEnvelope {
  Grid grid;
  std::vector<Complex> samples;

  FieldEnvelope() = default;
  explicit FieldEnvelope(const Grid& g)
      : grid(g), samples(g.n_t(), Complex(0.0, 0.0)) {}
  FieldEnvelope(const Grid& g, std::vector<Complex> s);

  /// Weighted squared norm  sum_j w_j |a_j|^2.
  double norm2() const;
  bool is_real(double tol = 0.0) const;
};

/// Collective ground-state spin wave b and excited-state coherence c
/// sampled on the grid's space nodes.
struct SpinWaveState {
  Grid grid;
  std::vector<Complex> b;
  std::vector<Complex> c;

  SpinWaveState() = default;
  explicit SpinWaveState(const Grid& g)
      : grid(g), b(g.n_z(), Complex(0.0, 0.0)), c(g.n_z(), Complex(0.0, 0.0)) {}

  /// Weighted excitation norm  sum_k w_k (|b_k|^2 + |c_k|^2).
  double excitation_norm2() const;
  double b_norm2() const;
  double c_norm2() const;
};

/// A configuration that passed validate_config.
struct ValidatedConfig {
  PhysicalParams params;
  Grid grid;
  DriveSetting drive;
  bool unitary_mode = false;
};

/// Checks every type invariant of (params, grid, drive). Returns the
/// validated configuration or throws InvalidParams / InvalidGrid /
/// InvalidDrive carrying every violated invariant of that category
/// (grid violations take precedence, then params, then drive).
ValidatedConfig validate_config(const PhysicalParams& params, const Grid& grid,
                                const DriveSetting& drive);

/// Non-throwing variant: all violations across categories, empty if valid.
std::vector<std::string> config_violations(const PhysicalParams& params,
                                           const Grid& grid,
                                           const DriveSetting& drive);

/// Readout drive for a target splitting angle theta in [0, pi/2]:
/// omega_r1 = omega_r4 = Omega cos(theta), omega_r2 = omega_r3 =
/// Omega sin(theta); both write drives equal Omega. The result satisfies
/// the Rabi normalization and the unitary-mode condition.
DriveSetting theta_to_rabi(double theta, double rabi_base);

/// Splitting angle realized by a unitary-mode drive acting on mode i:
/// the direction angle atan2(omega_r2, omega_r1) together with the
/// contraction sqrt(lambda_i). For lambda_i < 1 the realized
/// (cos, sin) pair has norm sqrt(lambda_i) < 1, so the two numbers are
/// reported separately.
struct RealizedAngle {
  double direction = 0.0;    ///< atan2(omega_r2, omega_r1)
  double contraction = 1.0;  ///< sqrt(lambda_i)
};

RealizedAngle rabi_to_theta(const DriveSetting& drive, double rabi_base,
                            double lambda_i);

/// Gaussian test pulse exp(-(t-center)^2 / (2 sigma^2)) sampled on the
/// grid's time nodes.
FieldEnvelope gaussian_envelope(const Grid& grid, double center, double sigma,
                                Complex amplitude = Complex(1.0, 0.0));

}  // namespace tripod
