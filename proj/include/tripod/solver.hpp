#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tripod/model.hpp"
#include "tripod/simd/ops.hpp"

namespace tripod {

enum class Direction { forward, backward };
enum class Sign { plus, minus };

struct StageOptions {
  /// Excitation-balance gate for mapping stages; the scheme conserves the
  /// balance exactly, so any violation beyond roundoff indicates a broken
  /// state (NaNs are caught separately).
  double balance_tol = 1e-9;
  bool check_balance = true;
};

/// Outcome of a mapping stage.
struct StageResult {
  SpinWaveState stored;       ///< spin wave (b) and coherence (c) at t = T
  FieldEnvelope transmitted;  ///< field at z = L over the stage
  double residual_c_norm = 0.0;   ///< sqrt(sum w_z |c(T)|^2)
  double balance_residual = 0.0;  ///< relative excitation-balance defect
};

/// Batched integrator of the stage equations
///   dz a = -g c,   dt c = g a + om b,   dt b = -om c
/// over m independent real-valued columns. Time: 2-stage Gauss collocation
/// (4th order, conserves the discrete excitation balance exactly). Space:
/// the field is slaved to c by midpoint cumulative quadrature, whose
/// summation-by-parts identity closes the balance. Boundary inputs and
/// emitted samples live on the grid's collocation time nodes.
class StagePropagator {
 public:
  StagePropagator(const Grid& grid, double coupling, double omega);

  /// input: (n_t x m) row-major boundary samples, or nullptr (no input).
  /// b0: (n_z x m) row-major initial spin wave, or nullptr (empty medium);
  /// reflected in z first when `reflect` is set (backward retrieval).
  /// Outputs (always written): emitted (n_t x m), b_out and c_out (n_z x m).
  void run(std::size_t m, const double* input, const double* b0, bool reflect,
           double* emitted, double* b_out, double* c_out) const;

  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  double g_;
  double om_;
  simd::GaussStepConstants k_;
};

/// Writes one signal envelope into the empty medium with drive omega_w.
StageResult run_mapping_stage(const PhysicalParams& params, const Grid& grid,
                              double omega_w, const FieldEnvelope& input,
                              const StageOptions& opts = {});

/// Mixes the two stored spin waves with the drive pair per `sign`
/// (plus: (w_a b1 + w_b b2)/om, minus: (w_a b1 - w_b b2)/om), reflects
/// for backward retrieval, and reads the mixed wave out with effective
/// drive om = sqrt(w_a^2 + w_b^2). Returns the emitted envelope.
FieldEnvelope run_readout_stage(const PhysicalParams& params, const Grid& grid,
                                std::pair<double, double> omega_pair,
                                Sign sign, const SpinWaveState& stored_1,
                                const SpinWaveState& stored_2,
                                Direction direction,
                                const StageOptions& opts = {});

/// The in-phase / counter-phase spin-wave pair
///   b_plus  = (omega_r1 b1 + omega_r2 b2) / om
///   b_minus = (omega_r3 b1 - omega_r4 b2) / om .
/// Under the unitary-mode condition the map is orthogonal and preserves
/// the total excitation norm.
std::pair<SpinWaveState, SpinWaveState> mix_spin_waves(
    const SpinWaveState& b1, const SpinWaveState& b2,
    const DriveSetting& drive);

/// | input^2 - transmitted^2 - stored^2 | / max(input^2, eps)
double excitation_balance(const FieldEnvelope& input,
                          const StageResult& result);

}  // namespace tripod
