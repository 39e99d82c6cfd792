#include "tripod/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace tripod {

namespace {

std::size_t resolve_workers(std::size_t workers, std::size_t jobs) {
  if (workers == 0) {
    workers = std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
  }
  return std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(jobs, 1));
}

// Runs fn(first, last) over [0, jobs) split into contiguous chunks, one
// worker thread per chunk. Results are written by index, so the output is
// identical for any worker count.
template <typename Fn>
void parallel_chunks(std::size_t jobs, std::size_t workers, Fn&& fn) {
  workers = resolve_workers(workers, jobs);
  if (workers <= 1) {
    fn(std::size_t{0}, jobs);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (jobs + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t first = w * chunk;
    const std::size_t last = std::min(jobs, first + chunk);
    if (first >= last) break;
    threads.emplace_back([&fn, first, last, &first_error, &error_mutex] {
      try {
        fn(first, last);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteState(std::string(what) +
                         " contains non-finite entries");
  }
}

}  // namespace

KernelMatrix build_mapping_kernel(const PhysicalParams& params,
                                  const Grid& grid, double omega_w,
                                  std::size_t workers) {
  auto gv = grid.violations();
  if (!gv.empty()) throw InvalidGrid("invalid grid", gv);
  const std::size_t n_t = grid.n_t();
  const std::size_t n_z = grid.n_z();
  const auto& wt = grid.time_weights();

  KernelMatrix km;
  km.entries.resize(static_cast<Eigen::Index>(n_z),
                    static_cast<Eigen::Index>(n_t));
  km.row_axis = Axis::space;
  km.col_axis = Axis::time_in;
  km.row_weights = Eigen::Map<const Eigen::VectorXd>(
      grid.space_weights().data(), static_cast<Eigen::Index>(n_z));
  km.col_weights = Eigen::Map<const Eigen::VectorXd>(
      wt.data(), static_cast<Eigen::Index>(n_t));
  km.grid = grid;
  km.params = params;

  StagePropagator prop(grid, params.coupling, omega_w);
  parallel_chunks(n_t, workers, [&](std::size_t first, std::size_t last) {
    const std::size_t m = last - first;
    std::vector<double> input(n_t * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) input[(first + i) * m + i] = 1.0;
    std::vector<double> emitted(n_t * m), bT(n_z * m), cT(n_z * m);
    prop.run(m, input.data(), nullptr, false, emitted.data(), bT.data(),
             cT.data());
    for (std::size_t i = 0; i < m; ++i) {
      const double inv_w = 1.0 / wt[first + i];
      for (std::size_t k = 0; k < n_z; ++k) {
        km.entries(static_cast<Eigen::Index>(k),
                   static_cast<Eigen::Index>(first + i)) =
            bT[k * m + i] * inv_w;
      }
    }
  });
  check_finite(km.entries, "mapping kernel");
  return km;
}

KernelMatrix build_readout_kernel(const PhysicalParams& params,
                                  const Grid& grid, Direction direction,
                                  std::size_t workers) {
  auto gv = grid.violations();
  if (!gv.empty()) throw InvalidGrid("invalid grid", gv);
  const std::size_t n_t = grid.n_t();
  const std::size_t n_z = grid.n_z();
  const auto& wz = grid.space_weights();

  KernelMatrix km;
  km.entries.resize(static_cast<Eigen::Index>(n_t),
                    static_cast<Eigen::Index>(n_z));
  km.row_axis = Axis::time_out;
  km.col_axis = Axis::space;
  km.row_weights = Eigen::Map<const Eigen::VectorXd>(
      grid.time_weights().data(), static_cast<Eigen::Index>(n_t));
  km.col_weights = Eigen::Map<const Eigen::VectorXd>(
      wz.data(), static_cast<Eigen::Index>(n_z));
  km.direction = direction;
  km.grid = grid;
  km.params = params;

  StagePropagator prop(grid, params.coupling, params.rabi_base);
  const bool reflect = direction == Direction::backward;
  parallel_chunks(n_z, workers, [&](std::size_t first, std::size_t last) {
    const std::size_t m = last - first;
    std::vector<double> b0(n_z * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) b0[(first + i) * m + i] = 1.0;
    std::vector<double> emitted(n_t * m), bT(n_z * m), cT(n_z * m);
    prop.run(m, nullptr, b0.data(), reflect, emitted.data(), bT.data(),
             cT.data());
    for (std::size_t i = 0; i < m; ++i) {
      const double inv_w = 1.0 / wz[first + i];
      for (std::size_t j = 0; j < n_t; ++j) {
        km.entries(static_cast<Eigen::Index>(j),
                   static_cast<Eigen::Index>(first + i)) =
            emitted[j * m + i] * inv_w;
      }
    }
  });
  check_finite(km.entries, "readout kernel");
  return km;
}

KernelMatrix compose_full_cycle(const KernelMatrix& mapping,
                                const KernelMatrix& readout) {
  if (mapping.row_axis != Axis::space || mapping.col_axis != Axis::time_in) {
    throw GridMismatch("first factor is not a mapping kernel");
  }
  if (readout.row_axis != Axis::time_out || readout.col_axis != Axis::space) {
    throw GridMismatch("second factor is not a readout kernel");
  }
  if (!mapping.grid.same_as(readout.grid)) {
    throw GridMismatch("kernels were built on different grids");
  }
  if (mapping.params.coupling != readout.params.coupling ||
      mapping.params.rabi_base != readout.params.rabi_base) {
    throw GridMismatch("kernels were built with different parameters");
  }
  if (readout.direction != Direction::backward) {
    throw AsymmetricKernel(
        "full-cycle composition requires a backward-retrieval readout "
        "kernel");
  }
  if (mapping.input_time_reversed) {
    throw AsymmetricKernel(
        "mapping kernel already carries a reversed input axis");
  }

  KernelMatrix cycle;
  // physical map, then reverse the input columns (applied exactly once)
  Eigen::MatrixXd direct = readout.entries *
                           readout.col_weights.asDiagonal() * mapping.entries;
  cycle.entries = direct.rowwise().reverse();
  cycle.row_axis = Axis::time_out;
  cycle.col_axis = Axis::time_in;
  cycle.row_weights = readout.row_weights;
  cycle.col_weights = mapping.col_weights;
  cycle.input_time_reversed = true;
  cycle.direction = Direction::backward;
  cycle.grid = mapping.grid;
  cycle.params = mapping.params;
  return cycle;
}

std::vector<Complex> apply(const KernelMatrix& kernel,
                           const std::vector<Complex>& input) {
  const auto cols = kernel.entries.cols();
  if (static_cast<Eigen::Index>(input.size()) != cols) {
    throw GridMismatch("input length does not match kernel columns");
  }
  Eigen::VectorXd re(cols), im(cols);
  bool has_im = false;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Complex v =
        kernel.input_time_reversed ? input[input.size() - 1 - j] : input[j];
    re[j] = v.real();
    im[j] = v.imag();
    has_im = has_im || v.imag() != 0.0;
  }
  const Eigen::VectorXd wre = kernel.col_weights.cwiseProduct(re);
  const Eigen::VectorXd out_re = kernel.entries * wre;
  Eigen::VectorXd out_im = Eigen::VectorXd::Zero(kernel.entries.rows());
  if (has_im) {
    out_im = kernel.entries * kernel.col_weights.cwiseProduct(im);
  }
  std::vector<Complex> out(static_cast<std::size_t>(kernel.entries.rows()));
  for (Eigen::Index i = 0; i < kernel.entries.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = Complex(out_re[i], out_im[i]);
  }
  return out;
}

FieldEnvelope apply_cycle(const KernelMatrix& cycle,
                          const FieldEnvelope& input) {
  if (!input.grid.same_as(cycle.grid)) {
    throw GridMismatch("envelope grid does not match kernel grid");
  }
  FieldEnvelope out(cycle.grid);
  out.samples = apply(cycle, input.samples);
  return out;
}

double symmetry_defect(const KernelMatrix& cycle) {
  if (cycle.entries.rows() != cycle.entries.cols()) {
    throw GridMismatch("symmetry defect requires a square kernel");
  }
  const Eigen::VectorXd s = cycle.row_weights.cwiseSqrt();
  const Eigen::MatrixXd weighted =
      s.asDiagonal() * cycle.entries * s.asDiagonal();
  const double nrm = weighted.norm();
  if (nrm == 0.0) return 0.0;
  return (weighted - weighted.transpose()).norm() / nrm;
}

Eigen::VectorXd weighted_singular_values(const KernelMatrix& kernel) {
  const Eigen::VectorXd sr = kernel.row_weights.cwiseSqrt();
  const Eigen::VectorXd sc = kernel.col_weights.cwiseSqrt();
  const Eigen::MatrixXd weighted =
      sr.asDiagonal() * kernel.entries * sc.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted);
  return svd.singularValues();
}

double verify_composition(const KernelMatrix& cycle,
                          const PhysicalParams& params, const Grid& grid,
                          const std::vector<FieldEnvelope>& trial_inputs) {
  double worst = 0.0;
  const SpinWaveState empty(grid);
  for (const auto& trial : trial_inputs) {
    StageOptions opts;
    opts.check_balance = false;
    const auto mapped =
        run_mapping_stage(params, grid, params.rabi_base, trial, opts);
    SpinWaveState stored = mapped.stored;
    stored.c.assign(grid.n_z(), Complex(0.0, 0.0));
    const FieldEnvelope direct = run_readout_stage(
        params, grid, {params.rabi_base, 0.0}, Sign::plus, stored, empty,
        Direction::backward);
    const FieldEnvelope via_kernel = apply_cycle(cycle, trial);
    double diff2 = 0.0;
    double ref2 = 0.0;
    const auto& w = grid.time_weights();
    for (std::size_t j = 0; j < grid.n_t(); ++j) {
      diff2 += w[j] * std::norm(direct.samples[j] - via_kernel.samples[j]);
      ref2 += w[j] * std::norm(direct.samples[j]);
    }
    const double denom = std::max(
        {std::sqrt(ref2), 1e-12 * std::sqrt(trial.norm2()),
         std::numeric_limits<double>::min()});
    worst = std::max(worst, std::sqrt(diff2) / denom);
  }
  return worst;
}

double verify_composition(const PhysicalParams& params, const Grid& grid,
                          const DriveSetting& drive,
                          const std::vector<FieldEnvelope>& trial_inputs) {
  auto dv = drive.violations(params.rabi_base);
  if (!dv.empty()) throw InvalidDrive("invalid drive setting", dv);
  const auto mapping =
      build_mapping_kernel(params, grid, drive.omega_w1, 1);
  const auto readout =
      build_readout_kernel(params, grid, Direction::backward, 1);
  const auto cycle = compose_full_cycle(mapping, readout);
  return verify_composition(cycle, params, grid, trial_inputs);
}

}  // namespace tripod
