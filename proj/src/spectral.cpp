#include "tripod/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace tripod {

namespace {

constexpr double kAsymmetryGate = 1e-3;
constexpr double kNegativeClampAbs = 1e-9;
constexpr double kTieTol = 1e-12;

std::vector<double> linspace(const SweepRange& r) {
  if (r.points == 0) throw OutOfRange("sweep range needs at least one point");
  if (!(r.min > 0.0) || !(r.max >= r.min)) {
    throw OutOfRange("sweep range must be positive and ordered");
  }
  std::vector<double> v(r.points);
  if (r.points == 1) {
    v[0] = r.min;
    return v;
  }
  const double step = (r.max - r.min) / static_cast<double>(r.points - 1);
  for (std::size_t i = 0; i < r.points; ++i) {
    v[i] = r.min + step * static_cast<double>(i);
  }
  return v;
}

}  // namespace

double ModeBasis::centroid(std::size_t i) const {
  const auto& w = grid.time_weights();
  const auto& t = grid.time_nodes();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < grid.n_t(); ++j) {
    const double p = w[j] * modes(static_cast<Eigen::Index>(j),
                                  static_cast<Eigen::Index>(i)) *
                     modes(static_cast<Eigen::Index>(j),
                           static_cast<Eigen::Index>(i));
    num += t[j] * p;
    den += p;
  }
  if (den <= 0.0) return 0.0;
  return num / den;
}

ModeBasis decompose(const KernelMatrix& cycle) {
  if (cycle.entries.rows() != cycle.entries.cols()) {
    throw AsymmetricKernel("decompose requires a square full-cycle kernel");
  }
  if (!cycle.input_time_reversed) {
    throw AsymmetricKernel(
        "decompose requires the reversed-input full-cycle kernel");
  }
  const Eigen::Index n = cycle.entries.rows();
  const Eigen::VectorXd s = cycle.row_weights.cwiseSqrt();
  Eigen::MatrixXd weighted = s.asDiagonal() * cycle.entries * s.asDiagonal();

  const double nrm = weighted.norm();
  const double defect =
      nrm == 0.0 ? 0.0 : (weighted - weighted.transpose()).norm() / nrm;
  if (defect > kAsymmetryGate) {
    throw AsymmetricKernel(
        "weighted cycle kernel asymmetry " + std::to_string(defect) +
        " exceeds 1e-3; check the retrieval direction of the composition");
  }

  const Eigen::MatrixXd sym = 0.5 * (weighted + weighted.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NonConvergence("eigensolver failed on the weighted cycle kernel");
  }

  Eigen::VectorXd mu = eig.eigenvalues();
  const double mu_scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  const double clamp = kNegativeClampAbs * mu_scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu[i] < 0.0) {
      if (mu[i] < -clamp) {
        throw AsymmetricKernel(
            "weighted cycle kernel is indefinite (eigenvalue " +
            std::to_string(mu[i]) +
            "); backward-retrieval cycle kernels are positive "
            "semidefinite — check the retrieval direction");
      }
      mu[i] = 0.0;
    }
  }

  ModeBasis basis;
  basis.grid = cycle.grid;
  basis.weighted_kernel = std::move(weighted);
  basis.symmetry_defect = defect;
  basis.modes.resize(n, n);
  basis.eigenvalues.resize(n);

  // unweighted modes, canonical sign (largest-|value| sample positive)
  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(i).cwiseQuotient(s);
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v[at] < 0.0) v = -v;
    phi.col(i) = v;
  }

  // order by lambda descending; ties resolved by earlier temporal centroid
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& wts = cycle.grid.time_weights();
  const auto& nodes = cycle.grid.time_nodes();
  auto centroid_of = [&](Eigen::Index col) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = wts[static_cast<std::size_t>(j)] * phi(j, col) * phi(j, col);
      num += nodes[static_cast<std::size_t>(j)] * p;
      den += p;
    }
    return den > 0.0 ? num / den : 0.0;
  };
  std::vector<double> centroids(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    centroids[static_cast<std::size_t>(i)] = centroid_of(i);
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double la = mu[a] * mu[a];
    const double lb = mu[b] * mu[b];
    if (std::abs(la - lb) > kTieTol) return la > lb;
    const double ca = centroids[static_cast<std::size_t>(a)];
    const double cb = centroids[static_cast<std::size_t>(b)];
    if (ca != cb) return ca < cb;
    return a < b;
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    basis.eigenvalues[i] = mu[src] * mu[src];
    basis.modes.col(i) = phi.col(src);
  }
  return basis;
}

std::pair<Eigen::MatrixXd, double> reconstruct(const ModeBasis& basis,
                                               std::size_t m) {
  const Eigen::Index n = basis.eigenvalues.size();
  if (m < 1 || m > static_cast<std::size_t>(n)) {
    throw OutOfRange("reconstruction rank must lie in [1, basis size]");
  }
  const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(
                                basis.grid.time_weights().data(), n)
                                .cwiseSqrt();
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd psi = basis.modes.col(ii).cwiseProduct(s);
    sym.noalias() +=
        std::sqrt(basis.eigenvalues[ii]) * (psi * psi.transpose());
  }
  const double residual = (sym - basis.weighted_kernel).norm();
  Eigen::MatrixXd entries =
      s.cwiseInverse().asDiagonal() * sym * s.cwiseInverse().asDiagonal();
  return {std::move(entries), residual};
}

ModeAmplitudes project(const FieldEnvelope& envelope, const ModeBasis& basis) {
  if (!envelope.grid.same_as(basis.grid)) {
    throw GridMismatch("envelope grid does not match basis grid");
  }
  const std::size_t n = basis.size();
  const auto& w = basis.grid.time_weights();
  ModeAmplitudes amps;
  amps.coefficients.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex acc(0.0, 0.0);
    for (std::size_t j = 0; j < basis.grid.n_t(); ++j) {
      acc += w[j] * basis.modes(static_cast<Eigen::Index>(j),
                                static_cast<Eigen::Index>(i)) *
             envelope.samples[j];
    }
    amps.coefficients[i] = acc;
  }
  return amps;
}

FieldEnvelope synthesize(const ModeBasis& basis, const ModeAmplitudes& amps) {
  if (amps.coefficients.size() > basis.size()) {
    throw OutOfRange("more coefficients than basis modes");
  }
  FieldEnvelope env(basis.grid);
  for (std::size_t i = 0; i < amps.coefficients.size(); ++i) {
    const Complex e = amps.coefficients[i];
    if (e == Complex(0.0, 0.0)) continue;
    for (std::size_t j = 0; j < basis.grid.n_t(); ++j) {
      env.samples[j] += e * basis.modes(static_cast<Eigen::Index>(j),
                                        static_cast<Eigen::Index>(i));
    }
  }
  return env;
}

FieldEnvelope mode_input_envelope(const ModeBasis& basis, std::size_t i) {
  if (i >= basis.size()) throw OutOfRange("mode index out of range");
  FieldEnvelope env(basis.grid);
  const std::size_t n = basis.grid.n_t();
  for (std::size_t j = 0; j < n; ++j) {
    env.samples[j] = basis.modes(static_cast<Eigen::Index>(n - 1 - j),
                                 static_cast<Eigen::Index>(i));
  }
  return env;
}

SweepTable sweep(const PhysicalParams& params, const SweepRange& t_range,
                 const SweepRange& l_range, std::size_t n_bins,
                 std::size_t workers) {
  const std::vector<double> ts = linspace(t_range);
  const std::vector<double> ls = linspace(l_range);
  SweepTable table;
  table.t_points = ts.size();
  table.l_points = ls.size();
  table.rows.resize(ts.size() * ls.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t jobs = table.rows.size();
  auto work = [&]() {
    try {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= jobs || failed.load()) return;
        const double T = ts[idx / ls.size()];
        const double L = ls[idx % ls.size()];
        const Grid grid = Grid::uniform(T, L, n_bins, n_bins);
        const auto mapping =
            build_mapping_kernel(params, grid, params.rabi_base, 1);
        const auto readout =
            build_readout_kernel(params, grid, Direction::backward, 1);
        const auto basis = decompose(compose_full_cycle(mapping, readout));
        SweepRow& row = table.rows[idx];
        row.T = T;
        row.L = L;
        row.lambda1 = basis.eigenvalues.size() > 0 ? basis.eigenvalues[0] : 0.0;
        row.lambda2 = basis.eigenvalues.size() > 1 ? basis.eigenvalues[1] : 0.0;
        row.lambda3 = basis.eigenvalues.size() > 2 ? basis.eigenvalues[2] : 0.0;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true);
    }
  };

  std::size_t n_workers = workers == 0
                              ? std::max<std::size_t>(
                                    std::thread::hardware_concurrency(), 1)
                              : workers;
  n_workers = std::min(std::max<std::size_t>(n_workers, 1), jobs);
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  table.best_index = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i].lambda1 > table.rows[table.best_index].lambda1) {
      table.best_index = i;
    }
  }
  return table;
}

}  // namespace tripod
