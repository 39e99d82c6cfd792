#include "tripod/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tripod {

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // sqrt(3)/6

bool rel_close(double a, double b, double scale, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::abs(scale);
}

}  // namespace

Grid Grid::uniform(double duration, double length, std::size_t n_t,
                   std::size_t n_z) {
  Grid g;
  g.duration_ = duration;
  g.length_ = length;
  g.n_t_ = n_t;
  g.n_z_ = n_z;
  auto viol = g.violations();
  if (!viol.empty()) {
    throw InvalidGrid("invalid grid", viol);
  }
  const double h = g.time_step();
  g.time_nodes_.resize(n_t);
  for (std::size_t s = 0; s < n_t / 2; ++s) {
    g.time_nodes_[2 * s] = (static_cast<double>(s) + 0.5 - kGaussOffset) * h;
    g.time_nodes_[2 * s + 1] = (static_cast<double>(s) + 0.5 + kGaussOffset) * h;
  }
  g.time_weights_.assign(n_t, duration / static_cast<double>(n_t));
  const double hz = g.space_step();
  g.space_nodes_.resize(n_z);
  for (std::size_t k = 0; k < n_z; ++k) {
    g.space_nodes_[k] = (static_cast<double>(k) + 0.5) * hz;
  }
  g.space_weights_.assign(n_z, length / static_cast<double>(n_z));
  return g;
}

std::vector<std::string> Grid::violations() const {
  std::vector<std::string> v;
  if (!(duration_ > 0.0)) v.push_back("duration must be > 0");
  if (!(length_ > 0.0)) v.push_back("length must be > 0");
  if (n_t_ < 2) v.push_back("n_t must be >= 2");
  if (n_t_ % 2 != 0) v.push_back("n_t must be even (two collocation nodes per step)");
  if (n_z_ < 2) v.push_back("n_z must be >= 2");
  for (double w : time_weights_) {
    if (!(w > 0.0)) {
      v.push_back("time weights must be strictly positive");
      break;
    }
  }
  for (double w : space_weights_) {
    if (!(w > 0.0)) {
      v.push_back("space weights must be strictly positive");
      break;
    }
  }
  return v;
}

bool Grid::same_as(const Grid& other, double rel_tol) const {
  return n_t_ == other.n_t_ && n_z_ == other.n_z_ &&
         rel_close(duration_, other.duration_, duration_, rel_tol) &&
         rel_close(length_, other.length_, length_, rel_tol);
}

bool DriveSetting::unitary_mode(double rabi_base, double rel_tol) const {
  return std::abs(omega_r4 - omega_r1) <= rel_tol * std::abs(rabi_base) &&
         std::abs(omega_r3 - omega_r2) <= rel_tol * std::abs(rabi_base);
}

std::vector<std::string> DriveSetting::violations(double rabi_base,
                                                  double rel_tol) const {
  std::vector<std::string> v;
  const double om2 = rabi_base * rabi_base;
  auto check_pair = [&](double a, double b, const char* name) {
    const double s = a * a + b * b;
    if (std::abs(s - om2) > rel_tol * om2) {
      std::ostringstream os;
      os << name << " must satisfy the Rabi normalization: got " << s
         << ", expected " << om2;
      v.push_back(os.str());
    }
  };
  check_pair(omega_r1, omega_r2, "(omega_r1, omega_r2)");
  check_pair(omega_r3, omega_r4, "(omega_r3, omega_r4)");
  if (!rel_close(omega_w1, rabi_base, rabi_base, rel_tol)) {
    v.push_back("omega_w1 must equal rabi_base");
  }
  if (!rel_close(omega_w2, rabi_base, rabi_base, rel_tol)) {
    v.push_back("omega_w2 must equal rabi_base");
  }
  return v;
}

FieldEnvelope::FieldEnvelope(const Grid& g, std::vector<Complex> s)
    : grid(g), samples(std::move(s)) {
  if (samples.size() != grid.n_t()) {
    throw GridMismatch("envelope sample count does not match grid n_t");
  }
}

double FieldEnvelope::norm2() const {
  const auto& w = grid.time_weights();
  double acc = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    acc += w[j] * std::norm(samples[j]);
  }
  return acc;
}

bool FieldEnvelope::is_real(double tol) const {
  for (const auto& s : samples) {
    if (std::abs(s.imag()) > tol) return false;
  }
  return true;
}

double SpinWaveState::excitation_norm2() const { return b_norm2() + c_norm2(); }

double SpinWaveState::b_norm2() const {
  const auto& w = grid.space_weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) acc += w[k] * std::norm(b[k]);
  return acc;
}

double SpinWaveState::c_norm2() const {
  const auto& w = grid.space_weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) acc += w[k] * std::norm(c[k]);
  return acc;
}

std::vector<std::string> config_violations(const PhysicalParams& params,
                                           const Grid& grid,
                                           const DriveSetting& drive) {
  std::vector<std::string> v = grid.violations();
  if (!(params.coupling >= 0.0)) v.push_back("coupling must be >= 0");
  if (!(params.rabi_base > 0.0)) v.push_back("rabi_base must be > 0");
  if (params.rabi_base > 0.0) {
    auto dv = drive.violations(params.rabi_base);
    v.insert(v.end(), dv.begin(), dv.end());
  }
  return v;
}

ValidatedConfig validate_config(const PhysicalParams& params, const Grid& grid,
                                const DriveSetting& drive) {
  auto gv = grid.violations();
  if (!gv.empty()) throw InvalidGrid("invalid grid", gv);
  std::vector<std::string> pv;
  if (!(params.coupling >= 0.0)) pv.push_back("coupling must be >= 0");
  if (!(params.rabi_base > 0.0)) pv.push_back("rabi_base must be > 0");
  if (!pv.empty()) throw InvalidParams("invalid physical parameters", pv);
  auto dv = drive.violations(params.rabi_base);
  if (!dv.empty()) throw InvalidDrive("invalid drive setting", dv);
  return ValidatedConfig{params, grid, drive,
                         drive.unitary_mode(params.rabi_base)};
}

DriveSetting theta_to_rabi(double theta, double rabi_base) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2.0) ||
      !std::isfinite(theta)) {
    throw OutOfRangeAngle("theta must lie in [0, pi/2]");
  }
  if (!(rabi_base > 0.0)) {
    throw OutOfRangeAngle("rabi_base must be > 0");
  }
  DriveSetting d;
  d.omega_w1 = d.omega_w2 = rabi_base;
  d.omega_r1 = d.omega_r4 = rabi_base * std::cos(theta);
  d.omega_r2 = d.omega_r3 = rabi_base * std::sin(theta);
  return d;
}

RealizedAngle rabi_to_theta(const DriveSetting& drive, double rabi_base,
                            double lambda_i) {
  if (!(lambda_i >= -1e-12 && lambda_i <= 1.0 + 1e-9) ||
      !std::isfinite(lambda_i)) {
    throw InvalidLambda("lambda must lie in [0, 1]");
  }
  auto dv = drive.violations(rabi_base);
  if (!dv.empty()) throw InvalidDrive("invalid drive setting", dv);
  if (!drive.unitary_mode(rabi_base)) {
    throw InvalidDrive("drive is not unitary-mode", {});
  }
  RealizedAngle r;
  r.direction = std::atan2(drive.omega_r2, drive.omega_r1);
  r.contraction = std::sqrt(std::max(lambda_i, 0.0));
  return r;
}

FieldEnvelope gaussian_envelope(const Grid& grid, double center, double sigma,
                                Complex amplitude) {
  FieldEnvelope env(grid);
  const auto& t = grid.time_nodes();
  for (std::size_t j = 0; j < grid.n_t(); ++j) {
    const double u = (t[j] - center) / sigma;
    env.samples[j] = amplitude * std::exp(-0.5 * u * u);
  }
  return env;
}

}  // namespace tripod
