#include "tripod/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tripod {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config key '" + key + "' has a malformed value '" +
                          value + "'",
                      {key});
  }
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v < 0.0 || v != std::floor(v) || v > 1e12) {
    throw ConfigError("config key '" + key +
                          "' must be a non-negative integer, got '" + value +
                          "'",
                      {key});
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

DriveSetting RunConfig::drive() const {
  const bool has_quad =
      omega_r1 || omega_r2 || omega_r3 || omega_r4 || omega_w1 || omega_w2;
  if (theta && has_quad) {
    throw ConfigError(
        "config sets both 'theta' and explicit Rabi frequencies; choose one",
        {"theta"});
  }
  if (theta) return theta_to_rabi(*theta, params.rabi_base);
  if (!has_quad) return theta_to_rabi(0.0, params.rabi_base);
  DriveSetting d;
  d.omega_w1 = omega_w1.value_or(params.rabi_base);
  d.omega_w2 = omega_w2.value_or(params.rabi_base);
  d.omega_r1 = omega_r1.value_or(params.rabi_base);
  d.omega_r2 = omega_r2.value_or(0.0);
  d.omega_r3 = omega_r3.value_or(0.0);
  d.omega_r4 = omega_r4.value_or(params.rabi_base);
  return d;
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                            ": expected 'key = value', got '" + line + "'",
                        {line});
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                            ": expected 'key = value', got '" + line + "'",
                        {key});
    }
    if (!seen.insert(key).second) {
      throw ConfigError(origin + ": duplicate config key '" + key + "'",
                        {key});
    }

    if (key == "coupling") cfg.params.coupling = parse_double(key, value);
    else if (key == "rabi_base") cfg.params.rabi_base = parse_double(key, value);
    else if (key == "T") cfg.T = parse_double(key, value);
    else if (key == "L") cfg.L = parse_double(key, value);
    else if (key == "n_t") cfg.n_t = parse_size(key, value);
    else if (key == "n_z") cfg.n_z = parse_size(key, value);
    else if (key == "theta") cfg.theta = parse_double(key, value);
    else if (key == "omega_r1") cfg.omega_r1 = parse_double(key, value);
    else if (key == "omega_r2") cfg.omega_r2 = parse_double(key, value);
    else if (key == "omega_r3") cfg.omega_r3 = parse_double(key, value);
    else if (key == "omega_r4") cfg.omega_r4 = parse_double(key, value);
    else if (key == "omega_w1") cfg.omega_w1 = parse_double(key, value);
    else if (key == "omega_w2") cfg.omega_w2 = parse_double(key, value);
    else if (key == "sweep_t_min") cfg.sweep_t_min = parse_double(key, value);
    else if (key == "sweep_t_max") cfg.sweep_t_max = parse_double(key, value);
    else if (key == "sweep_t_points") cfg.sweep_t_points = parse_size(key, value);
    else if (key == "sweep_l_min") cfg.sweep_l_min = parse_double(key, value);
    else if (key == "sweep_l_max") cfg.sweep_l_max = parse_double(key, value);
    else if (key == "sweep_l_points") cfg.sweep_l_points = parse_size(key, value);
    else if (key == "sweep_n") cfg.sweep_n = parse_size(key, value);
    else if (key == "workers") cfg.workers = parse_size(key, value);
    else if (key == "mode_index") cfg.mode_index = parse_size(key, value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "balance_tol") cfg.balance_tol = parse_double(key, value);
    else {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                            ": unknown config key '" + key + "'",
                        {key});
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    }
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw IoError("cannot rename '" + tmp.string() + "' to '" +
                  target.string() + "': " + ec.message());
  }
}

void write_envelope_csv(const std::string& path, const FieldEnvelope& env) {
  atomic_write(path, [&](std::ostream& out) {
    out << "t,re,im\n";
    const auto& t = env.grid.time_nodes();
    for (std::size_t j = 0; j < env.samples.size(); ++j) {
      out << fmt17(t[j]) << ',' << fmt17(env.samples[j].real()) << ','
          << fmt17(env.samples[j].imag()) << '\n';
    }
  });
}

FieldEnvelope read_envelope_csv(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open envelope file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,re,im") {
    throw IoError("envelope file '" + path + "' must start with 't,re,im'");
  }
  FieldEnvelope env(grid);
  const auto& nodes = grid.time_nodes();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (row >= grid.n_t()) {
      throw GridMismatch("envelope file '" + path + "' has more than " +
                         std::to_string(grid.n_t()) + " rows");
    }
    double t = 0.0, re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im) != 3) {
      throw IoError("envelope file '" + path + "': malformed row '" + line +
                    "'");
    }
    if (std::abs(t - nodes[row]) > 1e-9 * grid.duration()) {
      throw GridMismatch("envelope file '" + path + "' row " +
                         std::to_string(row + 1) +
                         ": time node does not match the grid (expected " +
                         fmt17(nodes[row]) + ", got " + fmt17(t) + ")");
    }
    env.samples[row] = Complex(re, im);
    ++row;
  }
  if (row != grid.n_t()) {
    throw GridMismatch("envelope file '" + path + "' has " +
                       std::to_string(row) + " rows, expected " +
                       std::to_string(grid.n_t()));
  }
  return env;
}

namespace {

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::time_in: return "time_in";
    case Axis::time_out: return "time_out";
    case Axis::space: return "space";
  }
  return "?";
}

Axis axis_from(const std::string& s) {
  if (s == "time_in") return Axis::time_in;
  if (s == "time_out") return Axis::time_out;
  if (s == "space") return Axis::space;
  throw IoError("unknown kernel axis '" + s + "'");
}

void write_weight_line(std::ostream& out, const char* name,
                       const Eigen::VectorXd& w) {
  out << "# " << name << ":";
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    out << (i == 0 ? ' ' : ',') << fmt17(w[i]);
  }
  out << '\n';
}

}  // namespace

void write_kernel_csv(const std::string& path, const KernelMatrix& kernel) {
  atomic_write(path, [&](std::ostream& out) {
    out << "# tripod kernel v1\n";
    out << "# row_axis=" << axis_name(kernel.row_axis)
        << " col_axis=" << axis_name(kernel.col_axis)
        << " rows=" << kernel.entries.rows()
        << " cols=" << kernel.entries.cols()
        << " input_time_reversed=" << (kernel.input_time_reversed ? 1 : 0)
        << " direction="
        << (kernel.direction == Direction::backward ? "backward" : "forward")
        << '\n';
    out << "# T=" << fmt17(kernel.grid.duration())
        << " L=" << fmt17(kernel.grid.length()) << " n_t=" << kernel.grid.n_t()
        << " n_z=" << kernel.grid.n_z()
        << " coupling=" << fmt17(kernel.params.coupling)
        << " rabi_base=" << fmt17(kernel.params.rabi_base) << '\n';
    write_weight_line(out, "row_weights", kernel.row_weights);
    write_weight_line(out, "col_weights", kernel.col_weights);
    for (Eigen::Index i = 0; i < kernel.entries.rows(); ++i) {
      for (Eigen::Index j = 0; j < kernel.entries.cols(); ++j) {
        out << (j == 0 ? "" : ",") << fmt17(kernel.entries(i, j));
      }
      out << '\n';
    }
  });
}

KernelMatrix read_kernel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "# tripod kernel v1") {
    throw IoError("kernel file '" + path + "' has an unknown header");
  }

  auto parse_kv = [&](const std::string& text,
                      std::unordered_map<std::string, std::string>& kv) {
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) {
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
    }
  };

  KernelMatrix km;
  std::unordered_map<std::string, std::string> kv;
  if (!std::getline(in, line)) throw IoError("kernel file truncated");
  parse_kv(line.substr(1), kv);
  const auto rows = static_cast<Eigen::Index>(std::stoll(kv.at("rows")));
  const auto cols = static_cast<Eigen::Index>(std::stoll(kv.at("cols")));
  km.row_axis = axis_from(kv.at("row_axis"));
  km.col_axis = axis_from(kv.at("col_axis"));
  km.input_time_reversed = kv.at("input_time_reversed") == "1";
  km.direction = kv.at("direction") == "backward" ? Direction::backward
                                                  : Direction::forward;

  std::unordered_map<std::string, std::string> kv2;
  if (!std::getline(in, line)) throw IoError("kernel file truncated");
  parse_kv(line.substr(1), kv2);
  km.grid = Grid::uniform(std::stod(kv2.at("T")), std::stod(kv2.at("L")),
                          std::stoul(kv2.at("n_t")), std::stoul(kv2.at("n_z")));
  km.params.coupling = std::stod(kv2.at("coupling"));
  km.params.rabi_base = std::stod(kv2.at("rabi_base"));

  auto read_weights = [&](const char* name) {
    if (!std::getline(in, line)) throw IoError("kernel file truncated");
    const std::string prefix = std::string("# ") + name + ":";
    if (line.rfind(prefix, 0) != 0) {
      throw IoError("kernel file '" + path + "': expected '" + prefix + "'");
    }
    std::vector<double> vals;
    std::istringstream is(line.substr(prefix.size()));
    std::string cell;
    while (std::getline(is, cell, ',')) vals.push_back(std::stod(trim(cell)));
    return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                             static_cast<Eigen::Index>(vals.size()))
        .eval();
  };
  km.row_weights = read_weights("row_weights");
  km.col_weights = read_weights("col_weights");

  km.entries.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw IoError("kernel file '" + path + "' truncated at data row " +
                    std::to_string(i));
    }
    std::istringstream is(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!std::getline(is, cell, ',')) {
        throw IoError("kernel file '" + path + "' has a short data row");
      }
      km.entries(i, j) = std::stod(cell);
    }
  }
  return km;
}

void write_sweep_csv(const std::string& path, const SweepTable& table) {
  atomic_write(path, [&](std::ostream& out) {
    out << "T,L,lambda1,lambda2,lambda3\n";
    for (const auto& row : table.rows) {
      out << fmt17(row.T) << ',' << fmt17(row.L) << ',' << fmt17(row.lambda1)
          << ',' << fmt17(row.lambda2) << ',' << fmt17(row.lambda3) << '\n';
    }
  });
}

void write_eigenvalues_csv(const std::string& path, const ModeBasis& basis) {
  atomic_write(path, [&](std::ostream& out) {
    out << "index,lambda\n";
    for (Eigen::Index i = 0; i < basis.eigenvalues.size(); ++i) {
      out << i << ',' << fmt17(basis.eigenvalues[i]) << '\n';
    }
  });
}

void write_modes_csv(const std::string& path, const ModeBasis& basis,
                     std::size_t max_modes) {
  const std::size_t k = std::min(max_modes, basis.size());
  atomic_write(path, [&](std::ostream& out) {
    out << "t";
    for (std::size_t i = 0; i < k; ++i) out << ",phi_" << i;
    out << '\n';
    const auto& t = basis.grid.time_nodes();
    for (std::size_t j = 0; j < basis.grid.n_t(); ++j) {
      out << fmt17(t[j]);
      for (std::size_t i = 0; i < k; ++i) {
        out << ',' << fmt17(basis.modes(static_cast<Eigen::Index>(j),
                                        static_cast<Eigen::Index>(i)));
      }
      out << '\n';
    }
  });
}

}  // namespace tripod
