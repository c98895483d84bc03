#include "rps/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rps {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  for (int c = 1; c <= traj.dim; ++c) out += ",x_" + std::to_string(c);
  out += ",newton_iters,residual\n";
  for (int64_t j = 0; j <= traj.grid.n_cells; ++j) {
    out += format_double(traj.grid.time_at(j));
    const double* st = traj.state(j);
    for (int c = 0; c < traj.dim; ++c) out += "," + format_double(st[c]);
    if (j == 0) {
      out += ",0,0";  // the initial value is supplied, not solved
    } else {
      const StepStats& s = traj.stats[size_t(j - 1)];
      out += "," + std::to_string(s.newton_iters) + "," + format_double(s.residual);
    }
    out += "\n";
  }
  return out;
}

std::string error_table_csv(const ErrorTable& table) {
  std::string out = "h,D_h_terminal,D_h_sup,stderr\n";
  for (const auto& row : table.rows) {
    out += format_double(row.h) + "," + format_double(row.d_terminal) + "," +
           format_double(row.d_sup) + "," + format_double(row.std_error) + "\n";
  }
  return out;
}

std::string rate_json(const RateReport& rate, const ErrorTable& table) {
  nlohmann::ordered_json j;
  j["kappa_ms"] = rate.kappa_ms;
  j["kappa_rms"] = rate.kappa_rms;
  j["log_c"] = rate.log_c;
  j["residual"] = rate.residual;
  j["n_samples"] = table.n_samples;
  j["seed"] = table.seed;
  return j.dump(2) + "\n";
}

std::string pullback_csv(const PullbackRun& run, const CauchyDiagnostic& diag) {
  const size_t dim = run.xi.size();
  std::string out = "k";
  for (size_t c = 1; c <= dim; ++c) out += ",value_" + std::to_string(c);
  out += ",diff_sq\n";
  for (size_t i = 0; i < run.k_list.size(); ++i) {
    out += std::to_string(run.k_list[i]);
    for (size_t c = 0; c < dim; ++c) out += "," + format_double(run.values[i][c]);
    // diff_sq on row i compares against the previous depth
    out += i == 0 ? "," : ("," + format_double(diag.diff_sq[i - 1]));
    out += "\n";
  }
  return out;
}

std::string periodicity_csv(const PeriodicityGap& gap, int dim) {
  std::string out = "t";
  if (dim == 1) {
    out += ",x_lagged,x_shifted";
  } else {
    for (int c = 1; c <= dim; ++c) out += ",x_lagged_" + std::to_string(c);
    for (int c = 1; c <= dim; ++c) out += ",x_shifted_" + std::to_string(c);
  }
  out += ",gap\n";
  for (size_t i = 0; i < gap.times.size(); ++i) {
    out += format_double(gap.times[i]);
    for (int c = 0; c < dim; ++c) out += "," + format_double(gap.lagged[i * size_t(dim) + size_t(c)]);
    for (int c = 0; c < dim; ++c) out += "," + format_double(gap.shifted[i * size_t(dim) + size_t(c)]);
    out += "," + format_double(gap.pointwise[i]) + "\n";
  }
  return out;
}

std::string moment_json(const MomentBoundReport& rep) {
  nlohmann::ordered_json j;
  j["p"] = rep.p;
  j["empirical"] = rep.empirical;
  j["stderr"] = rep.std_error;
  j["empirical_upper3"] = rep.empirical_upper3;
  j["running_max"] = rep.running_max;
  j["theoretical"] = rep.theoretical;
  j["pass"] = rep.pass;
  return j.dump(2) + "\n";
}

std::string assumption_json(const AssumptionReport& rep, const SdeModel& m) {
  nlohmann::ordered_json j;
  j["model"] = m.name;
  j["lambda_1"] = m.lambda_eigs.empty() ? 0.0 : m.lambda_min();
  j["declared_c_f"] = m.c_f;
  j["declared_c_g"] = m.c_g;
  j["probed_c_f"] = rep.probed_c_f;
  j["probed_g_bound"] = rep.probed_g_bound;
  j["probed_g_lipschitz"] = rep.probed_g_lipschitz;
  j["periodicity_defect"] = rep.periodicity_defect;
  j["pass"] = rep.pass;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(contents.data(), std::streamsize(contents.size()));
  if (!f) throw std::runtime_error("short write to " + path);
}

}  // namespace rps
