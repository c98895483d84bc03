#include "rps/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rps/parallel.hpp"

namespace rps {

namespace {

constexpr int64_t kSampleChunk = 64;

double sq_norm(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

// mean and standard error of the mean over slots, compensated, fixed order
void mean_and_stderr(const std::vector<double>& slots, double& mean, double& se) {
  KahanSum sum;
  for (double v : slots) sum.add(v);
  const auto n = double(slots.size());
  mean = sum.value() / n;
  KahanSum var;
  for (double v : slots) var.add((v - mean) * (v - mean));
  se = slots.size() > 1 ? std::sqrt(var.value() / (n * (n - 1.0))) : 0.0;
}

}  // namespace

ErrorTable ms_error_table(const SdeModel& m, double t0, double T, const std::vector<int>& i_list,
                          int i_ref, int n_samples, uint64_t seed,
                          const std::vector<double>& xi, const SolverConfig& cfg, int workers) {
  validate_model(m);
  if (!(T > t0)) throw std::invalid_argument("T must exceed t0");
  if (i_list.empty()) throw std::invalid_argument("i_list must not be empty");
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (int(xi.size()) != m.dimension) throw std::invalid_argument("xi dimension mismatch");
  std::vector<int> levels = i_list;
  std::sort(levels.begin(), levels.end());
  if (std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw std::invalid_argument("i_list has duplicates");
  if (i_ref <= levels.back())
    throw std::invalid_argument("i_ref must exceed every entry of i_list");
  if (levels.front() < 1 || i_ref > 40) throw std::invalid_argument("level out of range");

  const double span = T - t0;
  const double h_ref = std::ldexp(span, -i_ref);
  const int64_t n_ref = int64_t(1) << i_ref;
  const GridSpec fine_grid = make_grid(t0, h_ref, n_ref);
  for (int i : levels)
    if (!(std::ldexp(span, -i) < 1.0))
      throw std::invalid_argument("stepsize 2^-" + std::to_string(i) +
                                  " * span is not below 1");

  const size_t n_levels = levels.size();
  const int d = m.dimension;
  // per-sample squared differences, slot-addressed so the reduction order is fixed
  std::vector<double> term_slots(size_t(n_samples) * n_levels);
  std::vector<double> sup_slots(size_t(n_samples) * n_levels);

  parallel_chunks(n_samples, kSampleChunk, workers, [&](int64_t, int64_t begin, int64_t end) {
    WienerPath fine_path, coarse_path;
    Trajectory fine_traj, coarse_traj;
    for (int64_t s = begin; s < end; ++s) {
      sample_path_into(fine_path, fine_grid, d, seed, uint64_t(s));
      try {
        integrate_into(fine_traj, m, fine_grid, fine_path, xi, cfg);
        for (size_t li = 0; li < n_levels; ++li) {
          const int64_t factor = int64_t(1) << (i_ref - levels[li]);
          coarsen_into(coarse_path, fine_path, factor);
          integrate_into(coarse_traj, m, coarse_path.grid, coarse_path, xi, cfg);
          const int64_t n_coarse = coarse_path.grid.n_cells;
          double sup = 0.0;
          for (int64_t q = 0; q <= n_coarse; ++q)
            sup = std::max(sup, sq_norm(coarse_traj.state(q), fine_traj.state(q * factor), d));
          term_slots[size_t(s) * n_levels + li] =
              sq_norm(coarse_traj.state(n_coarse), fine_traj.state(n_ref), d);
          sup_slots[size_t(s) * n_levels + li] = sup;
        }
      } catch (const SolverError& e) {
        SolverError wrapped("sample " + std::to_string(s) + ": " + e.what(), e.best_iterate,
                            e.residual);
        wrapped.step_index = e.step_index;
        throw wrapped;
      }
    }
  });

  ErrorTable table;
  table.t0 = t0;
  table.T = T;
  table.h_ref = h_ref;
  table.n_samples = n_samples;
  table.seed = seed;
  // rows with h strictly decreasing: ascending i
  std::vector<double> level_values(static_cast<size_t>(n_samples));
  for (size_t li = 0; li < n_levels; ++li) {
    ErrorRow row;
    row.h = std::ldexp(span, -levels[li]);
    for (int64_t s = 0; s < n_samples; ++s)
      level_values[size_t(s)] = term_slots[size_t(s) * n_levels + li];
    mean_and_stderr(level_values, row.d_terminal, row.std_error);
    KahanSum sup_sum;
    for (int64_t s = 0; s < n_samples; ++s) sup_sum.add(sup_slots[size_t(s) * n_levels + li]);
    row.d_sup = sup_sum.value() / double(n_samples);
    table.rows.push_back(row);
  }
  return table;
}

RateReport fit_rate(const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("rate fit needs at least 2 rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, dh] : rows) {
    if (!(h > 0.0) || !(dh > 0.0))
      throw std::invalid_argument("rate fit requires positive h and D_h");
    const double x = std::log(h);
    const double y = std::log(dh);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto n = double(rows.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("rate fit needs distinct stepsizes");
  RateReport rep;
  rep.kappa_ms = (n * sxy - sx * sy) / denom;
  rep.kappa_rms = 0.5 * rep.kappa_ms;
  rep.log_c = (sy - rep.kappa_ms * sx) / n;
  double rss = 0.0;
  for (const auto& [h, dh] : rows) {
    const double r = std::log(dh) - (rep.log_c + rep.kappa_ms * std::log(h));
    rss += r * r;
  }
  rep.residual = std::sqrt(rss);
  return rep;
}

RateReport fit_rate(const ErrorTable& table) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) rows.emplace_back(r.h, r.d_terminal);
  return fit_rate(rows);
}

double theoretical_moment_bound(const SdeModel& m, int p, const std::vector<double>& xi) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  const double lambda1 = m.lambda_min();
  if (!(m.c_f < lambda1)) throw std::invalid_argument("bound needs c_f < lambda_1");
  double xi_sq = 0.0;
  for (double v : xi) xi_sq += v * v;
  const double head = std::pow(1.0 + xi_sq, double(p));
  const double num = std::pow((2.0 * p - 1.0) * m.c_g * m.c_g + 2.0 * lambda1, double(p));
  const double den = (double(p) + 1.0) * std::pow(lambda1 - m.c_f, double(p));
  return head + num / den;
}

MomentBoundReport moment_bound_check(const SdeModel& m, int p, double h, double horizon_T,
                                     int n_samples, uint64_t seed, const std::vector<double>& xi,
                                     const SolverConfig& cfg, int workers) {
  validate_model(m);
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (!(horizon_T > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (int(xi.size()) != m.dimension) throw std::invalid_argument("xi dimension mismatch");
  const auto n_steps = int64_t(std::llround(horizon_T / h));
  if (n_steps < 1 || std::abs(double(n_steps) * h - horizon_T) > 1e-9 * std::max(1.0, horizon_T))
    throw std::invalid_argument("horizon must be a multiple of h");

  const GridSpec grid = make_grid(0.0, h, n_steps);
  const int d = m.dimension;
  std::vector<double> terminal_slots(static_cast<size_t>(n_samples));
  // per-chunk running sums of the moment at every grid time; chunk count is
  // independent of the worker count, so the final reduction is stable
  const int64_t n_chunks = (n_samples + kSampleChunk - 1) / kSampleChunk;
  std::vector<double> chunk_time_sums(size_t(n_chunks) * size_t(n_steps + 1), 0.0);

  parallel_chunks(n_samples, kSampleChunk, workers, [&](int64_t chunk, int64_t begin, int64_t end) {
    WienerPath path;
    Trajectory traj;
    double* time_sums = chunk_time_sums.data() + size_t(chunk) * size_t(n_steps + 1);
    for (int64_t s = begin; s < end; ++s) {
      sample_path_into(path, grid, d, seed, uint64_t(s));
      integrate_into(traj, m, grid, path, xi, cfg);
      for (int64_t j = 0; j <= n_steps; ++j) {
        double nx = 0.0;
        const double* st = traj.state(j);
        for (int c = 0; c < d; ++c) nx += st[c] * st[c];
        const double v = std::pow(1.0 + nx, double(p));
        time_sums[j] += v;
        if (j == n_steps) terminal_slots[size_t(s)] = v;
      }
    }
  });

  MomentBoundReport rep;
  rep.p = p;
  mean_and_stderr(terminal_slots, rep.empirical, rep.std_error);
  rep.empirical_upper3 = rep.empirical + 3.0 * rep.std_error;
  for (int64_t j = 0; j <= n_steps; ++j) {
    KahanSum sum;
    for (int64_t c = 0; c < n_chunks; ++c) sum.add(chunk_time_sums[size_t(c) * size_t(n_steps + 1) + size_t(j)]);
    rep.running_max = std::max(rep.running_max, sum.value() / double(n_samples));
  }
  rep.theoretical = theoretical_moment_bound(m, p, xi);
  rep.pass = rep.empirical_upper3 <= rep.theoretical;
  return rep;
}

HolderReport holder_check(const SdeModel& m, double t_anchor, const std::vector<double>& deltas,
                          int n_samples, double h, uint64_t seed, double warmup,
                          const SolverConfig& cfg, int workers) {
  validate_model(m);
  if (deltas.empty()) throw std::invalid_argument("deltas must not be empty");
  if (n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
  std::vector<int64_t> delta_steps;
  for (double delta : deltas) {
    const auto steps = int64_t(std::llround(delta / h));
    if (steps < 1 || std::abs(double(steps) * h - delta) > 1e-9 * std::max(1.0, delta))
      throw std::invalid_argument("every delta must be a positive multiple of h");
    delta_steps.push_back(steps);
  }
  const auto warm_steps = int64_t(std::llround(warmup / h));
  const int64_t max_delta = *std::max_element(delta_steps.begin(), delta_steps.end());
  const GridSpec grid = make_grid(t_anchor - double(warm_steps) * h, h, warm_steps + max_delta);
  const int d = m.dimension;
  std::vector<double> xi(size_t(d), 0.0);

  const size_t n_deltas = deltas.size();
  std::vector<double> slots(size_t(n_samples) * n_deltas);
  parallel_chunks(n_samples, kSampleChunk, workers, [&](int64_t, int64_t begin, int64_t end) {
    WienerPath path;
    Trajectory traj;
    for (int64_t s = begin; s < end; ++s) {
      sample_path_into(path, grid, d, seed, uint64_t(s));
      integrate_into(traj, m, grid, path, xi, cfg);
      const double* at_anchor = traj.state(warm_steps);
      for (size_t di = 0; di < n_deltas; ++di)
        slots[size_t(s) * n_deltas + di] =
            sq_norm(traj.state(warm_steps + delta_steps[di]), at_anchor, d);
    }
  });

  HolderReport rep;
  std::vector<std::pair<double, double>> fit_rows;
  std::vector<double> level(static_cast<size_t>(n_samples));
  for (size_t di = 0; di < n_deltas; ++di) {
    for (int64_t s = 0; s < n_samples; ++s) level[size_t(s)] = slots[size_t(s) * n_deltas + di];
    double mean, se;
    mean_and_stderr(level, mean, se);
    rep.points.push_back({deltas[di], std::sqrt(mean)});
    fit_rows.emplace_back(deltas[di], std::sqrt(mean));
  }
  if (fit_rows.size() >= 2) {
    // exponent of the L2 norm itself (not its square)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [delta, norm] : fit_rows) {
      const double x = std::log(delta);
      const double y = std::log(norm);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const auto n = double(fit_rows.size());
    rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

}  // namespace rps
