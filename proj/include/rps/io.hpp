#pragma once

#include <string>

#include "rps/analysis.hpp"
#include "rps/integrator.hpp"
#include "rps/model.hpp"
#include "rps/pullback.hpp"

namespace rps {

// Shortest round-tripping decimal form; locale-independent.
std::string format_double(double v);

// CSV/JSON payloads are built as strings so callers can diff them byte for
// byte; the CLI just writes them out.
std::string trajectory_csv(const Trajectory& traj);
std::string error_table_csv(const ErrorTable& table);
std::string rate_json(const RateReport& rate, const ErrorTable& table);
std::string pullback_csv(const PullbackRun& run, const CauchyDiagnostic& diag);
std::string periodicity_csv(const PeriodicityGap& gap, int dim);
std::string moment_json(const MomentBoundReport& rep);
std::string assumption_json(const AssumptionReport& rep, const SdeModel& m);

void write_file(const std::string& path, const std::string& contents);

}  // namespace rps
