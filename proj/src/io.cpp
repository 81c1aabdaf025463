#include "hjfund/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace hjfund {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline surprises
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_field_csv(const std::string& path, const SpaceTimeField& field, int stride) {
  if (stride < 1) stride = 1;
  std::ofstream out = open_out(path);
  out << "t,x,value\n";
  const int n = field.grid().size();
  for (int k = 0; k <= field.tgrid().steps(); ++k) {
    if (k % stride != 0 && k != field.tgrid().steps()) continue;
    for (int i = 0; i < n; ++i)
      out << format_double(field.tgrid().time(k)) << ',' << format_double(field.grid().node(i))
          << ',' << format_double(field.value(i, k)) << '\n';
  }
}

void write_value_field_csv(const std::string& path, const ValueField& field, double t) {
  std::ofstream out = open_out(path);
  out << "t,x,value\n";
  for (int i = 0; i < field.size(); ++i)
    out << format_double(t) << ',' << format_double(field.grid.node(i)) << ','
        << format_double(field[i]) << '\n';
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "t,x,u,p\n";
  for (size_t k = 0; k < traj.states.size(); ++k)
    out << format_double(traj.times[k]) << ',' << format_double(traj.states[k].x) << ','
        << format_double(traj.states[k].u) << ',' << format_double(traj.states[k].p) << '\n';
}

nlohmann::json shoot_report_json(const std::vector<ShootHit>& hits) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& h : hits)
    arr.push_back({{"p0", h.p0},
                   {"winding", h.winding},
                   {"u_final", h.final.u},
                   {"hit_error", h.hit_error}});
  return arr;
}

nlohmann::json critical_report_json(const CriticalValueReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : report.entries)
    arr.push_back({{"c", e.c},
                   {"classification", to_string(e.report.classification)},
                   {"drift_rate", e.report.drift_rate}});
  nlohmann::json j{{"results", arr}};
  if (report.c_star)
    j["c_star"] = *report.c_star;
  else
    j["c_star"] = nullptr;
  j["no_bracket"] = report.no_bracket;
  return j;
}

nlohmann::json bracket_report_json(const BracketResult& result) {
  nlohmann::json j;
  j["status"] = result.status == BracketResult::Status::ok ? "ok" : "no_bracket";
  if (result.c_star)
    j["c_star"] = *result.c_star;
  else
    j["c_star"] = nullptr;
  j["lo"] = {{"classification", to_string(result.lo_report.classification)},
             {"drift_rate", result.lo_report.drift_rate}};
  j["hi"] = {{"classification", to_string(result.hi_report.classification)},
             {"drift_rate", result.hi_report.drift_rate}};
  j["bisections"] = result.bisections;
  return j;
}

nlohmann::json stationary_report_json(const StationaryResult& result) {
  return {{"u_star", result.u_star.values},
          {"fixed_point_residual", result.fixed_point_residual},
          {"iterations", result.iterations},
          {"mode", result.mode == StationaryMode::fixed_point_iteration ? "fixed_point_iteration"
                                                                        : "liminf_window"},
          {"converged", result.converged},
          {"diverged", result.diverged}};
}

nlohmann::json aubry_report_json(const AubryReport& report, const ValueField& u_star) {
  return {{"u_star", u_star.values},
          {"barrier_diag", report.barrier_diag},
          {"aubry_nodes", report.aubry_nodes},
          {"u_on_aubry", report.u_on_aubry},
          {"tol_used", report.tol_used},
          {"escalated", report.escalated},
          {"flagged_empty", report.flagged_empty}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace hjfund
