#ifndef HJFUND_IO_HPP
#define HJFUND_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "hjfund/characteristics.hpp"
#include "hjfund/critical.hpp"
#include "hjfund/longtime.hpp"
#include "hjfund/propagator.hpp"

namespace hjfund {

/// Shortest round-trip decimal text for a double; stable across runs.
std::string format_double(double v);

/// "t,x,value" rows, one per (slice, node), slices subsampled by stride.
void write_field_csv(const std::string& path, const SpaceTimeField& field, int stride = 1);

/// Same layout for a single slice at a nominal time.
void write_value_field_csv(const std::string& path, const ValueField& field, double t);

/// "t,x,u,p" rows.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

nlohmann::json shoot_report_json(const std::vector<ShootHit>& hits);
nlohmann::json critical_report_json(const CriticalValueReport& report);
nlohmann::json bracket_report_json(const BracketResult& result);
nlohmann::json stationary_report_json(const StationaryResult& result);
nlohmann::json aubry_report_json(const AubryReport& report, const ValueField& u_star);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace hjfund

#endif
