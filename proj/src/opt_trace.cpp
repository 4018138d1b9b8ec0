#include "spdesign/opt_trace.hpp"

#include <cmath>

#include <json.hpp>

namespace spd {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string OptTrace::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["sweeps"] = sweeps;
  j["converged"] = converged;
  j["reverted"] = reverted;
  j["polish_start"] = polish_start;
  j["eval_initial"] = finite_or_null(eval_initial);
  j["eval_final"] = finite_or_null(eval_final);
  j["seconds"] = seconds;
  auto& obj = j["objective"] = nlohmann::json::array();
  for (double v : objective) obj.push_back(finite_or_null(v));
  j["movement"] = movement;
  j["flagged"] = flagged;
  return j.dump(2);
}

}  // namespace spd
