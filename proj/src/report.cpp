#include "pdemand/report.hpp"

#include <json.hpp>

namespace pdemand {

std::string to_json(const RunReport& r, int indent) {
  nlohmann::ordered_json j;
  j["schema"] = "pdemand-report/1";
  j["path"] = r.path;
  j["mode"] = r.mode;
  j["result"] = r.result;
  if (!r.result_json.empty()) j["result_json"] = nlohmann::json::parse(r.result_json);
  j["timings"] = {{"parse_ms", r.parse_ms}, {"eval_ms", r.eval_ms}, {"analyze_ms", r.analyze_ms}, {"solve_ms", r.solve_ms}};
  j["counters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.counters) j["counters"][k] = v;
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back({{"binder", v.binder}, {"node", v.node}, {"verdict", v.verdict}, {"detail", v.detail}});
  }
  if (!r.error.empty()) j["error"] = r.error;
  j["exit_code"] = r.exit_code;
  return j.dump(indent);
}

}  // namespace pdemand
