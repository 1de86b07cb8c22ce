#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "spr/io.hpp"
#include "spr/toy/metrics.hpp"
#include "spr/toy/train.hpp"

namespace spr::toy {

// metrics CSV: one row per step, fixed formatting so identical runs produce
// byte-identical files.
inline std::string trace_csv(const std::vector<StepRecord>& trace) {
  std::string out = "step,l_ce,l_s,l_t,l_c,target_miou,corr_dist\n";
  char buf[256];
  for (const StepRecord& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.step, r.l_ce,
                  r.l_s, r.l_t, r.l_c, r.target_miou, r.corr_dist);
    out += buf;
  }
  return out;
}

inline void write_trace_csv(const std::string& path, const std::vector<StepRecord>& trace) {
  atomic_write(path, trace_csv(trace));
}

inline nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j;
  j["num_classes"] = m.num_classes;
  j["miou"] = m.miou;
  j["accuracy"] = m.accuracy;
  j["per_class_iou"] = m.per_class_iou;
  j["class_present"] = std::vector<int>(m.present.begin(), m.present.end());
  j["confusion"] = m.confusion;
  return j;
}

inline nlohmann::json result_json(const TrainResult& r) {
  nlohmann::json j;
  j["source"] = metrics_json(r.source_metrics);
  j["target"] = metrics_json(r.target_metrics);
  j["steps"] = r.trace.size();
  if (!r.trace.empty()) {
    const StepRecord& last = r.trace.back();
    j["final_l_ce"] = last.l_ce;
    j["final_l_c"] = last.l_c;
  }
  if (std::isfinite(r.corr_initial)) j["corr_dist_initial"] = r.corr_initial;
  if (std::isfinite(r.corr_final)) j["corr_dist_final"] = r.corr_final;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

// Classifier parameters as JSON; doubles round-trip exactly. Layout: per
// layer, the weight matrix (out x in, row-major) then the bias vector.
inline nlohmann::json params_json(const ClassifierParams& p) {
  nlohmann::json j;
  j["in_dim"] = p.in_dim;
  j["out_dim"] = p.out_dim;
  j["hidden"] = p.hidden;
  j["theta"] = p.theta;
  return j;
}

inline void write_params(const std::string& path, const ClassifierParams& p) {
  write_json(path, params_json(p));
}

inline ClassifierParams read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  ClassifierParams p;
  p.in_dim = j.at("in_dim").get<int>();
  p.out_dim = j.at("out_dim").get<int>();
  p.hidden = j.at("hidden").get<std::vector<int>>();
  p.theta = j.at("theta").get<std::vector<double>>();
  p.validate();
  return p;
}

}  // namespace spr::toy
