#pragma once

// CSV and JSON serialization. Numbers are written with 17 significant digits
// so identical runs give identical bytes.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bjl/dynamics.hpp"
#include "bjl/experiments/density_vs_sim.hpp"
#include "bjl/experiments/hitting.hpp"
#include "bjl/experiments/identities.hpp"
#include "bjl/semigroup.hpp"

namespace bjl {

using Json = nlohmann::ordered_json;

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string event_label(const PathEvent& ev) {
  std::string s = to_string(ev.kind);
  for (std::size_t i = 0; i < ev.walls.size(); ++i) s += (i == 0 ? ":" : "|") + ev.walls[i];
  return s;
}

namespace detail {

// Events attached to each recorded row: an event goes to the first row whose
// time is >= the event time.
inline std::vector<std::string> row_events(const PathSample& path) {
  std::vector<std::string> out(path.times.size());
  std::size_t row = 0;
  for (const PathEvent& ev : path.events) {
    while (row + 1 < path.times.size() && path.times[row] < ev.time) ++row;
    if (!out[row].empty()) out[row] += ";";
    out[row] += event_label(ev);
  }
  if (path.hit && !out.empty()) {
    if (!out.back().empty()) out.back() += ";";
    out.back() += "hit:" + path.hit->kind;
  }
  return out;
}

}  // namespace detail

/// Header "path,t,x_1..x_m,event"; states in the internal decreasing order.
inline void write_csv(std::ostream& os, const std::vector<PathSample>& paths) {
  if (paths.empty()) return;
  const std::size_t m = paths.front().states.front().size();
  os << "path,t";
  for (std::size_t i = 1; i <= m; ++i) os << ",x_" << i;
  os << ",event\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const PathSample& path = paths[p];
    const auto events = detail::row_events(path);
    for (std::size_t k = 0; k < path.times.size(); ++k) {
      os << p << ',' << format_number(path.times[k]);
      for (double x : path.states[k]) os << ',' << format_number(x);
      os << ',' << events[k] << '\n';
    }
  }
}

inline Json to_json(const PathSample& path) {
  Json j;
  j["coords"] = to_string(path.coords);
  j["times"] = path.times;
  j["states"] = path.states;
  Json evs = Json::array();
  for (const PathEvent& ev : path.events) {
    evs.push_back(Json{{"time", ev.time}, {"kind", to_string(ev.kind)}, {"walls", ev.walls}});
  }
  j["events"] = std::move(evs);
  j["hit"] = path.hit ? Json{{"time", path.hit->time}, {"kind", path.hit->kind}} : Json(nullptr);
  j["rejections"] = path.rejections;
  return j;
}

inline Json to_json(const std::vector<PathSample>& paths) {
  Json arr = Json::array();
  for (const auto& p : paths) arr.push_back(to_json(p));
  return Json{{"paths", std::move(arr)}};
}

inline Json to_json(const ModelParams& params) {
  return Json{{"beta", params.beta()}, {"p", params.p()}, {"q", params.q()}, {"m", params.m()},
              {"strong_regime", params.strong_regime()}};
}

inline Json to_json(const HittingReport& r) {
  return Json{{"kind", to_string(r.kind)},
              {"params", to_json(r.params)},
              {"n_paths", r.n_paths},
              {"hits", r.hits},
              {"horizon", r.horizon},
              {"dt", r.dt},
              {"epsilon_hit", r.epsilon_hit},
              {"hit_fraction", r.hit_fraction},
              {"wilson_interval", {r.wilson.lo, r.wilson.hi}},
              {"standard_error", r.standard_error()},
              {"mean_hit_time", r.mean_hit_time},
              {"exhausted", r.exhausted},
              {"proposition_predicts_hit", r.predicted_hit},
              {"verdict", to_string(r.verdict)}};
}

inline Json to_json(const RankOneReport& r) {
  return Json{{"d", r.d},           {"dprime", r.dprime},     {"start", r.start},
              {"n_paths", r.n_paths}, {"hit_zero", r.hit_zero}, {"hit_one", r.hit_one},
              {"fraction_zero", r.fraction_zero()}, {"fraction_one", r.fraction_one()}, {"horizon", r.horizon}};
}

inline Json to_json(const IdentityCheck& c) {
  return Json{{"name", c.name},
              {"samples", c.samples},
              {"max_error", c.max_error},
              {"tolerance", c.tolerance},
              {"passed", c.passed}};
}

inline Json to_json(const DistanceReport& r) {
  return Json{{"metric", r.metric},   {"distance", r.distance},     {"threshold", r.threshold},
              {"n_paths", r.n_paths}, {"t", r.t},                   {"model_mass", r.model_mass},
              {"passed", r.passed}};
}

inline Json to_json(const MomentComparison& c) {
  return Json{{"name", c.name},   {"simulated", c.simulated}, {"standard_error", c.standard_error},
              {"exact", c.exact}, {"z", c.z},                 {"passed", c.passed}};
}

inline Json to_json(const DensityEvaluation& d) {
  return Json{{"value", d.value},
              {"truncation_order", d.truncation_order},
              {"tail_bound", d.tail_bound},
              {"ill_conditioned", d.ill_conditioned}};
}

}  // namespace bjl
