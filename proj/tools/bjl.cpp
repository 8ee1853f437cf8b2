// bjl: simulate beta-Jacobi paths, tabulate densities, run verification suites.
//
// Exit codes: 0 success, 1 a verdict failed, 2 invalid input, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bjl/bjl.hpp"

namespace {

using bjl::Json;

enum Exit { kOk = 0, kVerdict = 1, kValidation = 2, kNumeric = 3 };

struct ModelOptions {
  double beta = 2.0;
  double p = 3.5;
  double q = 2.5;
  int m = 2;
  bool alcove_bm = false;

  bjl::ModelParams resolve() const {
    return alcove_bm ? bjl::ModelParams::alcove_brownian_motion(m) : bjl::ModelParams(beta, p, q, m);
  }
};

struct SimulateOptions {
  ModelOptions model;
  double dt = 1e-4;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  double boundary_tol = 1e-9;
  int max_halvings = 40;
  std::string coords = "phi";
  std::size_t paths = 1;
  std::vector<double> start;  // eigenvalues, decreasing; empty selects the alcove reference point
  bool final_only = false;
  bool log_rejections = false;
  std::string format = "csv";
  std::string out;
  unsigned threads = 1;
};

struct DensityOptions {
  std::string mode = "univariate";
  double t = 0.5;
  int grid = 50;
  std::optional<double> r;
  std::optional<double> s;
  double beta = 2.0;
  double p = 1.0;
  double q = 1.0;
  std::vector<double> theta{0.3};
  int trunc = -1;
  std::string out;
};

struct VerifyOptions {
  std::string suite = "identities";
  std::string preset;
  int m = 3;
  std::size_t paths = 0;  // 0 selects the suite default
  std::uint64_t seed = 1;
  double dt = 0.0;        // 0 selects the suite default
  double horizon = 0.0;   // 0 selects the suite default
  std::size_t samples = 10000;
  std::string kind = "collision";
  double beta = 2.0;
  double p = 4.0;
  double q = 4.0;
  double epsilon = 1e-3;
  std::string out;
  unsigned threads = 1;
};

Json to_json(const ModelOptions& o) {
  return Json{{"beta", o.beta}, {"p", o.p}, {"q", o.q}, {"m", o.m}, {"alcove_bm", o.alcove_bm}};
}

void from_json(const Json& j, ModelOptions& o) {
  o.beta = j.at("beta").get<double>();
  o.p = j.at("p").get<double>();
  o.q = j.at("q").get<double>();
  o.m = j.at("m").get<int>();
  o.alcove_bm = j.at("alcove_bm").get<bool>();
}

Json to_json(const SimulateOptions& o) {
  return Json{{"model", to_json(o.model)},
              {"dt", o.dt},
              {"horizon", o.horizon},
              {"seed", o.seed},
              {"boundary_tol", o.boundary_tol},
              {"max_halvings", o.max_halvings},
              {"coords", o.coords},
              {"paths", o.paths},
              {"start", o.start},
              {"final_only", o.final_only},
              {"log_rejections", o.log_rejections},
              {"format", o.format},
              {"out", o.out},
              {"threads", o.threads}};
}

void from_json(const Json& j, SimulateOptions& o) {
  from_json(j.at("model"), o.model);
  o.dt = j.at("dt").get<double>();
  o.horizon = j.at("horizon").get<double>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.boundary_tol = j.at("boundary_tol").get<double>();
  o.max_halvings = j.at("max_halvings").get<int>();
  o.coords = j.at("coords").get<std::string>();
  o.paths = j.at("paths").get<std::size_t>();
  o.start = j.at("start").get<std::vector<double>>();
  o.final_only = j.at("final_only").get<bool>();
  o.log_rejections = j.at("log_rejections").get<bool>();
  o.format = j.at("format").get<std::string>();
  o.out = j.at("out").get<std::string>();
  o.threads = j.value("threads", 1u);
}

Json to_json(const DensityOptions& o) {
  return Json{{"mode", o.mode},
              {"t", o.t},
              {"grid", o.grid},
              {"r", o.r ? Json(*o.r) : Json(nullptr)},
              {"s", o.s ? Json(*o.s) : Json(nullptr)},
              {"beta", o.beta},
              {"p", o.p},
              {"q", o.q},
              {"theta", o.theta},
              {"trunc", o.trunc},
              {"out", o.out}};
}

void from_json(const Json& j, DensityOptions& o) {
  o.mode = j.at("mode").get<std::string>();
  o.t = j.at("t").get<double>();
  o.grid = j.at("grid").get<int>();
  o.r = j.at("r").is_null() ? std::nullopt : std::optional<double>(j.at("r").get<double>());
  o.s = j.at("s").is_null() ? std::nullopt : std::optional<double>(j.at("s").get<double>());
  o.beta = j.at("beta").get<double>();
  o.p = j.at("p").get<double>();
  o.q = j.at("q").get<double>();
  o.theta = j.at("theta").get<std::vector<double>>();
  o.trunc = j.at("trunc").get<int>();
  o.out = j.at("out").get<std::string>();
}

Json to_json(const VerifyOptions& o) {
  return Json{{"suite", o.suite},   {"preset", o.preset},   {"m", o.m},         {"paths", o.paths},
              {"seed", o.seed},     {"dt", o.dt},           {"horizon", o.horizon}, {"samples", o.samples},
              {"kind", o.kind},     {"beta", o.beta},       {"p", o.p},         {"q", o.q},
              {"epsilon", o.epsilon}, {"out", o.out},         {"threads", o.threads}};
}

void from_json(const Json& j, VerifyOptions& o) {
  o.suite = j.at("suite").get<std::string>();
  o.preset = j.at("preset").get<std::string>();
  o.m = j.at("m").get<int>();
  o.paths = j.at("paths").get<std::size_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.dt = j.at("dt").get<double>();
  o.horizon = j.at("horizon").get<double>();
  o.samples = j.at("samples").get<std::size_t>();
  o.kind = j.at("kind").get<std::string>();
  o.beta = j.at("beta").get<double>();
  o.p = j.at("p").get<double>();
  o.q = j.at("q").get<double>();
  o.epsilon = j.at("epsilon").get<double>();
  o.out = j.at("out").get<std::string>();
  o.threads = j.value("threads", 1u);
}

// Writes through `fn` to `path`, or to stdout when path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw bjl::ParameterError("cannot open output file " + path);
  fn(os);
  if (!os) throw bjl::ParameterError("failed writing " + path);
}

void write_manifest(const std::string& path, const std::string& subcommand, const Json& config) {
  if (path.empty()) return;
  const Json manifest{{"tool", "bjl"}, {"version", bjl::kVersion}, {"subcommand", subcommand}, {"config", config}};
  with_output(path, [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
}

std::string manifest_path(const std::string& explicit_path, const std::string& out) {
  if (!explicit_path.empty()) return explicit_path;
  if (out.empty() || out == "-") return "";
  return out + ".manifest.json";
}

int run_simulate(const SimulateOptions& o) {
  const bjl::ModelParams params = o.model.resolve();
  bjl::SimConfig cfg;
  cfg.dt = o.dt;
  cfg.horizon = o.horizon;
  cfg.seed = o.seed;
  cfg.boundary_tol = o.boundary_tol;
  cfg.max_halvings = o.max_halvings;
  cfg.keep_path = !o.final_only;
  cfg.log_rejections = o.log_rejections;
  if (o.coords == "phi") {
    cfg.scheme = bjl::Scheme::PhiEuler;
  } else if (o.coords == "lambda") {
    cfg.scheme = bjl::Scheme::LambdaEuler;
  } else {
    throw bjl::ParameterError("coords must be phi or lambda");
  }
  if (o.format != "csv" && o.format != "json") throw bjl::ParameterError("format must be csv or json");
  if (o.paths < 1) throw bjl::ParameterError("paths must be at least 1");
  const bjl::LambdaPoint start =
      o.start.empty() ? bjl::phi_to_lambda(bjl::alcove_reference_point(params.m())) : bjl::LambdaPoint(o.start);
  if (start.m() != params.m()) throw bjl::ParameterError("start has " + std::to_string(start.m()) + " coordinates, m is " + std::to_string(params.m()));
  cfg.validate();
  // The angular scheme starts from the exact reference angles, not their
  // round trip through lambda.
  const std::vector<bjl::PathSample> paths =
      (o.start.empty() && cfg.scheme == bjl::Scheme::PhiEuler)
          ? bjl::simulate_ensemble(bjl::alcove_reference_point(params.m()), params, cfg, o.paths, o.threads)
          : bjl::simulate_ensemble(start, params, cfg, o.paths, o.threads);
  with_output(o.out, [&](std::ostream& os) {
    if (o.format == "csv") {
      bjl::write_csv(os, paths);
    } else {
      Json j = bjl::to_json(paths);
      j["coords"] = o.coords;
      j["params"] = bjl::to_json(params);
      os << j.dump() << '\n';
    }
  });
  return kOk;
}

double density_row_value(const DensityOptions& o, const bjl::JacobiBasis& basis, const bjl::LambdaPoint& theta,
                          const bjl::LambdaPoint& lam, bjl::DensityEvaluation& ev) {
  if (o.mode == "univariate") {
    ev = bjl::univariate_density(theta[0], lam[0], o.t, basis, o.trunc);
  } else if (o.mode == "km2") {
    ev = bjl::km_density_beta2(theta, lam, o.t, basis, o.trunc);
  } else {
    ev = bjl::partition_sum_density_beta2(theta, lam, o.t, basis, o.trunc < 0 ? -1 : o.trunc - lam.m());
  }
  return ev.value;
}

int run_density(const DensityOptions& o) {
  const std::vector<std::string> modes{"univariate", "km2", "partition2", "stationary"};
  if (std::find(modes.begin(), modes.end(), o.mode) == modes.end()) {
    throw bjl::ParameterError("mode must be univariate, km2, partition2 or stationary");
  }
  if (o.grid < 1) throw bjl::ParameterError("grid must be at least 1");
  std::vector<double> th = o.theta;
  std::sort(th.begin(), th.end(), std::greater<>());
  const bjl::LambdaPoint theta(th);
  const int m = theta.m();
  if (o.mode == "univariate" && m != 1) throw bjl::ParameterError("univariate mode takes a single theta");
  if (m > 2) throw bjl::ParameterError("density tables are tabulated for m <= 2");
  if (o.r.has_value() != o.s.has_value()) throw bjl::ParameterError("give both --r and --s or neither");
  double r = 0.0;
  double s = 0.0;
  std::optional<bjl::ModelParams> params;
  if (o.r) {
    r = *o.r;
    s = *o.s;
  } else {
    params.emplace(o.beta, o.p, o.q, m);
    const auto e = bjl::spectral_exponents(*params);
    r = e.r;
    s = e.s;
  }
  const bool determinantal = o.mode == "km2" || o.mode == "partition2" || (o.mode == "stationary" && m == 2);
  if (determinantal && params && params->beta() != 2.0) {
    throw bjl::UnsupportedRegime(
        "beta = " + std::to_string(params->beta()) +
        ": multivariate closed forms here are determinantal (beta = 2); general-beta densities need multivariate "
        "Jacobi polynomials, which are not implemented");
  }
  const int need = o.trunc >= 0 ? o.trunc : bjl::default_truncation(o.t);
  const bjl::JacobiBasis basis(r, s, std::max(need, 1) + m);
  const double h = 1.0 / o.grid;
  Json meta{{"mode", o.mode}, {"r", r}, {"s", s}, {"t", o.t}, {"grid", o.grid}, {"m", m}};
  double mass = 0.0;
  double max_disagreement = 0.0;
  with_output(o.out, [&](std::ostream& os) {
    if (m == 1) {
      os << "lambda,value,truncation_order,tail_bound\n";
    } else {
      os << "x_1,x_2,value,truncation_order,tail_bound";
      if (o.mode == "partition2") os << ",km2_value,agree";
      os << '\n';
    }
    for (int a = 0; a < o.grid; ++a) {
      for (int b = 0; b < (m == 2 ? a : 1); ++b) {
        std::vector<double> pt{(a + 0.5) * h};
        if (m == 2) pt.push_back((b + 0.5) * h);
        const bjl::LambdaPoint lam(pt);
        bjl::DensityEvaluation ev;
        if (o.mode == "stationary") {
          ev.value = m == 1 ? basis.weight(lam[0]) : bjl::stationary_density_beta2(lam, basis);
        } else {
          density_row_value(o, basis, theta, lam, ev);
        }
        mass += ev.value * (m == 1 ? h : h * h);
        os << bjl::format_number(lam[0]);
        if (m == 2) os << ',' << bjl::format_number(lam[1]);
        os << ',' << bjl::format_number(ev.value) << ',' << ev.truncation_order << ','
           << bjl::format_number(ev.tail_bound);
        if (o.mode == "partition2" && m == 2) {
          const auto km = bjl::km_density_beta2(theta, lam, o.t, basis, need);
          const double diff = std::abs(km.value - ev.value);
          max_disagreement = std::max(max_disagreement, diff);
          os << ',' << bjl::format_number(km.value) << ',' << (diff <= 1e-8 * std::max(1.0, std::abs(km.value)) ? 1 : 0);
        }
        os << '\n';
      }
    }
  });
  meta["grid_mass"] = mass;
  if (o.mode == "partition2") meta["max_km2_disagreement"] = max_disagreement;
  std::cerr << meta.dump() << '\n';
  return kOk;
}

int run_verify(const VerifyOptions& o) {
  const unsigned threads = o.threads;
  bjl::SuiteResult res;
  if (o.suite == "identities") {
    res = bjl::identities_suite(o.samples, o.seed);
  } else if (o.suite == "appendix") {
    bjl::AppendixOptions a;
    a.m = o.m;
    a.seed = o.seed;
    a.bound_points = o.samples;
    res = bjl::appendix_suite(a);
  } else if (o.suite == "hitting") {
    bjl::HittingGridOptions h;
    if (o.paths) h.paths = o.paths;
    if (o.dt > 0) h.cfg.dt = o.dt;
    if (o.horizon > 0) h.cfg.horizon = o.horizon;
    h.cfg.seed = o.seed;
    h.epsilon = o.epsilon;
    h.threads = threads;
    if (o.preset == "proposition-grid") {
      res = bjl::hitting_grid_suite(h);
    } else if (o.preset.empty()) {
      bjl::HittingKind kind;
      if (o.kind == "collision") {
        kind = bjl::HittingKind::Collision;
      } else if (o.kind == "lower") {
        kind = bjl::HittingKind::LowerBoundary;
      } else if (o.kind == "upper") {
        kind = bjl::HittingKind::UpperBoundary;
      } else {
        throw bjl::ParameterError("kind must be collision, lower or upper");
      }
      const bjl::ModelParams params(o.beta, o.p, o.q, o.m);
      const auto rep = bjl::estimate_hitting(kind, params, h.cfg, h.epsilon, h.paths, std::nullopt, threads);
      const bool ok = rep.verdict != bjl::Verdict::Inconsistent;
      res = bjl::SuiteResult{"hitting", ok, Json{{"suite", "hitting"}, {"passed", ok}, {"report", bjl::to_json(rep)}}};
    } else {
      throw bjl::ParameterError("unknown hitting preset " + o.preset);
    }
  } else if (o.suite == "stationary") {
    bjl::StationaryOptions s;
    if (o.paths) s.paths = o.paths;
    if (o.dt > 0) s.dt = o.dt;
    if (o.horizon > 0) s.horizon = o.horizon;
    s.seed = o.seed;
    s.threads = threads;
    res = bjl::stationary_suite(s);
  } else if (o.suite == "density-vs-sim") {
    bjl::DensitySimOptions d;
    if (o.paths) {
      d.paths_m1 = o.paths;
      d.paths_m2 = o.paths;
    }
    if (o.dt > 0) d.dt = o.dt;
    d.seed = o.seed;
    d.threads = threads;
    res = bjl::density_vs_sim_suite(d);
  } else {
    throw bjl::ParameterError("suite must be hitting, stationary, appendix, identities or density-vs-sim");
  }
  with_output(o.out, [&](std::ostream& os) { os << res.report.dump(2) << '\n'; });
  return res.passed ? kOk : kVerdict;
}

int classify(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const bjl::EnsembleError& err) {
    if (err.cause()) return classify(err.cause());
    std::cerr << "error: " << err.what() << '\n';
    return kNumeric;
  } catch (const bjl::ParameterError& err) {
    std::cerr << "invalid input: " << err.what() << '\n';
    return kValidation;
  } catch (const bjl::UnsupportedRegime& err) {
    std::cerr << "unsupported: " << err.what() << '\n';
    return kValidation;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "invalid manifest: " << err.what() << '\n';
    return kValidation;
  } catch (const bjl::NonConvergence& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kNumeric;
  } catch (const bjl::SingularConfiguration& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kNumeric;
  } catch (const bjl::TruncationError& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kNumeric;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kNumeric;
  }
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (...) {
    return classify(std::current_exception());
  }
}

// CLI11 only reads the config file of the top-level app, so subcommand files
// are applied here. Flags and environment values already present win.
void apply_config(CLI::App* sub) {
  const CLI::Option* cfg = sub->get_config_ptr();
  if (cfg == nullptr || cfg->count() == 0) return;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(cfg->as<std::string>())) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) continue;
    CLI::Option* op = sub->get_option_no_throw("--" + item.name);
    if (op == nullptr || op == cfg) throw CLI::ConfigError::Extras(item.fullname());
    if (op->count() > 0) continue;
    op->add_result(item.inputs);
    op->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beta-Jacobi process laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bjl::kVersion));

  SimulateOptions sim;
  DensityOptions den;
  VerifyOptions ver;
  std::string manifest_override;
  std::string replay_manifest;
  std::string replay_out;
  bool replay_out_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->set_config("--config", "", "flat key=value file; explicit flags win");
    sub->add_option("--manifest", manifest_override, "manifest path (default <out>.manifest.json)");
  };

  CLI::App* s = app.add_subcommand("simulate", "simulate an ensemble of paths");
  add_common(s);
  s->add_option("--beta", sim.model.beta);
  s->add_option("--p", sim.model.p);
  s->add_option("--q", sim.model.q);
  s->add_option("--m", sim.model.m);
  s->add_flag("--alcove-bm", sim.model.alcove_bm, "beta = 2, p = m + 3/2, q = m + 1/2");
  s->add_option("--dt", sim.dt);
  s->add_option("--horizon", sim.horizon);
  s->add_option("--seed", sim.seed)->envname("BJL_SEED");
  s->add_option("--boundary-tol", sim.boundary_tol);
  s->add_option("--max-halvings", sim.max_halvings);
  s->add_option("--coords", sim.coords)->check(CLI::IsMember({"phi", "lambda"}));
  s->add_option("--paths", sim.paths);
  s->add_option("--start", sim.start, "starting eigenvalues, decreasing")->delimiter(',');
  s->add_flag("--final-only", sim.final_only, "record only the first and last states");
  s->add_flag("--log-rejections", sim.log_rejections);
  s->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "json"}));
  s->add_option("--out", sim.out);
  s->add_option("--threads", sim.threads, "worker cap (results do not depend on it)");

  CLI::App* d = app.add_subcommand("density", "tabulate a density on a grid");
  add_common(d);
  d->add_option("--mode", den.mode)->check(CLI::IsMember({"univariate", "km2", "partition2", "stationary"}));
  d->add_option("--t", den.t);
  d->add_option("--grid", den.grid, "cells per axis; rows are cell midpoints");
  d->add_option("--r", den.r);
  d->add_option("--s", den.s);
  d->add_option("--beta", den.beta);
  d->add_option("--p", den.p);
  d->add_option("--q", den.q);
  d->add_option("--theta", den.theta, "start point, comma separated")->delimiter(',');
  d->add_option("--trunc", den.trunc, "series truncation N");
  d->add_option("--out", den.out);

  CLI::App* v = app.add_subcommand("verify", "run a verification suite");
  add_common(v);
  v->add_option("--suite", ver.suite)
      ->check(CLI::IsMember({"hitting", "stationary", "appendix", "identities", "density-vs-sim"}));
  v->add_option("--preset", ver.preset);
  v->add_option("--m", ver.m);
  v->add_option("--paths", ver.paths);
  v->add_option("--seed", ver.seed)->envname("BJL_SEED");
  v->add_option("--dt", ver.dt);
  v->add_option("--horizon", ver.horizon);
  v->add_option("--samples", ver.samples);
  v->add_option("--kind", ver.kind)->check(CLI::IsMember({"collision", "lower", "upper"}));
  v->add_option("--beta", ver.beta);
  v->add_option("--p", ver.p);
  v->add_option("--q", ver.q);
  v->add_option("--epsilon", ver.epsilon);
  v->add_option("--out", ver.out);
  v->add_option("--threads", ver.threads, "worker cap (results do not depend on it)");

  CLI::App* r = app.add_subcommand("replay", "re-run a manifest");
  r->add_option("source", replay_manifest, "manifest to replay")->required();
  r->add_option("--out", replay_out, "output path (default: the recorded one)")->each([&](const std::string&) {
    replay_out_given = true;
  });
  r->add_option("--manifest", manifest_override, "where to write the new manifest");

  try {
    app.parse(argc, argv);
    for (CLI::App* sub : app.get_subcommands()) apply_config(sub);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  return guarded([&]() -> int {
    if (*s) {
      write_manifest(manifest_path(manifest_override, sim.out), "simulate", to_json(sim));
      return run_simulate(sim);
    }
    if (*d) {
      write_manifest(manifest_path(manifest_override, den.out), "density", to_json(den));
      return run_density(den);
    }
    if (*v) {
      write_manifest(manifest_path(manifest_override, ver.out), "verify", to_json(ver));
      return run_verify(ver);
    }
    std::ifstream in(replay_manifest);
    if (!in) throw bjl::ParameterError("cannot read manifest " + replay_manifest);
    const Json manifest = Json::parse(in);
    const std::string sub = manifest.at("subcommand").get<std::string>();
    const Json& cfg = manifest.at("config");
    auto finish = [&](auto opts, auto run, const char* name) {
      if (replay_out_given) opts.out = replay_out;
      write_manifest(manifest_path(manifest_override, opts.out), name, to_json(opts));
      return run(opts);
    };
    if (sub == "simulate") {
      SimulateOptions o;
      from_json(cfg, o);
      return finish(o, run_simulate, "simulate");
    }
    if (sub == "density") {
      DensityOptions o;
      from_json(cfg, o);
      return finish(o, run_density, "density");
    }
    if (sub == "verify") {
      VerifyOptions o;
      from_json(cfg, o);
      return finish(o, run_verify, "verify");
    }
    throw bjl::ParameterError("manifest names unknown subcommand " + sub);
  });
}
