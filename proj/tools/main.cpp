// sturmspec command line tool: computes spectra of one-dimensional discrete
// Schrodinger operators with Sturmian potentials through the trace-map
// recursion, and emits plot-ready CSV/JSON.  One subcommand per capability;
// identical inputs (including --seed) produce byte-identical output files.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sturmspec/checks.hpp"
#include "sturmspec/emit.hpp"

namespace {

using namespace sturmspec;

struct RunConfig {
  std::string alpha_text = "[0;(1)]";
  double lambda = 1.0;
  double omega = 0.0;
  long long level = 12;
  long long size = 10000;
  long long grid = 2001;
  long long m = 1;
  long long m_max = 20;
  int samples = 200;
  unsigned seed = 1;
  int workers = 0;  // 0: use hardware concurrency
  double energy = 0.0;
  long long length = 144;
  std::vector<double> lambdas{0.4, 0.2, 0.1, 0.05};
  std::string out;
  std::string format = "csv";
};

int resolved_workers(const RunConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// default output location: $STURMSPEC_OUT_DIR (or ".") / <subcommand>.<ext>
std::string output_path(const RunConfig& cfg, const std::string& name, bool json) {
  if (!cfg.out.empty()) return cfg.out;
  const char* dir = std::getenv("STURMSPEC_OUT_DIR");
  std::string base = (dir && *dir) ? dir : ".";
  return base + "/" + name + (json ? ".json" : ".csv");
}

// empty csv marks a JSON-only report kind
void write_artifact(const RunConfig& cfg, const std::string& name, const std::string& csv,
                    const ordered_json& json) {
  bool as_json = cfg.format == "json" || csv.empty();
  std::string path = output_path(cfg, name, as_json);
  write_text(path, as_json ? json.dump(2) + "\n" : csv);
  std::printf("wrote %s\n", path.c_str());
}

ModelParams model_of(const RunConfig& cfg) {
  ModelParams params{parse_cf(cfg.alpha_text), cfg.lambda};
  params.validate();
  return params;
}

std::string check_alpha(const std::string& text) {
  try {
    parse_cf(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string check_phase(const std::string& text) {
  try {
    double w = std::stod(text);
    if (!(w >= 0.0 && w < 1.0)) return "phase must lie in [0,1)";
  } catch (const std::exception&) {
    return "phase must be a number in [0,1)";
  }
  return {};
}

int run_approximants(const RunConfig& cfg) {
  auto rows = approximants(parse_cf(cfg.alpha_text), cfg.level);
  write_artifact(cfg, "approximants", csv_approximants(rows), json_approximants(rows));
  return 0;
}

int run_word(const RunConfig& cfg) {
  Word w = rotation_sequence(parse_cf(cfg.alpha_text), cfg.omega,
                             static_cast<std::size_t>(cfg.length));
  write_artifact(cfg, "word", "", json_word(w, cfg.alpha_text, cfg.omega));
  return 0;
}

int run_trace_orbit(const RunConfig& cfg) {
  OrbitResult orbit = trace_orbit(model_of(cfg), cfg.energy, cfg.level, true);
  write_artifact(cfg, "trace-orbit", csv_trace_orbit(orbit), json_trace_orbit(orbit));
  return 0;
}

int run_spectrum(const RunConfig& cfg) {
  BandSet bs = bands(model_of(cfg), cfg.level, resolved_workers(cfg));
  write_artifact(cfg, "spectrum", csv_bands(bs), json_bands(bs));
  std::printf("%zu bands, total measure %.6f\n", bs.bands.size(), bs.total_measure());
  return 0;
}

int run_gaps(const RunConfig& cfg) {
  LabeledGaps lg = label_gaps(model_of(cfg), cfg.level, cfg.m_max, cfg.size,
                              3.0 / static_cast<double>(cfg.size), resolved_workers(cfg));
  write_artifact(cfg, "gaps", csv_gaps(lg.gaps, cfg.level), json_gaps(lg.gaps, cfg.level));
  std::size_t labeled = 0;
  for (const Gap& g : lg.gaps)
    if (g.label) ++labeled;
  std::printf("%zu gaps, %zu labeled, %zu ambiguous\n", lg.gaps.size(), labeled,
              lg.ambiguous_gaps.size());
  return 0;
}

int run_dimension(const RunConfig& cfg) {
  BandSet bs = bands(model_of(cfg), cfg.level, resolved_workers(cfg));
  ThicknessReport tr = thickness_denseness(bs);
  std::vector<double> scales = default_scales(bs);
  double bd = box_dimension(bs, scales);
  write_artifact(cfg, "dimension", "", json_dimension_report(bs, tr, bd, scales));
  std::printf("boxdim %.4f, thickness bounds [%.4f, %.4f]\n", bd, tr.dim_lower, tr.dim_upper);
  return 0;
}

int run_gap_opening(const RunConfig& cfg) {
  auto rows = gap_opening_study(parse_cf(cfg.alpha_text), cfg.m, cfg.lambdas, cfg.level,
                                cfg.size, resolved_workers(cfg));
  write_artifact(cfg, "gap-opening", csv_gap_opening(rows), json_gap_opening(rows));
  return 0;
}

IDSTable table_of(const RunConfig& cfg) {
  ModelParams params = model_of(cfg);
  std::vector<double> grid = uniform_grid(-2.0 - params.lambda, 2.0 + params.lambda,
                                          static_cast<std::size_t>(cfg.grid));
  return ids_curve(params, cfg.omega, cfg.size, grid, resolved_workers(cfg));
}

int run_ids(const RunConfig& cfg) {
  IDSTable table = table_of(cfg);
  write_artifact(cfg, "ids", csv_ids(table), json_ids(table));
  return 0;
}

int run_gap_labels(const RunConfig& cfg) {
  auto labels = gap_labels(parse_cf(cfg.alpha_text), cfg.m_max);
  write_artifact(cfg, "gap-labels", csv_gap_labels(labels), json_gap_labels(labels));
  return 0;
}

int run_dos_dimension(const RunConfig& cfg) {
  IDSTable table = table_of(cfg);
  LocalDimensionEstimate est =
      dos_local_dimension(table, default_epsilons(table), cfg.samples, cfg.seed);
  write_artifact(cfg, "dos-dimension", "", json_dos_report(est));
  std::printf("d_estimate %.4f from %zu samples (%lld redraws)\n", est.d_estimate,
              est.samples.size(), est.discarded);
  return 0;
}

int run_check(const RunConfig& cfg) {
  auto results = run_checks();
  ordered_json report = ordered_json::array();
  int failures = 0;
  for (const CheckResult& r : results) {
    std::printf("%s %s: %s\n", r.passed ? "ok  " : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.passed) ++failures;
    report.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  write_artifact(cfg, "check", "", report);
  std::printf("%zu checks, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectra of Sturmian Schrodinger operators via the trace map"};
  app.require_subcommand(1);
  std::function<int()> action;

  // each subcommand owns its config so defaults stay independent
  auto subcommand = [&](const std::string& name, const std::string& desc,
                        int (*fn)(const RunConfig&)) {
    auto cfg = std::make_shared<RunConfig>();
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->callback([&action, cfg, fn] { action = [cfg, fn] { return fn(*cfg); }; });
    cmd->add_option("--out", cfg->out, "output path (default: $STURMSPEC_OUT_DIR or cwd)");
    return std::pair<CLI::App*, std::shared_ptr<RunConfig>>(cmd, cfg);
  };
  auto add_alpha = [](CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--alpha", cfg.alpha_text,
                    "rotation angle as a continued fraction, e.g. \"[0;(1)]\"")
        ->check(CLI::Validator(check_alpha, "CF"));
  };
  auto add_model = [&](CLI::App* cmd, RunConfig& cfg) {
    add_alpha(cmd, cfg);
    cmd->add_option("--lambda", cfg.lambda, "coupling constant, >= 0")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--omega", cfg.omega, "phase in [0,1)")
        ->check(CLI::Validator(check_phase, "PHASE"));
  };
  auto add_format = [](CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_workers = [](CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--workers", cfg.workers, "parallel workers (default: all cores)")
        ->check(CLI::NonNegativeNumber);
  };

  {
    auto [cmd, cfg] = subcommand("approximants", "continued fraction convergents p_k/q_k",
                                 run_approximants);
    cfg->level = 20;
    add_alpha(cmd, *cfg);
    add_format(cmd, *cfg);
    cmd->add_option("--level", cfg->level, "largest k")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("word", "Sturmian word as an ASCII 0/1 string", run_word);
    add_alpha(cmd, *cfg);
    cmd->add_option("--omega", cfg->omega, "phase in [0,1)")
        ->check(CLI::Validator(check_phase, "PHASE"));
    cmd->add_option("--length", cfg->length, "number of letters")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("trace-orbit", "trace-map orbit from the initial line",
                                 run_trace_orbit);
    cfg->level = 30;
    add_model(cmd, *cfg);
    add_format(cmd, *cfg);
    cmd->add_option("--energy", cfg->energy, "energy E");
    cmd->add_option("--level", cfg->level, "number of steps")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("spectrum", "band approximation at level k", run_spectrum);
    add_model(cmd, *cfg);
    add_format(cmd, *cfg);
    add_workers(cmd, *cfg);
    cmd->add_option("--level", cfg->level, "band level k")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("gaps", "gaps with IDS values and labels", run_gaps);
    add_model(cmd, *cfg);
    add_format(cmd, *cfg);
    add_workers(cmd, *cfg);
    cmd->add_option("--level", cfg->level, "band level k")->check(CLI::PositiveNumber);
    cmd->add_option("--size", cfg->size, "restriction size L for IDS values")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--m-max", cfg->m_max, "largest |m| among candidate labels")
        ->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("dimension", "box dimension and thickness bounds",
                                 run_dimension);
    add_model(cmd, *cfg);
    add_workers(cmd, *cfg);
    cmd->add_option("--level", cfg->level, "band level k")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("gap-opening", "gap width across a lambda ladder",
                                 run_gap_opening);
    add_alpha(cmd, *cfg);
    add_format(cmd, *cfg);
    add_workers(cmd, *cfg);
    cmd->add_option("--m", cfg->m, "gap label m (nonzero)")
        ->check(CLI::Validator(
            [](const std::string& s) -> std::string {
              return s == "0" || s == "-0" ? "m = 0 is not a gap label" : "";
            },
            "NONZERO"));
    cmd->add_option("--lambdas", cfg->lambdas, "coupling ladder")->expected(-1)->delimiter(',');
    cmd->add_option("--level", cfg->level, "band level k")->check(CLI::PositiveNumber);
    cmd->add_option("--size", cfg->size, "restriction size L")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("ids", "integrated density of states curve", run_ids);
    add_model(cmd, *cfg);
    add_format(cmd, *cfg);
    add_workers(cmd, *cfg);
    cmd->add_option("--size", cfg->size, "restriction size L")->check(CLI::PositiveNumber);
    cmd->add_option("--grid", cfg->grid, "energy grid points")
        ->check(CLI::Range(2LL, 100000000LL));
  }
  {
    auto [cmd, cfg] = subcommand("gap-labels", "label values {m alpha}", run_gap_labels);
    add_alpha(cmd, *cfg);
    add_format(cmd, *cfg);
    cmd->add_option("--m-max", cfg->m_max, "largest |m|")->check(CLI::PositiveNumber);
  }
  {
    auto [cmd, cfg] = subcommand("dos-dimension", "local dimension of the IDS measure",
                                 run_dos_dimension);
    cfg->grid = 20001;
    add_model(cmd, *cfg);
    add_workers(cmd, *cfg);
    cmd->add_option("--size", cfg->size, "restriction size L")->check(CLI::PositiveNumber);
    cmd->add_option("--grid", cfg->grid, "energy grid points")
        ->check(CLI::Range(2LL, 100000000LL));
    cmd->add_option("--samples", cfg->samples, "sample count")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg->seed, "sampling seed");
  }
  subcommand("check", "run the invariant suite", run_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    // machine-readable failure report on stdout, per contract
    sturmspec::ordered_json err{{"error", e.what()}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  }
}
