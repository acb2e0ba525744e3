// weylcensus: validate Schottky generator systems, sweep censuses of group
// elements, and emit growth reports / plot-ready CSV data.
//
// Exit codes: 0 success, 1 operational error, 2 validation failure.

#include "weyl/census_io.hpp"
#include "weyl/presets.hpp"
#include "weyl/reports.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace weyl;

namespace {

struct ValidationFailure {
  ValidationReport report;
};

SchottkySystem load_with_seed(const std::string& cfg_path, std::optional<std::uint64_t> seed) {
  std::ifstream in(cfg_path);
  if (!in) throw ParseError("cannot open config file: " + cfg_path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (seed) cfg["seed"] = *seed;
  return load_system(cfg);
}

SchottkySystem load_validated(const std::string& cfg_path, std::optional<std::uint64_t> seed) {
  SchottkySystem sys = load_with_seed(cfg_path, seed);
  ValidationReport rep = validate(sys);
  if (!rep.passed) throw ValidationFailure{rep};
  return sys;
}

// Ball spec "letter:radius", e.g. "a:0.2"; the center is the fixed flag of
// that letter.
FlagBall parse_ball(const SchottkySystem& sys, const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw ParseError("ball spec must be <letter>:<radius>");
  const Word w = parse_word(spec.substr(0, colon), sys.num_generators);
  if (w.size() != 1) throw ParseError("ball spec must name a single letter");
  const int code = w[0].code();
  if (!sys.flag_defined[code]) throw NotRegular("no fixed flag for letter " + sys.letter_str(code));
  double radius = 0;
  try {
    radius = std::stod(spec.substr(colon + 1));
  } catch (...) {
    throw ParseError("ball spec must be <letter>:<radius>");
  }
  if (!(radius > 0.0) || radius > 1.0) throw ParseError("ball radius must lie in (0, 1]");
  return FlagBall{sys.fixed_flag[code], radius};
}

void parse_window(const std::string& spec, double& lo, double& hi) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParseError("window must be R1:R2");
  try {
    lo = std::stod(spec.substr(0, colon));
    hi = std::stod(spec.substr(colon + 1));
  } catch (...) {
    throw ParseError("window must be R1:R2");
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Schottky group census and growth reports"};
  app.require_subcommand(1);
  app.fallthrough();  // --threads / --seed may follow the subcommand

  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware)")
      ->envname("WEYL_CENSUS_THREADS");

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "override the config seed");

  // validate
  auto* v = app.add_subcommand("validate", "check a generator system");
  std::string v_cfg;
  std::string v_out;
  int v_suggest = 0;
  v->add_option("config", v_cfg, "system config JSON")->required();
  v->add_option("-o,--output", v_out, "write the validation report JSON here");
  v->add_option("--suggest-power", v_suggest, "search for the least valid power <= N");

  // census
  auto* c = app.add_subcommand("census", "sweep all words up to a length bound");
  std::string c_cfg, c_out;
  int c_len = 0;
  std::uint64_t c_budget = 100000000ULL;
  c->add_option("config", c_cfg, "system config JSON")->required();
  c->add_option("-L,--max-length", c_len, "word length bound")->required();
  c->add_option("-o,--output", c_out, "output directory")->required();
  c->add_option("--budget", c_budget, "record cap");

  // report
  auto* r = app.add_subcommand("report", "growth report from a cached census");
  std::string r_cfg, r_census, r_out, r_window, r_ballA = "a:0.2", r_ballB = "A:0.2";
  int r_bins = 16;
  r->add_option("config", r_cfg, "system config JSON")->required();
  r->add_option("--census", r_census, "census CSV produced by the census command")->required();
  r->add_option("-o,--output", r_out, "output directory (default: census directory)");
  r->add_option("--window", r_window, "delta fit window R1:R2 (default [0.5 H, H])");
  r->add_option("--bins", r_bins, "delta fit grid size");
  r->add_option("--ballA", r_ballA, "directional ball A as <letter>:<radius>");
  r->add_option("--ballB", r_ballB, "directional ball B as <letter>:<radius>");

  // presets
  auto* p = app.add_subcommand("presets", "list or emit shipped demo configs");
  auto* pl = p->add_subcommand("list", "print preset names");
  auto* pe = p->add_subcommand("emit", "print a preset config");
  std::string p_name, p_out;
  pe->add_option("name", p_name, "preset name")->required();
  pe->add_option("-o,--output", p_out, "write the config here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  if (v->parsed()) {
    SchottkySystem sys = load_with_seed(v_cfg, seed);
    ValidationReport rep = validate(sys);
    nlohmann::ordered_json j = rep.to_json();
    if (v_suggest > 0) {
      try {
        j["suggested_power"] = suggest_power(sys, v_suggest);
      } catch (const NoPowerFound& e) {
        j["suggested_power"] = nullptr;
        j["suggest_power_error"] = e.what();
      }
    }
    if (!v_out.empty()) save_json(j, v_out);
    std::cout << j.dump(2) << "\n";
    return rep.passed ? 0 : 2;
  }

  if (c->parsed()) {
    SchottkySystem sys = load_validated(c_cfg, seed);
    BuildOptions opt;
    opt.budget = c_budget;
    opt.threads = threads;
    CensusTable table = build_census(sys, c_len, opt);
    fs::create_directories(c_out);
    const std::string csv = (fs::path(c_out) / "census.csv").string();
    const std::string side = (fs::path(c_out) / "census.json").string();
    save_census(table, sys, csv, side);
    std::cout << "census: " << table.size() << " records, horizon_R "
              << table.horizon_R << ", horizon_t " << table.horizon_t << "\n"
              << "wrote " << csv << "\n";
    return 0;
  }

  if (r->parsed()) {
    SchottkySystem sys = load_with_seed(r_cfg, seed);
    fs::path census_path(r_census);
    fs::path sidecar = census_path;
    sidecar.replace_extension(".json");
    CensusTable table = load_census(census_path.string(), sidecar.string(), sys);

    double lo = 0.5 * table.horizon_R, hi = table.horizon_R;
    if (!r_window.empty()) parse_window(r_window, lo, hi);
    DeltaEstimate delta = estimate_delta(table, lo, hi, r_bins);
    GrowthReport rep = theorem_report(table, delta);

    FlagBall ballA = parse_ball(sys, r_ballA);
    FlagBall ballB = parse_ball(sys, r_ballB);
    std::uint64_t undefined = 0;
    std::vector<double> dir = directional_distances(table, ballA, ballB, &undefined);
    nlohmann::ordered_json dj;
    dj["ballA"] = r_ballA;
    dj["ballB"] = r_ballB;
    dj["undefined_flag_records"] = undefined;
    dj["grid"] = nlohmann::ordered_json::array();
    for (const auto& row : rep.orbit_ratios) {
      const auto all = count_orbit(table, row.x);
      const std::uint64_t n_dir = std::lower_bound(dir.begin(), dir.end(), row.x) - dir.begin();
      nlohmann::ordered_json g;
      g["R"] = row.x;
      g["count"] = n_dir;
      g["fraction"] = all.count ? static_cast<double>(n_dir) / all.count : 0.0;
      dj["grid"].push_back(g);
    }

    nlohmann::ordered_json j = rep.to_json();
    j["directional"] = dj;

    const fs::path out_dir = r_out.empty() ? census_path.parent_path() : fs::path(r_out);
    fs::create_directories(out_dir);
    save_json(j, (out_dir / "report.json").string());
    save_ratio_csv(rep.orbit_ratios, (out_dir / "ratios_orbit.csv").string());
    save_ratio_csv(rep.class_ratios, (out_dir / "ratios_classes.csv").string());

    std::printf("delta_hat        %.6f  (stderr %.2g, window [%.3f, %.3f])\n", delta.delta_hat,
                delta.std_error, delta.window_lo, delta.window_hi);
    std::printf("p_slope          %.6f  (stderr %.2g)\n", rep.p_slope, rep.p_slope_stderr);
    std::printf("benoist_M_hat    %.6f\n", rep.benoist.m_hat);
    std::printf("alpha_hat        %.6f%s\n", rep.cone.alpha_hat,
                rep.cone.rank_one ? "  (rank one)" : "");
    std::printf("min_wall_gap     %.6f\n", rep.cone.min_wall_gap);
    std::printf("max multiplicity %llu  (log-log slope %.3f vs rank %d)\n",
                static_cast<unsigned long long>(
                    rep.multiplicity.max_counts.empty() ? 0 : rep.multiplicity.max_counts.back()),
                rep.multiplicity.slope, rep.rank);
    std::printf("report files in  %s\n", out_dir.string().c_str());
    return 0;
  }

  if (pl->parsed()) {
    for (const std::string& n : preset_names()) std::cout << n << "\n";
    return 0;
  }
  if (pe->parsed()) {
    nlohmann::ordered_json cfg = preset_config(p_name);
    if (!p_out.empty()) {
      save_json(cfg, p_out);
    } else {
      std::cout << cfg.dump(2) << "\n";
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationFailure& f) {
    std::cerr << f.report.to_json().dump(2) << "\nvalidation failed\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
