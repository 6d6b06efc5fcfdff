// dephasim: decoherence factors of a pure-dephasing (QND) system-boson model.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dephasim/cli/commands.hpp"

namespace {

using namespace dephasim;
using namespace dephasim::cli;

struct CommonFlags {
  std::string config;
  std::string output;
  std::string pairs;
  std::optional<double> quad_tol;
  std::optional<std::size_t> trunc_dim;
  bool verify_quadrature = false;
  bool magnitude_only = false;
};

void add_common(CLI::App* sub, CommonFlags& f, bool config_required) {
  auto* opt = sub->add_option("--config", f.config, "JSON run configuration");
  if (config_required) opt->required();
  sub->add_option("--output", f.output, "output directory (overrides run.output)");
  sub->add_option("--pairs", f.pairs, "level pairs as n,m[,n,m...] (default: all)");
  sub->add_option("--quad-tol", f.quad_tol, "relative quadrature tolerance");
  sub->add_option("--trunc-dim", f.trunc_dim, "fixed Fock dimension per bath mode (oracle)");
  sub->add_flag("--verify-quadrature", f.verify_quadrature,
                "also integrate Ohmic closed forms numerically and report the gap");
  sub->add_flag("--magnitude-only", f.magnitude_only, "write |excitation| and |total|");
}

std::vector<LevelPair> parse_pairs(const std::string& text) {
  std::vector<std::size_t> idx;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      idx.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "--pairs: bad index '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (idx.size() % 2 != 0) throw Error(ErrorCode::Config, "--pairs: expected an even number of indices");
  std::vector<LevelPair> out;
  for (std::size_t k = 0; k < idx.size(); k += 2) out.push_back({idx[k], idx[k + 1]});
  return out;
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig cfg = load_config(f.config);
  if (!f.output.empty()) cfg.output_dir = f.output;
  if (!f.pairs.empty()) cfg.pairs = parse_pairs(f.pairs);
  if (f.quad_tol) {
    cfg.quad.rel_tol = *f.quad_tol;
    cfg.quad.validate();
  }
  if (f.trunc_dim) {
    const auto* d = std::get_if<DiscreteBath>(&cfg.bath);
    cfg.trunc_dims = std::vector<std::size_t>(d ? d->modes.size() : 1, *f.trunc_dim);
  }
  cfg.verify_quadrature = f.verify_quadrature;
  cfg.magnitude_only = f.magnitude_only;
  return cfg;
}

int finish(const RunReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report.summary();
  for (const auto& file : report.files) std::cout << "wrote " << file << '\n';
  std::cout << (report.failed() ? "FAIL" : "PASS") << '\n';
  return exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dephasim: pure dephasing of an N-level system under QND coupling to a boson bath.\n"
      "Natural units: hbar = k_B = 1 (frequencies are angular, temperature is an energy;\n"
      "a low-temperature exponent gamma t^2 k_B^2 T^2 / hbar^2 reads gamma t^2 T^2).\n"
      "Exit codes: 0 OK, 1 check failure, 2 config error, 3 resource cap."};
  app.require_subcommand(1);

  CommonFlags series_f, map_f, oracle_f, relation_f;
  auto* series = app.add_subcommand("series", "decoherence factor curves per level pair");
  add_common(series, series_f, true);
  auto* tmap = app.add_subcommand("thermal-map", "thermal decoherence factor over (t, T)");
  add_common(tmap, map_f, true);
  auto* oracle = app.add_subcommand("oracle-check",
                                    "compare analytic results with brute-force Fock-space evolution "
                                    "(built-in benchmarks without --config)");
  add_common(oracle, oracle_f, false);
  auto* relation = app.add_subcommand("relation", "dephasing-fluctuation identity per level pair");
  add_common(relation, relation_f, true);

  auto* preset = app.add_subcommand("preset", "emit a ready-made configuration");
  preset->require_subcommand(1);
  auto* boson = preset->add_subcommand("boson-mode", "single boson mode b^dag b coupled via its number");
  double omega0 = 1.0;
  int n_max = 1;
  std::string preset_out;
  boson->add_option("--omega0", omega0, "mode frequency")->capture_default_str();
  boson->add_option("--n-max", n_max, "highest number state kept")->capture_default_str();
  boson->add_option("--output", preset_out, "write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (series->parsed()) return finish(cmd_series(build_config(series_f)));
    if (tmap->parsed()) return finish(cmd_thermal_map(build_config(map_f)));
    if (relation->parsed()) return finish(cmd_relation(build_config(relation_f)));
    if (oracle->parsed()) {
      std::optional<RunConfig> cfg;
      std::optional<std::vector<std::size_t>> dims;
      if (!oracle_f.config.empty()) cfg = build_config(oracle_f);
      else if (oracle_f.trunc_dim) dims = std::vector<std::size_t>{*oracle_f.trunc_dim};
      return finish(cmd_oracle_check(cfg, dims));
    }
    if (boson->parsed()) {
      const std::string text = preset_boson_mode_config(omega0, n_max).dump(2) + "\n";
      if (preset_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(preset_out, std::ios::binary | std::ios::trunc);
        if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write '" + preset_out + "'");
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
