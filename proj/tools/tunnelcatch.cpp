#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tunnelcatch/cli/commands.hpp"

namespace tc = tunnelcatch::cli;

int main(int argc, char** argv) {
  CLI::App app{"tunnelcatch: tunnel catch in a double well"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::string param;
  std::string range;
  std::string method;
  std::string delta_method;
  std::size_t samples = 0;
  double hbar = 0.0;
  double t_final = 0.0;
  std::size_t steps = 0;
  double detuning = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--hbar", hbar, "override hbar");
  };
  auto scanning = [&](CLI::App* sub) {
    sub->add_option("--param", param, "width or depth");
    sub->add_option("--range", range, "lo:hi");
    sub->add_option("--samples", samples, "uniform pre-scan samples");
    sub->add_option("--delta-method", delta_method, "wkb or wronskian");
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "isolated and double-well levels with two-level predictions");
  common(spectrum);
  CLI::App* scan = app.add_subcommand("scan", "P_r^max resonance scan; writes scan_curve.csv and scan_peaks.json");
  common(scan);
  scanning(scan);
  CLI::App* evolve = app.add_subcommand("evolve", "occupation dynamics; writes evolve_<method>.csv");
  common(evolve);
  evolve->add_option("--method", method, "two_level or grid");
  evolve->add_option("--t-final", t_final, "final time");
  evolve->add_option("--steps", steps, "time steps");
  evolve->add_option("--detuning", detuning, "E_r - E_l in units of delta");
  CLI::App* detect = app.add_subcommand("detect", "energy detection from the first resonance; writes detect.json");
  common(detect);
  scanning(detect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tc::InputError;
  }

  CLI::App* active = app.get_subcommands().front();
  return tc::guarded(
      [&] {
        tc::Scenario sc = tc::load_scenario(scenario_path);
        tc::Overrides o;
        if (active->count("--out")) o.out_dir = out_dir;
        if (active->count("--hbar")) o.hbar = hbar;
        if (active->get_option_no_throw("--param") && active->count("--param")) o.param = tc::parse_scan_parameter(param);
        if (active->get_option_no_throw("--range") && active->count("--range")) o.range = tc::parse_range(range);
        if (active->get_option_no_throw("--samples") && active->count("--samples")) o.samples = samples;
        if (active->get_option_no_throw("--delta-method") && active->count("--delta-method")) {
          o.delta_method = tc::parse_delta_method(delta_method);
        }
        if (active->get_option_no_throw("--method") && active->count("--method")) {
          o.method = tc::parse_evolve_method(method);
        }
        if (active->get_option_no_throw("--t-final") && active->count("--t-final")) o.t_final = t_final;
        if (active->get_option_no_throw("--steps") && active->count("--steps")) o.steps = steps;
        if (active->get_option_no_throw("--detuning") && active->count("--detuning")) o.detuning = detuning;
        tc::apply(sc, o);
        if (active == spectrum) return tc::cmd_spectrum(sc, o, std::cout, std::cerr);
        if (active == scan) return tc::cmd_scan(sc, o, std::cout, std::cerr);
        if (active == evolve) return tc::cmd_evolve(sc, o, std::cout, std::cerr);
        return tc::cmd_detect(sc, o, std::cout, std::cerr);
      },
      std::cerr);
}
