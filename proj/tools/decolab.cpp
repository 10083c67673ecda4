#include "decolab/commands.hpp"

#include <iostream>

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"decolab: conditioned-state decoherence simulations"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string scenario;
  bool quiet = false;

  const char* commands[][2] = {
      {"localize", "Conditioned-state trajectories of a particle under collisional localization"},
      {"collapse", "Weight dynamics of a superposition of pointer packets"},
      {"unravel", "Jump unravelling of a Lindblad master equation against the master solution"},
      {"frames", "Branch trees, decoherence and consistency for event scripts"},
      {"scales", "Pointer-state scales and chaos margins in physical units"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    auto* cfg = sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", seed, "Seed overriding the config"));
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--quiet", quiet, "Print nothing on success");
    if (std::string(c[0]) == "frames") {
      sub->add_option("--scenario", scenario, "Bundled scenario: epr, wigner, chsh, fr");
    } else if (std::string(c[0]) != "scales") {
      cfg->required();
    }
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    std::string name;
    decolab::CommandOptions opts;
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (subs[k]->parsed()) {
        name = subs[k]->get_name();
        if (seed_opts[k]->count() > 0) opts.seed = seed;
      }
    }
    opts.out_dir = out_dir;
    if (!scenario.empty()) opts.scenario = scenario;
    if (name == "frames" && config_path.empty() && scenario.empty())
      throw decolab::Error("frames needs --config or --scenario");
    decolab::Json config = config_path.empty() ? decolab::Json::object() : decolab::read_json_file(config_path);
    decolab::CommandOutcome outcome = decolab::run_command(name, config, opts);
    if (!outcome.passed()) {
      std::cout << decolab::failure_report(outcome).dump(2) << "\n";
      return 1;
    }
    if (!quiet) std::cout << outcome.table;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << decolab::Json{{"error", e.what()}}.dump() << "\n";
    return 2;
  }
}
