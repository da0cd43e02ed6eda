#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "coneflow/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = coneflow::cli;
  CLI::App app{"Blow-up and sector-flow experiments"};
  std::string config_path, scenario, out, sweep, epsilon, n, nr, ntheta, t_end;
  std::vector<std::string> sets;
  bool strict = true;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--scenario", scenario, "onedim-blowup | axis-onedim | elliptic-validate | axisym-blowup | axisym-noswirl");
  app.add_option("--epsilon", epsilon, "domain slope");
  app.add_option("--n", n, "1D angular nodes");
  app.add_option("--nr", nr, "radial nodes");
  app.add_option("--ntheta", ntheta, "angular nodes of the sector grid");
  app.add_option("--t-end", t_end, "final time");
  app.add_option("--out", out, "output directory");
  app.add_option("--set", sets, "any config key as KEY=VALUE (repeatable)");
  app.add_option("--sweep", sweep, "KEY=v1,v2,... runs one job per value");
  app.add_option("--jobs", jobs, "parallel sweep workers");
  app.add_flag("--strict,!--no-strict", strict, "reject unknown keys (default on)");
  CLI11_PARSE(app, argc, argv);

  cli::ConfigSources sources;
  sources.strict = strict;
  if (!config_path.empty()) sources.file = config_path;
  auto flag = [&](const char* key, const std::string& v) {
    if (!v.empty()) sources.flags.emplace_back(key, v);
  };
  flag("scenario", scenario);
  flag("epsilon", epsilon);
  flag("n", n);
  flag("nr", nr);
  flag("ntheta", ntheta);
  flag("t_end", t_end);
  flag("out", out);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects KEY=VALUE, got '" << s << "'\n";
      return cli::kExitConfig;
    }
    sources.flags.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }

  try {
    if (!sweep.empty()) return cli::run_sweep(sources, cli::parse_sweep(sweep), jobs, std::cerr);
    const cli::ParsedConfig parsed = cli::parse_config(sources);
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
    return cli::run(parsed.config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
}
