#include <CLI11.hpp>

#include <iostream>

#include "twa/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Truncated Wigner simulations of open spin and spin-boson systems"};
  app.require_subcommand(1);

  std::string run_config;
  twa::cli::RunOverrides overrides;
  auto* run = app.add_subcommand("run", "Run a configuration (TOML or .meta.json)");
  run->add_option("config", run_config, "Configuration file")->required();
  run->add_option("--out", overrides.out, "Output prefix");
  run->add_option("--seed", overrides.seed, "Master seed");
  run->add_option("--threads", overrides.threads, "Worker threads (0: all cores)");
  run->add_option("--engine", overrides.engine, "twa, oracle or both");

  std::string csv_a, csv_b;
  twa::cli::CompareOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Compare two result CSVs");
  compare->add_option("a", csv_a, "First CSV")->required();
  compare->add_option("b", csv_b, "Second CSV")->required();
  compare->add_option("--tolerance", compare_opts.tolerance, "Maximum absolute deviation")
      ->capture_default_str();
  compare->add_option("--json", compare_opts.json_path, "Write the JSON report here ('-' for stdout)");

  std::string eom_config;
  bool eom_json = false;
  auto* dump = app.add_subcommand("dump-eom", "Print the compiled equations of motion");
  dump->add_option("config", eom_config, "Configuration file")->required();
  dump->add_flag("--json", eom_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : twa::cli::kExitConfig;
  }

  if (*run) return twa::cli::cmd_run(run_config, overrides, std::cout, std::cerr);
  if (*compare) return twa::cli::cmd_compare(csv_a, csv_b, compare_opts, std::cout, std::cerr);
  return twa::cli::cmd_dump_eom(eom_config, eom_json, std::cout, std::cerr);
}
