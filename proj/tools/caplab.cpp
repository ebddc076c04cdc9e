#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caplab/config.hpp"
#include "caplab/parallel.hpp"
#include "caplab/pipeline.hpp"

namespace {

void print_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal capacity laboratory"};
  app.require_subcommand(1);
  int threads = 0;
  bool deterministic = false;
  app.add_option("--threads", threads, "Worker threads (default: CAPLAB_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--deterministic", deterministic,
               "Byte-identical outputs for identical configs (no timings in the summary)");

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one scenario end to end");
  run->add_option("config", run_config, "Run config JSON")->required();

  std::string conv_config;
  int levels = 2;
  auto* conv = app.add_subcommand("converge", "Grid convergence study");
  conv->add_option("config", conv_config, "Run config JSON")->required();
  conv->add_option("--levels", levels, "Refinement levels (>= 2)")->required();

  std::string plot_dir;
  auto* plots = app.add_subcommand("plots", "Plot-ready CSVs from a run directory");
  plots->add_option("run-dir", plot_dir, "Output directory of a run")->required();

  std::vector<std::string> ledger_dirs;
  std::string ledger_out = "eta_alpha.csv";
  auto* ledger = app.add_subcommand("ledger", "Collect (eta, alpha) records across runs");
  ledger->add_option("dirs", ledger_dirs, "Run directories")->required();
  ledger->add_option("-o,--output", ledger_out, "Scatter CSV path");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) caplab::set_thread_count(threads);

  try {
    if (*run) {
      caplab::RunConfig cfg = caplab::load_run_config(run_config);
      cfg.deterministic = cfg.deterministic || deterministic;
      caplab::run_scenario(cfg);
      print_file(std::filesystem::path(cfg.output_dir) / "summary.txt");
    } else if (*conv) {
      caplab::RunConfig cfg = caplab::load_run_config(conv_config);
      cfg.deterministic = cfg.deterministic || deterministic;
      caplab::convergence_study(cfg, levels);
      print_file(std::filesystem::path(cfg.output_dir) / "convergence.csv");
    } else if (*plots) {
      caplab::emit_plot_data(plot_dir);
      std::cout << "wrote plot_U.csv, plot_Q.csv, plot_trend.csv in " << plot_dir << "\n";
    } else if (*ledger) {
      const caplab::LedgerSummary s = caplab::write_ledger(ledger_dirs, ledger_out);
      std::cout << s.records << " records -> " << ledger_out << "\n";
      if (s.fitted_constant)
        std::printf("fitted alpha / sqrt(eta): %.6g (max %.6g)\n", *s.fitted_constant, *s.max_ratio);
    }
  } catch (const caplab::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const caplab::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
