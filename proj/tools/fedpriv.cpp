// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "fedpriv/fedpriv.h"

namespace {

int report(fedpriv_status st) {
  if (st != FEDPRIV_OK) std::fprintf(stderr, "fedpriv: %s\n", fedpriv_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated private goodness-of-fit testing toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int workers = 1;
  unsigned long long seed = 0;

  const char* commands[][2] = {
      {"rates", "minimax separation rate over an epsilon grid"},
      {"regimes", "regime classification over (s, epsilon)"},
      {"calibrate", "Monte Carlo critical value under the null"},
      {"risk", "type I / type II risk at one alternative"},
      {"boundary", "empirical detection boundary by bisection on rho"},
      {"compare", "power of all protocols on a rho grid"},
      {"adaptive", "adaptive test over a smoothness range"}};
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "INI or JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads")
        ->check(CLI::Range(1, 256));
    sub->add_option("--seed", seed, "override the configured seed");
  }
  CLI::App* fig = app.add_subcommand("figure2", "emit the rate-curve bundle");
  fig->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  if (name == "figure2") return report(fedpriv_emit_figure2(out_dir.c_str()));

  fedpriv_config* cfg = nullptr;
  int rc = report(fedpriv_config_load(config_path.c_str(), &cfg));
  if (rc != 0) return rc;
  const bool has_seed = chosen->count("--seed") > 0;
  rc = report(fedpriv_run(cfg, name.c_str(), out_dir.c_str(), workers,
                          has_seed ? 1 : 0, seed));
  fedpriv_config_free(cfg);
  return rc;
}
