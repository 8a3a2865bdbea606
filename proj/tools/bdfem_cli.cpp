// Command-line front end: adaptive point-source experiments and the
// manufactured-solution verification.
//
//   bdfem_cli solve --preset example1 [--alpha 1.0] [--pair th|mini]
//                   [--iters 20] [--out dir]
//   bdfem_cli verify --pair th|mini --refinements 4
//
// Exit codes: 0 success, 1 usage error, 2 solver failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bdfem/bdfem.hpp"

namespace {

int run_solve(const std::string& preset, double alpha,
              const std::string& pair, int iters, const std::string& out) {
  bdfem::ExperimentConfig cfg = bdfem::config_for_preset(preset);
  cfg.alpha = alpha;
  if (pair == "th" || pair == "taylor_hood")
    cfg.pair = bdfem::PairKind::taylor_hood;
  else if (pair == "mini")
    cfg.pair = bdfem::PairKind::mini;
  else
    throw bdfem::UsageError("pair must be th or mini, got '" + pair + "'");
  if (iters > 0) cfg.iterations = iters;
  if (!out.empty()) cfg.out_dir = out;

  const bdfem::RunOutcome outcome = bdfem::run(cfg);
  return outcome.solver_failed ? 2 : 0;
}

int run_verify(const std::string& pair, int refinements) {
  bdfem::PairKind kind;
  if (pair == "th" || pair == "taylor_hood")
    kind = bdfem::PairKind::taylor_hood;
  else if (pair == "mini")
    kind = bdfem::PairKind::mini;
  else
    throw bdfem::UsageError("pair must be th or mini, got '" + pair + "'");

  const auto rows = bdfem::verify_manufactured(kind, refinements);
  std::printf("%10s %8s %14s %8s %14s %8s\n", "h", "ndof", "H1(u) error",
              "order", "L2(p) error", "order");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i == 0)
      std::printf("%10.3e %8d %14.6e %8s %14.6e %8s\n", r.h, r.ndof,
                  r.err_h1_velocity, "-", r.err_l2_pressure, "-");
    else
      std::printf("%10.3e %8d %14.6e %8.2f %14.6e %8.2f\n", r.h, r.ndof,
                  r.err_h1_velocity, r.order_velocity, r.err_l2_pressure,
                  r.order_pressure);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive FEM for the Brinkman-Darcy-Forchheimer equations "
               "with Dirac point sources"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "run an adaptive experiment");
  std::string preset;
  double alpha = 1.0;
  std::string pair = "th";
  int iters = 0;
  std::string out;
  solve->add_option("--preset", preset, "example1 | example2 | example3")
      ->required();
  solve->add_option("--alpha", alpha, "weight exponent in (0,2)");
  solve->add_option("--pair", pair, "th | mini");
  solve->add_option("--iters", iters, "adaptive iterations");
  solve->add_option("--out", out, "output directory");

  auto* verify =
      app.add_subcommand("verify", "manufactured-solution convergence orders");
  std::string vpair = "th";
  int refinements = 4;
  verify->add_option("--pair", vpair, "th | mini");
  verify->add_option("--refinements", refinements, "uniform refinement steps");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return run_solve(preset, alpha, pair, iters, out);
    return run_verify(vpair, refinements);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const bdfem::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const bdfem::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const bdfem::SourcePlacementError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const bdfem::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
