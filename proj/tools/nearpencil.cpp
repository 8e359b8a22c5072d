// nearpencil: distance to the nearest pencil with prescribed eigenvalues.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nearpencil/cli.hpp"

int main(int argc, char** argv) {
  using namespace nearpencil;
  CLI::App app{"Distance from A - lambda B to the nearest (A + dA) - lambda B with r "
               "eigenvalues in a set, a region, or anywhere"};
  std::string pencil_path;
  std::string mode = "set";
  int r = 1;
  std::string targets;
  std::string box;
  std::string grid;
  int max_evals = 0;
  double tol = 0.0;
  bool coincident = false;
  int threads = 1;
  std::string out = "-";

  app.add_option("--pencil", pencil_path, "Pencil JSON file")->required();
  app.add_option("--mode", mode, "set | region-box | region-lhp | complete | pseudospectra");
  app.add_option("--r", r, "Number of eigenvalues to place");
  app.add_option("--targets", targets, "Target set, e.g. \"5,1\" or \"0.5+2i,-1i\"");
  app.add_option("--box", box, "re0,re1,im0,im1");
  app.add_option("--grid", grid, "NX,NY for pseudospectra");
  app.add_option("--max-evals", max_evals, "DIRECT evaluation budget");
  app.add_option("--tol", tol, "Eigenvalue verification tolerance");
  app.add_flag("--coincident", coincident, "Require mu_1 = ... = mu_r (an r-fold eigenvalue)");
  app.add_option("--threads", threads, "Worker threads for outer evaluations and grids");
  app.add_option("--out", out, "Output path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  JobConfig cfg;
  try {
    cfg.pencil_path = pencil_path;
    cfg.mode = parse_mode(mode);
    cfg.r = r;
    if (!targets.empty()) cfg.targets = parse_complex_list(targets);
    if (!box.empty()) cfg.box = plane_box(parse_numbers(box, 4, "--box"));
    if (!grid.empty()) {
      const auto g = parse_numbers(grid, 2, "--grid");
      if (g[0] != static_cast<int>(g[0]) || g[1] != static_cast<int>(g[1])) {
        throw ParseError("--grid: NX and NY must be integers");
      }
      cfg.grid = std::make_pair(static_cast<int>(g[0]), static_cast<int>(g[1]));
    }
    if (app.count("--max-evals")) cfg.max_evals = max_evals;
    if (app.count("--tol")) cfg.tol = tol;
    cfg.coincident = coincident;
    cfg.threads = threads;
    cfg.out_path = out;
  } catch (const std::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  }
  return cfg.mode == JobMode::kPseudospectra ? run_pseudospectra(cfg) : run_job(cfg);
}
