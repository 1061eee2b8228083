#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "pff/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pressurized crack benchmark with a matrix-free phase-field fracture solver"};
  std::string config_path;
  int levels = 0;
  std::string out_dir;
  bool vtk = false;
  int threads = 0;
  app.add_option("--config", config_path, "run configuration (key = value)")->check(CLI::ExistingFile);
  app.add_option("--levels", levels, "number of refinement levels in the study")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--vtk", vtk, "write VTK field files");
  app.add_option("--threads", threads, "cell-loop threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  pff::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = pff::parse_config(config_path);
    if (levels > 0) cfg.levels = levels;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (vtk) cfg.vtk = true;
    if (threads > 0) cfg.solver.threads = threads;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  std::cout << "# effective configuration\n";
  pff::write_config(std::cout, cfg);
  try {
    const pff::StudyResult res = pff::run_study(cfg, std::cout);
    if (!res.converged()) {
      std::cerr << "error: at least one level did not converge; see " << cfg.out_dir << "/newton_log.csv\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
