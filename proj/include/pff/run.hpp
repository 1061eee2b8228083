#pragma once

// Refinement study driver: setup, one incremental step of the Newton/active
// set solver per level, quantities of interest and CSV/VTK output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pff/config.hpp"
#include "pff/nonlinear.hpp"
#include "pff/sneddon.hpp"

namespace pff {

struct StudyRow {
  int local_refines = 0;
  QoiReport qoi;
  NewtonResult newton;
  /// max_i (phi_i - phi0_i)
  double max_phi_increase = 0.0;
  /// min of the recovered multiplier over the active set (0 if empty)
  double min_active_lambda = 0.0;
  double seconds = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  bool converged() const {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const StudyRow& r) { return r.newton.converged; });
  }
};

/// ASCII unstructured grid with point data u, |u|, phi and the active mask.
inline void write_fields_vtk(const std::string& path, const QuadMesh& mesh, const DofMap& map, const BlockVector& U,
                             const std::vector<int>& active) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const std::size_t n = map.n_nodes();
  out << "# vtk DataFile Version 3.0\nphase-field fracture\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(12);
  out << "POINTS " << n << " double\n";
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = mesh.vertex(map.vertex_of_node[i]);
    out << p.x << ' ' << p.y << " 0\n";
  }
  out << "CELLS " << map.cells.size() << ' ' << map.cells.size() * 5 << '\n';
  for (const auto& c : map.cells) out << "4 " << c.nodes[0] << ' ' << c.nodes[1] << ' ' << c.nodes[3] << ' ' << c.nodes[2] << '\n';
  out << "CELL_TYPES " << map.cells.size() << '\n';
  for (std::size_t i = 0; i < map.cells.size(); ++i) out << "9\n";
  std::vector<int> mask(n, 0);
  for (int a : active) mask[static_cast<std::size_t>(a)] = 1;
  out << "POINT_DATA " << n << "\nVECTORS u double\n";
  for (std::size_t i = 0; i < n; ++i) out << U.u[2 * i] << ' ' << U.u[2 * i + 1] << " 0\n";
  out << "SCALARS u_magnitude double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < n; ++i) out << std::hypot(U.u[2 * i], U.u[2 * i + 1]) << '\n';
  out << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < n; ++i) out << U.phi[i] << '\n';
  out << "SCALARS active int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < n; ++i) out << mask[i] << '\n';
}

inline StudyRow run_level(const RunConfig& cfg, int local_refines, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  SneddonConfig sc = cfg.sneddon;
  sc.local_refines = local_refines;
  SneddonProblem p = sneddon_setup(sc);
  const Vector phi0 = p.state.phi_old;

  StudyRow row;
  row.local_refines = local_refines;
  row.newton = newton_pdas_solve(p.mesh, p.map, p.params, p.state, cfg.solver);

  QoiReport& q = row.qoi;
  q.h_min = p.h_diag_min;
  q.dofs = 3 * p.map.n_nodes();
  q.tcv = compute_tcv(p.map, p.state.U);
  q.tcv_ref = reference_tcv(sc);
  q.tcv_ref_plane_stress = reference_tcv(sc, sc.young);
  q.tcv_error_pct = q.tcv_ref != 0.0 ? 100.0 * std::abs(q.tcv - q.tcv_ref) / q.tcv_ref : 0.0;
  q.cod = compute_cod(p.map, p.state.U, cod_sample_points());
  q.avg_gmres_iters = row.newton.average_gmres();
  q.newton_iters = row.newton.newton_iterations;

  row.max_phi_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < phi0.size(); ++i) row.max_phi_increase = std::max(row.max_phi_increase, p.state.U.phi[i] - phi0[i]);
  for (std::size_t k = 0; k < row.newton.active_set.size(); ++k) {
    const double l = row.newton.lambda[static_cast<std::size_t>(row.newton.active_set[k])];
    row.min_active_lambda = k == 0 ? l : std::min(row.min_active_lambda, l);
  }

  if (cfg.vtk) {
    const auto path = std::filesystem::path(cfg.out_dir) / ("fields_" + std::to_string(local_refines) + ".vtk");
    write_fields_vtk(path.string(), p.mesh, p.map, p.state.U, row.newton.active_set);
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "level local_refines=" << local_refines << " h=" << q.h_min << " l=" << p.params.length_scale
      << " dofs=" << q.dofs << " converged=" << (row.newton.converged ? "yes" : "no")
      << " newton=" << q.newton_iters << " avg_gmres=" << q.avg_gmres_iters << " tcv=" << q.tcv
      << " tcv_ref(plane strain)=" << q.tcv_ref << " tcv_ref(plane stress)=" << q.tcv_ref_plane_stress
      << " error=" << q.tcv_error_pct << "% time=" << row.seconds << "s\n";
  if (!row.newton.converged) log << "  not converged: " << row.newton.message << '\n';
  return row;
}

inline void write_study_csv(const std::string& dir, const RunConfig& cfg, const StudyResult& res) {
  namespace fs = std::filesystem;
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name);
    out << std::setprecision(12);
    return out;
  };
  {
    auto out = open("qoi.csv");
    out << "h_min,dofs,tcv,tcv_ref,tcv_error_pct,avg_gmres_iters,newton_iters\n";
    for (const auto& r : res.rows)
      out << r.qoi.h_min << ',' << r.qoi.dofs << ',' << r.qoi.tcv << ',' << r.qoi.tcv_ref << ',' << r.qoi.tcv_error_pct
          << ',' << r.qoi.avg_gmres_iters << ',' << r.qoi.newton_iters << '\n';
  }
  {
    auto out = open("cod.csv");
    out << "local_refines,x,cod,cod_ref\n";
    SneddonConfig sc = cfg.sneddon;
    for (const auto& r : res.rows)
      for (const auto& [x, v] : r.qoi.cod) out << r.local_refines << ',' << x << ',' << v << ',' << reference_cod(sc, x) << '\n';
  }
  {
    auto out = open("newton_log.csv");
    bool header = true;
    for (const auto& r : res.rows) {
      std::ostringstream one;
      write_newton_log(one, r.newton);
      std::istringstream lines(one.str());
      std::string line;
      std::getline(lines, line);
      if (header) out << "local_refines," << line << '\n';
      header = false;
      while (std::getline(lines, line)) out << r.local_refines << ',' << line << '\n';
    }
  }
  {
    auto out = open("mg_levels.csv");
    bool header = true;
    for (const auto& r : res.rows) {
      std::ostringstream one;
      write_mg_levels_csv(one, r.newton.mg_levels);
      std::istringstream lines(one.str());
      std::string line;
      std::getline(lines, line);
      if (header) out << "local_refines," << line << '\n';
      header = false;
      while (std::getline(lines, line)) out << r.local_refines << ',' << line << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "config.toml");
    write_config(out, cfg);
  }
}

/// Runs levels local_refines, local_refines + 1, ... and writes all outputs
/// into cfg.out_dir.
inline StudyResult run_study(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  StudyResult res;
  for (int i = 0; i < cfg.levels; ++i) {
    res.rows.push_back(run_level(cfg, cfg.sneddon.local_refines + i, log));
    write_study_csv(cfg.out_dir, cfg, res);
  }
  return res;
}

}  // namespace pff
