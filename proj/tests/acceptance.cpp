// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "dense_oracle.hpp"
#include "pff/krylov.hpp"
#include "pff/mg.hpp"
#include "pff/run.hpp"

using namespace pff;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Eigen::VectorXd to_eigen(const BlockVector& x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.u.size(); ++i) v(static_cast<Eigen::Index>(i)) = x.u[i];
  for (std::size_t i = 0; i < x.phi.size(); ++i) v(static_cast<Eigen::Index>(x.u.size() + i)) = x.phi[i];
  return v;
}

BlockVector from_eigen(const Eigen::VectorXd& v, std::size_t n) {
  BlockVector x(n);
  for (std::size_t i = 0; i < 2 * n; ++i) x.u[i] = v(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < n; ++i) x.phi[i] = v(static_cast<Eigen::Index>(2 * n + i));
  return x;
}

Vector random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

MaterialParams small_params() {
  MaterialParams p;
  p.kappa = 1e-3;
  p.length_scale = 0.3;
  p.pressure = 0.2;
  return p;
}

// Random conforming state with constraints on a small mesh.
struct SmallProblem {
  QuadMesh mesh;
  DofMap map;
  MaterialParams params = small_params();
  BlockVector U;
  Vector phi_tilde;
  BlockConstraints cons;

  SmallProblem(QuadMesh m, const std::vector<int>& active, unsigned seed)
      : mesh(std::move(m)), map(build_dof_map(mesh)), U(map.n_nodes()) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> du(-0.1, 0.1), dp(0.0, 1.0);
    for (double& v : U.u) v = du(rng);
    for (double& v : U.phi) v = dp(rng);
    phi_tilde.resize(map.n_nodes());
    for (double& v : phi_tilde) v = dp(rng);
    cons = build_constraints(mesh, map, {}, active);
    cons.u.distribute_homogeneous(U.u);
    cons.phi.distribute_homogeneous(U.phi);
    cons.phi.distribute_homogeneous(phi_tilde);
  }
  FractureOperator op() const {
    FractureOperator o(map, params);
    o.set_state(U, phi_tilde);
    o.set_constraints(cons.u, cons.phi);
    return o;
  }
};

QuadMesh uniform_small() {
  QuadMesh m = build_base_grid({0, 0}, {1, 1}, 4);
  m.refine_global();
  return m;
}

QuadMesh hanging_small() {
  QuadMesh m = build_base_grid({0, 0}, {1, 1}, 3);
  m.refine_box({0.0, 0.0}, {0.4, 0.3}, 2);
  return m;
}

// interior, non-hanging vertices with x < 0.5
std::vector<int> pick_active(const QuadMesh& mesh, std::size_t count) {
  const auto hanging = oracle::hanging_by_search(mesh);
  std::vector<int> active;
  for (std::size_t v = 0; v < mesh.n_vertices() && active.size() < count; ++v) {
    const int id = static_cast<int>(v);
    if (!mesh.is_boundary_vertex(id) && !hanging.count(id) && mesh.vertex(id).x < 0.5) active.push_back(id);
  }
  return active;
}

Verdict ac1_operator_oracle() {
  const auto t0 = Clock::now();
  Verdict v;
  double worst = 0.0;
  std::size_t max_dofs = 0;
  for (int variant = 0; variant < 2; ++variant) {
    QuadMesh mesh = variant == 0 ? uniform_small() : hanging_small();
    const std::vector<int> active = pick_active(mesh, 4);
    SmallProblem p(std::move(mesh), active, 5 + static_cast<unsigned>(variant));
    const std::size_t n = p.map.n_nodes();
    max_dofs = std::max(max_dofs, 3 * n);
    v.require(active.size() == 4, "active set not populated");
    if (variant == 1) v.require(p.cons.u.count(ConstraintKind::hanging) > 0, "hanging mesh without hanging nodes");
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(p.U.u.data(), static_cast<Eigen::Index>(p.U.u.size()));
    Eigen::VectorXd ph = Eigen::Map<const Eigen::VectorXd>(p.U.phi.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd pt = Eigen::Map<const Eigen::VectorXd>(p.phi_tilde.data(), static_cast<Eigen::Index>(n));
    const oracle::Assembly a = oracle::assemble(p.mesh, oracle::from(p.params), u, ph, pt);
    const Eigen::MatrixXd A = oracle::condensed(p.mesh, a.J, std::set<int>(active.begin(), active.end()));
    const FractureOperator op = p.op();
    std::mt19937 rng(99);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x = oracle::random_vector(static_cast<int>(3 * n), rng);
      const Eigen::VectorXd ref = A * x;
      const Eigen::VectorXd got = to_eigen(op.jacobian_vmult(from_eigen(x, n)));
      worst = std::max(worst, (got - ref).norm() / std::max(1e-300, ref.norm()));
    }
  }
  const double secs = seconds_since(t0);
  v.require(max_dofs <= 500, "mesh exceeds 500 DoFs");
  v.require(worst <= 1e-10, fmt("relative error %.3g > 1e-10", worst));
  v.require(secs < 10, fmt("runtime %.1fs", secs));
  v.detail = fmt("max rel. error %.2e over 2 meshes x 20 vectors, ", worst) + std::to_string(max_dofs) +
             fmt(" DoFs max, %.2fs", secs) + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

Verdict ac2_newton_consistency() {
  Verdict v;
  double min_order = 1e300;
  for (unsigned state = 0; state < 5; ++state) {
    SmallProblem p(hanging_small(), {}, 100 + state);
    const std::size_t n = p.map.n_nodes();
    const FractureOperator op = p.op();
    const BlockVector r0 = op.residual();
    std::mt19937 rng(200 + state);
    BlockVector dir(n);
    dir.u = random_vector(2 * n, rng);
    dir.phi = random_vector(n, rng);
    p.cons.u.distribute_homogeneous(dir.u);
    p.cons.phi.distribute_homogeneous(dir.phi);
    BlockVector jd = op.jacobian_vmult(dir);
    p.cons.u.zero_constrained(jd.u);
    p.cons.phi.zero_constrained(jd.phi);
    std::vector<double> errs;
    for (double eps : {1e-4, 1e-5, 1e-6, 1e-7}) {
      BlockVector U = p.U;
      axpy(eps, dir, U);
      FractureOperator o2(p.map, p.params);
      o2.set_state(U, p.phi_tilde);
      o2.set_constraints(p.cons.u, p.cons.phi);
      BlockVector fd = o2.residual();
      axpy(-1.0, r0, fd);
      scale(1.0 / eps, fd);
      axpy(-1.0, jd, fd);
      errs.push_back(norm(fd));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i)
      min_order = std::min(min_order, std::log10(errs[i] / errs[i + 1]));
  }
  v.require(min_order >= 0.9, fmt("observed order %.3f < 0.9", min_order));
  v.detail = fmt("min observed order %.3f over 5 states, eps 1e-4..1e-7", min_order) + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

struct MgProblem {
  QuadMesh mesh;
  DofMap map;
  MaterialParams params;
  BlockVector U;
  Vector phi_tilde;
  BlockConstraints cons;
  std::unique_ptr<MgHierarchy> hier;

  MgProblem(QuadMesh m, const std::vector<int>& active) : mesh(std::move(m)), map(build_dof_map(mesh)), U(map.n_nodes()) {
    params.length_scale = 0.2;
    params.kappa = 1e-6;
    params.pressure = 0.1;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(0.5, 1.0), du(-0.05, 0.05);
    phi_tilde.resize(map.n_nodes());
    for (double& x : phi_tilde) x = d(rng);
    for (double& x : U.phi) x = d(rng);
    for (double& x : U.u) x = du(rng);
    cons = build_constraints(mesh, map, {}, active);
    cons.u.distribute_homogeneous(U.u);
    cons.phi.distribute(U.phi);
    cons.phi.distribute(phi_tilde);
    hier = std::make_unique<MgHierarchy>(mesh, map, params);
    hier->update(U, phi_tilde, cons);
  }
};

Verdict ac3_transfer_vcycle() {
  Verdict v;
  double transpose_err = 0.0, linear_err = 0.0, sym_err = 0.0;
  int min_levels = 100;
  for (int variant = 0; variant < 2; ++variant) {
    QuadMesh mesh = build_base_grid({-1, -1}, {1, 1}, 2);
    mesh.refine_global();
    if (variant == 0) {
      mesh.refine_global();
      mesh.refine_global();
    } else {
      mesh.refine_box({-0.3, -0.2}, {0.3, 0.2}, 2);
    }
    const std::vector<int> active = {7, 30, 31};
    MgProblem p(std::move(mesh), active);
    const MgHierarchy& h = *p.hier;
    min_levels = std::min(min_levels, h.max_level() + 1);
    std::mt19937 rng(17);
    for (Block b : {Block::uu, Block::phiphi}) {
      const std::size_t nc = MgHierarchy::ncomp(b);
      for (int l = 1; l <= h.max_level(); ++l)
        for (int t = 0; t < 10; ++t) {
          const Vector x = random_vector(nc * h.level(l - 1).map.n_nodes(), rng);
          const Vector y = random_vector(nc * h.level(l).map.n_nodes(), rng);
          transpose_err = std::max(transpose_err, std::abs(dot(h.prolongate(l, b, x), y) - dot(x, h.restrict_to_coarser(l, b, y))));
        }
      const BlockMultigrid mg(h, b);
      const std::size_t n = nc * p.map.n_nodes();
      for (int t = 0; t < 5; ++t) {
        const Vector b1 = random_vector(n, rng), b2 = random_vector(n, rng);
        const Vector z1 = mg.vmult(b1), z2 = mg.vmult(b2);
        Vector comb = b1;
        scale(2.5, comb);
        axpy(-0.75, b2, comb);
        Vector expect = z1;
        scale(2.5, expect);
        axpy(-0.75, z2, expect);
        Vector diff = mg.vmult(comb);
        axpy(-1.0, expect, diff);
        linear_err = std::max(linear_err, norm(diff) / std::max(1.0, norm(expect)));
        const double lhs = dot(z1, b2), rhs = dot(b1, z2);
        sym_err = std::max(sym_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
    }
  }
  v.require(min_levels >= 3, "hierarchy with fewer than 3 levels");
  v.require(transpose_err <= 1e-12, fmt("transpose error %.2e", transpose_err));
  v.require(linear_err <= 1e-10, fmt("linearity error %.2e", linear_err));
  v.require(sym_err <= 1e-10, fmt("symmetry error %.2e", sym_err));
  v.detail = fmt("transpose %.1e, ", transpose_err) + fmt("linearity %.1e, symmetry %.1e", linear_err, sym_err) +
             ", uniform and local hierarchies, >= " + std::to_string(min_levels) + " levels" +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

Verdict ac4_mesh_robust_preconditioning() {
  const auto t0 = Clock::now();
  Verdict v;
  std::vector<int> its;
  std::string sizes;
  for (int local = 1; local <= 3; ++local) {
    SneddonConfig sc;
    sc.local_refines = local;
    sc.pressure = 0.0;
    SneddonProblem p = sneddon_setup(sc);
    // intact state: u = 0, phi = 1, so the phi block is G_c (M / l + l K)
    BlockVector U(p.map.n_nodes());
    std::fill(U.phi.begin(), U.phi.end(), 1.0);
    const Vector phi_tilde = U.phi;
    const BlockConstraints cons = build_constraints(p.mesh, p.map, {});
    FractureOperator op(p.map, p.params);
    op.set_state(U, phi_tilde);
    op.set_constraints(cons.u, cons.phi);
    MgHierarchy hier(p.mesh, p.map, p.params);
    hier.update(U, phi_tilde, cons);
    const BlockMultigrid mg(hier, Block::phiphi);
    std::mt19937 rng(8);
    Vector b = random_vector(p.map.n_nodes(), rng);
    cons.phi.zero_constrained(b);
    GmresConfig gc;
    gc.rel_tol = 1e-8;
    gc.true_residual_factor = 1.0;
    gc.max_iter = 200;
    const auto A = [&](const Vector& x) { return op.block_vmult(Block::phiphi, x); };
    const auto P = [&](const Vector& r) { return mg.vmult(r); };
    const GmresResult<Vector> r = gmres_solve(A, P, b, gc);
    its.push_back(r.converged ? r.iterations : -1);
    sizes += (sizes.empty() ? "" : ", ") + std::to_string(p.map.n_nodes()) + ":" + std::to_string(its.back());
    v.require(r.converged && r.true_residual <= 1e-8, "GMRES did not reach 1e-8 at " + std::to_string(p.map.n_nodes()) + " DoFs");
  }
  for (std::size_t i = 0; i < its.size(); ++i) {
    v.require(its[i] > 0 && its[i] <= 20, "iteration count " + std::to_string(its[i]) + " outside [1, 20]");
    if (i > 0) v.require(its[i] - its[i - 1] <= 5, "iteration growth above 5");
  }
  const double secs = seconds_since(t0);
  v.require(secs < 60, fmt("runtime %.1fs", secs));
  v.detail = "GMRES iterations (DoFs:its) " + sizes + fmt(", %.1fs", secs) + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig study_config(const std::filesystem::path& dir) {
  RunConfig cfg;
  cfg.levels = 2;
  cfg.out_dir = dir.string();
  return cfg;
}

Verdict ac5_sneddon_rows(const StudyResult& r) {
  Verdict v;
  const double published[2] = {0.00716698, 0.00650211};
  std::string d;
  for (std::size_t i = 0; i < 2 && i < r.rows.size(); ++i) {
    const QoiReport& q = r.rows[i].qoi;
    const double dev = 100.0 * (q.tcv - published[i]) / published[i];
    d += (i ? "; " : "") + fmt("h=%.4f TCV=%.6g", q.h_min, q.tcv) + fmt(" (%+.1f%% vs %.8g,", dev, published[i]) +
         fmt(" err %.2f%%, %.1fs)", q.tcv_error_pct, r.rows[i].seconds);
    v.require(r.rows[i].newton.converged, "row " + std::to_string(i + 1) + " did not converge");
    v.require(std::abs(dev) <= 10.0, fmt("row %.0f outside 10%% band", static_cast<double>(i + 1)));
    v.require(r.rows[i].seconds < 300, "row over 5 minutes");
  }
  v.require(r.rows.size() >= 2, "fewer than 2 rows");
  if (r.rows.size() >= 2)
    v.require(r.rows[1].qoi.tcv_error_pct < r.rows[0].qoi.tcv_error_pct, "TCV error not decreasing");
  const std::string fails = v.detail;
  v.detail = d + (fails.empty() ? "" : " -- " + fails);
  return v;
}

Verdict ac6_iteration_band(const StudyResult& r) {
  Verdict v;
  const double published[2] = {2.96, 4.8};
  std::string d;
  for (std::size_t i = 0; i < 2 && i < r.rows.size(); ++i) {
    const double a = r.rows[i].qoi.avg_gmres_iters;
    d += (i ? ", " : "") + fmt("%.2f (published %.2f)", a, published[i]);
    v.require(a >= published[i] / 5 && a <= published[i] * 5, "outside factor-5 band");
  }
  v.require(r.rows.size() >= 2, "fewer than 2 rows");
  v.detail = "avg GMRES per Newton step " + d + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

Verdict ac7_complementarity(const StudyResult& r, double newton_tol) {
  Verdict v;
  double max_inc = -1e300, min_lambda = 1e300;
  for (const StudyRow& row : r.rows) {
    v.require(row.newton.converged, "run not converged");
    max_inc = std::max(max_inc, row.max_phi_increase);
    if (!row.newton.active_set.empty()) min_lambda = std::min(min_lambda, row.min_active_lambda);
    v.require(!row.newton.log.empty(), "empty Newton log");
    if (!row.newton.log.empty()) {
      const NewtonStep& last = row.newton.log.back();
      v.require(!last.active_changed && last.residual <= newton_tol, "stopping test not met");
    }
  }
  v.require(max_inc <= 1e-10, fmt("phi exceeds phi0 by %.2e", max_inc));
  v.require(min_lambda >= -1e-10, fmt("multiplier %.2e < 0", min_lambda));
  v.detail = fmt("max(phi - phi0) = %.2e, min active lambda = %.3e", max_inc, min_lambda) + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

Verdict ac8_cod_profile(const StudyResult& r) {
  Verdict v;
  std::string d;
  for (const StudyRow& row : r.rows) {
    const auto& cod = row.qoi.cod;
    double peak = 0.0, asym = 0.0, outside = 0.0;
    for (const auto& [x, c] : cod) peak = std::max(peak, std::abs(c));
    for (std::size_t i = 0; i < cod.size(); ++i) {
      asym = std::max(asym, std::abs(cod[i].second - cod[cod.size() - 1 - i].second));
      if (std::abs(cod[i].first) >= 1.5 - 1e-12) outside = std::max(outside, std::abs(cod[i].second));
    }
    const double trap = trapezoid(cod);
    const double mismatch = std::abs(trap - row.qoi.tcv) / std::abs(row.qoi.tcv);
    d += (d.empty() ? "" : "; ") + fmt("asym %.2e of peak, |x|>=1.5 %.2e of peak", asym / peak, outside / peak) +
         fmt(", trapezoid vs TCV %.3f%%", 100 * mismatch);
    v.require(peak > 0, "zero COD");
    v.require(asym <= 0.02 * peak, "COD not even within 2%");
    v.require(outside < 0.05 * peak, "COD does not vanish for |x| >= 1.5");
    v.require(mismatch <= 0.03, "trapezoid integral off by more than 3%");
  }
  v.detail = d + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

Verdict ac9_determinism(const std::filesystem::path& a, const std::filesystem::path& b) {
  Verdict v;
  std::string files;
  for (const char* f : {"qoi.csv", "cod.csv", "newton_log.csv", "mg_levels.csv"}) {
    const std::string x = slurp(a / f), y = slurp(b / f);
    v.require(!x.empty() && x == y, std::string(f) + " differs");
    files += (files.empty() ? "" : ", ") + std::string(f);
  }
  v.detail = "byte-identical " + files + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](const char* id, const char* name, const Verdict& v) {
    std::printf("%s %s: %s (%s)\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  };
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      Verdict v;
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
      return v;
    }
  };
  report("AC1", "operator-oracle equivalence", guarded(ac1_operator_oracle));
  report("AC2", "Newton consistency", guarded(ac2_newton_consistency));
  report("AC3", "transfer and V-cycle algebra", guarded(ac3_transfer_vcycle));
  report("AC4", "mesh-robust preconditioning", guarded(ac4_mesh_robust_preconditioning));

  const auto root = std::filesystem::temp_directory_path() / "pff_acceptance";
  std::filesystem::remove_all(root);
  StudyResult first, second;
  std::string study_error;
  try {
    std::ostringstream log;
    first = run_study(study_config(root / "run1"), log);
    second = run_study(study_config(root / "run2"), log);
    std::printf("%s", log.str().c_str());
  } catch (const std::exception& e) {
    study_error = e.what();
  }
  auto study = [&](const std::function<Verdict()>& f) {
    if (study_error.empty()) return guarded(f);
    Verdict v;
    v.pass = false;
    v.detail = "study failed: " + study_error;
    return v;
  };
  const double tol = RunConfig{}.solver.newton.tol;
  report("AC5", "Sneddon coarse rows", study([&] { return ac5_sneddon_rows(first); }));
  report("AC6", "iteration-count band", study([&] { return ac6_iteration_band(first); }));
  report("AC7", "irreversibility and complementarity", study([&] { return ac7_complementarity(first, tol); }));
  report("AC8", "COD profile", study([&] { return ac8_cod_profile(first); }));
  report("AC9", "determinism", study([&] { return ac9_determinism(root / "run1", root / "run2"); }));
  return all ? 0 : 1;
}
