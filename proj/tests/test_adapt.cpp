#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stswe/adapt.hpp"
#include "stswe/benchmarks.hpp"

#include <cmath>
#include <random>

using namespace stswe;

namespace {
// all subsets of [0,n): smallest cardinality reaching the bulk target
int brute_force_min_cardinality(const Eigen::VectorXd& eta, double theta) {
  const int n = static_cast<int>(eta.size());
  const double target = theta * theta * eta.squaredNorm();
  int best = n + 1;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double acc = 0;
    int card = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        acc += eta[i] * eta[i];
        ++card;
      }
    if (acc >= target - 1e-13 * target) best = std::min(best, card);
  }
  return best;
}
} // namespace

TEST_CASE("indicators") {
  const ProblemSpec spec = manufactured_case();
  const auto mesh = build_structured(spec.x_domain, spec.t_domain, 2, 1, spec.left.designation,
                                     spec.right.designation);
  const auto d = make_discretization(mesh, SpaceConfig::for_degree(2));

  SUBCASE("zero representer gives zero indicators") {
    ErrorRepresenter rep;
    rep.e_zeta = FieldFunction{&d.test_space, Eigen::VectorXd::Zero(d.test_space.n_dofs())};
    rep.e_u = rep.e_zeta;
    rep.e_sigma = rep.e_zeta;
    rep.element_norm2 = Eigen::VectorXd::Zero(mesh.n_triangles());
    const IndicatorField f = indicators(rep);
    CHECK(f.eta.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(f.total() == 0.0);
  }
  SUBCASE("constant v-component on one element has indicator sqrt(area)") {
    ErrorRepresenter rep;
    rep.e_zeta = FieldFunction{&d.test_space, Eigen::VectorXd::Zero(d.test_space.n_dofs())};
    rep.e_u = rep.e_zeta;
    rep.e_sigma = rep.e_zeta;
    const int k = 1;
    for (int l = 0; l < d.test_space.n_local(); ++l)
      rep.e_zeta.coeffs[d.test_space.cell_dofs(k)[l]] = 1.0;
    // element norms through the Gram quadratic form
    rep.element_norm2.setZero(mesh.n_triangles());
    const int nv = d.test_space.n_local();
    for (int e = 0; e < mesh.n_triangles(); ++e) {
      Eigen::VectorXd e_loc = Eigen::VectorXd::Zero(3 * nv);
      for (int l = 0; l < nv; ++l) e_loc[l] = rep.e_zeta.coeffs[d.test_space.cell_dofs(e)[l]];
      rep.element_norm2[e] = e_loc.dot(gram_matrix(d, e) * e_loc);
    }
    const IndicatorField f = indicators(rep);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
      const double expected = e == k ? std::sqrt(element_geometry(mesh, k).area) : 0.0;
      CHECK(f.eta[e] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("dorfler marking") {
  SUBCASE("theta = 1 marks every element with a positive indicator") {
    IndicatorField f;
    f.eta = Eigen::VectorXd(5);
    f.eta << 1.0, 0.0, 2.0, 0.5, 0.0;
    const auto marked = dorfler_mark(f, 1.0);
    CHECK(marked == std::vector<int>{0, 2, 3});
  }
  SUBCASE("indicators {4,3,2,1} at theta = 0.5 mark only the largest") {
    IndicatorField f;
    f.eta = Eigen::VectorXd(4);
    f.eta << 4, 3, 2, 1;
    const auto marked = dorfler_mark(f, 0.5);
    CHECK(marked == std::vector<int>{0});
  }
  SUBCASE("equal indicators mark ceil(theta^2 N)") {
    IndicatorField f;
    f.eta = Eigen::VectorXd::Constant(100, 3.7);
    CHECK(dorfler_mark(f, 0.5).size() == 25);
  }
  SUBCASE("marking is invariant under uniform scaling") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    IndicatorField f;
    f.eta = Eigen::VectorXd(37);
    for (int i = 0; i < f.eta.size(); ++i) f.eta[i] = dist(rng);
    for (double theta : {0.3, 0.5, 0.9}) {
      const auto base = dorfler_mark(f, theta);
      IndicatorField scaled;
      scaled.eta = 1e6 * f.eta;
      CHECK(dorfler_mark(scaled, theta) == base);
    }
  }
  SUBCASE("greedy set is a minimal-cardinality bulk set (brute force, n <= 12)") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int n = 1; n <= 12; ++n)
      for (double theta : {0.3, 0.5, 0.7, 1.0}) {
        IndicatorField f;
        f.eta = Eigen::VectorXd(n);
        for (int i = 0; i < n; ++i) f.eta[i] = dist(rng);
        const auto marked = dorfler_mark(f, theta);
        const double target = theta * theta * f.eta.squaredNorm();
        double acc = 0;
        for (int k : marked) acc += f.eta[k] * f.eta[k];
        CHECK(acc >= target * (1.0 - 1e-12));
        CHECK(static_cast<int>(marked.size()) == brute_force_min_cardinality(f.eta, theta));
      }
  }
  SUBCASE("theta outside (0,1] is rejected") {
    IndicatorField f;
    f.eta = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(dorfler_mark(f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dorfler_mark(f, 1.5), std::invalid_argument);
  }
}

TEST_CASE("transfer reproduces polynomial fields exactly") {
  // nodal interpolation through the refinement provenance is exact for fields
  // the target space can represent
  const ProblemSpec spec = manufactured_case();
  const SpaceConfig scfg = SpaceConfig::for_degree(2);
  const auto coarse = build_structured({0, 1}, {0, 1}, 2, 2);
  const auto dc = make_discretization(coarse, scfg);
  TrialState U = zero_state(dc);
  auto poly2 = [](double x, double t) { return 1.0 + 2 * x - t + 0.5 * x * t - x * x + t * t; };
  auto poly1 = [](double x, double t) { return 0.25 - x + 2 * t; };
  U.zeta = interpolate(poly2, dc.scalar_space);
  U.u = interpolate(poly2, dc.scalar_space);
  U.sigma = interpolate(poly1, dc.sigma_space); // degree 1 space

  SUBCASE("across a marked bisection") {
    const auto fine = bisect(coarse, {0, 2, 5});
    const auto df = make_discretization(fine, scfg);
    const TrialState V = transfer_state(U, dc, fine, df);
    for (int g = 0; g < df.scalar_space.n_dofs(); ++g) {
      const Point p = df.scalar_space.dof_coords[g];
      CHECK(V.zeta.coeffs[g] == doctest::Approx(poly2(p.x, p.t)).epsilon(1e-13));
    }
    for (int g = 0; g < df.sigma_space.n_dofs(); ++g) {
      const Point p = df.sigma_space.dof_coords[g];
      CHECK(V.sigma.coeffs[g] == doctest::Approx(poly1(p.x, p.t)).epsilon(1e-13));
    }
  }
  SUBCASE("across a uniform refinement (composed provenance)") {
    const auto fine = uniform_refine(coarse);
    const auto df = make_discretization(fine, scfg);
    const TrialState V = transfer_state(U, dc, fine, df);
    for (int g = 0; g < df.scalar_space.n_dofs(); ++g) {
      const Point p = df.scalar_space.dof_coords[g];
      CHECK(V.u.coeffs[g] == doctest::Approx(poly2(p.x, p.t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("adapt loop") {
  SUBCASE("max_refinements = 0 gives a single record row") {
    const ProblemSpec spec = manufactured_case();
    AdaptConfig acfg;
    acfg.max_refinements = 0;
    const auto mesh = build_structured(spec.x_domain, spec.t_domain, 2, 1, spec.left.designation,
                                       spec.right.designation);
    const AdaptResult res = adapt_loop(spec, mesh, SpaceConfig::for_degree(2), acfg);
    CHECK(res.record.rows.size() == 1);
    CHECK(res.record.rows[0].n_elements == 4);
  }
  SUBCASE("loose stop tolerance exits after the first solve") {
    const ProblemSpec spec = manufactured_case();
    AdaptConfig acfg;
    acfg.max_refinements = 10;
    acfg.stop_tolerance = 1e6;
    const auto mesh = build_structured(spec.x_domain, spec.t_domain, 2, 1, spec.left.designation,
                                       spec.right.designation);
    const AdaptResult res = adapt_loop(spec, mesh, SpaceConfig::for_degree(2), acfg);
    CHECK(res.record.rows.size() == 1);
  }
  SUBCASE("solver failures carry the refinement step index") {
    const ProblemSpec spec = manufactured_case();
    AdaptConfig acfg;
    acfg.max_refinements = 2;
    NewtonConfig ncfg;
    ncfg.max_iter = 1;
    ncfg.rel_tol = 1e-14;
    const auto mesh = build_structured(spec.x_domain, spec.t_domain, 2, 1, spec.left.designation,
                                       spec.right.designation);
    try {
      adapt_loop(spec, mesh, SpaceConfig::for_degree(2), acfg, ncfg);
      FAIL("expected SolverFailure");
    } catch (const SolverFailure& e) {
      CHECK(std::string(e.what()).find("refinement step 0") != std::string::npos);
    }
  }
  SUBCASE("pure convection: estimate decreases monotonically under refinement") {
    // the shipped configuration of the adaptive benchmark (mu = 0, T = 1,
    // theta = 0.5, 2(2x4) initial mesh, eight refinements)
    const ProblemSpec spec = manufactured_case(1.0, 0.0, 1.0);
    AdaptConfig acfg;
    acfg.theta = 0.5;
    acfg.max_refinements = 8;
    const auto mesh = build_structured(spec.x_domain, spec.t_domain, 2, 4, spec.left.designation,
                                       spec.right.designation);
    const AdaptResult res = adapt_loop(spec, mesh, SpaceConfig::for_degree(2), acfg);
    REQUIRE(res.record.rows.size() == 9);
    for (std::size_t i = 1; i < res.record.rows.size(); ++i)
      CHECK(res.record.rows[i].estimate < res.record.rows[i - 1].estimate);
    // the recorded estimate matches the representer decomposition
    CHECK(res.record.rows.back().estimate ==
          doctest::Approx(std::sqrt(res.rep.element_norm2.sum())).epsilon(1e-12));
    // errors recorded against the exact solution decrease as well
    CHECK(res.record.rows.back().err_l2_zeta < res.record.rows.front().err_l2_zeta);
  }
}
