#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sturmspec/tracemap.hpp"

using namespace sturmspec;

namespace {

// random point on the level surface I = lambda^2/4 with |y| <= 1, the window
// where the Chebyshev factors stay bounded (the dynamically relevant slab)
TracePoint sample_surface_point(std::mt19937_64& rng, double lambda) {
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  std::uniform_real_distribution<double> uy(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (;;) {
    double x = ux(rng), y = uy(rng);
    // z^2 - 2xy z + (x^2 + y^2 - 1 - lambda^2/4) = 0
    double half_b = x * y;
    double c = x * x + y * y - 1.0 - lambda * lambda / 4.0;
    double disc = half_b * half_b - c;
    if (disc < 0.0) continue;
    double z = half_b + (coin(rng) < 0.5 ? 1.0 : -1.0) * std::sqrt(disc);
    return {x, y, z};
  }
}

Mat2 random_unimodular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Mat2 m;
  for (int i = 0; i < 4; ++i) {
    double t = u(rng);
    Mat2 f = (i % 2 == 0) ? Mat2{1.0, t, 0.0, 1.0} : Mat2{1.0, 0.0, t, 1.0};
    m = m * f;
  }
  return m;
}

} // namespace

TEST_CASE("chebyshev values") {
  REQUIRE(chebyshev_U(-2, 0.7) == -1.0);
  REQUIRE(chebyshev_U(-1, 0.7) == 0.0);
  REQUIRE(chebyshev_U(0, 0.7) == 1.0);
  REQUIRE(chebyshev_U(2, 0.5) == Catch::Approx(0.0).margin(1e-15)); // 4x^2 - 1
  // three-term recursion against the closed form on [-1,1]
  for (int a = 1; a <= 10; ++a) {
    for (double t = 0.05; t < 3.1; t += 0.25) {
      double x = std::cos(t);
      double expect = std::sin((a + 1) * t) / std::sin(t);
      REQUIRE(chebyshev_U(a, x) == Catch::Approx(expect).margin(1e-12));
    }
  }
  // U'_a(1) = a(a+1)(a+2)/3
  for (int a = 0; a <= 8; ++a) {
    auto ud = chebyshev_U_deriv(a, 1.0);
    REQUIRE(ud[1] == Catch::Approx(a * (a + 1) * (a + 2) / 3.0));
  }
}

TEST_CASE("matrix power via chebyshev") {
  std::mt19937_64 rng(27182);
  for (int trial = 0; trial < 100; ++trial) {
    Mat2 m = random_unimodular(rng);
    Mat2 direct; // m^a by repeated multiplication
    for (int a = 0; a <= 10; ++a) {
      Mat2 fast = matrix_power_via_chebyshev(m, a);
      double scale = std::max({1.0, std::abs(direct.a), std::abs(direct.b),
                               std::abs(direct.c), std::abs(direct.d)});
      REQUIRE(std::abs(fast.a - direct.a) <= 1e-10 * scale);
      REQUIRE(std::abs(fast.b - direct.b) <= 1e-10 * scale);
      REQUIRE(std::abs(fast.c - direct.c) <= 1e-10 * scale);
      REQUIRE(std::abs(fast.d - direct.d) <= 1e-10 * scale);
      direct = direct * m;
    }
  }
  REQUIRE_THROWS_AS(matrix_power_via_chebyshev(Mat2{2, 0, 0, 1}, 3), Error);
}

TEST_CASE("trace step basics") {
  // T_1(0,0,1) = (-1,0,0), part of a 6-cycle
  TracePoint p{0.0, 0.0, 1.0};
  p = trace_step(1, p);
  REQUIRE(p.x == -1.0);
  REQUIRE(p.y == 0.0);
  REQUIRE(p.z == 0.0);
  for (int i = 0; i < 5; ++i) p = trace_step(1, p);
  REQUIRE(p.x == 0.0);
  REQUIRE(p.y == 0.0);
  REQUIRE(p.z == 1.0);
}

TEST_CASE("T_1 = U o P and T_a = U^a o P") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    TracePoint p{u(rng), u(rng), u(rng)};
    for (long long a = 1; a <= 6; ++a) {
      TracePoint lhs = trace_step(a, p);
      TracePoint rhs = aux_P(p);
      for (long long i = 0; i < a; ++i) rhs = aux_U(rhs);
      double scale = 1.0 + std::max(lhs.max_norm(), rhs.max_norm());
      REQUIRE(std::abs(lhs.x - rhs.x) <= 1e-12 * scale);
      REQUIRE(std::abs(lhs.y - rhs.y) <= 1e-12 * scale);
      REQUIRE(std::abs(lhs.z - rhs.z) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("fricke-vogt invariant and initial line") {
  REQUIRE(fricke_vogt(TracePoint{1, 1, 1}) == 0.0);
  REQUIRE(fricke_vogt(TracePoint{-1, -1, 1}) == 0.0);
  REQUIRE(fricke_vogt(TracePoint{-1, 1, -1}) == 0.0);
  REQUIRE(fricke_vogt(TracePoint{1, -1, -1}) == 0.0);

  ModelParams mp{parse_cf("[0;(1)]"), 1.0};
  TracePoint p = initial_point(mp, 0.0);
  REQUIRE(p.x == -0.5);
  REQUIRE(p.y == 0.0);
  REQUIRE(p.z == 1.0);
  REQUIRE(fricke_vogt(p) == Catch::Approx(0.25).margin(1e-15));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ul(0.0, 2.0), ue(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    double lambda = ul(rng), energy = ue(rng);
    ModelParams m{parse_cf("[0;(1)]"), lambda};
    REQUIRE(std::abs(fricke_vogt(initial_point(m, energy)) - lambda * lambda / 4.0) <= 1e-14);
  }
}

TEST_CASE("invariant preserved by every trace map") {
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<long long> ua(1, 8);
  for (double lambda : {0.0, 0.1, 1.0}) {
    for (int i = 0; i < 1000; ++i) {
      TracePoint p = sample_surface_point(rng, lambda);
      long long a = ua(rng);
      TracePoint q = trace_step(a, p);
      double n = p.norm();
      REQUIRE(std::abs(fricke_vogt(q) - fricke_vogt(p)) <= 1e-12 * (1.0 + n * n * n));
    }
  }
}

TEST_CASE("orbits: bounded cycle and escape") {
  ModelParams free_golden{parse_cf("[0;(1)]"), 0.0};
  OrbitResult cyc = trace_orbit(free_golden, 0.0, 60, true);
  REQUIRE(cyc.status == OrbitStatus::Bounded);
  REQUIRE(cyc.steps_taken == 60);
  REQUIRE(cyc.trajectory.size() == 61);
  // period 6 through (0,0,1)
  REQUIRE(cyc.trajectory[6].p.x == 0.0);
  REQUIRE(cyc.trajectory[6].p.z == 1.0);
  REQUIRE(cyc.invariant_drift <= 1e-14);

  OrbitResult esc = trace_orbit(free_golden, 2.5, 60);
  REQUIRE(esc.status == OrbitStatus::Escaped);
  REQUIRE(esc.escape_step > 0);

  ModelParams gap{parse_cf("[0;(1)]"), 1.0};
  OrbitResult esc2 = trace_orbit(gap, 0.5, 200);
  REQUIRE(esc2.status != OrbitStatus::Bounded);
}

TEST_CASE("transfer matrix seeds") {
  ModelParams mp{parse_cf("[0;(1)]"), 0.7};
  for (double energy : {-1.3, 0.0, 0.9, 2.1}) {
    TracePoint t = transfer_half_traces(mp, 0, energy);
    TracePoint l = initial_point(mp, energy);
    REQUIRE(t.x == Catch::Approx(l.x).margin(1e-14));
    REQUIRE(t.y == Catch::Approx(l.y).margin(1e-14));
    REQUIRE(t.z == Catch::Approx(l.z).margin(1e-14));
  }
}

TEST_CASE("trace recursion equals transfer products") {
  for (const char* s : {"[0;(1)]", "[0;(2)]", "[0;2,(1)]"}) {
    for (double lambda : {0.5, 1.0}) {
      ModelParams mp{parse_cf(s), lambda};
      for (double energy : {-2.0, -0.75, 0.0, 0.37, 1.0, 2.0}) {
        for (long long k = 1; k <= 8; ++k) {
          TracePoint oracle = transfer_half_traces(mp, k, energy);
          TracePoint fast = level_half_trace(mp, k, energy).p;
          auto huge = [](const TracePoint& t) {
            return !std::isfinite(t.max_norm()) || t.max_norm() > 1e280;
          };
          if (huge(oracle) || huge(fast)) {
            // both routes must agree that the orbit has left floating range
            auto big = [](const TracePoint& t) { return !(t.max_norm() <= 1e200); };
            REQUIRE(big(oracle));
            REQUIRE(big(fast));
            continue;
          }
          double scale = 1.0 + oracle.max_norm();
          REQUIRE(std::abs(fast.x - oracle.x) <= 1e-9 * scale);
          REQUIRE(std::abs(fast.y - oracle.y) <= 1e-9 * scale);
          REQUIRE(std::abs(fast.z - oracle.z) <= 1e-9 * scale);
        }
      }
    }
  }
}

TEST_CASE("jacobian matches finite differences") {
  std::mt19937_64 rng(314159);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    TracePoint p{u(rng), u(rng), u(rng)};
    for (long long a = 1; a <= 5; ++a) {
      Mat3 j = trace_jacobian(a, p);
      for (int dir = 0; dir < 3; ++dir) {
        TracePoint hi = p, lo = p;
        (dir == 0 ? hi.x : dir == 1 ? hi.y : hi.z) += h;
        (dir == 0 ? lo.x : dir == 1 ? lo.y : lo.z) -= h;
        TracePoint fhi = trace_step(a, hi);
        TracePoint flo = trace_step(a, lo);
        double fd[3] = {(fhi.x - flo.x) / (2 * h), (fhi.y - flo.y) / (2 * h),
                        (fhi.z - flo.z) / (2 * h)};
        for (int row = 0; row < 3; ++row)
          REQUIRE(std::abs(j.m[row][dir] - fd[row]) <= 1e-5 * (1.0 + std::abs(fd[row])));
      }
    }
  }
}

TEST_CASE("jacobian at the singular fixed point") {
  TracePoint p1{1.0, 1.0, 1.0};
  for (long long a = 1; a <= 8; ++a) {
    Mat3 j = trace_jacobian(a, p1);
    double ad = static_cast<double>(a);
    double expect[3][3] = {{ad + 1, ad * ad + ad, -ad},
                           {ad, ad * ad - ad, -ad + 1},
                           {0, 1, 0}};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) REQUIRE(j.m[r][c] == Catch::Approx(expect[r][c]).margin(1e-12));

    // eigenvalues a^2/2 +- a sqrt(a^2+4)/2 + 1 and -1
    Eigen::Matrix3d em;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) em(r, c) = j.m[r][c];
    Eigen::EigenSolver<Eigen::Matrix3d> solver(em);
    std::vector<double> eig;
    for (int i = 0; i < 3; ++i) {
      REQUIRE(std::abs(solver.eigenvalues()[i].imag()) < 1e-10);
      eig.push_back(solver.eigenvalues()[i].real());
    }
    std::sort(eig.begin(), eig.end());
    double root = ad * std::sqrt(ad * ad + 4.0) / 2.0;
    double mu_plus = ad * ad / 2.0 + root + 1.0;
    double mu_minus = ad * ad / 2.0 - root + 1.0;
    std::vector<double> expect_eig{-1.0, mu_minus, mu_plus};
    std::sort(expect_eig.begin(), expect_eig.end());
    for (int i = 0; i < 3; ++i)
      REQUIRE(std::abs(eig[static_cast<size_t>(i)] - expect_eig[static_cast<size_t>(i)]) <=
              1e-10 * (1.0 + std::abs(expect_eig[static_cast<size_t>(i)])));

    // (a, -1, 1) is the eigenvector for eigenvalue -1
    TracePoint v{ad, -1.0, 1.0};
    TracePoint jv = j.apply(v);
    REQUIRE(jv.x == Catch::Approx(-v.x).margin(1e-12));
    REQUIRE(jv.y == Catch::Approx(-v.y).margin(1e-12));
    REQUIRE(jv.z == Catch::Approx(-v.z).margin(1e-12));
  }
}

TEST_CASE("derivative propagation along the orbit") {
  ModelParams mp{parse_cf("[0;(2)]"), 0.8};
  const double h = 1e-6;
  for (double energy : {-1.1, 0.2, 1.4}) {
    for (long long k : {3LL, 6LL}) {
      TraceDeriv td = level_half_trace(mp, k, energy);
      TracePoint hi = level_half_trace(mp, k, energy + h).p;
      TracePoint lo = level_half_trace(mp, k, energy - h).p;
      REQUIRE(td.dp.x == Catch::Approx((hi.x - lo.x) / (2 * h)).margin(1e-4).epsilon(1e-5));
      REQUIRE(td.dp.y == Catch::Approx((hi.y - lo.y) / (2 * h)).margin(1e-4).epsilon(1e-5));
      REQUIRE(td.dp.z == Catch::Approx((hi.z - lo.z) / (2 * h)).margin(1e-4).epsilon(1e-5));
    }
  }
}

TEST_CASE("semi-conjugacy with torus endomorphisms") {
  // F(M_1(1/4, 0)) = T_1(F(1/4, 0)) = (-1, 0, 0)
  auto [t1, p1] = torus_step(1, 0.25, 0.0);
  TracePoint lhs = semiconjugacy_F(t1, p1);
  TracePoint rhs = trace_step(1, semiconjugacy_F(0.25, 0.0));
  REQUIRE(lhs.x == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(lhs.y == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(lhs.z == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(rhs.x == Catch::Approx(lhs.x).margin(1e-12));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double theta = u(rng), phi = u(rng);
    for (long long a = 1; a <= 6; ++a) {
      auto [nt, np] = torus_step(a, theta, phi);
      TracePoint via_torus = semiconjugacy_F(nt, np);
      TracePoint via_trace = trace_step(a, semiconjugacy_F(theta, phi));
      REQUIRE(std::abs(via_torus.x - via_trace.x) <= 1e-10);
      REQUIRE(std::abs(via_torus.y - via_trace.y) <= 1e-10);
      REQUIRE(std::abs(via_torus.z - via_trace.z) <= 1e-10);
    }
  }
}

TEST_CASE("quadratic form checks at the singularity") {
  QfReport rep = qf_check();
  REQUIRE(rep.du_exact);
  REQUIRE(rep.dup_exact);
  REQUIRE(rep.lattice_points == 21LL * 21 * 21);
  REQUIRE(rep.coc_max_error <= 1e-12);
  // spot value: v = (1,0,0) maps to (2,1,0) under DU(P_1), J' = 1 both sides
  REQUIRE(qf_jprime(1, 0, 0) == 1);
  REQUIRE(qf_jprime(2, 1, 0) == 1);
}
