#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "sturmspec/spectrum.hpp"

using namespace sturmspec;

namespace {

ModelParams golden(double lambda) { return {parse_cf("[0;(1)]"), lambda}; }

// level-d approximant of the middle-thirds Cantor set: 2^d intervals in [0,1]
BandSet middle_thirds(int depth) {
  std::vector<Band> pieces{{0.0, 1.0, depth}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Band> next;
    for (const Band& b : pieces) {
      double third = b.length() / 3.0;
      next.push_back({b.lo, b.lo + third, b.level});
      next.push_back({b.hi - third, b.hi, b.level});
    }
    pieces = std::move(next);
  }
  return BandSet{pieces, depth};
}

double y_at(const ModelParams& params, long long k, double energy) {
  return level_half_trace(params, k, energy).p.y;
}

}  // namespace

TEST_CASE("bands in closed form at q <= 2", "[spectrum]") {
  ModelParams mp = golden(1.0);

  BandSet b1 = bands(mp, 1);
  REQUIRE(b1.bands.size() == 1);
  REQUIRE(b1.bands[0].length() == Catch::Approx(4.0).epsilon(0).margin(1e-14));
  for (double e : {b1.bands[0].lo, b1.bands[0].hi})
    REQUIRE(std::fabs(y_at(mp, 1, e)) == Catch::Approx(1.0).epsilon(0).margin(1e-12));

  BandSet b2 = bands(mp, 2);
  REQUIRE(b2.bands.size() == 2);
  REQUIRE(b2.bands[0].hi < b2.bands[1].lo);
  for (const Band& b : b2.bands) {
    REQUIRE(std::fabs(y_at(mp, 2, b.lo)) == Catch::Approx(1.0).epsilon(0).margin(1e-12));
    REQUIRE(std::fabs(y_at(mp, 2, b.hi)) == Catch::Approx(1.0).epsilon(0).margin(1e-12));
    REQUIRE(std::fabs(y_at(mp, 2, 0.5 * (b.lo + b.hi))) < 1.0);
  }
}

TEST_CASE("golden lambda 1 level 10 band set", "[spectrum]") {
  ModelParams mp = golden(1.0);
  BandSet bs = bands(mp, 10, 2);
  REQUIRE(bs.bands.size() == 89);
  REQUIRE(static_cast<std::size_t>(denominator_q(mp.alpha, 10)) == bs.bands.size());
  REQUIRE(bs.total_measure() == Catch::Approx(1.0683032504271459).epsilon(0).margin(1e-7));
  REQUIRE(bs.hull_lo() >= -2.0 - mp.lambda - 1e-9);
  REQUIRE(bs.hull_hi() <= 2.0 + mp.lambda + 1e-9);
  for (std::size_t i = 0; i < bs.bands.size(); ++i) {
    const Band& b = bs.bands[i];
    REQUIRE(b.length() > 0.0);
    if (i > 0) REQUIRE(b.lo > bs.bands[i - 1].hi);
    // edges sit on |y_10| = 1, interiors strictly inside
    REQUIRE(std::fabs(y_at(mp, 10, b.lo)) == Catch::Approx(1.0).epsilon(0).margin(1e-8));
    REQUIRE(std::fabs(y_at(mp, 10, b.hi)) == Catch::Approx(1.0).epsilon(0).margin(1e-8));
    REQUIRE(std::fabs(y_at(mp, 10, 0.5 * (b.lo + b.hi))) < 1.0);
  }
}

TEST_CASE("each band closure holds exactly one ring eigenvalue", "[spectrum]") {
  ModelParams mp = golden(1.0);
  long long q = denominator_q(mp.alpha, 10);
  BandSet bs = bands(mp, 10, 2);
  for (double corner : {1.0, -1.0}) {
    PeriodicOperator ring = periodic_operator(mp, 0.0, q, corner);
    long long total = 0;
    for (const Band& b : bs.bands) {
      long long inside = count_below(ring, b.hi + 1e-9) - count_below(ring, b.lo - 1e-9);
      REQUIRE(inside == 1);
      total += inside;
    }
    REQUIRE(total == q);
  }
}

TEST_CASE("ring counts and eigenvalues match dense diagonalization", "[spectrum]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> site(-1.5, 1.5);
  std::uniform_real_distribution<double> probe(-3.5, 3.5);
  const int n = 40;
  for (double corner : {1.0, -1.0}) {
    PeriodicOperator op;
    op.corner = corner;
    op.diagonal.resize(n);
    for (double& v : op.diagonal) v = site(rng);

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      h(i, i) = op.diagonal[static_cast<std::size_t>(i)];
      if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = 1.0;
    }
    h(0, n - 1) = h(n - 1, 0) = corner;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    const auto& evs = solver.eigenvalues();

    for (int trial = 0; trial < 30; ++trial) {
      double e = probe(rng);
      long long truth = 0;
      for (int i = 0; i < n; ++i)
        if (evs[i] < e) ++truth;
      REQUIRE(count_below(op, e) == truth);
    }
    for (int j = 0; j < n; ++j) {
      double ev = detail::ring_eigenvalue(op, j, -4.0, 4.001);
      REQUIRE(ev == Catch::Approx(evs[j]).epsilon(0).margin(1e-9));
    }
  }
}

TEST_CASE("lambda 0 collapses to the free spectrum", "[spectrum]") {
  ModelParams mp = golden(0.0);
  for (long long k : {1LL, 2LL, 7LL}) {
    BandSet bs = bands(mp, k, 2);
    REQUIRE(bs.bands.size() == 1);
    REQUIRE(bs.hull_lo() == Catch::Approx(-2.0).epsilon(0).margin(1e-6));
    REQUIRE(bs.hull_hi() == Catch::Approx(2.0).epsilon(0).margin(1e-6));
  }
  BandSet cover = spectrum_cover(mp, 8, 2);
  REQUIRE(cover.bands.size() == 1);
  REQUIRE(cover.hull_lo() == Catch::Approx(-2.0).epsilon(0).margin(1e-6));
  REQUIRE(cover.hull_hi() == Catch::Approx(2.0).epsilon(0).margin(1e-6));
}

TEST_CASE("deeper bands nest inside coarser covers", "[spectrum]") {
  ModelParams mp = golden(1.0);
  BandSet cover = spectrum_cover(mp, 8, 2);
  BandSet deep = bands(mp, 10, 2);
  for (const Band& b : deep.bands) {
    bool contained = false;
    for (const Band& c : cover.bands)
      if (b.lo >= c.lo - 1e-8 && b.hi <= c.hi + 1e-8) {
        contained = true;
        break;
      }
    REQUIRE(contained);
  }
}

TEST_CASE("band measure decays with level", "[spectrum]") {
  ModelParams mp = golden(1.0);
  const struct {
    long long k;
    std::size_t count;
    double measure;
  } rows[] = {
      {6, 13, 1.8533820078264309},
      {8, 34, 1.4075592766423293},
      {10, 89, 1.0683032504271459},
      {12, 233, 0.81073155065721403},
  };
  double prev = 1e30;
  for (const auto& row : rows) {
    BandSet bs = bands(mp, row.k, 2);
    REQUIRE(bs.bands.size() == row.count);
    REQUIRE(bs.total_measure() == Catch::Approx(row.measure).epsilon(0).margin(1e-7));
    REQUIRE(bs.total_measure() < prev);
    prev = bs.total_measure();
  }
}

TEST_CASE("clustered bands at deep levels are resolved", "[spectrum]") {
  // near the spectral edges at level 16 several bands fall within 1e-5 of
  // each other; the eigenvalue counts must still find every one
  BandSet bs = bands(golden(0.5), 16, 4);
  REQUIRE(bs.bands.size() == 1597);
  REQUIRE(bs.total_measure() == Catch::Approx(1.5103710939557144).epsilon(0).margin(1e-7));
}

TEST_CASE("box dimension calibrates on the middle-thirds set", "[spectrum]") {
  BandSet mt = middle_thirds(6);
  std::vector<double> scales;
  for (int j = 1; j <= 6; ++j) scales.push_back(std::pow(3.0, -j));
  double bd = box_dimension(mt, scales);
  REQUIRE(bd == Catch::Approx(0.61808587285339633).epsilon(0).margin(1e-7));
  REQUIRE(bd == Catch::Approx(std::log(2.0) / std::log(3.0)).epsilon(0).margin(0.02));
}

TEST_CASE("box dimension of interval unions is one", "[spectrum]") {
  BandSet single{{{0.0, 1.0, 0}}, 0};
  std::vector<double> scales;
  // scales well below the interval length, so the one extra boundary box
  // cannot tilt the fit
  for (int j = 0; j <= 8; ++j) scales.push_back(0.01 / std::pow(2.0, j));
  REQUIRE(box_dimension(single, scales) == Catch::Approx(1.0).epsilon(0).margin(0.01));

  BandSet comb;
  for (int i = 0; i < 8; ++i) comb.bands.push_back({static_cast<double>(i), i + 0.5, 0});
  std::vector<double> fine;  // below the gap width, past the crossover to 8 pieces
  for (int j = 0; j <= 8; ++j) fine.push_back(0.05 / std::pow(2.0, j));
  REQUIRE(box_dimension(comb, fine) == Catch::Approx(1.0).epsilon(0).margin(0.02));
}

TEST_CASE("thickness of the middle-thirds set", "[spectrum]") {
  ThicknessReport tr = thickness_denseness(middle_thirds(3));
  double d = std::log(2.0) / std::log(3.0);
  REQUIRE(tr.tau == Catch::Approx(1.0).epsilon(0).margin(1e-12));
  REQUIRE(tr.theta == Catch::Approx(1.0).epsilon(0).margin(1e-12));
  REQUIRE(tr.dim_lower == Catch::Approx(d).epsilon(0).margin(1e-12));
  REQUIRE(tr.dim_upper == Catch::Approx(d).epsilon(0).margin(1e-12));
}

TEST_CASE("thickness is affine invariant", "[spectrum]") {
  BandSet base = middle_thirds(4);
  BandSet mapped = base;
  for (Band& b : mapped.bands) {
    b.lo = 2.7 * b.lo - 1.3;
    b.hi = 2.7 * b.hi - 1.3;
  }
  ThicknessReport a = thickness_denseness(base);
  ThicknessReport b = thickness_denseness(mapped);
  REQUIRE(a.tau == Catch::Approx(b.tau).epsilon(0).margin(1e-9));
  REQUIRE(a.theta == Catch::Approx(b.theta).epsilon(0).margin(1e-9));
}

TEST_CASE("dimension estimates at level 12 track the coupling", "[spectrum]") {
  struct Row {
    double lambda, boxdim, tau, theta;
  };
  const Row rows[] = {
      {0.1, 0.95209677091104084, 14.062390519858829, 58.538537556530684},
      {0.4, 0.89611140770511422, 3.1185073444303408, 12.633222521156082},
      {0.8, 0.81168144986487778, 1.3355608151768665, 5.7166077720229582},
  };
  for (const Row& row : rows) {
    BandSet bs = bands(golden(row.lambda), 12, 4);
    ThicknessReport tr = thickness_denseness(bs);
    double bd = box_dimension(bs, default_scales(bs));
    REQUIRE(bd == Catch::Approx(row.boxdim).epsilon(0).margin(1e-6));
    REQUIRE(tr.tau == Catch::Approx(row.tau).epsilon(0).margin(1e-6));
    REQUIRE(tr.theta == Catch::Approx(row.theta).epsilon(0).margin(1e-6));
    // thickness bounds should bracket the box-count estimate
    REQUIRE(tr.dim_lower <= bd + 0.05);
    REQUIRE(tr.dim_upper >= bd - 0.05);
  }
}

TEST_CASE("gap labels at level 10", "[spectrum]") {
  ModelParams mp = golden(1.0);
  const long long L = 10000;
  LabeledGaps lg = label_gaps(mp, 10, 20, L, 3.0 / L, 2);
  REQUIRE(lg.gaps.size() == 88);
  REQUIRE(lg.ambiguous_gaps.empty());
  REQUIRE(lg.unmatched_labels.empty());

  std::set<long long> seen;
  std::size_t unmatched = 0;
  for (const Gap& g : lg.gaps) {
    REQUIRE(g.ids_value.has_value());
    if (!g.label) {
      ++unmatched;
      continue;
    }
    seen.insert(*g.label);
    double frac = static_cast<double>(mp.alpha.surd().frac_times(*g.label));
    REQUIRE(*g.ids_value == Catch::Approx(frac).epsilon(0).margin(3.0 / L));
  }
  REQUIRE(unmatched == 48);
  for (long long m = -10; m <= 10; ++m)
    if (m != 0) REQUIRE(seen.count(m) == 1);
}

TEST_CASE("gap opening study at the first label", "[spectrum]") {
  auto rows = gap_opening_study(parse_cf("[0;(1)]"), 1, {0.4, 0.2, 0.1, 0.05}, 12, 10000, 4);
  const double widths[] = {0.22057729427662232, 0.11454679845613547, 0.058314532833018129,
                           0.029414184759232409};
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].error.empty());
    REQUIRE(rows[i].width == Catch::Approx(widths[i]).epsilon(0).margin(1e-7));
    REQUIRE(rows[i].ratio == Catch::Approx(widths[i] / rows[i].lambda).epsilon(0).margin(1e-9));
    // width/lambda climbs toward its lambda -> 0 limit
    if (i > 0) REQUIRE(rows[i].ratio > rows[i - 1].ratio);
  }

  auto bad = gap_opening_study(parse_cf("[0;(1)]"), 1, {0.0, -1.0}, 12, 10000, 2);
  for (const auto& row : bad) {
    REQUIRE(row.error == "lambda must be > 0");
    REQUIRE(row.width == 0.0);
  }
  REQUIRE_THROWS_AS(gap_opening_study(parse_cf("[0;(1)]"), 0, {0.5}), Error);
}

TEST_CASE("band search is deterministic across worker counts", "[spectrum]") {
  BandSet a = bands(golden(1.0), 10, 1);
  BandSet b = bands(golden(1.0), 10, 3);
  REQUIRE(a.bands.size() == b.bands.size());
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    REQUIRE(a.bands[i].lo == b.bands[i].lo);
    REQUIRE(a.bands[i].hi == b.bands[i].hi);
  }
}

TEST_CASE("spectrum input validation", "[spectrum]") {
  REQUIRE_THROWS_AS(bands(golden(1.0), 0), Error);
  REQUIRE_THROWS_AS(bands(golden(1.0), 25), Error);  // q_25 = 75025 over the cap

  BandSet mt = middle_thirds(3);
  REQUIRE_THROWS_AS(box_dimension(mt, {0.1, 0.01, 0.001}), Error);
  REQUIRE_THROWS_AS(box_dimension(mt, {0.1, 0.05, 0.02, 0.01}), Error);

  BandSet lone{{{0.0, 1.0, 0}}, 0};
  REQUIRE_THROWS_AS(thickness_denseness(lone), Error);
  REQUIRE_THROWS_AS(gaps_from_bands(BandSet{}), Error);

  BandSet point{{{1.0, 1.0, 0}}, 0};
  REQUIRE_THROWS_AS(default_scales(point), Error);
}
