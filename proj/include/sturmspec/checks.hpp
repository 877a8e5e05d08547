#pragma once

// Self-contained invariant suite behind the `check` subcommand: each check
// re-verifies one structural property of the pipeline (conserved quantities,
// oracle agreement, closed forms) on a small randomized sample and reports
// pass/fail with a measured figure.  Sizes are trimmed so the whole suite
// runs in about a second.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sturmspec/spectrum.hpp"
#include "sturmspec/words.hpp"

namespace sturmspec {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline double det3(const Mat3& j) {
  return j.m[0][0] * (j.m[1][1] * j.m[2][2] - j.m[1][2] * j.m[2][1]) -
         j.m[0][1] * (j.m[1][0] * j.m[2][2] - j.m[1][2] * j.m[2][0]) +
         j.m[0][2] * (j.m[1][0] * j.m[2][1] - j.m[1][1] * j.m[2][0]);
}

template <typename Fn>
void run_check(std::vector<CheckResult>& out, const std::string& name, Fn&& fn) {
  CheckResult r;
  r.name = name;
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  out.push_back(r);
}

inline std::string fmt_sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

}  // namespace detail

inline std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> out;
  ContinuedFraction gold = parse_cf("[0;(1)]");

  detail::run_check(out, "fricke-vogt-preserved", [&](CheckResult& r) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> uy(-1.0, 1.0);
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
      // |y| <= 1 keeps the Chebyshev factors polynomially bounded, so the
      // image stays in the range where evaluating I is meaningful in doubles
      TracePoint p{u(rng), uy(rng), u(rng)};
      double norm = p.max_norm();
      double allow = 1e-12 * (1.0 + norm * norm * norm);
      for (long long a = 1; a <= 8; ++a) {
        double drift = std::fabs(fricke_vogt(trace_step(a, p)) - fricke_vogt(p));
        worst = std::max(worst, drift);
        if (drift > allow) ok = false;
      }
    }
    r.passed = ok;
    r.detail = "max invariant drift " + detail::fmt_sci(worst) + " over 8000 applications";
  });

  detail::run_check(out, "initial-line-on-surface", [&](CheckResult& r) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ul(0.0, 2.0), ue(-4.0, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      double lambda = ul(rng);
      ModelParams mp{gold, lambda};
      double res = std::fabs(fricke_vogt(initial_point(mp, ue(rng))) - lambda * lambda / 4.0);
      worst = std::max(worst, res);
    }
    r.passed = worst <= 1e-14;
    r.detail = "max |I - lambda^2/4| = " + detail::fmt_sci(worst) + " on 100 (lambda, E) pairs";
  });

  detail::run_check(out, "trace-vs-transfer", [&](CheckResult& r) {
    double worst = 0.0;
    for (const char* text : {"[0;(1)]", "[0;(2)]"}) {
      ContinuedFraction alpha = parse_cf(text);
      for (double lambda : {0.5, 1.0}) {
        ModelParams mp{alpha, lambda};
        for (long long k = 1; denominator_q(alpha, k) <= 200; ++k) {
          for (double e : {-2.1, -0.7, 0.3, 1.9}) {
            TracePoint a = level_half_trace(mp, k, e).p;
            TracePoint b = transfer_half_traces(mp, k, e);
            double scale = std::max(1.0, std::max(a.max_norm(), b.max_norm()));
            double diff = std::max({std::fabs(a.x - b.x), std::fabs(a.y - b.y),
                                    std::fabs(a.z - b.z)}) /
                          scale;
            worst = std::max(worst, diff);
          }
        }
      }
    }
    r.passed = worst <= 1e-8;
    r.detail = "max relative gap to transfer-matrix half traces " + detail::fmt_sci(worst);
  });

  detail::run_check(out, "semi-conjugacy", [&](CheckResult& r) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      double theta = u(rng), phi = u(rng);
      for (long long a = 1; a <= 6; ++a) {
        auto [t2, p2] = torus_step(a, theta, phi);
        TracePoint lhs = semiconjugacy_F(t2, p2);
        TracePoint rhs = trace_step(a, semiconjugacy_F(theta, phi));
        double diff = std::max({std::fabs(lhs.x - rhs.x), std::fabs(lhs.y - rhs.y),
                                std::fabs(lhs.z - rhs.z)});
        worst = std::max(worst, diff);
      }
    }
    r.passed = worst <= 1e-10;
    r.detail = "max |F(M_a w) - T_a(F w)| = " + detail::fmt_sci(worst);
  });

  detail::run_check(out, "jacobian", [&](CheckResult& r) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst_fd = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < 50; ++i) {
      TracePoint p{u(rng), u(rng), u(rng)};
      for (long long a = 1; a <= 8; ++a) {
        Mat3 j = trace_jacobian(a, p);
        for (int c = 0; c < 3; ++c) {
          TracePoint hi = p, lo = p;
          (c == 0 ? hi.x : c == 1 ? hi.y : hi.z) += h;
          (c == 0 ? lo.x : c == 1 ? lo.y : lo.z) -= h;
          TracePoint fhi = trace_step(a, hi), flo = trace_step(a, lo);
          double fd[3] = {(fhi.x - flo.x) / (2 * h), (fhi.y - flo.y) / (2 * h),
                          (fhi.z - flo.z) / (2 * h)};
          for (int rr = 0; rr < 3; ++rr)
            worst_fd = std::max(worst_fd, std::fabs(j.m[rr][c] - fd[rr]));
        }
      }
    }
    double worst_ev = 0.0;
    for (long long a = 1; a <= 8; ++a) {
      Mat3 j = trace_jacobian(a, TracePoint{1.0, 1.0, 1.0});
      double s = std::sqrt(static_cast<double>(a * a + 4));
      for (double mu : {(a * a + a * s) / 2.0 + 1.0, (a * a - a * s) / 2.0 + 1.0, -1.0}) {
        Mat3 shifted = j;
        for (int d = 0; d < 3; ++d) shifted.m[d][d] -= mu;
        double denom = (1.0 + std::fabs(mu)) * (1.0 + std::fabs(mu)) * (1.0 + std::fabs(mu));
        worst_ev = std::max(worst_ev, std::fabs(detail::det3(shifted)) / denom);
      }
    }
    r.passed = worst_fd <= 1e-5 && worst_ev <= 1e-10;
    r.detail = "max FD deviation " + detail::fmt_sci(worst_fd) + ", eigenvalue residual " +
               detail::fmt_sci(worst_ev);
  });

  detail::run_check(out, "quadratic-forms", [&](CheckResult& r) {
    QfReport rep = qf_check();
    r.passed = rep.du_exact && rep.dup_exact && rep.coc_max_error <= 1e-12;
    r.detail = "J' exact on " + std::to_string(rep.lattice_points) +
               " lattice points, change-of-coordinates error " +
               detail::fmt_sci(rep.coc_max_error);
  });

  detail::run_check(out, "word-combinatorics", [&](CheckResult& r) {
    Word w = rotation_sequence(gold, 0.0, 2000);
    bool ok = true;
    for (long long n = 1; n <= 20; ++n)
      if (complexity(w, n) != n + 1) ok = false;
    Word rec = sturmian_word_by_recursion(gold, 12);
    if (w.compare(0, rec.size(), rec) != 0) ok = false;
    r.passed = ok;
    r.detail = "complexity n+1 for n <= 20; recursion word of length " +
               std::to_string(rec.size()) + " matches the rotation sequence";
  });

  detail::run_check(out, "approximants", [&](CheckResult& r) {
    auto apx = approximants(gold, 30);
    long double alpha = gold.value_ld();
    bool ok = true;
    for (const Approximant& a : apx) {
      long double p = static_cast<long double>(a.p), q = static_cast<long double>(a.q);
      if (std::fabs(static_cast<double>(p / q - alpha)) > 1.0 / static_cast<double>(q * q))
        ok = false;
    }
    r.passed = ok;
    r.detail = "|p_k/q_k - alpha| < 1/q_k^2 for k <= 30";
  });

  detail::run_check(out, "band-ring-consistency", [&](CheckResult& r) {
    ModelParams mp{gold, 1.0};
    long long q = denominator_q(gold, 8);
    BandSet bs = bands(mp, 8);
    bool ok = static_cast<long long>(bs.bands.size()) == q;
    PeriodicOperator ring = periodic_operator(mp, 0.0, q, 1.0);
    for (const Band& b : bs.bands)
      if (count_below(ring, b.hi + 1e-9) - count_below(ring, b.lo - 1e-9) != 1) ok = false;
    r.passed = ok;
    r.detail = std::to_string(bs.bands.size()) + " bands at level 8 (q_8 = " +
               std::to_string(q) + "), one ring eigenvalue per band closure";
  });

  detail::run_check(out, "free-case", [&](CheckResult& r) {
    ModelParams mp{gold, 0.0};
    BandSet cover = spectrum_cover(mp, 8);
    bool ok = cover.bands.size() == 1 && std::fabs(cover.hull_lo() + 2.0) <= 1e-3 &&
              std::fabs(cover.hull_hi() - 2.0) <= 1e-3;
    DirichletOperator op = dirichlet_operator(mp, 0.0, 10000);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      double e = -2.0 + 4.0 * i / 100.0;
      double n = static_cast<double>(count_below(op, e)) / 10000.0;
      worst = std::max(worst, std::fabs(n - free_ids(e)));
    }
    if (worst > 2e-3) ok = false;
    r.passed = ok;
    r.detail = "cover = [-2,2], max |N - arccos form| = " + detail::fmt_sci(worst);
  });

  detail::run_check(out, "ids-omega-independence", [&](CheckResult& r) {
    ModelParams mp{gold, 1.0};
    const long long L = 2000;
    DirichletOperator base = dirichlet_operator(mp, 0.0, L);
    double worst = 0.0;
    for (double omega : {0.3, 0.7}) {
      DirichletOperator other = dirichlet_operator(mp, omega, L);
      for (int i = 0; i <= 50; ++i) {
        double e = -3.0 + 6.0 * i / 50.0;
        double diff = std::fabs(static_cast<double>(count_below(base, e)) -
                                static_cast<double>(count_below(other, e))) /
                      static_cast<double>(L);
        worst = std::max(worst, diff);
      }
    }
    r.passed = worst <= (2.0 + 1e-9) / static_cast<double>(L);
    r.detail = "sup_E |N_omega - N_0| = " + detail::fmt_sci(worst) + " <= 2/L at L = 2000";
  });

  detail::run_check(out, "gap-label-consistency", [&](CheckResult& r) {
    ModelParams mp{gold, 1.0};
    const long long L = 4000;
    LabeledGaps lg = label_gaps(mp, 8, 12, L, 3.0 / L);
    bool ok = lg.ambiguous_gaps.empty();
    std::size_t matched = 0;
    for (const Gap& g : lg.gaps) {
      if (!g.label) continue;
      ++matched;
      double frac = static_cast<double>(mp.alpha.surd().frac_times(*g.label));
      if (std::fabs(*g.ids_value - frac) > 3.0 / static_cast<double>(L)) ok = false;
    }
    if (matched < 10) ok = false;
    r.passed = ok;
    r.detail = std::to_string(matched) + " of " + std::to_string(lg.gaps.size()) +
               " gaps labeled at level 8, none ambiguous";
  });

  return out;
}

}  // namespace sturmspec
