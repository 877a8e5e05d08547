#pragma once

// Trace-map dynamics for Sturmian Schrodinger operators.
//
// Half traces (x_k, y_k, z_k) = (tr(A_k A_{k-1})/2, tr(A_k)/2, tr(A_{k-1})/2)
// of the transfer matrices over the word approximants evolve autonomously:
//   (x_{k}, y_{k}, z_{k}) = T_{a_k}(x_{k-1}, y_{k-1}, z_{k-1})
//   T_a(x,y,z) = (x U_a(y) - z U_{a-1}(y), x U_{a-1}(y) - z U_{a-2}(y), y)
// with U_a the Chebyshev polynomials of the second kind.  T_a = U^a P where
//   U(x,y,z) = (2xz - y, x, z),   P(x,y,z) = (x, z, y).
// Every T_a preserves the Fricke-Vogt invariant
//   I(x,y,z) = x^2 + y^2 + z^2 - 2xyz - 1,
// and the line of initial conditions ((E-l)/2, E/2, 1) lies on I = l^2/4.
//
// The matrix seeds are A_0 = [[E,-1],[1,0]] and A_{-1} = [[1,-l],[0,1]]
// (unimodular, trace 2), so that the k = 0 half traces reproduce the line
// of initial conditions; A_{k+1} = A_{k-1} A_k^{a_{k+1}}.

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "sturmspec/contfrac.hpp"
#include "sturmspec/words.hpp"

namespace sturmspec {

struct TracePoint {
  double x = 0, y = 0, z = 0;

  double max_norm() const { return std::max({std::abs(x), std::abs(y), std::abs(z)}); }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// U_{-2} = -1, U_{-1} = 0, U_0 = 1, U_{a+1}(x) = 2x U_a(x) - U_{a-1}(x)
inline double chebyshev_U(long long a, double x) {
  if (a < -2) throw Error("chebyshev_U: index must be >= -2");
  if (a == -2) return -1.0;
  if (a == -1) return 0.0;
  double prev = 0.0, cur = 1.0;
  for (long long i = 1; i <= a; ++i) {
    double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// U_a and its derivative
inline std::array<double, 2> chebyshev_U_deriv(long long a, double x) {
  if (a < -2) throw Error("chebyshev_U: index must be >= -2");
  if (a == -2) return {-1.0, 0.0};
  if (a == -1) return {0.0, 0.0};
  double prev = 0.0, cur = 1.0;
  double dprev = 0.0, dcur = 0.0;
  for (long long i = 1; i <= a; ++i) {
    double next = 2.0 * x * cur - prev;
    double dnext = 2.0 * cur + 2.0 * x * dcur - dprev;
    prev = cur;
    cur = next;
    dprev = dcur;
    dcur = dnext;
  }
  return {cur, dcur};
}

struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }
};

// A^a = U_{a-1}(tr A/2) A - U_{a-2}(tr A/2) I for unimodular A
inline Mat2 matrix_power_via_chebyshev(const Mat2& m, long long a) {
  if (a < 0) throw Error("matrix power exponent must be >= 0");
  if (std::abs(m.det() - 1.0) > 1e-12) throw Error("matrix_power_via_chebyshev needs det = 1");
  double x = m.trace() / 2.0;
  double u1 = chebyshev_U(a - 1, x);
  double u2 = chebyshev_U(a - 2, x);
  return {u1 * m.a - u2, u1 * m.b, u1 * m.c, u1 * m.d - u2};
}

inline double fricke_vogt(const TracePoint& p) {
  return p.x * p.x + p.y * p.y + p.z * p.z - 2.0 * p.x * p.y * p.z - 1.0;
}

inline TracePoint trace_step(long long a, const TracePoint& p) {
  if (a < 1) throw Error("trace_step: partial quotient must be >= 1");
  // evaluate U_a, U_{a-1}, U_{a-2} at y in one pass
  double u_m2 = -1.0, u_m1 = 0.0, u = 1.0; // U_{-2}, U_{-1}, U_0
  for (long long i = 1; i <= a; ++i) {
    double next = 2.0 * p.y * u - u_m1;
    u_m2 = u_m1;
    u_m1 = u;
    u = next;
  }
  return {p.x * u - p.z * u_m1, p.x * u_m1 - p.z * u_m2, p.y};
}

inline TracePoint aux_U(const TracePoint& p) { return {2.0 * p.x * p.z - p.y, p.x, p.z}; }
inline TracePoint aux_P(const TracePoint& p) { return {p.x, p.z, p.y}; }

struct Mat3 {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  TracePoint apply(const TracePoint& p) const {
    return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
  }
};

// Jacobian of T_a
inline Mat3 trace_jacobian(long long a, const TracePoint& p) {
  if (a < 0) throw Error("trace_jacobian: partial quotient must be >= 0");
  auto ua = chebyshev_U_deriv(a, p.y);
  auto ub = chebyshev_U_deriv(a - 1, p.y);
  auto uc = chebyshev_U_deriv(a - 2, p.y);
  Mat3 j;
  j.m[0][0] = ua[0];
  j.m[0][1] = p.x * ua[1] - p.z * ub[1];
  j.m[0][2] = -ub[0];
  j.m[1][0] = ub[0];
  j.m[1][1] = p.x * ub[1] - p.z * uc[1];
  j.m[1][2] = -uc[0];
  j.m[2][0] = 0.0;
  j.m[2][1] = 1.0;
  j.m[2][2] = 0.0;
  return j;
}

struct ModelParams {
  ContinuedFraction alpha;
  double lambda = 0.0;

  void validate() const {
    alpha.validate();
    if (!(lambda >= 0.0)) throw Error("lambda must be >= 0");
  }
};

inline TracePoint initial_point(const ModelParams& mp, double energy) {
  return {(energy - mp.lambda) / 2.0, energy / 2.0, 1.0};
}

enum class OrbitStatus { Bounded, Escaped, Overflow };

struct OrbitStep {
  long long k = 0;
  long long a = 0;
  TracePoint p;
  double invariant_drift = 0.0;
};

struct OrbitResult {
  OrbitStatus status = OrbitStatus::Bounded;
  long long escape_step = -1; // first step satisfying the escape rule
  long long steps_taken = 0;
  TracePoint final_point;
  double invariant_drift = 0.0; // max |I - lambda^2/4| over the orbit
  std::vector<OrbitStep> trajectory; // filled when recording
};

// Iterate T_{a_k} from the line of initial conditions.  Escape is declared
// once the max norm exceeds max(4, 2 + lambda) and has grown for three
// consecutive steps; orbits that stay below the bound for kmax steps are
// reported Bounded at that depth.
inline OrbitResult trace_orbit(const ModelParams& mp, double energy, long long kmax,
                               bool record = false) {
  mp.validate();
  if (kmax < 1) throw Error("trace_orbit: kmax must be >= 1");
  const double level = mp.lambda * mp.lambda / 4.0;
  const double r_esc = std::max(4.0, 2.0 + mp.lambda);
  OrbitResult res;
  TracePoint p = initial_point(mp, energy);
  double drift = std::abs(fricke_vogt(p) - level);
  double prev_norm = p.max_norm();
  int growth_streak = 0;
  if (record) res.trajectory.push_back({0, 0, p, drift});
  for (long long k = 1; k <= kmax; ++k) {
    long long a = mp.alpha.quotient(k);
    p = trace_step(a, p);
    res.steps_taken = k;
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      res.status = OrbitStatus::Overflow;
      res.escape_step = k;
      res.final_point = p;
      res.invariant_drift = drift;
      if (record) res.trajectory.push_back({k, a, p, std::numeric_limits<double>::quiet_NaN()});
      return res;
    }
    double d = std::abs(fricke_vogt(p) - level);
    drift = std::max(drift, d);
    if (record) res.trajectory.push_back({k, a, p, d});
    double norm = p.max_norm();
    growth_streak = (norm > prev_norm) ? growth_streak + 1 : 0;
    prev_norm = norm;
    if (norm > r_esc && growth_streak >= 3) {
      res.status = OrbitStatus::Escaped;
      res.escape_step = k;
      break;
    }
  }
  res.final_point = p;
  res.invariant_drift = drift;
  return res;
}

// Independent oracle: explicit transfer-matrix products over the rotation word.
// A_k = A(R(q_k)) ... A(R(1)) with A(r) = [[E - lambda r, -1],[1,0]];
// returns (tr(A_k A_{k-1})/2, tr(A_k)/2, tr(A_{k-1})/2).
inline TracePoint transfer_half_traces(const ModelParams& mp, long long k, double energy) {
  mp.validate();
  if (k < 0) throw Error("transfer_half_traces: level must be >= 0");
  const Mat2 seed_prev{1.0, -mp.lambda, 0.0, 1.0}; // A_{-1}
  const Mat2 seed_cur{energy, -1.0, 1.0, 0.0};     // A_0
  if (k == 0)
    return {(seed_cur * seed_prev).trace() / 2.0, seed_cur.trace() / 2.0, seed_prev.trace() / 2.0};
  long long qk = denominator_q(mp.alpha, k);
  long long qk1 = (k == 1) ? 1 : denominator_q(mp.alpha, k - 1);
  if (qk > 100000) throw Error("transfer_half_traces: q_k too large");
  Word w = rotation_sequence(mp.alpha, 0.0, static_cast<size_t>(qk));
  Mat2 acc; // identity
  Mat2 a_prev = seed_cur; // becomes A_{k-1}; for k = 1 the predecessor is A_0
  bool have_prev = (k == 1);
  for (long long n = 1; n <= qk; ++n) {
    double v = (w[static_cast<size_t>(n - 1)] == '1') ? mp.lambda : 0.0;
    acc = Mat2{energy - v, -1.0, 1.0, 0.0} * acc;
    if (n == qk1 && k >= 2) {
      a_prev = acc;
      have_prev = true;
    }
  }
  if (!have_prev) throw Error("transfer_half_traces: internal prefix error");
  return {(acc * a_prev).trace() / 2.0, acc.trace() / 2.0, a_prev.trace() / 2.0};
}

// point and d/dE jointly, seeded with the derivative of the initial line
struct TraceDeriv {
  TracePoint p;
  TracePoint dp;
};

inline TraceDeriv level_half_trace(const ModelParams& mp, long long k, double energy) {
  mp.validate();
  if (k < 0) throw Error("level must be >= 0");
  TraceDeriv t{initial_point(mp, energy), {0.5, 0.5, 0.0}};
  for (long long j = 1; j <= k; ++j) {
    long long a = mp.alpha.quotient(j);
    t.dp = trace_jacobian(a, t.p).apply(t.dp);
    t.p = trace_step(a, t.p);
  }
  return t;
}

// semi-conjugacy with the torus endomorphisms
inline TracePoint semiconjugacy_F(double theta, double phi) {
  const double two_pi = 2.0 * std::acos(-1.0);
  return {std::cos(two_pi * (theta + phi)), std::cos(two_pi * theta), std::cos(two_pi * phi)};
}

inline std::pair<double, double> torus_step(long long a, double theta, double phi) {
  if (a < 0) throw Error("torus_step: a must be >= 0");
  double first = static_cast<double>(a) * theta + phi;
  first -= std::floor(first);
  double second = theta - std::floor(theta);
  return {first, second};
}

// Integer quadratic-form checks at the singular fixed point P_1 = (1,1,1):
// both linearizations preserve J'(x,y,z) = x^2+y^2+z^2-2(xy+xz+yz) exactly.
struct QfReport {
  bool du_exact = true;       // DU(P_1) = [[2,-1,2],[1,0,0],[0,0,1]]
  bool dup_exact = true;      // D(UP)(P_1) = [[2,2,-1],[1,0,0],[0,1,0]]
  long long lattice_points = 0;
  double coc_max_error = 0.0; // change-of-coordinates identity, sampled
};

inline long long qf_jprime(long long x, long long y, long long z) {
  return x * x + y * y + z * z - 2 * (x * y + x * z + y * z);
}

inline QfReport qf_check(int lattice_radius = 10, int samples = 1000, unsigned seed = 7) {
  QfReport rep;
  for (long long x = -lattice_radius; x <= lattice_radius; ++x)
    for (long long y = -lattice_radius; y <= lattice_radius; ++y)
      for (long long z = -lattice_radius; z <= lattice_radius; ++z) {
        ++rep.lattice_points;
        long long j = qf_jprime(x, y, z);
        if (qf_jprime(2 * x - y + 2 * z, x, z) != j) rep.du_exact = false;
        if (qf_jprime(2 * x + 2 * y - z, x, y) != j) rep.dup_exact = false;
      }
  // x^2 + y^2 - z^2 = J'(x + (3/4)y + (5/4)z, -(1/4)y + (1/4)z, y + z)
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < samples; ++i) {
    double x = dist(rng), y = dist(rng), z = dist(rng);
    double lhs = x * x + y * y - z * z;
    double u = x + 0.75 * y + 1.25 * z;
    double v = -0.25 * y + 0.25 * z;
    double w = y + z;
    double rhs = u * u + v * v + w * w - 2.0 * (u * v + u * w + v * w);
    rep.coc_max_error = std::max(rep.coc_max_error, std::abs(lhs - rhs));
  }
  return rep;
}

} // namespace sturmspec
