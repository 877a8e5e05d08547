#pragma once

// Integrated density of states via Dirichlet restrictions H^[1,L].
// Eigenvalue counting uses the Sturm pivot recursion d_1 = v_1 - E,
// d_n = v_n - E - 1/d_{n-1}; the number of negative pivots equals the
// number of eigenvalues below E.  On top of that: the free-Laplacian
// closed form, gap labels {m*alpha}, and a local-dimension estimator
// for the density-of-states measure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "sturmspec/contfrac.hpp"
#include "sturmspec/tracemap.hpp"
#include "sturmspec/words.hpp"

namespace sturmspec {

namespace detail {

// Runs fn(i) for i in [0, n), split into contiguous chunks across threads.
// Callers write results by index, so the output order is deterministic.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers < 1) throw Error("worker count must be >= 1");
  std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline std::vector<double> potential(const ModelParams& params, double omega, long long length) {
  params.validate();
  if (length < 1) throw Error("potential length must be >= 1");
  Word letters = rotation_sequence(params.alpha, omega, static_cast<std::size_t>(length));
  std::vector<double> diag(static_cast<std::size_t>(length));
  for (std::size_t n = 0; n < diag.size(); ++n)
    diag[n] = letters[n] == '1' ? params.lambda : 0.0;
  return diag;
}

struct DirichletOperator {
  std::vector<double> diagonal;  // off-diagonal entries are all 1

  long long size() const { return static_cast<long long>(diagonal.size()); }
};

inline DirichletOperator dirichlet_operator(const ModelParams& params, double omega,
                                            long long length) {
  return DirichletOperator{potential(params, omega, length)};
}

inline long long count_below(const DirichletOperator& op, double energy) {
  long long count = 0;
  double pivot = 1.0;
  for (std::size_t n = 0; n < op.diagonal.size(); ++n) {
    double d = op.diagonal[n] - energy;
    if (n > 0) d -= 1.0 / pivot;
    if (std::fabs(d) < 1e-300) d = std::copysign(1e-300, d);
    if (d < 0.0) ++count;
    pivot = d;
  }
  return count;
}

struct PeriodicOperator {
  std::vector<double> diagonal;  // ring of |diagonal| sites, chain couplings 1
  double corner = 1.0;           // +1 periodic closure, -1 antiperiodic

  long long size() const { return static_cast<long long>(diagonal.size()); }
};

inline PeriodicOperator periodic_operator(const ModelParams& params, double omega,
                                          long long length, double corner = 1.0) {
  if (corner != 1.0 && corner != -1.0) throw Error("corner coupling must be +-1");
  return PeriodicOperator{potential(params, omega, length), corner};
}

namespace detail {

// Solves (T - E) x = b for the open tridiagonal T with unit couplings, by
// guarded LDL^T elimination.  Returns true if the pivot guard fired; the
// solution is then meaningless (the guard keeps Sturm counts valid, but it
// wrecks the solve), and callers must not trust it.
inline bool tridiag_solve(const std::vector<double>& diag, double energy,
                          std::vector<double>& d, std::vector<double>& x) {
  std::size_t n = diag.size();
  d.resize(n);
  bool clamped = false;
  for (std::size_t i = 0; i < n; ++i) {
    double p = diag[i] - energy;
    if (i > 0) p -= 1.0 / d[i - 1];
    if (std::fabs(p) < 1e-300) {
      p = std::copysign(1e-300, p);
      clamped = true;
    }
    d[i] = p;
  }
  for (std::size_t i = 1; i < n; ++i) x[i] -= x[i - 1] / d[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= d[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= x[i + 1] / d[i];
  return clamped;
}

struct RingCount {
  long long count = 0;
  bool reliable = true;
};

// Eigenvalues below E for the ring: the corner couplings are the rank-2
// update U S U^T with U = [e_1, e_n] and S = [[0,c],[c,0]], so by the
// Haynsworth inertia identity the ring count is the open-chain Sturm count
// plus the negative inertia of the 2x2 capacitance -S^-1 - U^T (T-E)^{-1} U,
// minus one (the negative eigenvalue of -S^-1).  Near an eigenvalue of the
// cut-open chain the resolvent entries blow up and the capacitance
// determinant cancels catastrophically, and on an exact interior-section
// eigenvalue the guarded solve is meaningless; such counts are flagged
// unreliable so callers can step aside before trusting them.
inline RingCount ring_count(const PeriodicOperator& op, double energy) {
  std::size_t n = op.diagonal.size();
  if (n < 3) throw Error("ring needs >= 3 sites");
  std::vector<double> d, x(n, 0.0), y(n, 0.0);
  x[0] = 1.0;
  bool clamped = tridiag_solve(op.diagonal, energy, d, x);
  y[n - 1] = 1.0;
  clamped = tridiag_solve(op.diagonal, energy, d, y) || clamped;
  long long open_count = 0;
  for (double p : d)
    if (p < 0.0) ++open_count;

  double m11 = -x[0];
  double m12 = -op.corner - y[0];
  double m22 = -y[n - 1];
  double det = m11 * m22 - m12 * m12;
  double scale = m11 * m11 + m22 * m22 + 2.0 * m12 * m12;
  long long cap_count;
  if (det > 0.0)
    cap_count = (m11 + m22 < 0.0) ? 2 : 0;
  else
    cap_count = 1;
  RingCount out;
  out.count = open_count + cap_count - 1;
  out.reliable = !clamped && std::isfinite(scale) &&
                 (scale <= 1e6 || std::fabs(det) > 1e-8 * scale);
  return out;
}

}  // namespace detail

inline long long count_below(const PeriodicOperator& op, double energy) {
  return detail::ring_count(op, energy).count;
}

struct IDSTable {
  std::vector<double> energies;  // sorted grid
  std::vector<double> values;    // N(E) in [0,1], non-decreasing
  long long L = 0;

  // Piecewise-linear evaluation; clamps outside the grid.
  double value_at(double energy) const {
    if (energies.empty()) throw Error("empty IDS table");
    if (energy <= energies.front()) return values.front();
    if (energy >= energies.back()) return values.back();
    auto it = std::upper_bound(energies.begin(), energies.end(), energy);
    std::size_t j = static_cast<std::size_t>(it - energies.begin());
    double e0 = energies[j - 1], e1 = energies[j];
    double t = (energy - e0) / (e1 - e0);
    return values[j - 1] + t * (values[j] - values[j - 1]);
  }

  double diameter() const {
    if (energies.size() < 2) throw Error("IDS table needs >= 2 grid points");
    return energies.back() - energies.front();
  }

  double grid_spacing() const {
    return diameter() / static_cast<double>(energies.size() - 1);
  }
};

inline IDSTable ids_curve(const ModelParams& params, double omega, long long length,
                          const std::vector<double>& grid, int workers = 1) {
  if (length < 1) throw Error("restriction size must be >= 1");
  if (grid.size() < 2) throw Error("IDS grid needs >= 2 points");
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error("IDS grid must be sorted");
  DirichletOperator op = dirichlet_operator(params, omega, length);
  IDSTable table;
  table.energies = grid;
  table.values.resize(grid.size());
  table.L = length;
  double inv_length = 1.0 / static_cast<double>(length);
  detail::parallel_for(grid.size(), workers, [&](std::size_t i) {
    table.values[i] = static_cast<double>(count_below(op, grid[i])) * inv_length;
  });
  return table;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw Error("grid needs >= 2 points");
  if (!(lo < hi)) throw Error("grid interval must have lo < hi");
  std::vector<double> grid(points);
  double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

inline double free_ids(double energy) {
  if (energy <= -2.0) return 0.0;
  if (energy >= 2.0) return 1.0;
  return std::acos(-energy / 2.0) / std::acos(-1.0);
}

struct GapLabel {
  long long m = 0;
  double value = 0.0;  // fractional part {m*alpha}
};

// Labels for m in [-m_abs_max, m_abs_max].  m = 0 is included with value 0
// but is never matched against a gap.
inline std::vector<GapLabel> gap_labels(const ContinuedFraction& alpha, long long m_abs_max) {
  if (m_abs_max < 0) throw Error("label range must be >= 0");
  QuadraticSurd surd = alpha.surd();
  std::vector<GapLabel> labels;
  labels.reserve(static_cast<std::size_t>(2 * m_abs_max + 1));
  for (long long m = -m_abs_max; m <= m_abs_max; ++m)
    labels.push_back({m, m == 0 ? 0.0 : static_cast<double>(surd.frac_times(m))});
  return labels;
}

struct GapMatch {
  std::size_t gap_index = 0;
  double ids_value = 0.0;
  std::optional<long long> label;  // empty when unmatched or ambiguous
  bool ambiguous = false;
};

struct GapLabelMatching {
  std::vector<GapMatch> matches;          // one entry per input gap
  std::vector<long long> unmatched_labels;  // labels realized by no gap
};

// Assigns to each gap (given by its in-gap IDS value) the unique label with
// |N - {m*alpha}| < tol.  Two labels within tol is reported as ambiguous,
// never resolved by guessing.
inline GapLabelMatching match_gaps_to_labels(const std::vector<double>& gap_ids_values,
                                             const std::vector<GapLabel>& labels,
                                             double tol) {
  if (!(tol >= 0.0)) throw Error("label tolerance must be >= 0");
  GapLabelMatching out;
  out.matches.reserve(gap_ids_values.size());
  std::vector<char> label_used(labels.size(), 0);
  for (std::size_t g = 0; g < gap_ids_values.size(); ++g) {
    GapMatch match;
    match.gap_index = g;
    match.ids_value = gap_ids_values[g];
    std::size_t hits = 0;
    std::size_t hit_index = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j].m == 0) continue;
      if (std::fabs(gap_ids_values[g] - labels[j].value) < tol) {
        ++hits;
        hit_index = j;
      }
    }
    if (hits == 1) {
      match.label = labels[hit_index].m;
      label_used[hit_index] = 1;
    } else if (hits > 1) {
      match.ambiguous = true;
    }
    out.matches.push_back(match);
  }
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (labels[j].m != 0 && !label_used[j]) out.unmatched_labels.push_back(labels[j].m);
  return out;
}

struct LocalDimensionSample {
  double energy = 0.0;
  double slope = 0.0;
  double residual = 0.0;  // rms residual of the log-log fit
};

struct LocalDimensionEstimate {
  double d_estimate = 0.0;
  std::vector<LocalDimensionSample> samples;
  double epsilon_min = 0.0;
  double epsilon_max = 0.0;
  long long discarded = 0;  // draws rejected for landing in a gap interior
};

// Geometric epsilon ladder tied to the table resolution: from 10 grid
// spacings up to a tenth of the spectrum diameter.
inline std::vector<double> default_epsilons(const IDSTable& table, std::size_t count = 9) {
  if (count < 4) throw Error("need >= 4 epsilon values");
  double lo = 10.0 * table.grid_spacing();
  double hi = 0.1 * table.diameter();
  if (!(lo < hi)) throw Error("grid too coarse for a usable epsilon range");
  std::vector<double> eps(count);
  double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(count - 1));
  for (std::size_t i = 0; i < count; ++i)
    eps[i] = lo * std::pow(ratio, static_cast<double>(i));
  eps.back() = hi;
  return eps;
}

namespace detail {

// Inverse of the table's piecewise-linear N at height u in [0,1].
inline double inverse_ids(const IDSTable& table, double u) {
  const auto& vals = table.values;
  if (u <= vals.front()) return table.energies.front();
  if (u >= vals.back()) return table.energies.back();
  auto it = std::upper_bound(vals.begin(), vals.end(), u);
  std::size_t j = static_cast<std::size_t>(it - vals.begin());
  double v0 = vals[j - 1], v1 = vals[j];
  double e0 = table.energies[j - 1], e1 = table.energies[j];
  if (v1 <= v0) return 0.5 * (e0 + e1);
  double t = (u - v0) / (v1 - v0);
  return e0 + t * (e1 - e0);
}

struct LogFit {
  double slope = 0.0;
  double residual = 0.0;
};

inline LogFit least_squares_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = static_cast<double>(n) * sxx - sx * sx;
  LogFit fit;
  fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  double intercept = (sy - fit.slope * sx) / static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ys[i] - (fit.slope * xs[i] + intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

}  // namespace detail

// Samples energies dN-distributed (inverse-CDF draws on the table), then fits
// the slope of log(N(E+eps) - N(E-eps)) against log(eps) per sample.  The
// estimate is the median slope.  Draws whose increment vanishes at some eps
// (gap interiors) are discarded and redrawn, up to a fixed budget.
inline LocalDimensionEstimate dos_local_dimension(const IDSTable& table,
                                                  const std::vector<double>& epsilons,
                                                  int sample_count, unsigned seed) {
  if (sample_count < 1) throw Error("sample count must be >= 1");
  if (epsilons.size() < 4) throw Error("need >= 4 epsilon values");
  std::vector<double> eps = epsilons;
  std::sort(eps.begin(), eps.end());
  if (!(eps.front() > 0.0)) throw Error("epsilon values must be positive");
  if (eps.back() < 100.0 * eps.front())
    throw Error("epsilon values must span >= 2 decades");
  double spacing = table.grid_spacing();
  if (eps.front() < 2.0 * spacing)
    throw Error("smallest epsilon is below twice the grid spacing");

  std::vector<double> log_eps(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) log_eps[i] = std::log(eps[i]);

  LocalDimensionEstimate out;
  out.epsilon_min = eps.front();
  out.epsilon_max = eps.back();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long long budget = 10LL * sample_count;
  std::vector<double> log_inc(eps.size());
  while (static_cast<int>(out.samples.size()) < sample_count && budget > 0) {
    --budget;
    double energy = detail::inverse_ids(table, unif(rng));
    bool degenerate = false;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      double inc = table.value_at(energy + eps[i]) - table.value_at(energy - eps[i]);
      if (!(inc > 0.0)) {
        degenerate = true;
        break;
      }
      log_inc[i] = std::log(inc);
    }
    if (degenerate) {
      ++out.discarded;
      continue;
    }
    detail::LogFit fit = detail::least_squares_loglog(log_eps, log_inc);
    out.samples.push_back({energy, fit.slope, fit.residual});
  }
  if (out.samples.empty()) throw Error("all dimension samples landed in gaps");

  std::vector<double> slopes;
  slopes.reserve(out.samples.size());
  for (const auto& s : out.samples) slopes.push_back(s.slope);
  std::sort(slopes.begin(), slopes.end());
  std::size_t n = slopes.size();
  out.d_estimate = n % 2 ? slopes[n / 2] : 0.5 * (slopes[n / 2 - 1] + slopes[n / 2]);
  return out;
}

}  // namespace sturmspec
