#pragma once

// Band approximation of the spectrum at level k: the set {E : |y_k(E)| <= 1}
// where y_k is the half trace of the transfer matrix over the level-k word.
// Band edges solve y_k = +-1, so they are exactly the eigenvalues of the
// periodic and antiperiodic closures of the q_k-site restriction; Sturm
// bisection on those rings finds every edge with a certified count, immune
// to the band clustering near spectral edges that defeats uniform grids at
// high levels.  The trace recursion polishes the edges and verifies band
// interiors.  On top of the bands: gaps, box-counting dimension, thickness
// and denseness with the resulting dimension bounds, and the gap-opening
// study driven by IDS labels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sturmspec/ids.hpp"

namespace sturmspec {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  long long level = 0;

  double length() const { return hi - lo; }
};

struct BandSet {
  std::vector<Band> bands;  // sorted, pairwise disjoint
  long long level = 0;

  double total_measure() const {
    double sum = 0.0;
    for (const auto& b : bands) sum += b.length();
    return sum;
  }

  double hull_lo() const {
    if (bands.empty()) throw Error("empty band set");
    return bands.front().lo;
  }

  double hull_hi() const {
    if (bands.empty()) throw Error("empty band set");
    return bands.back().hi;
  }
};

struct Gap {
  double lo = 0.0;
  double hi = 0.0;
  std::optional<long long> label;
  std::optional<double> ids_value;

  double length() const { return hi - lo; }
};

namespace detail {

// The band indicator g = |y_k| - 1.  Deep inside gaps y_k overflows double
// range at high levels; a non-finite value still means "far outside".
inline double band_indicator(const ModelParams& params, long long k, double energy) {
  double y = level_half_trace(params, k, energy).p.y;
  return std::isfinite(y) ? std::fabs(y) - 1.0 : 1e30;
}

// Bisects f on [lo, hi] assuming a sign change; returns the midpoint of the
// final bracket of width <= tol.
template <typename Fn>
double bisect_root(Fn&& f, double lo, double hi, double flo, double tol) {
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// j-th smallest eigenvalue (0-based) of a ring operator by bisection on the
// Sturm count.  The count is exact wherever it is reliable, so no eigenvalue
// can be skipped no matter how tightly they cluster; queries landing on an
// ill-conditioned spot are nudged aside before being trusted.
inline double ring_eigenvalue(const PeriodicOperator& op, long long j, double lo, double hi) {
  while (hi - lo > 4e-13) {
    double mid = 0.5 * (lo + hi);
    RingCount rc = ring_count(op, mid);
    if (!rc.reliable) {
      for (double step = 1e-9; !rc.reliable && step < 1e-6; step *= 8.0) {
        for (double side : {1.0, -1.0}) {
          double probe = mid + side * step;
          if (probe <= lo || probe >= hi) continue;
          RingCount r2 = ring_count(op, probe);
          if (r2.reliable) {
            rc = r2;
            mid = probe;
            break;
          }
        }
      }
    }
    if (rc.count >= j + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Moves a band edge onto the nearby sign change of g = |y_k| - 1 when a clean
// bracket confirms one, tying eigenvalue-derived edges to the trace recursion.
template <typename Fn>
double polish_edge(Fn&& g_of, double edge, bool band_on_right, double delta) {
  double outside = band_on_right ? edge - delta : edge + delta;
  double inside = band_on_right ? edge + delta : edge - delta;
  double g_out = g_of(outside);
  double g_in = g_of(inside);
  if (!(g_out > 0.0 && g_in < 0.0)) return edge;
  double lo = std::min(outside, inside);
  double hi = std::max(outside, inside);
  double flo = band_on_right ? g_out : g_in;
  return bisect_root(g_of, lo, hi, flo, 1e-13);
}

}  // namespace detail

// All maximal intervals of {|y_k| <= 1}.  The 2 q_k edges are computed as the
// eigenvalues of the periodic (y_k = +1) and antiperiodic (y_k = -1) rings
// over the level-k word; sorted, consecutive pairs bound the q_k bands.  For
// lambda > 0 all gaps are open, so any non-positive band or gap width, or a
// band midpoint with |y_k| > 1, is an error rather than something to paper
// over.  For lambda = 0 the bands touch and are coalesced.
inline BandSet bands(const ModelParams& params, long long k, int workers = 1) {
  params.validate();
  if (k < 1) throw Error("band level must be >= 1");
  long long qk = denominator_q(params.alpha, k);
  if (qk > 50000) throw Error("q_k too large for band search");
  std::size_t q = static_cast<std::size_t>(qk);

  std::vector<double> edges;
  if (qk <= 2) {
    // y_k is linear or quadratic in E; edges in closed form
    std::vector<double> v = potential(params, 0.0, qk);
    if (qk == 1) {
      double c = params.lambda * v[0];
      edges = {c - 2.0, c + 2.0};
    } else {
      double a = params.lambda * v[0];
      double b = params.lambda * v[1];
      if (a > b) std::swap(a, b);
      double mid = 0.5 * (a + b);
      double r = std::sqrt(0.25 * (b - a) * (b - a) + 4.0);
      edges = {mid - r, a, b, mid + r};
    }
  } else {
    PeriodicOperator ring = periodic_operator(params, 0.0, qk, 1.0);
    PeriodicOperator anti = periodic_operator(params, 0.0, qk, -1.0);
    // asymmetric bracket keeps bisection midpoints off special energies
    // like E = 0, where counts are at their most delicate
    double blo = -2.5 - params.lambda;
    double bhi = 2.5 + params.lambda + 0.0009765625;
    edges.resize(2 * q);
    detail::parallel_for(2 * q, workers, [&](std::size_t i) {
      const PeriodicOperator& op = i < q ? ring : anti;
      edges[i] = detail::ring_eigenvalue(op, static_cast<long long>(i % q), blo, bhi);
    });
    std::sort(edges.begin(), edges.end());
  }

  auto g_of = [&](double E) { return detail::band_indicator(params, k, E); };
  BandSet out;
  out.level = k;
  for (std::size_t i = 0; i < q; ++i) {
    double lo = edges[2 * i];
    double hi = edges[2 * i + 1];
    double delta = std::min(1e-9, 0.25 * (hi - lo));
    if (delta > 0.0) {
      lo = detail::polish_edge(g_of, lo, true, delta);
      hi = detail::polish_edge(g_of, hi, false, delta);
    }
    if (params.lambda > 0.0) {
      if (!(hi > lo) || g_of(0.5 * (lo + hi)) > 0.0 ||
          (!out.bands.empty() && !(lo > out.bands.back().hi)))
        throw Error("band verification failed at level " + std::to_string(k));
      out.bands.push_back({lo, hi, k});
    } else {
      // at lambda = 0 bands touch; the degenerate double edges carry ~sqrt(eps)
      // of fuzz from the capacitance determinant, absorbed when coalescing
      if (!out.bands.empty() && lo - out.bands.back().hi <= 1e-6)
        out.bands.back().hi = std::max(out.bands.back().hi, hi);
      else
        out.bands.push_back({lo, hi, k});
    }
  }
  return out;
}

// Union of the level-k and level-(k+1) band sets, coalesced.
inline BandSet spectrum_cover(const ModelParams& params, long long k, int workers = 1) {
  BandSet a = bands(params, k, workers);
  BandSet b = bands(params, k + 1, workers);
  std::vector<Band> all;
  all.reserve(a.bands.size() + b.bands.size());
  all.insert(all.end(), a.bands.begin(), a.bands.end());
  all.insert(all.end(), b.bands.begin(), b.bands.end());
  std::sort(all.begin(), all.end(), [](const Band& x, const Band& y) { return x.lo < y.lo; });
  BandSet out;
  out.level = k;
  const double touch = 1e-10;
  for (const Band& band : all) {
    if (!out.bands.empty() && band.lo <= out.bands.back().hi + touch) {
      out.bands.back().hi = std::max(out.bands.back().hi, band.hi);
    } else {
      out.bands.push_back({band.lo, band.hi, k});
    }
  }
  return out;
}

inline std::vector<Gap> gaps_from_bands(const BandSet& bs) {
  if (bs.bands.empty()) throw Error("empty band set");
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i + 1 < bs.bands.size(); ++i) {
    double lo = bs.bands[i].hi, hi = bs.bands[i + 1].lo;
    if (hi > lo) gaps.push_back({lo, hi, std::nullopt, std::nullopt});
  }
  return gaps;
}

inline std::vector<double> default_scales(const BandSet& bs, int octaves = 8) {
  double diameter = bs.hull_hi() - bs.hull_lo();
  if (!(diameter > 0.0)) throw Error("degenerate band set");
  std::vector<double> scales(static_cast<std::size_t>(octaves));
  for (int j = 0; j < octaves; ++j)
    scales[static_cast<std::size_t>(j)] = diameter / 4.0 / std::pow(2.0, j);
  return scales;
}

// Least-squares slope of log(box count) against log(1/scale), with half-open
// boxes [hull_lo + j*s, hull_lo + (j+1)*s).
inline double box_dimension(const BandSet& bs, const std::vector<double>& scales) {
  if (bs.bands.empty()) throw Error("empty band set");
  if (scales.size() < 4) throw Error("need >= 4 scales");
  double smin = *std::min_element(scales.begin(), scales.end());
  double smax = *std::max_element(scales.begin(), scales.end());
  if (!(smin > 0.0) || smax < 100.0 * smin) throw Error("scales must span >= 2 decades");

  double anchor = bs.hull_lo();
  std::vector<double> log_inv_scale, log_count;
  for (double s : scales) {
    long long count = 0;
    long long last = -1;
    for (const Band& band : bs.bands) {
      long long j0 = static_cast<long long>(std::floor((band.lo - anchor) / s));
      long long j1 = static_cast<long long>(std::floor((band.hi - anchor) / s));
      j0 = std::max(j0, last + 1);
      if (j1 >= j0) {
        count += j1 - j0 + 1;
        last = j1;
      }
    }
    log_inv_scale.push_back(std::log(1.0 / s));
    log_count.push_back(std::log(static_cast<double>(count)));
  }
  return detail::least_squares_loglog(log_inv_scale, log_count).slope;
}

struct ThicknessReport {
  double tau = 0.0;
  double theta = 0.0;
  double dim_lower = 0.0;
  double dim_upper = 0.0;
};

// Monotone presentation: gaps in decreasing length order, each splitting its
// current bridge.  tau is the worst bridge/gap ratio, theta the best; the
// dimension bounds are log 2 / log(2 + 1/tau) and log 2 / log(2 + 1/theta).
inline ThicknessReport thickness_denseness(const BandSet& bs) {
  if (bs.bands.size() < 2) throw Error("thickness needs >= 2 bands");
  std::vector<Gap> gaps = gaps_from_bands(bs);
  std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    return a.lo < b.lo;
  });

  // pieces of the hull not yet split, keyed by left endpoint
  std::map<double, double> pieces{{bs.hull_lo(), bs.hull_hi()}};
  double tau = std::numeric_limits<double>::infinity();
  double theta = 0.0;
  for (const Gap& gap : gaps) {
    auto it = pieces.upper_bound(gap.lo);
    if (it == pieces.begin()) throw Error("gap outside every piece");
    --it;
    double piece_lo = it->first, piece_hi = it->second;
    if (!(gap.lo >= piece_lo && gap.hi <= piece_hi)) throw Error("gap outside every piece");
    double left = (gap.lo - piece_lo) / gap.length();
    double right = (piece_hi - gap.hi) / gap.length();
    tau = std::min(tau, std::min(left, right));
    theta = std::max(theta, std::max(left, right));
    pieces.erase(it);
    pieces.emplace(piece_lo, gap.lo);
    pieces.emplace(gap.hi, piece_hi);
  }

  ThicknessReport report;
  report.tau = tau;
  report.theta = theta;
  report.dim_lower = std::log(2.0) / std::log(2.0 + 1.0 / tau);
  report.dim_upper = std::log(2.0) / std::log(2.0 + 1.0 / theta);
  return report;
}

struct LabeledGaps {
  std::vector<Gap> gaps;  // ids_value always set; label set where matched
  std::vector<long long> unmatched_labels;
  std::vector<std::size_t> ambiguous_gaps;
  long long L = 0;
};

// Full labeling pipeline: bands -> gaps -> IDS value at each gap midpoint
// (Sturm count on the restriction of size L) -> nearest label {m alpha}.
inline LabeledGaps label_gaps(const ModelParams& params, long long level, long long m_abs_max,
                              long long L, double tol, int workers = 1) {
  BandSet bs = bands(params, level, workers);
  LabeledGaps out;
  out.gaps = gaps_from_bands(bs);
  out.L = L;
  DirichletOperator op = dirichlet_operator(params, 0.0, L);
  std::vector<double> midpoint_ids(out.gaps.size());
  detail::parallel_for(out.gaps.size(), workers, [&](std::size_t i) {
    double mid = 0.5 * (out.gaps[i].lo + out.gaps[i].hi);
    midpoint_ids[i] =
        static_cast<double>(count_below(op, mid)) / static_cast<double>(L);
  });
  GapLabelMatching matching =
      match_gaps_to_labels(midpoint_ids, gap_labels(params.alpha, m_abs_max), tol);
  for (std::size_t i = 0; i < out.gaps.size(); ++i) {
    out.gaps[i].ids_value = midpoint_ids[i];
    if (matching.matches[i].label) out.gaps[i].label = matching.matches[i].label;
    if (matching.matches[i].ambiguous) out.ambiguous_gaps.push_back(i);
  }
  out.unmatched_labels = matching.unmatched_labels;
  return out;
}

struct GapOpeningRow {
  double lambda = 0.0;
  double width = 0.0;
  double ratio = 0.0;        // width / lambda
  std::string error;         // empty on success
};

// Tracks the gap with IDS value {m alpha} across a decreasing lambda ladder.
inline std::vector<GapOpeningRow> gap_opening_study(const ContinuedFraction& alpha, long long m,
                                                    const std::vector<double>& lambdas,
                                                    long long level = 12, long long L = 10000,
                                                    int workers = 1) {
  if (m == 0) throw Error("m = 0 is not a gap label");
  double target = static_cast<double>(alpha.surd().frac_times(m));
  double tol = 3.0 / static_cast<double>(L);
  std::vector<GapOpeningRow> rows;
  for (double lambda : lambdas) {
    GapOpeningRow row;
    row.lambda = lambda;
    if (!(lambda > 0.0)) {
      row.error = "lambda must be > 0";
      rows.push_back(row);
      continue;
    }
    ModelParams params{alpha, lambda};
    try {
      BandSet bs = bands(params, level, workers);
      std::vector<Gap> gaps = gaps_from_bands(bs);
      DirichletOperator op = dirichlet_operator(params, 0.0, L);
      std::size_t hits = 0, hit = 0;
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        double mid = 0.5 * (gaps[i].lo + gaps[i].hi);
        double value = static_cast<double>(count_below(op, mid)) / static_cast<double>(L);
        if (std::fabs(value - target) < tol) {
          ++hits;
          hit = i;
        }
      }
      if (hits == 0) {
        row.error = "gap not resolved at this level";
      } else if (hits > 1) {
        row.error = "label matched more than one gap";
      } else if (gaps[hit].length() <= 1e-10) {
        row.error = "gap width below edge tolerance";
      } else {
        row.width = gaps[hit].length();
        row.ratio = row.width / lambda;
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sturmspec
