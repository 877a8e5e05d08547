#pragma once

// Words over {0,1}, substitutions, and Sturmian combinatorics.
//
// A substitution s is determined by the images of the two letters and extends
// to an endomorphism of the free monoid.  Its abelianization is the 2x2
// nonnegative integer matrix whose columns are the letter counts of the
// images.  The invertible substitutions correspond (up to inner automorphism)
// to the monoid generated by
//   h1 = [[0,1],[1,0]]   (matrix of pi:    0 -> 1,  1 -> 0)
//   h2 = [[1,1],[1,0]]   (matrix of sigma: 0 -> 01, 1 -> 0, and of rho)
//
// Rotation sequences R_{alpha,omega}(n) = 1 iff {n alpha + omega} lies in
// [1-alpha, 1); with omega = 0 this equals floor((n+1)alpha) - floor(n alpha),
// which gives an exact integer oracle through the quadratic surd of alpha.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sturmspec/contfrac.hpp"

namespace sturmspec {

using Word = std::string; // letters '0' and '1'

inline void validate_word(const Word& w) {
  for (char c : w)
    if (c != '0' && c != '1') throw Error("word letters must be 0 or 1");
}

struct Substitution {
  Word image0;
  Word image1;

  void validate() const {
    if (image0.empty() || image1.empty()) throw Error("substitution images must be nonempty");
    validate_word(image0);
    validate_word(image1);
  }
};

inline const Substitution& subs_pi() {
  static const Substitution s{"1", "0"};
  return s;
}
inline const Substitution& subs_sigma() {
  static const Substitution s{"01", "0"};
  return s;
}
inline const Substitution& subs_rho() {
  static const Substitution s{"10", "0"};
  return s;
}

inline Word apply_substitution(const Substitution& s, const Word& w) {
  size_t ones = static_cast<size_t>(std::count(w.begin(), w.end(), '1'));
  Word out;
  out.reserve((w.size() - ones) * s.image0.size() + ones * s.image1.size());
  for (char c : w) out += (c == '0') ? s.image0 : s.image1;
  return out;
}

// (s . t)(a) = s(t(a))
inline Substitution compose(const Substitution& s, const Substitution& t) {
  return {apply_substitution(s, t.image0), apply_substitution(s, t.image1)};
}

// [[a,b],[c,d]]
struct LetterMatrix {
  long long a = 1, b = 0, c = 0, d = 1;

  friend LetterMatrix operator*(const LetterMatrix& x, const LetterMatrix& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend bool operator==(const LetterMatrix&, const LetterMatrix&) = default;
  long long det() const { return a * d - b * c; }
  bool nonnegative() const { return a >= 0 && b >= 0 && c >= 0 && d >= 0; }
  bool positive() const { return a > 0 && b > 0 && c > 0 && d > 0; }
};

inline const LetterMatrix h1_matrix{0, 1, 1, 0};
inline const LetterMatrix h2_matrix{1, 1, 1, 0};

inline LetterMatrix abelianization(const Substitution& s) {
  s.validate();
  auto zeros = [](const Word& w) { return static_cast<long long>(std::count(w.begin(), w.end(), '0')); };
  long long z0 = zeros(s.image0), z1 = zeros(s.image1);
  return {z0, z1,
          static_cast<long long>(s.image0.size()) - z0,
          static_cast<long long>(s.image1.size()) - z1};
}

// some power M^k, k <= K_max, strictly positive
inline bool is_primitive(const LetterMatrix& m, int k_max = 8) {
  auto sat = [](long long v) { return std::min(v, 1LL << 40); }; // positivity survives clamping
  LetterMatrix p = m;
  for (int k = 1; k <= k_max; ++k) {
    if (p.positive()) return true;
    p = LetterMatrix{sat(p.a * m.a + p.b * m.c), sat(p.a * m.b + p.b * m.d),
                     sat(p.c * m.a + p.d * m.c), sat(p.c * m.b + p.d * m.d)};
  }
  return false;
}

inline bool is_primitive(const Substitution& s, int k_max = 8) {
  return is_primitive(abelianization(s), k_max);
}

enum class MonoidGen { H1, H2 };

// Greedy left-peeling: while the first row dominates the second componentwise
// peel h2 (inverse [[0,1],[1,-1]]), otherwise peel h1 (row swap).  Peeling h2
// strictly decreases the entry sum, and a nonidentity matrix of M with
// incomparable rows is h1 itself, so the loop terminates.
inline std::vector<MonoidGen> decompose_monoid(LetterMatrix m) {
  if (!m.nonnegative()) throw Error("decompose_monoid: matrix has a negative entry");
  long long det = m.det();
  if (det != 1 && det != -1) throw Error("decompose_monoid: determinant must be +-1");
  std::vector<MonoidGen> out;
  const LetterMatrix identity{};
  int guard = 0;
  while (!(m == identity)) {
    if (++guard > 100000) throw Error("decompose_monoid: failed to terminate");
    if (m.a >= m.c && m.b >= m.d) {
      out.push_back(MonoidGen::H2);
      m = LetterMatrix{m.c, m.d, m.a - m.c, m.b - m.d};
    } else {
      out.push_back(MonoidGen::H1);
      m = LetterMatrix{m.c, m.d, m.a, m.b};
    }
  }
  return out;
}

inline LetterMatrix monoid_product(const std::vector<MonoidGen>& gens) {
  LetterMatrix m{};
  for (MonoidGen g : gens) m = m * (g == MonoidGen::H1 ? h1_matrix : h2_matrix);
  return m;
}

inline Word fixed_point(const Substitution& s, size_t n) {
  s.validate();
  char letter;
  if (s.image0.size() >= 2 && s.image0[0] == '0')
    letter = '0';
  else if (s.image1.size() >= 2 && s.image1[0] == '1')
    letter = '1';
  else
    throw Error("substitution is not prolongable on either letter");
  Word w(1, letter);
  int rounds = 0;
  while (w.size() < n) {
    if (++rounds > 200) throw Error("fixed_point: iteration did not expand");
    Word next = apply_substitution(s, w);
    if (next.size() <= w.size()) throw Error("fixed_point: iteration did not expand");
    w = std::move(next);
  }
  w.resize(n);
  return w;
}

// w(n) = 1 iff {n alpha + omega} in [1-alpha, 1), n = 1..N
inline Word rotation_sequence(const ContinuedFraction& alpha, double omega, size_t n_letters) {
  if (omega < 0.0 || omega >= 1.0) throw Error("omega must lie in [0,1)");
  const long double a = alpha.value_ld();
  const long double threshold = 1.0L - a;
  long double r = static_cast<long double>(omega);
  long double comp = 0.0L; // Kahan compensation for the repeated adds
  Word w;
  w.reserve(n_letters);
  for (size_t n = 1; n <= n_letters; ++n) {
    long double y = a - comp;
    long double t = r + y;
    comp = (t - r) - y;
    r = t;
    if (r >= 1.0L) r -= 1.0L;
    w.push_back(r >= threshold ? '1' : '0');
  }
  return w;
}

// exact integer oracle for omega = 0: R_alpha(n) = floor((n+1)a) - floor(na)
inline int rotation_char_exact(const QuadraticSurd& alpha, long long n) {
  return static_cast<int>(alpha.floor_times(n + 1) - alpha.floor_times(n));
}

// w_{k+1} = w_k^{a_{k+1}} w_{k-1}, seeded w_{-1} = "1", w_0 = "0",
// w_1 = 0^{a_1 - 1} 1, which reproduces the rotation word prefix of
// length q_k for every k >= 1
inline Word sturmian_word_by_recursion(const ContinuedFraction& alpha, long long k) {
  alpha.validate();
  if (k < 1) throw Error("recursion level must be >= 1");
  if (denominator_q(alpha, k) > 2000000) throw Error("q_k too large for word construction");
  Word prev = "1"; // w_{-1}
  Word cur = "0";  // w_0
  for (long long j = 1; j <= k; ++j) {
    long long a = alpha.quotient(j);
    long long reps = (j == 1) ? a - 1 : a;
    Word next;
    next.reserve(static_cast<size_t>(reps) * cur.size() + prev.size());
    for (long long r = 0; r < reps; ++r) next += cur;
    next += prev;
    if (j == 1) {
      // w_1 = w_0^{a_1 - 1} w_{-1}; from here the plain recursion applies
      prev = cur;
      cur = next;
    } else {
      prev = std::exchange(cur, next);
    }
  }
  return cur;
}

// number of distinct length-n factors
inline long long complexity(const Word& w, long long n) {
  validate_word(w);
  if (n < 0) throw Error("factor length must be >= 0");
  if (n == 0) return 1;
  if (static_cast<long long>(w.size()) < 11 * n)
    throw Error("word too short: complexity(n) needs length >= 11n");
  std::set<std::string_view> factors;
  std::string_view sv(w);
  for (size_t i = 0; i + static_cast<size_t>(n) <= sv.size(); ++i)
    factors.insert(sv.substr(i, static_cast<size_t>(n)));
  return static_cast<long long>(factors.size());
}

inline double letter_frequency(const Word& w) {
  if (w.empty()) throw Error("letter_frequency of empty word");
  validate_word(w);
  return static_cast<double>(std::count(w.begin(), w.end(), '1')) / static_cast<double>(w.size());
}

// Expansion of a cutting slope beta.  For beta > 1 the form is
// [b0; (b1..bn)] with integer part b0 >= 1 and a purely periodic tail;
// for 0 < beta < 1 it is [0; b0, (b1..bn)].  A preperiod is accepted and
// canonicalized away when possible.
struct SlopeExpansion {
  long long integer_part = 0;
  std::vector<long long> preperiod;
  std::vector<long long> period;

  void validate() const {
    if (integer_part < 0) throw Error("slope expansion: negative integer part");
    if (period.empty()) throw Error("slope expansion: empty period");
    for (long long b : preperiod)
      if (b < 1) throw Error("slope expansion: quotients must be >= 1");
    for (long long b : period)
      if (b < 1) throw Error("slope expansion: quotients must be >= 1");
  }
};

namespace detail {

// shortest cycle generating the given period
inline std::vector<long long> minimize_period(std::vector<long long> period) {
  size_t n = period.size();
  for (size_t len = 1; len < n; ++len) {
    if (n % len) continue;
    bool ok = true;
    for (size_t i = len; i < n && ok; ++i) ok = period[i] == period[i % len];
    if (ok) {
      period.resize(len);
      return period;
    }
  }
  return period;
}

// absorb matching tail of the preperiod into the cycle
inline void minimize_preperiod(std::vector<long long>& pre, std::vector<long long>& cyc) {
  while (!pre.empty() && pre.back() == cyc.back()) {
    cyc.insert(cyc.begin(), cyc.back());
    cyc.pop_back();
    pre.pop_back();
  }
}

inline Substitution sigma_pi_power(long long b) {
  Substitution sp = compose(subs_sigma(), subs_pi()); // 0 -> 0, 1 -> 01
  Substitution acc{"0", "1"};
  for (long long i = 0; i < b; ++i) acc = compose(acc, sp);
  return acc;
}

} // namespace detail

// Composed substitution of the CMPS form when the slope admits one:
//   beta > 1:   pi (sigma pi)^{b0} pi (sigma pi)^{b1} pi ... pi (sigma pi)^{bn-b0} pi
//   beta < 1:        (sigma pi)^{b0} pi (sigma pi)^{b1} pi ... pi (sigma pi)^{bn-b0}
// requiring b_n >= b_0 (>= 1).  Returns nothing when no representation of
// the required shape exists.
inline std::optional<Substitution> cmps_substitution(const SlopeExpansion& beta) {
  beta.validate();
  std::vector<long long> cyc = detail::minimize_period(beta.period);
  std::vector<long long> pre = beta.preperiod;
  detail::minimize_preperiod(pre, cyc);
  cyc = detail::minimize_period(cyc);

  long long b0;
  std::vector<long long> rest; // b1 .. bn, with bn the one compared to b0
  bool beta_above_one = beta.integer_part >= 1;
  if (beta_above_one) {
    if (!pre.empty()) return std::nullopt; // tail not purely periodic
    b0 = beta.integer_part;
    rest = cyc;
  } else {
    if (pre.size() > 1) return std::nullopt;
    if (pre.size() == 1) {
      b0 = pre[0];
      rest = cyc;
    } else {
      // purely periodic fractional part: [0;(c1..cn)] = [0; c1, (c2..cn c1)]
      b0 = cyc[0];
      rest.assign(cyc.begin() + 1, cyc.end());
      rest.push_back(cyc[0]);
    }
  }
  if (rest.back() < b0) return std::nullopt;

  std::vector<Substitution> blocks;
  blocks.push_back(detail::sigma_pi_power(b0));
  for (size_t i = 0; i + 1 < rest.size(); ++i) {
    blocks.push_back(subs_pi());
    blocks.push_back(detail::sigma_pi_power(rest[i]));
  }
  blocks.push_back(subs_pi());
  blocks.push_back(detail::sigma_pi_power(rest.back() - b0));
  Substitution s{"0", "1"};
  if (beta_above_one) s = subs_pi();
  for (const Substitution& b : blocks) s = compose(s, b);
  if (beta_above_one) s = compose(s, subs_pi());
  return s;
}

// beta = alpha/(1-alpha): rotation angle alpha and cutting slope beta generate
// the same word, and the expansion of beta is the expansion of alpha with the
// leading quotient peeled off
inline SlopeExpansion slope_from_rotation(const ContinuedFraction& alpha) {
  alpha.validate();
  std::vector<long long> pre = alpha.preperiod;
  std::vector<long long> cyc = alpha.period;
  auto front = [&]() { return pre.empty() ? cyc[0] : pre[0]; };
  auto drop_front = [&]() {
    if (!pre.empty()) {
      pre.erase(pre.begin());
    } else {
      cyc.push_back(cyc.front());
      cyc.erase(cyc.begin());
    }
  };
  SlopeExpansion beta;
  long long a1 = front();
  drop_front();
  if (a1 == 1) {
    // alpha = [0;1,a2,a3,...]  ->  beta = [a2; a3, a4, ...]
    beta.integer_part = front();
    drop_front();
    beta.preperiod = pre;
    beta.period = cyc;
  } else {
    // alpha = [0;a1,a2,...]  ->  beta = [0; a1 - 1, a2, ...]
    beta.integer_part = 0;
    beta.preperiod = pre;
    beta.preperiod.insert(beta.preperiod.begin(), a1 - 1);
    beta.period = cyc;
  }
  return beta;
}

// rotation angle with the same word: alpha = beta/(1+beta)
inline ContinuedFraction rotation_from_slope(const SlopeExpansion& beta) {
  beta.validate();
  ContinuedFraction alpha;
  if (beta.integer_part >= 1) {
    // beta = [b0; b1, ...]  ->  alpha = [0; 1, b0, b1, ...]
    alpha.preperiod.push_back(1);
    alpha.preperiod.push_back(beta.integer_part);
    alpha.preperiod.insert(alpha.preperiod.end(), beta.preperiod.begin(), beta.preperiod.end());
  } else {
    // beta = [0; b0, b1, ...]  ->  alpha = [0; b0 + 1, b1, ...]
    if (beta.preperiod.empty()) {
      std::vector<long long> cyc = beta.period;
      alpha.preperiod.push_back(cyc[0] + 1);
      cyc.push_back(cyc.front());
      cyc.erase(cyc.begin());
      alpha.period = cyc;
      alpha.validate();
      return alpha;
    }
    alpha.preperiod = beta.preperiod;
    alpha.preperiod[0] += 1;
  }
  alpha.period = beta.period;
  alpha.validate();
  return alpha;
}

} // namespace sturmspec
