#pragma once

// Eventually periodic continued fractions [0; a_1, a_2, ...] with value in (0,1).
//
// An expansion is stored as a finite preperiod followed by a nonempty period
// that repeats forever.  The value is a quadratic irrational; we carry the
// exact surd (p + t*sqrt(d))/q alongside so that floor(n*alpha) can be taken
// in integer arithmetic when needed (rotation-sequence cross checks, labels).
//
// Convergents p_k/q_k follow the usual recursion
//   p_{k+1} = a_{k+1} p_k + p_{k-1},   q_{k+1} = a_{k+1} q_k + q_{k-1}
// seeded with p_0 = 0, p_1 = 1 and q_0 = 1, q_1 = a_1, so p_1/q_1 = 1/a_1.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sturmspec {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using int128 = __int128;

inline std::string int128_to_string(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return std::string(s.rbegin(), s.rend());
}

namespace detail {

inline int128 checked_mul(int128 a, int128 b, const char* what) {
  int128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(std::string(what) + ": exceeds 128-bit integer range");
  return r;
}

inline int128 checked_add(int128 a, int128 b, const char* what) {
  int128 r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(std::string(what) + ": exceeds 128-bit integer range");
  return r;
}

inline int128 gcd128(int128 a, int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// floor square root of a nonnegative 128-bit integer
inline int128 isqrt128(int128 n) {
  if (n < 0) throw Error("isqrt of negative value");
  if (n == 0) return 0;
  int128 x = static_cast<int128>(std::sqrt(static_cast<double>(n)));
  // settle around the float guess
  while (x > 0 && x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

// floor(a / b) for b > 0
inline int128 floordiv(int128 a, int128 b) {
  int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

} // namespace detail

// value = (p + t*sqrt(d)) / q with integer p, t, q and d > 0 a nonsquare
struct QuadraticSurd {
  int128 p = 0;
  int128 t = 0;
  int128 d = 0;
  int128 q = 1;

  void normalize() {
    if (q == 0) throw Error("quadratic surd with zero denominator");
    if (q < 0) {
      p = -p;
      t = -t;
      q = -q;
    }
    int128 g = detail::gcd128(detail::gcd128(p, t), q);
    if (g > 1) {
      p /= g;
      t /= g;
      q /= g;
    }
  }

  long double value() const {
    long double root = sqrtl(static_cast<long double>(d));
    return (static_cast<long double>(p) + static_cast<long double>(t) * root) / static_cast<long double>(q);
  }

  // floor(n * value) in exact integer arithmetic; valid because sqrt(T^2 d)
  // is irrational whenever T != 0 and d is not a perfect square
  int128 floor_times(int128 n) const {
    int128 np = detail::checked_mul(n, p, "floor_times");
    int128 T = detail::checked_mul(n, t, "floor_times");
    int128 floor_root;
    if (T == 0) {
      floor_root = 0;
    } else {
      int128 T2d = detail::checked_mul(detail::checked_mul(T, T, "floor_times"), d, "floor_times");
      int128 r = detail::isqrt128(T2d);
      floor_root = (T > 0) ? r : -(r + 1);
    }
    return detail::floordiv(detail::checked_add(np, floor_root, "floor_times"), q);
  }

  // fractional part of n * value
  long double frac_times(int128 n) const {
    long double v = static_cast<long double>(n) * value();
    return v - static_cast<long double>(floor_times(n));
  }
};

struct ContinuedFraction {
  std::vector<long long> preperiod;
  std::vector<long long> period; // never empty

  void validate() const {
    if (period.empty()) throw Error("continued fraction needs a nonempty period");
    for (long long a : preperiod)
      if (a < 1) throw Error("partial quotients must be >= 1");
    for (long long a : period)
      if (a < 1) throw Error("partial quotients must be >= 1");
  }

  // partial quotient a_k, 1-based
  long long quotient(long long k) const {
    if (k < 1) throw Error("partial quotient index must be >= 1");
    long long m = static_cast<long long>(preperiod.size());
    if (k <= m) return preperiod[static_cast<size_t>(k - 1)];
    return period[static_cast<size_t>((k - m - 1) % static_cast<long long>(period.size()))];
  }

  QuadraticSurd surd() const;

  long double value_ld() const { return surd().value(); }
  double value() const { return static_cast<double>(value_ld()); }
};

inline QuadraticSurd ContinuedFraction::surd() const {
  validate();
  // tail theta = [0; period repeated]: theta = (A theta + B) / (C theta + D)
  // with [[A,B],[C,D]] the product of [[0,1],[1,b]] over the period, hence
  // C theta^2 + (D - A) theta - B = 0 and theta is the root in (0,1).
  int128 A = 1, B = 0, C = 0, D = 1;
  for (long long b : period) {
    // [[A,B],[C,D]] * [[0,1],[1,b]]
    int128 nA = B;
    int128 nB = detail::checked_add(A, detail::checked_mul(B, b, "cf tail"), "cf tail");
    int128 nC = D;
    int128 nD = detail::checked_add(C, detail::checked_mul(D, b, "cf tail"), "cf tail");
    A = nA;
    B = nB;
    C = nC;
    D = nD;
  }
  QuadraticSurd s;
  s.p = A - D;
  s.t = 1;
  s.d = detail::checked_add(detail::checked_mul(A - D, A - D, "cf tail"),
                            4 * detail::checked_mul(B, C, "cf tail"), "cf tail");
  s.q = 2 * C;
  s.normalize();
  // fold preperiod from the inside out: x -> 1/(a + x)
  for (auto it = preperiod.rbegin(); it != preperiod.rend(); ++it) {
    int128 a = *it;
    int128 u = detail::checked_add(detail::checked_mul(a, s.q, "cf fold"), s.p, "cf fold"); // a q + p
    QuadraticSurd n;
    n.d = s.d;
    n.p = detail::checked_mul(s.q, u, "cf fold");
    n.t = -detail::checked_mul(s.q, s.t, "cf fold");
    n.q = detail::checked_add(detail::checked_mul(u, u, "cf fold"),
                              -detail::checked_mul(detail::checked_mul(s.t, s.t, "cf fold"), s.d, "cf fold"),
                              "cf fold");
    n.normalize();
    s = n;
  }
  return s;
}

// grammar: "[0;" items "]" where items are comma separated positive integers
// and the final item may be a parenthesized comma separated period
inline ContinuedFraction parse_cf(std::string_view text) {
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (i >= text.size() || text[i] != c)
      throw Error("malformed continued fraction '" + std::string(text) + "': expected '" + c + "'");
    ++i;
  };
  auto parse_int = [&]() -> long long {
    skip_ws();
    size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) throw Error("malformed continued fraction '" + std::string(text) + "': expected digits");
    if (i - start > 18) throw Error("partial quotient too large in '" + std::string(text) + "'");
    long long v = 0;
    for (size_t j = start; j < i; ++j) v = v * 10 + (text[j] - '0');
    if (v < 1) throw Error("partial quotients must be >= 1");
    return v;
  };

  ContinuedFraction cf;
  expect('[');
  expect('0');
  expect(';');
  bool saw_period = false;
  skip_ws();
  if (i < text.size() && text[i] == ']')
    throw Error("malformed continued fraction '" + std::string(text) + "': missing period");
  while (true) {
    skip_ws();
    if (i < text.size() && text[i] == '(') {
      ++i;
      cf.period.push_back(parse_int());
      skip_ws();
      while (i < text.size() && text[i] == ',') {
        ++i;
        cf.period.push_back(parse_int());
        skip_ws();
      }
      expect(')');
      saw_period = true;
      break;
    }
    cf.preperiod.push_back(parse_int());
    skip_ws();
    if (i < text.size() && text[i] == ',') {
      ++i;
      continue;
    }
    break;
  }
  expect(']');
  skip_ws();
  if (i != text.size())
    throw Error("malformed continued fraction '" + std::string(text) + "': trailing input");
  if (!saw_period) throw Error("malformed continued fraction '" + std::string(text) + "': missing period");
  cf.validate();
  return cf;
}

inline std::string format_cf(const ContinuedFraction& cf) {
  cf.validate();
  std::string out = "[0;";
  for (size_t j = 0; j < cf.preperiod.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(cf.preperiod[j]);
  }
  if (!cf.preperiod.empty()) out += ',';
  out += '(';
  for (size_t j = 0; j < cf.period.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(cf.period[j]);
  }
  out += ")]";
  return out;
}

struct Approximant {
  long long k = 0;
  int128 p = 0;
  int128 q = 1;
};

// convergents p_k/q_k for k = 1..kmax
inline std::vector<Approximant> approximants(const ContinuedFraction& cf, long long kmax) {
  cf.validate();
  if (kmax < 1) throw Error("kmax must be >= 1");
  std::vector<Approximant> out;
  out.reserve(static_cast<size_t>(kmax));
  int128 pk_minus = 0, qk_minus = 1; // p_0, q_0
  int128 pk = 1, qk = cf.quotient(1); // p_1, q_1
  out.push_back({1, pk, qk});
  for (long long k = 2; k <= kmax; ++k) {
    int128 a = cf.quotient(k);
    int128 pn = detail::checked_add(detail::checked_mul(a, pk, "approximants"), pk_minus, "approximants");
    int128 qn = detail::checked_add(detail::checked_mul(a, qk, "approximants"), qk_minus, "approximants");
    pk_minus = pk;
    qk_minus = qk;
    pk = pn;
    qk = qn;
    out.push_back({k, pk, qk});
  }
  return out;
}

// q_k alone, for band levels
inline long long denominator_q(const ContinuedFraction& cf, long long k) {
  if (k == 0) return 1;
  auto apx = approximants(cf, k);
  int128 q = apx.back().q;
  if (q > static_cast<int128>(INT64_MAX)) throw Error("q_k exceeds 64-bit range");
  return static_cast<long long>(q);
}

} // namespace sturmspec
