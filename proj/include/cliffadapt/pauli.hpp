// Copyright 2026 The cliffadapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cliffadapt/error.hpp"

namespace cliffadapt {

using Complex = std::complex<double>;

/// Largest register any bit-packed structure in this library supports.
inline constexpr std::size_t kMaxQubits = 64;

/// Coefficients below this magnitude are dropped after merging.
inline constexpr double kPruneThreshold = 1e-12;

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char to_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

/// i^k for integer k (any sign).
inline Complex i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

/**
 * An n-qubit Pauli word without scalar, packed as two bit masks.
 *
 * Bit q of (x, z) encodes the letter on qubit q: (0,0) I, (1,0) X, (1,1) Y,
 * (0,1) Z. Y is the Hermitian letter, not the product XZ. Qubit 0 is the least
 * significant bit and is printed leftmost.
 */
class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(std::size_t n) : n_(static_cast<std::uint32_t>(n)) {
    if (n > kMaxQubits) {
      throw ResourceError("PauliString supports at most 64 qubits");
    }
  }

  PauliString(std::size_t n, std::uint64_t x, std::uint64_t z)
      : PauliString(n) {
    const std::uint64_t m = mask();
    if ((x & ~m) != 0 || (z & ~m) != 0) {
      throw DimensionError("Pauli bits set beyond qubit count");
    }
    x_ = x;
    z_ = z;
  }

  /// Parses a letter word such as "XIZY" (case-insensitive).
  static PauliString from_letters(std::string_view letters) {
    PauliString p(letters.size());
    for (std::size_t q = 0; q < letters.size(); ++q) {
      switch (std::toupper(static_cast<unsigned char>(letters[q]))) {
        case 'I': break;
        case 'X': p.set(q, Pauli::X); break;
        case 'Y': p.set(q, Pauli::Y); break;
        case 'Z': p.set(q, Pauli::Z); break;
        default:
          throw ConfigError("invalid Pauli letter '" +
                            std::string(1, letters[q]) + "'");
      }
    }
    return p;
  }

  /// Single-letter word on qubit q of an n-qubit register.
  static PauliString single(std::size_t n, std::size_t q, Pauli p) {
    PauliString s(n);
    s.set(q, p);
    return s;
  }

  std::size_t size() const noexcept { return n_; }
  std::uint64_t x_bits() const noexcept { return x_; }
  std::uint64_t z_bits() const noexcept { return z_; }
  std::uint64_t mask() const noexcept {
    return n_ == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_) - 1);
  }
  /// Qubits carrying a non-identity letter.
  std::uint64_t support() const noexcept { return x_ | z_; }

  Pauli at(std::size_t q) const {
    const bool x = (x_ >> q) & 1U;
    const bool z = (z_ >> q) & 1U;
    if (x) return z ? Pauli::Y : Pauli::X;
    return z ? Pauli::Z : Pauli::I;
  }

  void set(std::size_t q, Pauli p) {
    if (q >= n_) throw DimensionError("qubit index out of range");
    const std::uint64_t bit = std::uint64_t{1} << q;
    x_ &= ~bit;
    z_ &= ~bit;
    if (p == Pauli::X || p == Pauli::Y) x_ |= bit;
    if (p == Pauli::Z || p == Pauli::Y) z_ |= bit;
  }

  bool is_identity() const noexcept { return (x_ | z_) == 0; }
  std::size_t weight() const noexcept {
    return static_cast<std::size_t>(std::popcount(x_ | z_));
  }
  std::size_t y_count() const noexcept {
    return static_cast<std::size_t>(std::popcount(x_ & z_));
  }

  bool commutes_with(const PauliString& o) const noexcept {
    return (std::popcount((x_ & o.z_) ^ (z_ & o.x_)) & 1) == 0;
  }

  /// Letter-wise product without phase; see product_phase.
  PauliString operator^(const PauliString& o) const noexcept {
    PauliString r = *this;
    r.x_ ^= o.x_;
    r.z_ ^= o.z_;
    return r;
  }

  std::string str() const {
    std::string s(n_, 'I');
    for (std::size_t q = 0; q < n_; ++q) s[q] = to_char(at(q));
    return s;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) noexcept {
    return a.n_ == b.n_ && a.x_ == b.x_ && a.z_ == b.z_;
  }

  /// Lexicographic on letters with qubit 0 most significant, I < X < Y < Z.
  friend bool operator<(const PauliString& a, const PauliString& b) noexcept {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    const std::uint64_t diff = (a.x_ ^ b.x_) | (a.z_ ^ b.z_);
    if (diff == 0) return false;
    const int q = std::countr_zero(diff);
    return static_cast<int>(a.at(q)) < static_cast<int>(b.at(q));
  }

 private:
  std::uint32_t n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/**
 * Exponent k with a * b == i^k (a ^ b) as operators.
 *
 * Per qubit: XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
 */
inline int product_phase(const PauliString& a, const PauliString& b) noexcept {
  const std::uint64_t ax = a.x_bits(), az = a.z_bits();
  const std::uint64_t bx = b.x_bits(), bz = b.z_bits();
  const std::uint64_t a_x = ax & ~az, a_y = ax & az, a_z = ~ax & az;
  const std::uint64_t b_x = bx & ~bz, b_y = bx & bz, b_z = ~bx & bz;
  const int pos = std::popcount((a_x & b_y) | (a_y & b_z) | (a_z & b_x));
  const int neg = std::popcount((a_x & b_z) | (a_y & b_x) | (a_z & b_y));
  return ((pos - neg) % 4 + 4) % 4;
}

/**
 * Action of a Pauli word on a computational basis state:
 * P|b> = i^k |b ^ x_bits(P)>, returns k.
 */
inline int basis_action_phase(const PauliString& p, std::uint64_t b) noexcept {
  return static_cast<int>(p.y_count()) +
         2 * (std::popcount(b & p.z_bits()) & 1);
}

struct PauliTerm {
  PauliString word;
  Complex coeff{1.0, 0.0};

  PauliTerm() = default;
  PauliTerm(PauliString w, Complex c = 1.0) : word(w), coeff(c) {}

  std::size_t size() const noexcept { return word.size(); }
};

inline PauliTerm multiply(const PauliTerm& a, const PauliTerm& b) {
  if (a.size() != b.size()) {
    throw DimensionError("multiply: qubit counts differ");
  }
  return {a.word ^ b.word,
          a.coeff * b.coeff * i_pow(product_phase(a.word, b.word))};
}

/**
 * A weighted sum of Pauli words in canonical merged form.
 *
 * Terms are kept sorted by word with no repeated word, and coefficients
 * below kPruneThreshold are dropped. Values are immutable in practice; all
 * arithmetic returns new sums.
 */
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(std::size_t n) : n_(n) {
    if (n > kMaxQubits) throw ResourceError("PauliSum supports at most 64 qubits");
  }
  PauliSum(std::size_t n, std::vector<PauliTerm> terms) : PauliSum(n) {
    for (const auto& t : terms) check_size(t);
    terms_ = std::move(terms);
    canonicalize();
  }
  PauliSum(const PauliTerm& t) : PauliSum(t.size(), {t}) {}

  /**
   * Parses text such as "1.5*ZZI - 0.5*XII". Letters are case-insensitive,
   * '*' is optional, a bare word has coefficient 1, and complex coefficients
   * are written "(re+imj)". The Unicode minus sign is accepted.
   */
  static PauliSum parse(std::string_view text);

  std::size_t num_qubits() const noexcept { return n_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  auto begin() const noexcept { return terms_.begin(); }
  auto end() const noexcept { return terms_.end(); }

  /// True when every coefficient is real to within tol.
  bool is_hermitian(double tol = kPruneThreshold) const noexcept {
    return std::all_of(terms_.begin(), terms_.end(), [tol](const PauliTerm& t) {
      return std::abs(t.coeff.imag()) <= tol;
    });
  }

  /// True when every coefficient is imaginary to within tol.
  bool is_anti_hermitian(double tol = kPruneThreshold) const noexcept {
    return std::all_of(terms_.begin(), terms_.end(), [tol](const PauliTerm& t) {
      return std::abs(t.coeff.real()) <= tol;
    });
  }

  /// Whether all words pairwise commute.
  bool is_commuting() const noexcept {
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      for (std::size_t j = i + 1; j < terms_.size(); ++j) {
        if (!terms_[i].word.commutes_with(terms_[j].word)) return false;
      }
    }
    return true;
  }

  /// Sum of |coeff| over all terms.
  double l1_norm() const noexcept {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coeff);
    return s;
  }

  /// Coefficient of the identity word (zero if absent).
  Complex identity_coeff() const noexcept {
    for (const auto& t : terms_) {
      if (t.word.is_identity()) return t.coeff;
    }
    return 0.0;
  }

  std::string str() const;

  friend PauliSum operator+(const PauliSum& a, const PauliSum& b) {
    check_same(a, b);
    std::vector<PauliTerm> t = a.terms_;
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return PauliSum(a.n_, std::move(t));
  }
  friend PauliSum operator-(const PauliSum& a, const PauliSum& b) {
    return a + b * Complex(-1.0);
  }
  friend PauliSum operator*(const PauliSum& a, Complex s) {
    std::vector<PauliTerm> t = a.terms_;
    for (auto& term : t) term.coeff *= s;
    return PauliSum(a.n_, std::move(t));
  }
  friend PauliSum operator*(Complex s, const PauliSum& a) { return a * s; }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    check_same(a, b);
    std::vector<PauliTerm> t;
    t.reserve(a.size() * b.size());
    for (const auto& x : a.terms_) {
      for (const auto& y : b.terms_) t.push_back(multiply(x, y));
    }
    return PauliSum(a.n_, std::move(t));
  }

  friend bool operator==(const PauliSum& a, const PauliSum& b) noexcept {
    if (a.n_ != b.n_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      if (!(a.terms_[i].word == b.terms_[i].word) ||
          a.terms_[i].coeff != b.terms_[i].coeff) {
        return false;
      }
    }
    return true;
  }

 private:
  void check_size(const PauliTerm& t) const {
    if (t.size() != n_) throw DimensionError("PauliSum: term qubit count differs");
  }
  static void check_same(const PauliSum& a, const PauliSum& b) {
    if (a.n_ != b.n_) throw DimensionError("PauliSum: qubit counts differ");
  }

  void canonicalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const PauliTerm& a, const PauliTerm& b) {
                       return a.word < b.word;
                     });
    std::vector<PauliTerm> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (!merged.empty() && merged.back().word == t.word) {
        merged.back().coeff += t.coeff;
      } else {
        merged.push_back(t);
      }
    }
    std::erase_if(merged, [](const PauliTerm& t) {
      return std::abs(t.coeff) < kPruneThreshold;
    });
    terms_ = std::move(merged);
  }

  std::size_t n_ = 0;
  std::vector<PauliTerm> terms_;
};

/// [h, a] = ha - ah in canonical form.
inline PauliSum commutator(const PauliSum& h, const PauliSum& a) {
  if (h.num_qubits() != a.num_qubits()) {
    throw DimensionError("commutator: qubit counts differ");
  }
  std::vector<PauliTerm> t;
  for (const auto& x : h) {
    for (const auto& y : a) {
      // Commuting words cancel; anticommuting ones contribute 2xy.
      if (x.word.commutes_with(y.word)) continue;
      PauliTerm p = multiply(x, y);
      p.coeff *= 2.0;
      t.push_back(p);
    }
  }
  return PauliSum(h.num_qubits(), std::move(t));
}

/// Default size cap for dense operator expansion.
inline constexpr std::size_t kDenseMatrixCap = 12;

/**
 * Dense 2^n x 2^n matrix of a Pauli sum, qubit 0 the least significant index
 * bit (so the Kronecker order is P_{n-1} (x) ... (x) P_0).
 */
inline Eigen::MatrixXcd dense_matrix(const PauliSum& h,
                                     std::size_t cap = kDenseMatrixCap) {
  const std::size_t n = h.num_qubits();
  if (n > cap) {
    throw ResourceError("dense_matrix: " + std::to_string(n) +
                        " qubits exceeds cap " + std::to_string(cap));
  }
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h) {
    const std::uint64_t flip = t.word.x_bits();
    for (std::size_t col = 0; col < dim; ++col) {
      m(col ^ flip, col) += t.coeff * i_pow(basis_action_phase(t.word, col));
    }
  }
  return m;
}

namespace detail {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void skip_space(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

inline bool parse_number(std::string_view s, std::size_t& i, double& out) {
  const char* first = s.data() + i;
  const char* last = s.data() + s.size();
  // from_chars rejects a leading '+', handle it here.
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc()) return false;
  i = static_cast<std::size_t>(ptr - s.data());
  return true;
}

}  // namespace detail

inline PauliSum PauliSum::parse(std::string_view text) {
  // Normalize the Unicode minus (U+2212) to ASCII.
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x88 &&
        static_cast<unsigned char>(text[i + 2]) == 0x92) {
      s.push_back('-');
      i += 2;
    } else {
      s.push_back(text[i]);
    }
  }
  const std::string_view v = s;
  std::vector<std::pair<Complex, std::string>> raw;
  std::size_t i = 0;
  bool first = true;
  for (;;) {
    detail::skip_space(v, i);
    if (i >= v.size()) break;
    double sign = 1.0;
    if (v[i] == '+' || v[i] == '-') {
      sign = v[i] == '-' ? -1.0 : 1.0;
      ++i;
      detail::skip_space(v, i);
    } else if (!first) {
      throw ConfigError("Pauli sum: expected '+' or '-' at offset " +
                        std::to_string(i));
    }
    first = false;
    Complex coeff = 1.0;
    if (i < v.size() && v[i] == '(') {
      ++i;
      double re = 0.0, im = 0.0;
      detail::skip_space(v, i);
      if (!detail::parse_number(v, i, re)) {
        throw ConfigError("Pauli sum: bad complex coefficient");
      }
      detail::skip_space(v, i);
      if (i < v.size() && (v[i] == '+' || v[i] == '-')) {
        const double isign = v[i] == '-' ? -1.0 : 1.0;
        ++i;
        if (!detail::parse_number(v, i, im)) {
          throw ConfigError("Pauli sum: bad complex coefficient");
        }
        im *= isign;
        if (i < v.size() && (v[i] == 'j' || v[i] == 'J')) ++i;
      }
      detail::skip_space(v, i);
      if (i >= v.size() || v[i] != ')') {
        throw ConfigError("Pauli sum: missing ')'");
      }
      ++i;
      coeff = {re, im};
    } else if (i < v.size() &&
               (std::isdigit(static_cast<unsigned char>(v[i])) || v[i] == '.')) {
      double re = 0.0;
      if (!detail::parse_number(v, i, re)) {
        throw ConfigError("Pauli sum: bad coefficient");
      }
      coeff = re;
    }
    detail::skip_space(v, i);
    if (i < v.size() && v[i] == '*') {
      ++i;
      detail::skip_space(v, i);
    }
    const std::size_t start = i;
    while (i < v.size() && std::isalpha(static_cast<unsigned char>(v[i]))) ++i;
    if (start == i) throw ConfigError("Pauli sum: missing Pauli word");
    raw.emplace_back(coeff * sign, std::string(v.substr(start, i - start)));
  }
  if (raw.empty()) throw ConfigError("Pauli sum: empty expression");
  const std::size_t n = raw.front().second.size();
  std::vector<PauliTerm> terms;
  for (const auto& [c, w] : raw) {
    if (w.size() != n) throw DimensionError("Pauli sum: words differ in length");
    terms.emplace_back(PauliString::from_letters(w), c);
  }
  return PauliSum(n, std::move(terms));
}

inline std::string PauliSum::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& t : terms_) {
    const Complex c = t.coeff;
    if (c.imag() == 0.0) {
      const double re = c.real();
      if (out.empty()) {
        out += detail::format_double(re);
      } else {
        out += re < 0 ? " - " : " + ";
        out += detail::format_double(std::abs(re));
      }
    } else {
      if (!out.empty()) out += " + ";
      out += "(" + detail::format_double(c.real()) +
             (c.imag() < 0 ? "-" : "+") +
             detail::format_double(std::abs(c.imag())) + "j)";
    }
    out += "*" + t.word.str();
  }
  return out;
}

}  // namespace cliffadapt
