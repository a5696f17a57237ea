#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bohrkit {

using Rational = mpq_class;
using BigInt = mpz_class;

// Name of the symbol that stands for the real number 1. Heights of rank-one
// flows start at this symbol.
inline constexpr std::string_view kUnitSymbol = "one";

struct Symbol {
  std::string name;
  double value = 0.0;  // only used for evaluation on the real line
};

// Ordered list of free generators. Frequencies are rational combinations of
// these; whether the real values are truly independent over Q is an input
// assumption and is never checked.
class SymbolBasis {
 public:
  explicit SymbolBasis(std::vector<Symbol> symbols);

  static std::shared_ptr<const SymbolBasis> make(std::vector<Symbol> symbols) {
    return std::make_shared<const SymbolBasis>(std::move(symbols));
  }

  std::size_t size() const { return symbols_.size(); }
  const Symbol& operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::optional<std::size_t> unit_index() const { return find(kUnitSymbol); }

  bool equivalent(const SymbolBasis& other) const;

 private:
  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const SymbolBasis>;

// Throws BasisMismatch unless both bases are the same object or carry
// identical symbol lists.
void require_same_basis(const BasisPtr& a, const BasisPtr& b);

// Element of the frequency group: an exact rational vector over the basis,
// stored sparsely (sorted by symbol index, zeros never stored).
class Frequency {
 public:
  using Entry = std::pair<std::uint32_t, Rational>;

  Frequency() = default;
  explicit Frequency(BasisPtr basis) : basis_(std::move(basis)) {}

  static Frequency symbol(BasisPtr basis, std::size_t index, const Rational& c = 1);
  static Frequency symbol(BasisPtr basis, std::string_view name, const Rational& c = 1);
  static Frequency from_dense(BasisPtr basis, const std::vector<Rational>& coeffs);
  static Frequency parse(BasisPtr basis, std::string_view text);

  const BasisPtr& basis() const { return basis_; }
  std::size_t dimension() const { return basis_ ? basis_->size() : 0; }

  Rational coeff(std::size_t i) const;
  std::vector<Rational> dense() const;
  std::span<const Entry> entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }

  // Sum of coeff * symbol value in double precision.
  double real_value() const;

  Frequency operator-() const;
  Frequency& operator+=(const Frequency& other);
  Frequency& operator-=(const Frequency& other);
  Frequency scaled(const Rational& factor) const;

  friend Frequency operator+(Frequency a, const Frequency& b) { return a += b; }
  friend Frequency operator-(Frequency a, const Frequency& b) { return a -= b; }

  friend bool operator==(const Frequency& a, const Frequency& b);
  // Lexicographic on the dense coefficient vectors.
  friend std::strong_ordering operator<=>(const Frequency& a, const Frequency& b);

  // Canonical text form, e.g. "3/2*a + -1/4*b"; the zero frequency is "0".
  std::string to_string() const;

 private:
  Frequency& axpy(const Rational& alpha, const Frequency& other);

  BasisPtr basis_;
  std::vector<Entry> entries_;
};

Frequency freq_add(const Frequency& a, const Frequency& b);

// Rank over Q of the coefficient matrix whose rows are the given frequencies,
// by fraction-free (Bareiss) elimination on the denominator-cleared integer
// matrix.
std::size_t rational_rank(std::span<const Frequency> freqs);
bool is_rationally_independent(std::span<const Frequency> freqs);

// Dense integer matrix, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  BigInt& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const BigInt& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<BigInt> data_;
};

// Finite frequency set rewritten as integer exponent vectors over a
// rationally independent reduced basis: freqs[i] == sum_j E(i,j) * basis[j].
struct TorusReduction {
  std::size_t dim = 0;
  std::vector<Frequency> reduced_basis;
  IntMatrix exponents;
};

TorusReduction torus_reduce(std::span<const Frequency> freqs);

inline double real_value(const Frequency& f) { return f.real_value(); }

}  // namespace bohrkit
