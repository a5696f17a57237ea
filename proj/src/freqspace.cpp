#include "bohrkit/freqspace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "bohrkit/errors.hpp"

namespace bohrkit {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

using SparseRow = std::vector<Frequency::Entry>;

// out = a + alpha * b, both sorted by column.
SparseRow sparse_axpy(const SparseRow& a, const Rational& alpha, const SparseRow& b) {
  SparseRow out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, alpha * b[j].second);
      ++j;
    } else {
      Rational v = a[i].second + alpha * b[j].second;
      if (sgn(v) != 0) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

const Rational* sparse_find(const SparseRow& row, std::uint32_t col) {
  auto it = std::lower_bound(row.begin(), row.end(), col,
                             [](const Frequency::Entry& e, std::uint32_t c) { return e.first < c; });
  if (it == row.end() || it->first != col) return nullptr;
  return &it->second;
}

void require_common_basis(std::span<const Frequency> freqs) {
  if (freqs.empty()) throw ValidationError("frequency set must be nonempty");
  for (const auto& f : freqs) {
    if (!f.basis()) throw ValidationError("frequency has no basis");
    require_same_basis(freqs.front().basis(), f.basis());
  }
}

}  // namespace

SymbolBasis::SymbolBasis(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const auto& s = symbols_[i];
    if (!is_identifier(s.name)) throw ValidationError("invalid symbol name '" + s.name + "'");
    if (!std::isfinite(s.value) || s.value == 0.0)
      throw ValidationError("symbol '" + s.name + "' must have a finite nonzero value");
    if (!index_.emplace(s.name, i).second)
      throw ValidationError("duplicate symbol name '" + s.name + "'");
  }
}

std::optional<std::size_t> SymbolBasis::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SymbolBasis::equivalent(const SymbolBasis& other) const {
  if (symbols_.size() != other.symbols_.size()) return false;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].name != other.symbols_[i].name || symbols_[i].value != other.symbols_[i].value)
      return false;
  }
  return true;
}

void require_same_basis(const BasisPtr& a, const BasisPtr& b) {
  if (a == b) return;
  if (!a || !b || !a->equivalent(*b)) throw BasisMismatch();
}

Frequency Frequency::symbol(BasisPtr basis, std::size_t index, const Rational& c) {
  if (index >= basis->size()) throw ValidationError("symbol index out of range");
  Frequency f(std::move(basis));
  if (sgn(c) != 0) {
    f.entries_.emplace_back(static_cast<std::uint32_t>(index), c);
    f.entries_.back().second.canonicalize();
  }
  return f;
}

Frequency Frequency::symbol(BasisPtr basis, std::string_view name, const Rational& c) {
  auto idx = basis->find(name);
  if (!idx) throw ValidationError("unknown symbol '" + std::string(name) + "'");
  return symbol(std::move(basis), *idx, c);
}

Frequency Frequency::from_dense(BasisPtr basis, const std::vector<Rational>& coeffs) {
  if (coeffs.size() != basis->size()) throw ValidationError("coefficient vector has wrong dimension");
  Frequency f(std::move(basis));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (sgn(coeffs[i]) == 0) continue;
    f.entries_.emplace_back(static_cast<std::uint32_t>(i), coeffs[i]);
    f.entries_.back().second.canonicalize();
  }
  return f;
}

Rational Frequency::coeff(std::size_t i) const {
  const Rational* v = sparse_find(entries_, static_cast<std::uint32_t>(i));
  return v ? *v : Rational(0);
}

std::vector<Rational> Frequency::dense() const {
  std::vector<Rational> out(dimension());
  for (const auto& [i, v] : entries_) out[i] = v;
  return out;
}

double Frequency::real_value() const {
  double sum = 0.0;
  for (const auto& [i, v] : entries_) sum += v.get_d() * (*basis_)[i].value;
  return sum;
}

Frequency Frequency::operator-() const {
  Frequency out(*this);
  for (auto& e : out.entries_) e.second = -e.second;
  return out;
}

Frequency& Frequency::axpy(const Rational& alpha, const Frequency& other) {
  if (!basis_) basis_ = other.basis_;
  require_same_basis(basis_, other.basis_);
  entries_ = sparse_axpy(entries_, alpha, other.entries_);
  return *this;
}

Frequency& Frequency::operator+=(const Frequency& other) { return axpy(Rational(1), other); }
Frequency& Frequency::operator-=(const Frequency& other) { return axpy(Rational(-1), other); }

Frequency Frequency::scaled(const Rational& factor) const {
  Frequency out(basis_);
  if (sgn(factor) == 0) return out;
  Rational k = factor;
  k.canonicalize();
  out.entries_ = entries_;
  for (auto& e : out.entries_) e.second *= k;
  return out;
}

bool operator==(const Frequency& a, const Frequency& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    if (a.entries_[i].first != b.entries_[i].first || a.entries_[i].second != b.entries_[i].second)
      return false;
  }
  return true;
}

std::strong_ordering operator<=>(const Frequency& a, const Frequency& b) {
  std::size_t i = 0, j = 0;
  while (i < a.entries_.size() || j < b.entries_.size()) {
    int c;
    if (j == b.entries_.size() || (i < a.entries_.size() && a.entries_[i].first < b.entries_[j].first)) {
      c = sgn(a.entries_[i].second);  // b is zero here
    } else if (i == a.entries_.size() || b.entries_[j].first < a.entries_[i].first) {
      c = -sgn(b.entries_[j].second);
    } else {
      c = cmp(a.entries_[i].second, b.entries_[j].second);
      ++i;
      ++j;
      if (c == 0) continue;
    }
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

std::string Frequency::to_string() const {
  if (entries_.empty()) return "0";
  std::string out;
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (k) out += " + ";
    out += entries_[k].second.get_str();
    out += '*';
    out += (*basis_)[entries_[k].first].name;
  }
  return out;
}

namespace {

class FrequencyParser {
 public:
  FrequencyParser(const BasisPtr& basis, std::string_view text) : basis_(basis), text_(text) {}

  Frequency run() {
    std::map<std::uint32_t, Rational> acc;
    skip_ws();
    if (pos_ == text_.size()) fail("empty frequency");
    bool first = true;
    while (true) {
      skip_ws();
      int sign = 1;
      if (!first) {
        if (pos_ == text_.size()) break;
        if (text_[pos_] == '+') {
          ++pos_;
        } else if (text_[pos_] == '-') {
          sign = -1;
          ++pos_;
        } else {
          fail("expected '+' or '-'");
        }
      }
      term(sign, acc);
      first = false;
    }
    std::vector<Rational> dense(basis_->size());
    for (auto& [i, v] : acc) dense[i] = v;
    return Frequency::from_dense(basis_, dense);
  }

 private:
  void term(int sign, std::map<std::uint32_t, Rational>& acc) {
    skip_ws();
    while (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      if (text_[pos_] == '-') sign = -sign;
      ++pos_;
      skip_ws();
    }
    Rational c(1);
    bool have_number = false;
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      c = number();
      have_number = true;
      skip_ws();
    }
    std::string name;
    if (have_number) {
      if (pos_ < text_.size() && text_[pos_] == '*') {
        ++pos_;
        skip_ws();
        name = identifier();
      }
    } else {
      name = identifier();
    }
    c *= sign;
    if (name.empty()) {
      // Bare rational: a multiple of the unit symbol, or zero.
      if (sgn(c) == 0) return;
      auto unit = basis_->unit_index();
      if (!unit) fail("constant term requires a '" + std::string(kUnitSymbol) + "' symbol in the basis");
      acc[static_cast<std::uint32_t>(*unit)] += c;
      return;
    }
    auto idx = basis_->find(name);
    if (!idx) fail("unknown symbol '" + name + "'");
    acc[static_cast<std::uint32_t>(*idx)] += c;
  }

  Rational number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string num(text_.substr(start, pos_ - start));
    std::string den = "1";
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '/') {
      ++pos_;
      skip_ws();
      std::size_t s2 = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (s2 == pos_) fail("missing denominator");
      den = std::string(text_.substr(s2, pos_ - s2));
    }
    BigInt d(den);
    if (sgn(d) == 0) fail("zero denominator");
    Rational r(BigInt(num), d);
    r.canonicalize();
    return r;
  }

  std::string identifier() {
    std::size_t start = pos_;
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
    }
    if (start == pos_) fail("expected symbol name");
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "cannot parse frequency '" << text_ << "' at offset " << pos_ << ": " << what;
    throw ParseError(os.str());
  }

  const BasisPtr& basis_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Frequency Frequency::parse(BasisPtr basis, std::string_view text) {
  if (!basis) throw ValidationError("parse needs a basis");
  return FrequencyParser(basis, text).run();
}

Frequency freq_add(const Frequency& a, const Frequency& b) { return a + b; }

std::size_t rational_rank(std::span<const Frequency> freqs) {
  require_common_basis(freqs);

  std::vector<std::uint32_t> cols;
  for (const auto& f : freqs)
    for (const auto& e : f.entries()) cols.push_back(e.first);
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  if (cols.empty()) return 0;

  const std::size_t n = freqs.size(), m = cols.size();
  IntMatrix M(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    BigInt lcm_den = 1;
    for (const auto& e : freqs[r].entries()) lcm_den = lcm(lcm_den, e.second.get_den());
    for (const auto& e : freqs[r].entries()) {
      auto c = std::lower_bound(cols.begin(), cols.end(), e.first) - cols.begin();
      M(r, c) = e.second.get_num() * (lcm_den / e.second.get_den());
    }
  }

  // Fraction-free echelon form; every entry stays an integer minor of M, so
  // the division by the previous pivot is exact.
  BigInt prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m && rank < n; ++c) {
    std::size_t p = rank;
    while (p < n && sgn(M(p, c)) == 0) ++p;
    if (p == n) continue;
    if (p != rank)
      for (std::size_t j = 0; j < m; ++j) swap(M(p, j), M(rank, j));
    const BigInt pivot = M(rank, c);
    for (std::size_t i = rank + 1; i < n; ++i) {
      const BigInt lead = M(i, c);
      for (std::size_t j = c + 1; j < m; ++j) {
        BigInt v = M(i, j) * pivot - lead * M(rank, j);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        M(i, j) = std::move(v);
      }
      M(i, c) = 0;
    }
    prev = pivot;
    ++rank;
  }
  return rank;
}

bool is_rationally_independent(std::span<const Frequency> freqs) {
  return rational_rank(freqs) == freqs.size();
}

TorusReduction torus_reduce(std::span<const Frequency> freqs) {
  require_common_basis(freqs);
  const BasisPtr& basis = freqs.front().basis();

  // Incremental reduced row echelon form over Q on sparse rows. Pivot rows are
  // kept fully reduced: each is zero at every other pivot column.
  std::vector<SparseRow> rows;
  std::vector<std::uint32_t> pivot_col;
  std::map<std::uint32_t, std::size_t> pivot_of;  // column -> row

  for (const auto& f : freqs) {
    SparseRow v(f.entries().begin(), f.entries().end());
    std::vector<std::pair<std::size_t, Rational>> hits;
    for (const auto& [col, val] : v) {
      auto it = pivot_of.find(col);
      if (it != pivot_of.end()) hits.emplace_back(it->second, val);
    }
    for (const auto& [r, val] : hits) v = sparse_axpy(v, -val, rows[r]);
    if (v.empty()) continue;

    const std::uint32_t lead = v.front().first;
    const Rational inv = 1 / v.front().second;
    for (auto& e : v) e.second *= inv;
    for (auto& row : rows) {
      if (const Rational* x = sparse_find(row, lead)) {
        const Rational factor = -*x;
        row = sparse_axpy(row, factor, v);
      }
    }
    pivot_of.emplace(lead, rows.size());
    pivot_col.push_back(lead);
    rows.push_back(std::move(v));
  }

  // Order by pivot column (= first nonzero position).
  std::vector<std::size_t> order(rows.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pivot_col[a] < pivot_col[b]; });

  TorusReduction out;
  out.dim = rows.size();
  out.exponents = IntMatrix(freqs.size(), out.dim);

  for (std::size_t k = 0; k < out.dim; ++k) {
    const std::size_t r = order[k];
    const std::uint32_t pc = pivot_col[r];
    // Coordinates of each input along this basis row are its entries at the
    // pivot column. Scale so that all of them become integers with the
    // smallest positive multiplier: lcm(denominators) / gcd(numerators).
    BigInt den_lcm = 1, num_gcd = 0;
    std::vector<Rational> coords(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      coords[i] = freqs[i].coeff(pc);
      if (sgn(coords[i]) == 0) continue;
      den_lcm = lcm(den_lcm, coords[i].get_den());
      num_gcd = gcd(num_gcd, coords[i].get_num());
    }
    Rational scale(den_lcm, num_gcd);
    scale.canonicalize();
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (sgn(coords[i]) == 0) continue;
      Rational e = coords[i] * scale;
      out.exponents(i, k) = e.get_num();
    }
    std::vector<Rational> dense(basis->size());
    for (const auto& [col, val] : rows[r]) dense[col] = val / scale;
    out.reduced_basis.push_back(Frequency::from_dense(basis, dense));
  }
  return out;
}

}  // namespace bohrkit
