#pragma once

// Dense potentials over discrete variables and the three table operations
// (multiply, divide, marginalize) that every propagation scheme is built from.
//
// Cells are stored row-major with the first listed variable varying slowest.
// Tables are never reordered in memory; alignment between two tables is done
// by mapping coordinates through per-variable strides.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cautious/errors.hpp"

namespace cautious {

using VarId = int;

/// Ordered list of variables together with their state counts.
class Domain {
 public:
  Domain() = default;

  Domain(std::vector<VarId> vars, std::vector<int> cards)
      : vars_(std::move(vars)), cards_(std::move(cards)) {
    if (vars_.size() != cards_.size()) {
      throw StructuralError("domain: variable and cardinality lists differ in length");
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (cards_[i] < 1) {
        throw StructuralError("domain: cardinality must be at least 1");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (vars_[j] == vars_[i]) {
          throw StructuralError("domain: duplicate variable " + std::to_string(vars_[i]));
        }
      }
    }
  }

  const std::vector<VarId>& vars() const { return vars_; }
  const std::vector<int>& cards() const { return cards_; }
  std::size_t arity() const { return vars_.size(); }
  bool empty() const { return vars_.empty(); }

  /// Number of cells a table over this domain holds (1 for the empty domain).
  std::size_t num_cells() const {
    std::size_t n = 1;
    for (int c : cards_) n *= static_cast<std::size_t>(c);
    return n;
  }

  /// Position of `v` in this domain, or -1.
  int position(VarId v) const {
    auto it = std::find(vars_.begin(), vars_.end(), v);
    return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
  }
  bool contains(VarId v) const { return position(v) >= 0; }

  int card_of(VarId v) const {
    int p = position(v);
    if (p < 0) throw StructuralError("domain: variable " + std::to_string(v) + " absent");
    return cards_[static_cast<std::size_t>(p)];
  }

  bool is_subset_of(const Domain& other) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      int p = other.position(vars_[i]);
      if (p < 0 || other.cards_[static_cast<std::size_t>(p)] != cards_[i]) return false;
    }
    return true;
  }

  /// Row-major strides: the last variable has stride 1.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(vars_.size(), 1);
    for (std::size_t i = vars_.size(); i-- > 1;) {
      s[i - 1] = s[i] * static_cast<std::size_t>(cards_[i]);
    }
    return s;
  }

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  std::vector<VarId> vars_;
  std::vector<int> cards_;
};

/// Tallies of table operations. Multiplying n tables counts n-1 multiplications.
struct OpCounters {
  std::uint64_t multiplications = 0;
  std::uint64_t divisions = 0;
  std::uint64_t marginalizations = 0;
  std::uint64_t messages_sent = 0;
  // Share of `multiplications` spent combining incoming message ratios when
  // forming an outgoing message product.
  std::uint64_t message_multiplications = 0;

  void reset() { *this = OpCounters{}; }
};

template <typename Scalar>
class BasicPotential {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  /// The scalar 1 over the empty domain.
  BasicPotential() : values_(Values::Ones(1)) {}

  BasicPotential(Domain domain, Values values) : domain_(std::move(domain)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != domain_.num_cells()) {
      std::ostringstream msg;
      msg << "potential: " << values_.size() << " values for a domain of " << domain_.num_cells() << " cells";
      throw StructuralError(msg.str());
    }
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (!(values_[i] >= Scalar(0)) || !std::isfinite(static_cast<double>(values_[i]))) {
        throw StructuralError("potential: entries must be finite and non-negative");
      }
    }
  }

  BasicPotential(Domain domain, std::span<const Scalar> values)
      : BasicPotential(std::move(domain), Eigen::Map<const Values>(values.data(), static_cast<Eigen::Index>(values.size()))) {}

  static BasicPotential constant(Domain domain, Scalar value) {
    const auto n = static_cast<Eigen::Index>(domain.num_cells());
    return BasicPotential(std::move(domain), Values::Constant(n, value));
  }

  const Domain& domain() const { return domain_; }
  const Values& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  Scalar operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  Scalar sum() const { return values_.sum(); }

  std::vector<Scalar> to_vector() const { return {values_.data(), values_.data() + values_.size()}; }

  friend bool operator==(const BasicPotential& a, const BasicPotential& b) {
    return a.domain_ == b.domain_ && (a.values_ == b.values_).all();
  }

 private:
  Domain domain_;
  Values values_;
};

using Potential = BasicPotential<double>;

namespace detail {

// Stride of each variable of `full` inside `sub` (0 when `sub` lacks it).
inline std::vector<std::size_t> aligned_strides(const Domain& sub, const Domain& full) {
  const auto sub_strides = sub.strides();
  std::vector<std::size_t> out(full.arity(), 0);
  for (std::size_t i = 0; i < full.arity(); ++i) {
    int p = sub.position(full.vars()[i]);
    if (p >= 0) out[i] = sub_strides[static_cast<std::size_t>(p)];
  }
  return out;
}

// Walks every cell of `full` in row-major order, calling fn(cell, offset_a, offset_b)
// where the offsets address the aligned cells of two sub-domain tables.
template <typename Fn>
void for_each_aligned(const Domain& full, const std::vector<std::size_t>& stride_a,
                      const std::vector<std::size_t>& stride_b, Fn&& fn) {
  const std::size_t n = full.num_cells();
  const std::size_t k = full.arity();
  std::vector<int> coord(k, 0);
  std::size_t off_a = 0, off_b = 0;
  for (std::size_t cell = 0; cell < n; ++cell) {
    fn(cell, off_a, off_b);
    // odometer step, last variable fastest
    for (std::size_t d = k; d-- > 0;) {
      if (++coord[d] < full.cards()[d]) {
        off_a += stride_a[d];
        off_b += stride_b[d];
        break;
      }
      off_a -= stride_a[d] * static_cast<std::size_t>(coord[d] - 1);
      off_b -= stride_b[d] * static_cast<std::size_t>(coord[d] - 1);
      coord[d] = 0;
    }
  }
}

inline Domain union_domain(const Domain& a, const Domain& b) {
  std::vector<VarId> vars = a.vars();
  std::vector<int> cards = a.cards();
  for (std::size_t i = 0; i < b.arity(); ++i) {
    const VarId v = b.vars()[i];
    const int p = a.position(v);
    if (p >= 0) {
      if (a.cards()[static_cast<std::size_t>(p)] != b.cards()[i]) {
        throw StructuralError("multiply: cardinality mismatch on variable " + std::to_string(v));
      }
    } else {
      vars.push_back(v);
      cards.push_back(b.cards()[i]);
    }
  }
  return Domain(std::move(vars), std::move(cards));
}

}  // namespace detail

/// Table of ones over `d`.
template <typename Scalar = double>
BasicPotential<Scalar> unit(const Domain& d) {
  return BasicPotential<Scalar>::constant(d, Scalar(1));
}

/// Cellwise product over the ordered union of both domains (a's variables
/// first, then b's new ones).
template <typename Scalar>
BasicPotential<Scalar> multiply(const BasicPotential<Scalar>& a, const BasicPotential<Scalar>& b,
                                OpCounters* counters = nullptr) {
  Domain out = detail::union_domain(a.domain(), b.domain());
  typename BasicPotential<Scalar>::Values values(static_cast<Eigen::Index>(out.num_cells()));
  const auto sa = detail::aligned_strides(a.domain(), out);
  const auto sb = detail::aligned_strides(b.domain(), out);
  const auto& va = a.values();
  const auto& vb = b.values();
  detail::for_each_aligned(out, sa, sb, [&](std::size_t cell, std::size_t ia, std::size_t ib) {
    values[static_cast<Eigen::Index>(cell)] = va[static_cast<Eigen::Index>(ia)] * vb[static_cast<Eigen::Index>(ib)];
  });
  if (counters) ++counters->multiplications;
  return BasicPotential<Scalar>(std::move(out), std::move(values));
}

/// Cellwise quotient a / b with b's domain a subset of a's, using 0/0 = 0.
template <typename Scalar>
BasicPotential<Scalar> divide(const BasicPotential<Scalar>& a, const BasicPotential<Scalar>& b,
                              OpCounters* counters = nullptr) {
  if (!b.domain().is_subset_of(a.domain())) {
    throw StructuralError("divide: denominator domain is not contained in numerator domain");
  }
  const Domain& out = a.domain();
  typename BasicPotential<Scalar>::Values values(static_cast<Eigen::Index>(out.num_cells()));
  const auto sa = detail::aligned_strides(out, out);
  const auto sb = detail::aligned_strides(b.domain(), out);
  const auto& va = a.values();
  const auto& vb = b.values();
  detail::for_each_aligned(out, sa, sb, [&](std::size_t cell, std::size_t ia, std::size_t ib) {
    const Scalar num = va[static_cast<Eigen::Index>(ia)];
    const Scalar den = vb[static_cast<Eigen::Index>(ib)];
    if (den == Scalar(0)) {
      if (num != Scalar(0)) {
        throw InconsistencyError("divide: positive mass over a zero cell");
      }
      values[static_cast<Eigen::Index>(cell)] = Scalar(0);
    } else {
      values[static_cast<Eigen::Index>(cell)] = num / den;
    }
  });
  if (counters) ++counters->divisions;
  return BasicPotential<Scalar>(out, std::move(values));
}

/// Sums `p` over every variable not in `target`; the result follows target's order.
template <typename Scalar>
BasicPotential<Scalar> marginalize(const BasicPotential<Scalar>& p, const Domain& target,
                                   OpCounters* counters = nullptr) {
  if (!target.is_subset_of(p.domain())) {
    throw StructuralError("marginalize: target holds a variable absent from the table");
  }
  typename BasicPotential<Scalar>::Values values =
      BasicPotential<Scalar>::Values::Zero(static_cast<Eigen::Index>(target.num_cells()));
  const auto sp = detail::aligned_strides(p.domain(), p.domain());
  const auto st = detail::aligned_strides(target, p.domain());
  const auto& vp = p.values();
  detail::for_each_aligned(p.domain(), sp, st, [&](std::size_t, std::size_t ip, std::size_t it) {
    values[static_cast<Eigen::Index>(it)] += vp[static_cast<Eigen::Index>(ip)];
  });
  if (counters) ++counters->marginalizations;
  return BasicPotential<Scalar>(target, std::move(values));
}

/// Restriction of `full`'s domain to the listed variables, in the listed order.
inline Domain subdomain(const Domain& full, std::span<const VarId> vars) {
  std::vector<int> cards;
  cards.reserve(vars.size());
  for (VarId v : vars) cards.push_back(full.card_of(v));
  return Domain(std::vector<VarId>(vars.begin(), vars.end()), std::move(cards));
}

/// Same table with every cell multiplied by `factor` (not an algebra operation).
template <typename Scalar>
BasicPotential<Scalar> scaled(const BasicPotential<Scalar>& p, Scalar factor) {
  return BasicPotential<Scalar>(p.domain(), (p.values() * factor).eval());
}

}  // namespace cautious
