#pragma once

// Finite-support discrete distributions with exact rational masses.
//
// Support iterates in first-occurrence order, so a potential vector indexed
// by position lines up with entries() deterministically.

#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <span>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phl/error.hpp"
#include "phl/rational.hpp"

namespace phl {

template <class T>
concept HashableElement = requires(const T& x) {
  { std::hash<T>{}(x) } -> std::convertible_to<std::size_t>;
};

template <class T>
class Dist;

/// Accumulates masses, merging equal elements. Used by every constructor
/// below; exposed for callers that build distributions incrementally.
template <class T>
class DistBuilder {
 public:
  void add(const T& x, const Rational& mass) {
    if (mass == 0) return;
    if (auto idx = find(x)) {
      entries_[*idx].second += mass;
      return;
    }
    if constexpr (HashableElement<T>) index_.emplace(std::hash<T>{}(x), entries_.size());
    entries_.emplace_back(x, mass);
  }

  std::size_t size() const { return entries_.size(); }

  Dist<T> build() &&;

 private:
  std::optional<std::size_t> find(const T& x) const {
    if constexpr (HashableElement<T>) {
      auto [lo, hi] = index_.equal_range(std::hash<T>{}(x));
      for (auto it = lo; it != hi; ++it) {
        if (entries_[it->second].first == x) return it->second;
      }
    } else {
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first == x) return i;
      }
    }
    return std::nullopt;
  }

  std::vector<std::pair<T, Rational>> entries_;
  std::unordered_multimap<std::size_t, std::size_t> index_;
};

template <class T>
class Dist {
 public:
  using value_type = T;
  using Entry = std::pair<T, Rational>;

  static Dist dirac(T x) {
    Dist d;
    d.entries_.emplace_back(std::move(x), Rational(1));
    return d;
  }

  /// Each list position carries 1/length; duplicates are merged.
  static Dist from_uniform(std::span<const T> items) {
    if (items.empty()) throw EmptyChoice();
    const Rational each(1, static_cast<unsigned long>(items.size()));
    DistBuilder<T> b;
    for (const auto& x : items) b.add(x, each);
    return std::move(b).build();
  }

  static Dist from_weighted(std::span<const std::pair<Rational, T>> pairs) {
    if (pairs.empty()) throw EmptyChoice();
    Rational total;
    for (const auto& [w, x] : pairs) {
      if (w <= 0) throw NonPositiveWeight(w.get_str());
      total += w;
    }
    DistBuilder<T> b;
    for (const auto& [w, x] : pairs) b.add(x, Rational(w / total));
    return std::move(b).build();
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Mass of x; zero outside the support.
  Rational prob(const T& x) const {
    for (const auto& [y, p] : entries_) {
      if (y == x) return p;
    }
    return Rational(0);
  }

  bool is_dirac() const { return entries_.size() == 1; }

  /// bind(mu, k)(y) = sum_x mu(x) * k(x)(y)
  template <class F>
  auto bind(F&& kernel) const {
    using Out = std::remove_cvref_t<std::invoke_result_t<F&, const T&>>;
    using Y = typename Out::value_type;
    DistBuilder<Y> b;
    for (const auto& [x, p] : entries_) {
      const Out inner = kernel(x);
      for (const auto& [y, q] : inner.entries()) b.add(y, Rational(p * q));
    }
    return std::move(b).build();
  }

  /// Pushforward; collided images have their masses summed.
  template <class F>
  auto map(F&& f) const {
    using Y = std::remove_cvref_t<std::invoke_result_t<F&, const T&>>;
    DistBuilder<Y> b;
    for (const auto& [x, p] : entries_) b.add(f(x), p);
    return std::move(b).build();
  }

  template <class F>
  Rational expect(F&& f) const {
    Rational sum;
    for (const auto& [x, p] : entries_) sum += p * Rational(f(x));
    return sum;
  }

  /// E_mu[v] for a vector aligned with the support order.
  Rational expect_vector(std::span<const Rational> values) const {
    if (values.size() != entries_.size()) {
      throw std::invalid_argument("potential vector length does not match support size");
    }
    Rational sum;
    for (std::size_t i = 0; i < entries_.size(); ++i) sum += entries_[i].second * values[i];
    return sum;
  }

  Rational total_mass() const {
    Rational sum;
    for (const auto& e : entries_) sum += e.second;
    return sum;
  }

  /// Checks the stored-distribution invariants: positive masses summing to 1.
  bool valid() const {
    for (const auto& e : entries_) {
      if (e.second <= 0 || e.second > 1) return false;
    }
    return !entries_.empty() && total_mass() == 1;
  }

  /// Equality as mappings; support order is ignored.
  friend bool operator==(const Dist& a, const Dist& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [x, p] : a.entries_) {
      if (b.prob(x) != p) return false;
    }
    return true;
  }

 private:
  friend class DistBuilder<T>;
  std::vector<Entry> entries_;
};

template <class T>
Dist<T> DistBuilder<T>::build() && {
  Dist<T> d;
  d.entries_ = std::move(entries_);
  return d;
}

}  // namespace phl
