#include <doctest.h>

#include <random>
#include <string>

#include "phl/dist.hpp"
#include "support.hpp"

using namespace phl;
using phl::test::q;

namespace {

Dist<int> random_dist(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 4), elem(0, 5), weight(1, 9);
  std::vector<std::pair<Rational, int>> pairs;
  const int n = size(rng);
  for (int i = 0; i < n; ++i) pairs.emplace_back(Rational(weight(rng)), elem(rng));
  return Dist<int>::from_weighted(pairs);
}

/// A kernel determined by a random table: k(x) = table[x].
struct Kernel {
  std::vector<Dist<int>> table;
  Dist<int> operator()(int x) const { return table.at(static_cast<std::size_t>(x)); }
};

Kernel random_kernel(std::mt19937_64& rng) {
  Kernel k;
  for (int x = 0; x <= 5; ++x) k.table.push_back(random_dist(rng));
  return k;
}

}  // namespace

TEST_CASE("dirac") {
  const auto d = Dist<int>::dirac(5);
  CHECK(d.size() == 1);
  CHECK(d.prob(5) == 1);
  CHECK(d.valid());
  CHECK(d.expect([](int x) { return Rational(x * 2); }) == 10);
}

TEST_CASE("from_uniform") {
  const std::vector<std::string> abc{"a", "b", "c"};
  const auto d = Dist<std::string>::from_uniform(abc);
  for (const auto& s : abc) CHECK(d.prob(s) == q(1, 3));

  CHECK(Dist<std::string>::from_uniform(std::vector<std::string>{"a"}).prob("a") == 1);

  const auto dup = Dist<std::string>::from_uniform(std::vector<std::string>{"a", "a", "b"});
  CHECK(dup.size() == 2);
  CHECK(dup.prob("a") == q(2, 3));
  CHECK(dup.prob("b") == q(1, 3));

  CHECK_THROWS_AS(Dist<int>::from_uniform(std::vector<int>{}), EmptyChoice);
}

TEST_CASE("from_weighted") {
  using P = std::pair<Rational, char>;
  const auto d = Dist<char>::from_weighted(std::vector<P>{{q(1), 'a'}, {q(3), 'b'}});
  CHECK(d.prob('a') == q(1, 4));
  CHECK(d.prob('b') == q(3, 4));
  CHECK(Dist<char>::from_weighted(std::vector<P>{{q(7), 'a'}}).prob('a') == 1);

  const auto merged = Dist<char>::from_weighted(std::vector<P>{{q(1, 2), 'a'}, {q(1, 2), 'a'}});
  CHECK(merged.size() == 1);
  CHECK(merged.prob('a') == 1);

  CHECK_THROWS_AS(Dist<char>::from_weighted(std::vector<P>{}), EmptyChoice);
  CHECK_THROWS_AS(Dist<char>::from_weighted(std::vector<P>{{q(0), 'a'}}), NonPositiveWeight);
  CHECK_THROWS_AS(Dist<char>::from_weighted(std::vector<P>{{q(1), 'a'}, {q(-1), 'b'}}),
                  NonPositiveWeight);
}

TEST_CASE("bind follows the convolution formula") {
  const auto mu = Dist<char>::from_uniform(std::vector<char>{'a', 'b'});
  const auto r = mu.bind([](char x) {
    return x == 'a' ? Dist<int>::dirac(0) : Dist<int>::from_uniform(std::vector<int>{0, 1});
  });
  CHECK(r.prob(0) == q(3, 4));
  CHECK(r.prob(1) == q(1, 4));
  CHECK(r.valid());
}

TEST_CASE("map pushes forward and merges collisions") {
  const auto bij = Dist<int>::from_uniform(std::vector<int>{1, 2}).map([](int x) { return x % 2; });
  CHECK(bij.prob(1) == q(1, 2));
  CHECK(bij.prob(0) == q(1, 2));

  const auto col = Dist<int>::from_uniform(std::vector<int>{1, 3}).map([](int x) { return x % 2; });
  CHECK(col.size() == 1);
  CHECK(col.prob(1) == 1);
}

TEST_CASE("expectation of the coin split") {
  const auto coin = Dist<char>::from_uniform(std::vector<char>{'h', 't'});
  CHECK(coin.expect([](char c) { return c == 'h' ? q(0) : q(2); }) == 1);
}

TEST_CASE("expect_vector follows support order") {
  const auto d = Dist<int>::from_weighted(std::vector<std::pair<Rational, int>>{{q(1), 7}, {q(3), 9}});
  CHECK(d.entries()[0].first == 7);
  const std::vector<Rational> v{q(4), q(8)};
  CHECK(d.expect_vector(v) == q(7));
  CHECK_THROWS_AS(d.expect_vector(std::vector<Rational>{q(1)}), std::invalid_argument);
}

TEST_CASE("equality ignores support order") {
  using P = std::pair<Rational, int>;
  const auto a = Dist<int>::from_weighted(std::vector<P>{{q(1), 1}, {q(2), 2}});
  const auto b = Dist<int>::from_weighted(std::vector<P>{{q(2), 2}, {q(1), 1}});
  CHECK(a == b);
  CHECK_FALSE(a == Dist<int>::dirac(1));
}

TEST_CASE("monad laws on random distributions") {
  std::mt19937_64 rng(20241016);
  for (int i = 0; i < 150; ++i) {
    const auto mu = random_dist(rng);
    const auto k = random_kernel(rng);
    const auto k2 = random_kernel(rng);
    const int x = std::uniform_int_distribution<int>(0, 5)(rng);

    CHECK(Dist<int>::dirac(x).bind(k) == k(x));
    CHECK(mu.bind([](int y) { return Dist<int>::dirac(y); }) == mu);
    const auto lhs = mu.bind(k).bind(k2);
    const auto rhs = mu.bind([&](int y) { return k(y).bind(k2); });
    CHECK(lhs == rhs);

    CHECK(mu.valid());
    CHECK(mu.bind(k).total_mass() == 1);
    CHECK(mu.map([](int y) { return y / 2; }).total_mass() == 1);
    CHECK(mu.map([](int y) { return y; }) == mu);
  }
}

TEST_CASE("expectation is linear and monotone") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 150; ++i) {
    const auto mu = random_dist(rng);
    std::vector<Rational> f(6), g(6);
    for (auto& v : f) v = test::random_rational(rng);
    for (auto& v : g) v = test::random_rational(rng);
    const Rational a = test::random_rational(rng);
    const Rational b = test::random_rational(rng);
    auto at = [](const std::vector<Rational>& t) { return [&t](int x) { return t[static_cast<std::size_t>(x)]; }; };

    const Rational combined = mu.expect([&](int x) {
      return Rational(a * f[static_cast<std::size_t>(x)] + b * g[static_cast<std::size_t>(x)]);
    });
    CHECK(combined == a * mu.expect(at(f)) + b * mu.expect(at(g)));

    std::vector<Rational> upper = f;
    for (auto& v : upper) v += test::random_rational(rng);
    CHECK(mu.expect(at(f)) <= mu.expect(at(upper)));
  }
}
