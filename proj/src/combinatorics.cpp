#include "hardball/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "hardball/errors.hpp"

namespace hardball {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), sets_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    --sets_;
    return true;
  }

  int sets() const { return sets_; }

 private:
  std::vector<int> parent_;
  int sets_;
};

void check_pair(const BallPair& e, int n) {
  if (e.first < 0 || e.second >= n || e.first >= e.second)
    throw Error(ErrorCode::BadDimension, "pair outside the ball set");
}

}  // namespace

SymbolicScheme scheme_of(const OrbitSegment& seg) {
  SymbolicScheme s;
  s.n_balls = seg.params.n_balls;
  double prev = seg.initial.time;
  for (const auto& e : seg.events) {
    s.pairs.emplace_back(e.i, e.j);
    s.adjustments.push_back(e.adjustment);
    s.time_slots.push_back(e.time - prev);
    prev = e.time;
  }
  return s;
}

Components components(std::span<const BallPair> sigma, int n) {
  DisjointSets sets(n);
  for (const auto& e : sigma) {
    check_pair(e, n);
    sets.unite(e.first, e.second);
  }
  Components out;
  out.label.assign(n, -1);
  std::vector<int> id_of_root(n, -1);
  for (int b = 0; b < n; ++b) {
    const int root = sets.find(b);
    if (id_of_root[root] < 0) id_of_root[root] = out.count++;
    out.label[b] = id_of_root[root];
  }
  return out;
}

int richness(std::span<const BallPair> sigma, int n) {
  int blocks = 0;
  DisjointSets sets(n);
  for (const auto& e : sigma) {
    check_pair(e, n);
    sets.unite(e.first, e.second);
    if (sets.sets() == 1) {
      ++blocks;
      sets = DisjointSets(n);
    }
  }
  return blocks;
}

int richness_exhaustive(std::span<const BallPair> sigma, int n) {
  const std::size_t len = sigma.size();
  if (len == 0 || len > 24) throw Error(ErrorCode::BadDimension, "exhaustive richness needs 1..24 collisions");
  auto connected = [&](std::size_t from, std::size_t to) {
    return components(sigma.subspan(from, to - from), n).count == 1;
  };
  int best = 0;
  // bit k of `cuts` places a cut after position k
  for (std::uint32_t cuts = 0; cuts < (1u << (len - 1)); ++cuts) {
    int blocks = 0;
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t k = 0; k < len && ok; ++k) {
      if (k + 1 == len || (cuts >> k) & 1u) {
        ok = connected(start, k + 1);
        ++blocks;
        start = k + 1;
      }
    }
    if (ok) best = std::max(best, blocks);
  }
  return best;
}

Rational threshold_C(int n) {
  if (n < 2) throw Error(ErrorCode::BadDimension, "C(N) needs N >= 2");
  Rational c(1);
  for (int k = 3; k <= n; ++k) c = Rational(k, 2) * std::max(c, Rational(3));
  return c;
}

long long richness_requirement(int n) {
  const Rational c = threshold_C(n);
  return (c.numerator() + c.denominator() - 1) / c.denominator();
}

std::optional<PropertyAViolation> check_property_A(const SymbolicScheme& s, bool exact) {
  const std::size_t n = s.pairs.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto [bi, bj] = s.pairs[k];
    double sum = 0.0;
    double magnitude = 0.0;
    for (std::size_t l = k + 1; l < n; ++l) {
      sum += s.time_slots[l];
      magnitude += std::abs(s.time_slots[l]);
      const auto [ci, cj] = s.pairs[l];
      const bool touches = ci == bi || ci == bj || cj == bi || cj == bj;
      if (!touches) continue;
      // the first collision meeting sigma_k ends the disjoint run
      if (s.pairs[l] == s.pairs[k] && s.adjustments[l] == s.adjustments[k]) {
        const bool violated = exact ? sum == 0.0 : std::abs(sum) <= 1e-12 * magnitude;
        if (violated) return PropertyAViolation{k + 1, l + 1};
      }
      break;
    }
  }
  return std::nullopt;
}

SchemeSummary summarize(const SymbolicScheme& s) {
  SchemeSummary out;
  out.n = s.size();
  out.p_sigma = components(s.pairs, s.n_balls).count;
  out.richness = richness(s.pairs, s.n_balls);
  out.property_a = !check_property_A(s).has_value();
  return out;
}

}  // namespace hardball
