#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace rdpp {

/// A site of the ground set E = Z.
using SiteIndex = std::int64_t;

/// Finite, strictly increasing list of sites. May be empty.
class Window {
 public:
  Window() = default;

  /// Throws InvalidWindow unless `sites` is strictly increasing.
  explicit Window(std::vector<SiteIndex> sites);

  /// Sorts; duplicates are rejected with InvalidWindow.
  static Window from_unsorted(std::vector<SiteIndex> sites);
  /// {lo, lo+1, ..., hi}; empty when hi < lo.
  static Window interval(SiteIndex lo, SiteIndex hi);
  /// {-n, ..., n}.
  static Window symmetric(SiteIndex half_width);

  std::span<const SiteIndex> sites() const { return sites_; }
  const std::vector<SiteIndex>& site_vector() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  SiteIndex operator[](std::size_t i) const { return sites_[i]; }
  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }
  SiteIndex front() const { return sites_.front(); }
  SiteIndex back() const { return sites_.back(); }

  bool contains(SiteIndex site) const;
  std::optional<std::size_t> index_of(SiteIndex site) const;
  /// Position of `site`, or SiteNotInWindow.
  std::size_t require_index(SiteIndex site) const;
  /// Positions of every site of `sub`; SiteNotInWindow when one is missing.
  std::vector<std::size_t> indices_of(const Window& sub) const;

  bool is_subset_of(const Window& other) const;
  Window filter(const std::function<bool(SiteIndex)>& keep) const;
  Window without(SiteIndex site) const;
  Window with(SiteIndex site) const;

  /// "[-n..n]" for contiguous windows, "{a;b;c}" otherwise.
  std::string label() const;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::vector<SiteIndex> sites_;
};

Window set_union(const Window& a, const Window& b);
Window set_intersection(const Window& a, const Window& b);
Window set_difference(const Window& a, const Window& b);
bool disjoint(const Window& a, const Window& b);

/// A point-process realization: a finite subset of some host window.
class Configuration : public Window {
 public:
  using Window::Window;
  Configuration() = default;
  explicit Configuration(const Window& w) : Window(w) {}
};

/// Bitmask over the positions of `host` (bit i set iff host[i] is in `config`).
std::uint64_t to_bitmask(const Window& host, const Window& config);
Configuration from_bitmask(const Window& host, std::uint64_t mask);

using SitePredicate = std::function<bool(SiteIndex)>;

/// Serializable site predicate used for partition sets R1/R2 and boundary
/// configurations xi.
class SiteRule {
 public:
  enum class Kind { All, None, Even, Odd, Positive, Negative, Stride, Set };

  static SiteRule all() { return SiteRule(Kind::All); }
  static SiteRule none() { return SiteRule(Kind::None); }
  static SiteRule even() { return SiteRule(Kind::Even); }
  static SiteRule odd() { return SiteRule(Kind::Odd); }
  static SiteRule positive() { return SiteRule(Kind::Positive); }
  static SiteRule negative() { return SiteRule(Kind::Negative); }
  /// Sites s with s = offset (mod step), step >= 1.
  static SiteRule stride(std::int64_t step, std::int64_t offset);
  static SiteRule set(std::vector<SiteIndex> sites);

  bool operator()(SiteIndex site) const;
  SitePredicate predicate() const {
    return [rule = *this](SiteIndex s) { return rule(s); };
  }

  Kind kind() const { return kind_; }
  std::string describe() const;

  nlohmann::json to_json() const;
  /// Throws ConfigParse on malformed input.
  static SiteRule from_json(const nlohmann::json& j);

 private:
  explicit SiteRule(Kind kind) : kind_(kind) {}

  Kind kind_ = Kind::All;
  std::int64_t step_ = 1;
  std::int64_t offset_ = 0;
  std::vector<SiteIndex> set_;
};

/// Convex hull of `w` stretched about its midpoint by `factor` (half-width
/// times factor), united with `w`. Factor 1 returns the hull.
Window enlarge(const Window& w, int factor);

enum class Growth { Doubling, Linear };

/// Symmetric windows {-n..n} for n = n_start, then doubling (or adding `step`)
/// while n <= n_max. n_start = 0 with doubling continues at 1.
std::vector<Window> symmetric_schedule(SiteIndex n_start, SiteIndex n_max,
                                       Growth growth = Growth::Doubling,
                                       SiteIndex step = 1);

/// Each window contains its predecessor and is strictly larger.
bool is_nested_increasing(std::span<const Window> schedule);

}  // namespace rdpp
