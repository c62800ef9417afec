#include "rkhs_dpp/window.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>

#include "rkhs_dpp/errors.hpp"

namespace rdpp {

Window::Window(std::vector<SiteIndex> sites) : sites_(std::move(sites)) {
  for (std::size_t i = 1; i < sites_.size(); ++i) {
    if (sites_[i - 1] >= sites_[i]) {
      throw Error(ErrorKind::InvalidWindow, "sites must be strictly increasing");
    }
  }
}

Window Window::from_unsorted(std::vector<SiteIndex> sites) {
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw Error(ErrorKind::InvalidWindow, "duplicate site");
  }
  return Window(std::move(sites));
}

Window Window::interval(SiteIndex lo, SiteIndex hi) {
  std::vector<SiteIndex> sites;
  if (hi >= lo) {
    sites.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (SiteIndex s = lo; s <= hi; ++s) sites.push_back(s);
  }
  return Window(std::move(sites));
}

Window Window::symmetric(SiteIndex half_width) {
  if (half_width < 0) {
    throw Error(ErrorKind::InvalidWindow, "negative half width");
  }
  return interval(-half_width, half_width);
}

bool Window::contains(SiteIndex site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

std::optional<std::size_t> Window::index_of(SiteIndex site) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
  if (it == sites_.end() || *it != site) return std::nullopt;
  return static_cast<std::size_t>(it - sites_.begin());
}

std::size_t Window::require_index(SiteIndex site) const {
  if (auto i = index_of(site)) return *i;
  throw Error(ErrorKind::SiteNotInWindow,
              "site " + std::to_string(site) + " not in window " + label());
}

std::vector<std::size_t> Window::indices_of(const Window& sub) const {
  std::vector<std::size_t> out;
  out.reserve(sub.size());
  for (SiteIndex s : sub) out.push_back(require_index(s));
  return out;
}

bool Window::is_subset_of(const Window& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(),
                       sites_.end());
}

Window Window::filter(const std::function<bool(SiteIndex)>& keep) const {
  std::vector<SiteIndex> out;
  std::copy_if(sites_.begin(), sites_.end(), std::back_inserter(out), keep);
  return Window(std::move(out));
}

Window Window::without(SiteIndex site) const {
  return filter([site](SiteIndex s) { return s != site; });
}

Window Window::with(SiteIndex site) const {
  if (contains(site)) return *this;
  std::vector<SiteIndex> out = sites_;
  out.insert(std::lower_bound(out.begin(), out.end(), site), site);
  return Window(std::move(out));
}

std::string Window::label() const {
  std::ostringstream os;
  if (!sites_.empty() && sites_.back() - sites_.front() + 1 ==
                             static_cast<SiteIndex>(sites_.size()) &&
      sites_.size() > 1) {
    os << '[' << sites_.front() << ".." << sites_.back() << ']';
    return os.str();
  }
  os << '{';
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (i) os << ';';
    os << sites_[i];
  }
  os << '}';
  return os.str();
}

Window set_union(const Window& a, const Window& b) {
  std::vector<SiteIndex> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Window(std::move(out));
}

Window set_intersection(const Window& a, const Window& b) {
  std::vector<SiteIndex> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return Window(std::move(out));
}

Window set_difference(const Window& a, const Window& b) {
  std::vector<SiteIndex> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return Window(std::move(out));
}

bool disjoint(const Window& a, const Window& b) {
  return set_intersection(a, b).empty();
}

std::uint64_t to_bitmask(const Window& host, const Window& config) {
  if (host.size() > 64) {
    throw Error(ErrorKind::WindowTooLarge, "bitmask needs at most 64 sites");
  }
  std::uint64_t mask = 0;
  for (SiteIndex s : config) mask |= std::uint64_t{1} << host.require_index(s);
  return mask;
}

Configuration from_bitmask(const Window& host, std::uint64_t mask) {
  std::vector<SiteIndex> out;
  for (std::size_t i = 0; i < host.size(); ++i) {
    if (mask >> i & 1U) out.push_back(host[i]);
  }
  return Configuration(std::move(out));
}

// SiteRule

SiteRule SiteRule::stride(std::int64_t step, std::int64_t offset) {
  if (step < 1) throw Error(ErrorKind::InvalidArgument, "stride step must be >= 1");
  SiteRule r(Kind::Stride);
  r.step_ = step;
  r.offset_ = ((offset % step) + step) % step;
  return r;
}

SiteRule SiteRule::set(std::vector<SiteIndex> sites) {
  SiteRule r(Kind::Set);
  r.set_ = Window::from_unsorted(std::move(sites)).site_vector();
  return r;
}

bool SiteRule::operator()(SiteIndex s) const {
  switch (kind_) {
    case Kind::All: return true;
    case Kind::None: return false;
    case Kind::Even: return s % 2 == 0;
    case Kind::Odd: return s % 2 != 0;
    case Kind::Positive: return s > 0;
    case Kind::Negative: return s < 0;
    case Kind::Stride: return ((s % step_) + step_) % step_ == offset_;
    case Kind::Set: return std::binary_search(set_.begin(), set_.end(), s);
  }
  return false;
}

std::string SiteRule::describe() const {
  switch (kind_) {
    case Kind::All: return "all";
    case Kind::None: return "none";
    case Kind::Even: return "even";
    case Kind::Odd: return "odd";
    case Kind::Positive: return "positive";
    case Kind::Negative: return "negative";
    case Kind::Stride:
      return "stride(" + std::to_string(step_) + "," + std::to_string(offset_) + ")";
    case Kind::Set: return "set" + Window(set_).label();
  }
  return "?";
}

nlohmann::json SiteRule::to_json() const {
  switch (kind_) {
    case Kind::Stride:
      return {{"kind", "stride"}, {"step", step_}, {"offset", offset_}};
    case Kind::Set:
      return {{"kind", "set"}, {"sites", set_}};
    default:
      return {{"kind", describe()}};
  }
}

SiteRule SiteRule::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    if (kind == "all") return all();
    if (kind == "none") return none();
    if (kind == "even") return even();
    if (kind == "odd") return odd();
    if (kind == "positive") return positive();
    if (kind == "negative") return negative();
    if (kind == "stride") {
      return stride(j.at("step").get<std::int64_t>(), j.value("offset", std::int64_t{0}));
    }
    if (kind == "set") return set(j.at("sites").get<std::vector<SiteIndex>>());
    throw Error(ErrorKind::ConfigParse, "unknown site rule '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigParse, std::string("site rule: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigParse) throw;
    throw Error(ErrorKind::ConfigParse, e.what());
  }
}

Window enlarge(const Window& w, int factor) {
  if (factor < 1) throw Error(ErrorKind::InvalidArgument, "ambient factor must be >= 1");
  if (w.empty()) return w;
  // Work in doubled coordinates so the midpoint stays integral.
  const SiteIndex lo2 = 2 * w.front();
  const SiteIndex hi2 = 2 * w.back();
  const SiteIndex mid2 = (lo2 + hi2) / 2;
  const SiteIndex half2 = (hi2 - lo2) / 2 * factor;
  const SiteIndex lo = static_cast<SiteIndex>(std::floor((mid2 - half2) / 2.0));
  const SiteIndex hi = static_cast<SiteIndex>(std::ceil((mid2 + half2) / 2.0));
  return set_union(Window::interval(lo, hi), w);
}

std::vector<Window> symmetric_schedule(SiteIndex n_start, SiteIndex n_max, Growth growth,
                                       SiteIndex step) {
  if (n_start < 0 || n_max < n_start) {
    throw Error(ErrorKind::InvalidArgument, "schedule needs 0 <= n_start <= n_max");
  }
  if (growth == Growth::Linear && step < 1) {
    throw Error(ErrorKind::InvalidArgument, "linear schedule step must be >= 1");
  }
  std::vector<Window> out;
  for (SiteIndex n = n_start; n <= n_max;) {
    out.push_back(Window::symmetric(n));
    if (growth == Growth::Doubling) {
      n = n == 0 ? 1 : 2 * n;
    } else {
      n += step;
    }
  }
  return out;
}

bool is_nested_increasing(std::span<const Window> schedule) {
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!schedule[i - 1].is_subset_of(schedule[i]) ||
        schedule[i].size() <= schedule[i - 1].size()) {
      return false;
    }
  }
  return true;
}

}  // namespace rdpp
