#include "orbitforge/window.hpp"

#include <cstdlib>
#include <unordered_map>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {
constexpr long double kMaxPoints = 6.0e8L;
}

Window::Window(GroupContext group, int radius) : group_(std::move(group)), radius_(radius) {
  if (radius < 0) throw ArgumentError("negative window radius");
  if (group_.ball_size(radius) > kMaxPoints)
    throw WindowExhausted("window of radius " + std::to_string(radius) + " is too large to materialize");
  if (group_.kind() == GroupKind::Lattice && group_.rank() == 1) {
    mode_ = Mode::Line;
    positive_first_ = group_.letter_order()[0] == 0;
    size_ = 2 * static_cast<Index>(radius) + 1;
    for (int r = 0; r <= radius; ++r) counts_.push_back(2 * static_cast<Index>(r) + 1);
    return;
  }
  if (group_.kind() == GroupKind::Lattice) {
    mode_ = Mode::Lattice;
    int d = group_.rank();
    long double box = 1;
    for (int i = 0; i < d; ++i) box *= 2.0L * radius + 1;
    if (box > 4.0e8L) throw WindowExhausted("lattice window box too large");
    box_.assign(static_cast<std::size_t>(box), -1);
    Index idx = 0;
    for (int len = 0; len <= radius; ++len) {
      for (const auto& g : group_.sphere(len)) {
        std::size_t key = 0;
        for (int i = 0; i < d; ++i) key = key * (2 * radius + 1) + static_cast<std::size_t>(g.data[i] + radius);
        box_[key] = static_cast<std::int32_t>(idx++);
        coords_.insert(coords_.end(), g.data.begin(), g.data.end());
      }
      counts_.push_back(idx);
    }
    size_ = idx;
    return;
  }
  mode_ = Mode::Free;
  std::unordered_map<GroupElement, Index, GroupElementHash> index;
  for (int len = 0; len <= radius; ++len) {
    for (auto& g : group_.sphere(len)) {
      index.emplace(g, static_cast<Index>(elems_.size()));
      elems_.push_back(std::move(g));
    }
    counts_.push_back(static_cast<Index>(elems_.size()));
  }
  size_ = static_cast<Index>(elems_.size());
  neighbor_.assign(group_.num_letters(), std::vector<Index>(elems_.size(), kOutside));
  for (int l = 0; l < group_.num_letters(); ++l) {
    GroupElement gl = group_.letter(l);
    for (Index x = 0; x < size_; ++x) {
      GroupElement y = group_.mul(gl, elems_[x]);
      auto it = index.find(y);
      if (it != index.end()) neighbor_[l][x] = it->second;
    }
  }
}

Window::Index Window::ball_count(int r) const {
  if (r < 0) return 0;
  if (r >= radius_) return size_;
  return counts_[r];
}

Window::Index Window::index_of(const GroupElement& g) const {
  if (group_.length(g) > radius_) return kOutside;
  switch (mode_) {
    case Mode::Line:
      return line_index(g.data[0]);
    case Mode::Lattice: {
      std::size_t key = 0;
      for (int i = 0; i < group_.rank(); ++i) key = key * (2 * radius_ + 1) + static_cast<std::size_t>(g.data[i] + radius_);
      return box_[key];
    }
    case Mode::Free: {
      Index x = 0;
      for (auto it = g.data.rbegin(); it != g.data.rend(); ++it) x = neighbor_[*it][x];
      return x;
    }
  }
  return kOutside;
}

GroupElement Window::element(Index i) const {
  switch (mode_) {
    case Mode::Line:
      return GroupElement{{line_coord(i)}};
    case Mode::Lattice: {
      int d = group_.rank();
      return GroupElement{std::vector<int>(coords_.begin() + i * d, coords_.begin() + (i + 1) * d)};
    }
    case Mode::Free:
      return elems_[i];
  }
  return {};
}

int Window::length(Index i) const {
  switch (mode_) {
    case Mode::Line:
      return static_cast<int>((i + 1) / 2);
    case Mode::Lattice: {
      int d = group_.rank(), n = 0;
      for (int k = 0; k < d; ++k) n += std::abs(coords_[i * d + k]);
      return n;
    }
    case Mode::Free:
      return static_cast<int>(elems_[i].data.size());
  }
  return 0;
}

Window::Offset Window::offset(const GroupElement& g) const {
  Offset o;
  o.length = group_.length(g);
  if (mode_ == Mode::Free)
    o.letters = g.data;
  else
    o.delta = g.data;
  return o;
}

std::vector<Window::Offset> Window::offsets(const FinSet& set) const {
  std::vector<Offset> out;
  out.reserve(set.size());
  for (const auto& g : set) out.push_back(offset(g));
  return out;
}

Window::Index Window::mul(const Offset& g, Index x) const {
  if (x < 0) return kOutside;
  switch (mode_) {
    case Mode::Line: {
      long c = static_cast<long>(line_coord(x)) + g.delta[0];
      if (c > radius_ || c < -radius_) return kOutside;
      return line_index(c);
    }
    case Mode::Lattice: {
      int d = group_.rank();
      int n = 0;
      std::size_t key = 0;
      for (int k = 0; k < d; ++k) {
        int c = coords_[x * d + k] + g.delta[k];
        n += std::abs(c);
        if (n > radius_) return kOutside;
        key = key * (2 * radius_ + 1) + static_cast<std::size_t>(c + radius_);
      }
      return box_[key];
    }
    case Mode::Free: {
      // Intermediate words never exceed max(|x|, |g x|), so applying the
      // letters one at a time inside the ball is exact.
      for (auto it = g.letters.rbegin(); it != g.letters.rend(); ++it) {
        x = neighbor_[*it][x];
        if (x < 0) return kOutside;
      }
      return x;
    }
  }
  return kOutside;
}

}  // namespace orbitforge
