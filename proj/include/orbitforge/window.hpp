#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "orbitforge/group.hpp"

namespace orbitforge {

// The ball of a given radius around the identity, with its elements indexed
// in shortlex order (index 0 is the identity). Points of a free orbit are
// identified with group elements; g acts on a point x by left multiplication.
class Window {
 public:
  using Index = std::int64_t;
  static constexpr Index kOutside = -1;

  // Precompiled left multiplier x -> g*x.
  struct Offset {
    std::vector<int> delta;    // lattice: coordinate shift
    std::vector<int> letters;  // free: letters of g, applied right to left
    int length = 0;
  };

  Window(GroupContext group, int radius);

  const GroupContext& group() const { return group_; }
  int radius() const { return radius_; }
  Index size() const { return size_; }
  // Number of elements of length <= r; they are exactly the indices [0, ball_count(r)).
  Index ball_count(int r) const;

  Index index_of(const GroupElement& g) const;
  GroupElement element(Index i) const;
  int length(Index i) const;

  Offset offset(const GroupElement& g) const;
  std::vector<Offset> offsets(const FinSet& set) const;
  // g*x, or kOutside when it leaves the ball.
  Index mul(const Offset& g, Index x) const;
  Index mul(const GroupElement& g, Index x) const { return mul(offset(g), x); }

 private:
  enum class Mode { Line, Lattice, Free };

  int line_coord(Index i) const {
    Index half = (i + 1) / 2;
    bool odd = (i & 1) != 0;
    int c = static_cast<int>(half);
    return (odd == positive_first_) ? c : -c;
  }
  Index line_index(long c) const {
    if (c == 0) return 0;
    bool pos = c > 0;
    long a = pos ? c : -c;
    return (pos == positive_first_) ? 2 * a - 1 : 2 * a;
  }

  GroupContext group_;
  int radius_;
  Index size_ = 0;
  Mode mode_;
  bool positive_first_ = true;
  std::vector<Index> counts_;  // counts_[r] = ball_count(r)

  // Lattice (d >= 2)
  std::vector<int> coords_;
  std::vector<std::int32_t> box_;

  // Free
  std::vector<GroupElement> elems_;
  std::vector<std::vector<Index>> neighbor_;  // neighbor_[letter][x] = letter*x
};

using WindowPtr = std::shared_ptr<const Window>;

}  // namespace orbitforge
