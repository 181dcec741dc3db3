#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace orbitforge {

enum class GroupKind { Lattice, Free };

// Normal form of a group element.
//  Lattice Z^d: the coordinate vector (size d).
//  Free F_k: the freely reduced word as a letter sequence.
// Letters are numbered l in [0, 2k): generator l/2, inverse when l is odd.
struct GroupElement {
  std::vector<int> data;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (int v : g.data) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(v))) * 0x100000001b3ULL;
    return h;
  }
};

class GroupContext;

// Finite subset of a group, deduplicated and stored in shortlex order.
// Only a GroupContext creates these, so the order is always its own.
class FinSet {
 public:
  FinSet() = default;

  const std::vector<GroupElement>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const GroupElement& operator[](std::size_t i) const { return elems_[i]; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  bool contains(const GroupElement& g) const { return index_.count(g) != 0; }
  // Position in shortlex order, or -1.
  long position(const GroupElement& g) const {
    auto it = index_.find(g);
    return it == index_.end() ? -1 : static_cast<long>(it->second);
  }

  friend bool operator==(const FinSet& a, const FinSet& b) { return a.elems_ == b.elems_; }

 private:
  friend class GroupContext;
  std::vector<GroupElement> elems_;
  std::unordered_map<GroupElement, std::size_t, GroupElementHash> index_;
};

class GroupContext {
 public:
  // gen_order lists the signed generator names in shortlex rank order;
  // empty means the default (x+,x-,y+,y-,... or a,A,b,B,...).
  static GroupContext lattice(int dim, const std::vector<std::string>& gen_order = {});
  static GroupContext free_group(int rank, const std::vector<std::string>& gen_order = {});
  // "Z^d" or "F_k", optionally followed by "[name,name,...]".
  static GroupContext parse(std::string_view spec, const std::vector<std::string>& gen_order = {});

  GroupKind kind() const { return kind_; }
  int rank() const { return rank_; }
  int num_letters() const { return 2 * rank_; }
  bool abelian() const { return kind_ == GroupKind::Lattice || rank_ == 1; }

  // Canonical spec string including generator order, e.g. "Z^1[x+,x-]".
  std::string spec() const;
  std::string letter_name(int letter) const;
  std::vector<std::string> gen_order_names() const;
  // letter_order()[i] is the letter of rank i.
  const std::vector<int>& letter_order() const { return order_; }
  int letter_rank(int letter) const { return rank_of_[letter]; }
  static int inverse_letter(int l) { return l ^ 1; }

  GroupElement identity() const;
  GroupElement letter(int l) const;
  // Normal form of the product of the given letters, left to right.
  GroupElement from_letters(const std::vector<int>& letters) const;
  GroupElement from_coords(std::vector<int> coords) const;
  // Shortlex-least geodesic word spelling g.
  std::vector<int> word(const GroupElement& g) const;

  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;
  int length(const GroupElement& a) const;
  bool is_identity(const GroupElement& a) const;

  // Shortlex comparison: negative, zero or positive.
  int compare(const GroupElement& a, const GroupElement& b) const;
  bool less(const GroupElement& a, const GroupElement& b) const { return compare(a, b) < 0; }

  // Lattice: comma-separated integers. Free: letters a..z, inverses A..Z, identity "1".
  std::string format(const GroupElement& g) const;
  GroupElement parse_element(std::string_view text) const;

  FinSet make_set(std::vector<GroupElement> elems) const;
  FinSet set_product(const FinSet& x, const FinSet& y) const;
  FinSet set_inverse(const FinSet& x) const;
  FinSet translate(const GroupElement& g, const FinSet& x) const;
  FinSet right_translate(const FinSet& x, const GroupElement& g) const;
  FinSet set_union(const FinSet& x, const FinSet& y) const;
  FinSet set_difference(const FinSet& x, const FinSet& y) const;
  FinSet set_power(const FinSet& x, int k) const;
  bool disjoint(const FinSet& x, const FinSet& y) const;
  // Largest word length in the set; -1 for the empty set.
  int radius(const FinSet& x) const;

  FinSet ball(int r) const;
  // Elements of length exactly r, in shortlex order.
  std::vector<GroupElement> sphere(int r) const;
  // Closed-form size of ball(r); saturates at the maximum of long double range.
  long double ball_size(int r) const;
  std::vector<GroupElement> enumerate_nonidentity(std::size_t n) const;

  // Calls visit(g) for elements in shortlex order starting at the identity
  // until visit returns false or max_length is exceeded.
  void for_each_shortlex(int max_length, const std::function<bool(const GroupElement&)>& visit) const;

  friend bool operator==(const GroupContext& a, const GroupContext& b) {
    return a.kind_ == b.kind_ && a.rank_ == b.rank_ && a.order_ == b.order_;
  }

 private:
  GroupContext(GroupKind kind, int rank, const std::vector<std::string>& gen_order);
  void sort_shortlex(std::vector<GroupElement>& v) const;

  GroupKind kind_;
  int rank_;
  std::vector<int> order_;
  std::vector<int> rank_of_;
};

}  // namespace orbitforge
