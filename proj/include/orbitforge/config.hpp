#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/window.hpp"

namespace orbitforge {

using Index = Window::Index;

enum class Label : std::uint8_t { Zero = 0, One = 1, Undefined = 2 };

inline Label label_of_bit(int bit) { return bit ? Label::One : Label::Zero; }

constexpr int kMaxSteps = 15;

// Region tags of one point. Bit k of m is M_k (k >= 0), bit k of r is R_k
// and bit k of delta is the Delta set of step k (k >= 1).
struct PointTags {
  std::uint16_t m = 0;
  std::uint16_t r = 0;
  std::uint16_t delta = 0;
  bool y = false;
};

struct Tag {
  enum class Kind { Y, M, R, Delta, D };
  Kind kind = Kind::Y;
  int step = 0;   // level for M/R, step for Delta/D
  int layer = 0;  // D only

  std::string name() const;
  // Accepts Y, M<k>, R<k>, Delta<k>, D<k>.<m>.
  static Tag parse(const std::string& text);
  friend bool operator==(const Tag&, const Tag&) = default;
};

// A partial {0,1}-labeling of a ball with per-point region tags.
class WindowConfig {
 public:
  WindowConfig() = default;  // empty, no window
  WindowConfig(WindowPtr window, int core_radius);

  const Window& window() const { return *window_; }
  const WindowPtr& window_ptr() const { return window_; }
  const GroupContext& group() const { return window_->group(); }
  int radius() const { return window_->radius(); }
  int core_radius() const { return core_radius_; }
  Index size() const { return window_->size(); }
  Index core_count() const { return window_->ball_count(core_radius_); }

  Label label(Index x) const { return labels_[x]; }
  const std::vector<Label>& labels() const { return labels_; }
  const PointTags& tags(Index x) const { return tags_[x]; }
  const std::vector<PointTags>& all_tags() const { return tags_; }
  // Layer of x in the D set of the given step, or -1.
  int d_layer(int step, Index x) const;
  bool has_tag(Index x, const Tag& t) const;
  // Tag mask helpers.
  int max_m_level() const;
  int max_r_level() const;
  int max_step() const;

  void set_core_radius(int core);
  void set_label(Index x, Label l) { labels_[x] = l; }
  void set_labels(std::vector<Label> labels);
  void add_tag(Index x, const Tag& t);
  void clear_tag(Index x, const Tag& t);

  friend bool operator==(const WindowConfig& a, const WindowConfig& b);

 private:
  WindowPtr window_;
  int core_radius_ = 0;
  std::vector<Label> labels_;
  std::vector<PointTags> tags_;
  std::vector<std::vector<std::int32_t>> d_layers_;  // d_layers_[step-1][x]
};

struct PartialPattern {
  FinSet domain;
  std::vector<std::uint8_t> values;  // aligned with domain order

  std::optional<int> at(const GroupElement& g) const {
    long p = domain.position(g);
    if (p < 0) return std::nullopt;
    return values[p];
  }
};

// The pattern g -> label(g^-1 x) on T, undefined points omitted.
PartialPattern tilde_eval(const WindowConfig& cfg, const GroupElement& x, const FinSet& T);
bool compatible(const PartialPattern& p, const PartialPattern& q);

// |{a in A : a x labeled 1 and not carrying any of r_tags}|.
int counting_function(const WindowConfig& cfg, const FinSet& A, const std::vector<Tag>& r_tags, const GroupElement& x);

// R_k points get bit w(k-1); unlabeled points of the deepest M level get 0.
WindowConfig paint_family(const WindowConfig& cfg, const std::vector<int>& w_bits);

void write_dump(const WindowConfig& cfg, std::ostream& out);
WindowConfig read_dump(std::istream& in);

}  // namespace orbitforge
