#include "orbitforge/config.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {

int parse_int(const std::string& s, const std::string& what) {
  if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ParseError("bad " + what + ": " + s);
  return std::stoi(s);
}

int highest_bit(unsigned v) {
  int h = -1;
  for (int k = 0; v; ++k, v >>= 1)
    if (v & 1) h = k;
  return h;
}

}  // namespace

std::string Tag::name() const {
  switch (kind) {
    case Kind::Y: return "Y";
    case Kind::M: return "M" + std::to_string(step);
    case Kind::R: return "R" + std::to_string(step);
    case Kind::Delta: return "Delta" + std::to_string(step);
    case Kind::D: return "D" + std::to_string(step) + "." + std::to_string(layer);
  }
  return "?";
}

Tag Tag::parse(const std::string& text) {
  Tag t;
  if (text == "Y") return t;
  if (text.rfind("Delta", 0) == 0) {
    t.kind = Kind::Delta;
    t.step = parse_int(text.substr(5), "tag");
  } else if (!text.empty() && text[0] == 'M') {
    t.kind = Kind::M;
    t.step = parse_int(text.substr(1), "tag");
  } else if (!text.empty() && text[0] == 'R') {
    t.kind = Kind::R;
    t.step = parse_int(text.substr(1), "tag");
  } else if (!text.empty() && text[0] == 'D') {
    auto dot = text.find('.');
    if (dot == std::string::npos) throw ParseError("bad D tag: " + text);
    t.kind = Kind::D;
    t.step = parse_int(text.substr(1, dot - 1), "tag");
    t.layer = parse_int(text.substr(dot + 1), "tag");
  } else {
    throw ParseError("unknown tag: " + text);
  }
  if (t.step > kMaxSteps || ((t.kind == Kind::R || t.kind == Kind::Delta || t.kind == Kind::D) && t.step < 1))
    throw ParseError("tag level out of range: " + text);
  return t;
}

WindowConfig::WindowConfig(WindowPtr window, int core_radius)
    : window_(std::move(window)), core_radius_(core_radius) {
  if (core_radius_ > window_->radius()) throw ArgumentError("core radius exceeds ball radius");
  labels_.assign(window_->size(), Label::Undefined);
  tags_.assign(window_->size(), PointTags{});
}

void WindowConfig::set_core_radius(int core) {
  if (core > radius()) throw ArgumentError("core radius exceeds ball radius");
  core_radius_ = core;
}

void WindowConfig::set_labels(std::vector<Label> labels) {
  if (static_cast<Index>(labels.size()) != size()) throw ArgumentError("label vector size mismatch");
  labels_ = std::move(labels);
}

int WindowConfig::d_layer(int step, Index x) const {
  if (step < 1 || step > static_cast<int>(d_layers_.size()) || d_layers_[step - 1].empty()) return -1;
  return d_layers_[step - 1][x];
}

bool WindowConfig::has_tag(Index x, const Tag& t) const {
  const PointTags& p = tags_[x];
  switch (t.kind) {
    case Tag::Kind::Y: return p.y;
    case Tag::Kind::M: return (p.m >> t.step) & 1;
    case Tag::Kind::R: return (p.r >> t.step) & 1;
    case Tag::Kind::Delta: return (p.delta >> t.step) & 1;
    case Tag::Kind::D: return d_layer(t.step, x) == t.layer;
  }
  return false;
}

void WindowConfig::add_tag(Index x, const Tag& t) {
  PointTags& p = tags_[x];
  switch (t.kind) {
    case Tag::Kind::Y: p.y = true; break;
    case Tag::Kind::M: p.m |= static_cast<std::uint16_t>(1u << t.step); break;
    case Tag::Kind::R: p.r |= static_cast<std::uint16_t>(1u << t.step); break;
    case Tag::Kind::Delta: p.delta |= static_cast<std::uint16_t>(1u << t.step); break;
    case Tag::Kind::D: {
      if (static_cast<int>(d_layers_.size()) < t.step) d_layers_.resize(t.step);
      auto& v = d_layers_[t.step - 1];
      if (v.empty()) v.assign(size(), -1);
      v[x] = t.layer;
      break;
    }
  }
}

void WindowConfig::clear_tag(Index x, const Tag& t) {
  PointTags& p = tags_[x];
  switch (t.kind) {
    case Tag::Kind::Y: p.y = false; break;
    case Tag::Kind::M: p.m &= static_cast<std::uint16_t>(~(1u << t.step)); break;
    case Tag::Kind::R: p.r &= static_cast<std::uint16_t>(~(1u << t.step)); break;
    case Tag::Kind::Delta: p.delta &= static_cast<std::uint16_t>(~(1u << t.step)); break;
    case Tag::Kind::D:
      if (d_layer(t.step, x) == t.layer) d_layers_[t.step - 1][x] = -1;
      break;
  }
}

int WindowConfig::max_m_level() const {
  unsigned acc = 0;
  for (const auto& p : tags_) acc |= p.m;
  return highest_bit(acc);
}

int WindowConfig::max_r_level() const {
  unsigned acc = 0;
  for (const auto& p : tags_) acc |= p.r;
  return highest_bit(acc);
}

int WindowConfig::max_step() const {
  unsigned acc = 0;
  for (const auto& p : tags_) acc |= p.r | p.delta;
  int s = highest_bit(acc);
  for (int k = 0; k < static_cast<int>(d_layers_.size()); ++k)
    if (!d_layers_[k].empty()) s = std::max(s, k + 1);
  return std::max(s, 0);
}

bool operator==(const WindowConfig& a, const WindowConfig& b) {
  if (!(a.group() == b.group()) || a.radius() != b.radius() || a.core_radius_ != b.core_radius_) return false;
  if (a.labels_ != b.labels_) return false;
  for (Index x = 0; x < a.size(); ++x) {
    const auto &p = a.tags_[x], &q = b.tags_[x];
    if (p.m != q.m || p.r != q.r || p.delta != q.delta || p.y != q.y) return false;
  }
  int steps = static_cast<int>(std::max(a.d_layers_.size(), b.d_layers_.size()));
  for (int s = 1; s <= steps; ++s)
    for (Index x = 0; x < a.size(); ++x)
      if (a.d_layer(s, x) != b.d_layer(s, x)) return false;
  return true;
}

PartialPattern tilde_eval(const WindowConfig& cfg, const GroupElement& x, const FinSet& T) {
  const Window& w = cfg.window();
  const GroupContext& G = cfg.group();
  Index xi = w.index_of(x);
  if (xi == Window::kOutside) throw WindowExhausted("tilde_eval: point outside the ball");
  std::vector<GroupElement> dom;
  std::vector<std::uint8_t> vals;
  for (const auto& g : T) {
    Index p = w.mul(G.inv(g), xi);
    if (p == Window::kOutside) throw WindowExhausted("tilde_eval: window " + G.format(g) + " leaves the ball");
    Label l = cfg.label(p);
    if (l == Label::Undefined) continue;
    dom.push_back(g);
    vals.push_back(static_cast<std::uint8_t>(l));
  }
  PartialPattern out;
  out.domain = G.make_set(dom);
  out.values.resize(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i) out.values[out.domain.position(dom[i])] = vals[i];
  return out;
}

bool compatible(const PartialPattern& p, const PartialPattern& q) {
  const PartialPattern& small = p.domain.size() <= q.domain.size() ? p : q;
  const PartialPattern& large = p.domain.size() <= q.domain.size() ? q : p;
  for (std::size_t i = 0; i < small.domain.size(); ++i) {
    auto v = large.at(small.domain[i]);
    if (v && *v != small.values[i]) return false;
  }
  return true;
}

int counting_function(const WindowConfig& cfg, const FinSet& A, const std::vector<Tag>& r_tags, const GroupElement& x) {
  const Window& w = cfg.window();
  Index xi = w.index_of(x);
  if (xi == Window::kOutside) throw WindowExhausted("counting_function: point outside the ball");
  int c = 0;
  for (const auto& a : A) {
    Index p = w.mul(a, xi);
    if (p == Window::kOutside) throw WindowExhausted("counting_function: A x leaves the ball");
    if (cfg.label(p) != Label::One) continue;
    bool tagged = std::any_of(r_tags.begin(), r_tags.end(), [&](const Tag& t) { return cfg.has_tag(p, t); });
    if (!tagged) ++c;
  }
  return c;
}

WindowConfig paint_family(const WindowConfig& cfg, const std::vector<int>& w_bits) {
  int n = cfg.max_r_level();
  if (n > 0 && static_cast<int>(w_bits.size()) < n)
    throw ArgumentError("paint_family: need " + std::to_string(n) + " bits, got " + std::to_string(w_bits.size()));
  int deepest = cfg.max_m_level();
  WindowConfig out = cfg;
  for (Index x = 0; x < cfg.size(); ++x) {
    const PointTags& t = cfg.tags(x);
    if (t.r) {
      int k = highest_bit(t.r);
      out.set_label(x, label_of_bit(w_bits[k - 1] != 0));
    } else if (cfg.label(x) == Label::Undefined && deepest >= 0 && ((t.m >> deepest) & 1)) {
      out.set_label(x, Label::Zero);
    }
  }
  for (Index x = 0; x < cfg.core_count(); ++x)
    if (out.label(x) == Label::Undefined)
      throw ArgumentError("paint_family: core point " + cfg.group().format(cfg.window().element(x)) + " left unlabeled");
  return out;
}

void write_dump(const WindowConfig& cfg, std::ostream& out) {
  out << "orbitforge-config v1; group=" << cfg.group().spec() << "; R=" << cfg.radius() << "; core=" << cfg.core_radius()
      << "\n";
  int steps = cfg.max_step();
  std::string line;
  for (Index x = 0; x < cfg.size(); ++x) {
    line = cfg.group().format(cfg.window().element(x));
    Label l = cfg.label(x);
    line += l == Label::Zero ? " 0 " : l == Label::One ? " 1 " : " U ";
    const PointTags& t = cfg.tags(x);
    std::string tags;
    auto add = [&](const std::string& s) {
      if (!tags.empty()) tags += ",";
      tags += s;
    };
    if (t.y) add("Y");
    for (int k = 0; k <= kMaxSteps; ++k)
      if ((t.m >> k) & 1) add("M" + std::to_string(k));
    for (int k = 1; k <= kMaxSteps; ++k)
      if ((t.r >> k) & 1) add("R" + std::to_string(k));
    for (int k = 1; k <= kMaxSteps; ++k)
      if ((t.delta >> k) & 1) add("Delta" + std::to_string(k));
    for (int k = 1; k <= steps; ++k) {
      int layer = cfg.d_layer(k, x);
      if (layer >= 0) add("D" + std::to_string(k) + "." + std::to_string(layer));
    }
    line += tags.empty() ? "-" : tags;
    line += '\n';
    out << line;
  }
}

WindowConfig read_dump(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty dump");
  const std::string magic = "orbitforge-config v1; group=";
  if (header.rfind(magic, 0) != 0) throw ParseError("bad dump header");
  auto rpos = header.find("; R=");
  auto cpos = header.find("; core=");
  if (rpos == std::string::npos || cpos == std::string::npos || cpos < rpos) throw ParseError("bad dump header");
  std::string spec = header.substr(magic.size(), rpos - magic.size());
  int radius = parse_int(header.substr(rpos + 4, cpos - rpos - 4), "radius");
  int core = parse_int(header.substr(cpos + 7), "core radius");
  GroupContext G = GroupContext::parse(spec);
  auto window = std::make_shared<const Window>(G, radius);
  if (core > radius) throw ParseError("core radius exceeds radius in dump");
  WindowConfig cfg(window, core);
  std::string line;
  for (Index x = 0; x < window->size(); ++x) {
    if (!std::getline(in, line)) throw ParseError("truncated dump at record " + std::to_string(x));
    std::istringstream ls(line);
    std::string elem, label, tags, extra;
    if (!(ls >> elem >> label >> tags) || (ls >> extra)) throw ParseError("malformed dump record: " + line);
    if (window->index_of(G.parse_element(elem)) != x) throw ParseError("dump record out of shortlex order: " + elem);
    if (label == "0")
      cfg.set_label(x, Label::Zero);
    else if (label == "1")
      cfg.set_label(x, Label::One);
    else if (label != "U")
      throw ParseError("bad label in dump: " + label);
    if (tags != "-") {
      std::size_t start = 0;
      for (std::size_t i = 0; i <= tags.size(); ++i)
        if (i == tags.size() || tags[i] == ',') {
          cfg.add_tag(x, Tag::parse(tags.substr(start, i - start)));
          start = i + 1;
        }
    }
  }
  if (std::getline(in, line) && !line.empty()) throw ParseError("trailing data after dump records");
  return cfg;
}

}  // namespace orbitforge
