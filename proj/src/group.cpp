#include "orbitforge/group.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {

std::string lattice_axis(int dim, int i) {
  if (dim <= 3) return std::string(1, "xyz"[i]);
  return "x" + std::to_string(i + 1);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      std::string item = trim(s.substr(start, i - start));
      if (!item.empty()) out.push_back(item);
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

GroupContext::GroupContext(GroupKind kind, int rank, const std::vector<std::string>& gen_order)
    : kind_(kind), rank_(rank) {
  if (rank < 1) throw ArgumentError("group rank must be at least 1");
  if (kind == GroupKind::Free && rank > 26) throw ArgumentError("free group rank above 26 is not supported");
  if (gen_order.empty()) {
    for (int l = 0; l < 2 * rank; ++l) order_.push_back(l);
  } else {
    if (static_cast<int>(gen_order.size()) != 2 * rank)
      throw ParseError("gen_order must list all " + std::to_string(2 * rank) + " signed generators");
    for (const auto& name : gen_order) {
      int found = -1;
      for (int l = 0; l < 2 * rank; ++l)
        if (letter_name(l) == name) found = l;
      if (found < 0) throw ParseError("unknown generator name in gen_order: " + name);
      if (std::find(order_.begin(), order_.end(), found) != order_.end())
        throw ParseError("repeated generator in gen_order: " + name);
      order_.push_back(found);
    }
  }
  rank_of_.assign(2 * rank, 0);
  for (int i = 0; i < 2 * rank; ++i) rank_of_[order_[i]] = i;
}

GroupContext GroupContext::lattice(int dim, const std::vector<std::string>& gen_order) {
  return GroupContext(GroupKind::Lattice, dim, gen_order);
}

GroupContext GroupContext::free_group(int rank, const std::vector<std::string>& gen_order) {
  return GroupContext(GroupKind::Free, rank, gen_order);
}

GroupContext GroupContext::parse(std::string_view spec_in, const std::vector<std::string>& gen_order) {
  std::string spec = trim(spec_in);
  std::vector<std::string> order = gen_order;
  auto bracket = spec.find('[');
  if (bracket != std::string::npos) {
    if (spec.back() != ']') throw ParseError("malformed group spec: " + spec);
    auto inner = split_list(std::string_view(spec).substr(bracket + 1, spec.size() - bracket - 2));
    if (!order.empty() && order != inner) throw ParseError("conflicting generator orders in group spec");
    order = inner;
    spec = trim(spec.substr(0, bracket));
  }
  auto parse_rank = [&](std::size_t pos) {
    std::string digits = spec.substr(pos);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw ParseError("malformed group spec: " + std::string(spec_in));
    if (digits.size() > 3) throw ParseError("group rank too large: " + digits);
    return std::stoi(digits);
  };
  if (spec == "Z") return lattice(1, order);
  if (spec.rfind("Z^", 0) == 0) return lattice(parse_rank(2), order);
  if (spec.rfind("F_", 0) == 0) return free_group(parse_rank(2), order);
  throw ParseError("unsupported group (only Z^d and F_k): " + std::string(spec_in));
}

std::string GroupContext::letter_name(int l) const {
  int gen = l / 2;
  bool inverse = (l % 2) != 0;
  if (kind_ == GroupKind::Lattice) return lattice_axis(rank_, gen) + (inverse ? "-" : "+");
  char c = static_cast<char>('a' + gen);
  return std::string(1, inverse ? static_cast<char>(std::toupper(c)) : c);
}

std::vector<std::string> GroupContext::gen_order_names() const {
  std::vector<std::string> out;
  for (int l : order_) out.push_back(letter_name(l));
  return out;
}

std::string GroupContext::spec() const {
  std::string s = (kind_ == GroupKind::Lattice ? "Z^" : "F_") + std::to_string(rank_) + "[";
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (i) s += ",";
    s += letter_name(order_[i]);
  }
  return s + "]";
}

GroupElement GroupContext::identity() const {
  GroupElement e;
  if (kind_ == GroupKind::Lattice) e.data.assign(rank_, 0);
  return e;
}

GroupElement GroupContext::letter(int l) const {
  GroupElement g = identity();
  if (kind_ == GroupKind::Lattice)
    g.data[l / 2] = (l % 2) ? -1 : 1;
  else
    g.data.push_back(l);
  return g;
}

GroupElement GroupContext::from_letters(const std::vector<int>& letters) const {
  GroupElement g = identity();
  for (int l : letters) {
    if (l < 0 || l >= num_letters()) throw ArgumentError("letter out of range");
    if (kind_ == GroupKind::Lattice) {
      g.data[l / 2] += (l % 2) ? -1 : 1;
    } else if (!g.data.empty() && g.data.back() == inverse_letter(l)) {
      g.data.pop_back();
    } else {
      g.data.push_back(l);
    }
  }
  return g;
}

GroupElement GroupContext::from_coords(std::vector<int> coords) const {
  if (kind_ != GroupKind::Lattice || static_cast<int>(coords.size()) != rank_)
    throw ArgumentError("coordinate vector does not match group");
  return GroupElement{std::move(coords)};
}

std::vector<int> GroupContext::word(const GroupElement& g) const {
  if (kind_ == GroupKind::Free) return g.data;
  std::vector<int> w;
  for (int l : order_) {
    int c = g.data[l / 2];
    int count = (l % 2) ? std::max(-c, 0) : std::max(c, 0);
    w.insert(w.end(), count, l);
  }
  return w;
}

GroupElement GroupContext::mul(const GroupElement& a, const GroupElement& b) const {
  if (kind_ == GroupKind::Lattice) {
    GroupElement g = a;
    for (int i = 0; i < rank_; ++i) g.data[i] += b.data[i];
    return g;
  }
  std::size_t cancel = 0;
  while (cancel < a.data.size() && cancel < b.data.size() &&
         a.data[a.data.size() - 1 - cancel] == inverse_letter(b.data[cancel]))
    ++cancel;
  GroupElement g;
  g.data.reserve(a.data.size() + b.data.size() - 2 * cancel);
  g.data.insert(g.data.end(), a.data.begin(), a.data.end() - static_cast<long>(cancel));
  g.data.insert(g.data.end(), b.data.begin() + static_cast<long>(cancel), b.data.end());
  return g;
}

GroupElement GroupContext::inv(const GroupElement& a) const {
  GroupElement g;
  if (kind_ == GroupKind::Lattice) {
    g.data.resize(rank_);
    for (int i = 0; i < rank_; ++i) g.data[i] = -a.data[i];
    return g;
  }
  g.data.assign(a.data.rbegin(), a.data.rend());
  for (int& l : g.data) l = inverse_letter(l);
  return g;
}

int GroupContext::length(const GroupElement& a) const {
  if (kind_ == GroupKind::Free) return static_cast<int>(a.data.size());
  int n = 0;
  for (int c : a.data) n += std::abs(c);
  return n;
}

bool GroupContext::is_identity(const GroupElement& a) const {
  if (kind_ == GroupKind::Free) return a.data.empty();
  return std::all_of(a.data.begin(), a.data.end(), [](int c) { return c == 0; });
}

int GroupContext::compare(const GroupElement& a, const GroupElement& b) const {
  int la = length(a), lb = length(b);
  if (la != lb) return la < lb ? -1 : 1;
  if (kind_ == GroupKind::Free) {
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      int ra = rank_of_[a.data[i]], rb = rank_of_[b.data[i]];
      if (ra != rb) return ra < rb ? -1 : 1;
    }
    return 0;
  }
  // Sorted geodesic words: the first letter rank where the counts differ
  // decides; more copies of the smaller letter is the smaller word.
  for (int l : order_) {
    int ca = a.data[l / 2], cb = b.data[l / 2];
    if (l % 2) {
      ca = std::max(-ca, 0);
      cb = std::max(-cb, 0);
    } else {
      ca = std::max(ca, 0);
      cb = std::max(cb, 0);
    }
    if (ca != cb) return ca > cb ? -1 : 1;
  }
  return 0;
}

std::string GroupContext::format(const GroupElement& g) const {
  if (kind_ == GroupKind::Lattice) {
    std::string s;
    for (int i = 0; i < rank_; ++i) {
      if (i) s += ",";
      s += std::to_string(g.data[i]);
    }
    return s;
  }
  if (g.data.empty()) return "1";
  std::string s;
  for (int l : g.data) s += letter_name(l);
  return s;
}

GroupElement GroupContext::parse_element(std::string_view text_in) const {
  std::string text = trim(text_in);
  if (kind_ == GroupKind::Lattice) {
    auto parts = split_list(text);
    if (static_cast<int>(parts.size()) != rank_) throw ParseError("bad lattice element: " + text);
    std::vector<int> coords;
    for (const auto& p : parts) {
      char* end = nullptr;
      long v = std::strtol(p.c_str(), &end, 10);
      if (end == p.c_str() || *end != '\0' || v > 1'000'000'000L || v < -1'000'000'000L)
        throw ParseError("bad lattice coordinate: " + p);
      coords.push_back(static_cast<int>(v));
    }
    return from_coords(std::move(coords));
  }
  if (text == "1") return identity();
  if (text.empty()) throw ParseError("empty free group word");
  std::vector<int> letters;
  for (char c : text) {
    if (!std::isalpha(static_cast<unsigned char>(c))) throw ParseError("bad free group word: " + text);
    int gen = std::tolower(static_cast<unsigned char>(c)) - 'a';
    if (gen >= rank_) throw ParseError("generator out of range in word: " + text);
    letters.push_back(2 * gen + (std::isupper(static_cast<unsigned char>(c)) ? 1 : 0));
  }
  GroupElement g = from_letters(letters);
  if (g.data != letters) throw ParseError("word is not freely reduced: " + text);
  return g;
}

void GroupContext::sort_shortlex(std::vector<GroupElement>& v) const {
  std::sort(v.begin(), v.end(), [this](const GroupElement& a, const GroupElement& b) { return less(a, b); });
}

FinSet GroupContext::make_set(std::vector<GroupElement> elems) const {
  {
    std::unordered_set<GroupElement, GroupElementHash> seen;
    seen.reserve(elems.size() * 2);
    std::vector<GroupElement> unique;
    unique.reserve(elems.size());
    for (auto& g : elems)
      if (seen.insert(g).second) unique.push_back(std::move(g));
    elems = std::move(unique);
  }
  sort_shortlex(elems);
  FinSet s;
  s.elems_ = std::move(elems);
  s.index_.reserve(s.elems_.size() * 2);
  for (std::size_t i = 0; i < s.elems_.size(); ++i) s.index_.emplace(s.elems_[i], i);
  return s;
}

FinSet GroupContext::set_product(const FinSet& x, const FinSet& y) const {
  std::vector<GroupElement> out;
  out.reserve(x.size() * y.size());
  for (const auto& a : x)
    for (const auto& b : y) out.push_back(mul(a, b));
  return make_set(std::move(out));
}

FinSet GroupContext::set_inverse(const FinSet& x) const {
  std::vector<GroupElement> out;
  for (const auto& a : x) out.push_back(inv(a));
  return make_set(std::move(out));
}

FinSet GroupContext::translate(const GroupElement& g, const FinSet& x) const {
  std::vector<GroupElement> out;
  for (const auto& a : x) out.push_back(mul(g, a));
  return make_set(std::move(out));
}

FinSet GroupContext::right_translate(const FinSet& x, const GroupElement& g) const {
  std::vector<GroupElement> out;
  for (const auto& a : x) out.push_back(mul(a, g));
  return make_set(std::move(out));
}

FinSet GroupContext::set_union(const FinSet& x, const FinSet& y) const {
  std::vector<GroupElement> out(x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  return make_set(std::move(out));
}

FinSet GroupContext::set_difference(const FinSet& x, const FinSet& y) const {
  std::vector<GroupElement> out;
  for (const auto& a : x)
    if (!y.contains(a)) out.push_back(a);
  return make_set(std::move(out));
}

FinSet GroupContext::set_power(const FinSet& x, int k) const {
  if (k < 0) throw ArgumentError("negative set power");
  FinSet acc = make_set({identity()});
  for (int i = 0; i < k; ++i) acc = set_product(acc, x);
  return acc;
}

bool GroupContext::disjoint(const FinSet& x, const FinSet& y) const {
  const FinSet& small = x.size() <= y.size() ? x : y;
  const FinSet& large = x.size() <= y.size() ? y : x;
  for (const auto& a : small)
    if (large.contains(a)) return false;
  return true;
}

int GroupContext::radius(const FinSet& x) const {
  int r = -1;
  for (const auto& a : x) r = std::max(r, length(a));
  return r;
}

std::vector<GroupElement> GroupContext::sphere(int r) const {
  std::vector<GroupElement> out;
  if (r < 0) return out;
  if (r == 0) return {identity()};
  if (kind_ == GroupKind::Lattice) {
    std::vector<int> c(rank_, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
      if (i == rank_ - 1) {
        c[i] = left;
        out.push_back(GroupElement{c});
        if (left != 0) {
          c[i] = -left;
          out.push_back(GroupElement{c});
        }
        return;
      }
      for (int v = -left; v <= left; ++v) {
        c[i] = v;
        rec(i + 1, left - std::abs(v));
      }
    };
    rec(0, r);
    sort_shortlex(out);
    return out;
  }
  // Extending a lex-sorted list of words by letters in rank order keeps it sorted.
  std::vector<GroupElement> prev = {identity()};
  for (int len = 1; len <= r; ++len) {
    std::vector<GroupElement> next;
    for (const auto& w : prev)
      for (int l : order_) {
        if (!w.data.empty() && w.data.back() == inverse_letter(l)) continue;
        GroupElement g = w;
        g.data.push_back(l);
        next.push_back(std::move(g));
      }
    prev = std::move(next);
  }
  return prev;
}

FinSet GroupContext::ball(int r) const {
  if (r < 0) throw ArgumentError("negative ball radius");
  std::vector<GroupElement> out;
  if (kind_ == GroupKind::Free) {
    std::vector<GroupElement> layer = {identity()};
    out = layer;
    for (int len = 1; len <= r; ++len) {
      std::vector<GroupElement> next;
      for (const auto& w : layer)
        for (int l : order_) {
          if (!w.data.empty() && w.data.back() == inverse_letter(l)) continue;
          GroupElement g = w;
          g.data.push_back(l);
          next.push_back(std::move(g));
        }
      out.insert(out.end(), next.begin(), next.end());
      layer = std::move(next);
    }
  } else {
    for (int len = 0; len <= r; ++len) {
      auto s = sphere(len);
      out.insert(out.end(), s.begin(), s.end());
    }
  }
  return make_set(std::move(out));
}

long double GroupContext::ball_size(int r) const {
  if (r < 0) return 0;
  if (kind_ == GroupKind::Free) {
    if (rank_ == 1) return 2.0L * r + 1;
    long double q = 2.0L * rank_ - 1;
    return 1 + 2.0L * rank_ * (std::pow(q, static_cast<long double>(r)) - 1) / (q - 1);
  }
  // Number of lattice points with L1 norm <= r in dimension d.
  long double total = 0;
  long double binom_d = 1;  // C(d,k)
  long double binom_r = 1;  // C(r,k)
  long double pow2 = 1;
  for (int k = 0; k <= rank_ && k <= r; ++k) {
    total += pow2 * binom_d * binom_r;
    binom_d = binom_d * (rank_ - k) / (k + 1);
    binom_r = binom_r * (r - k) / (k + 1);
    pow2 *= 2;
  }
  return total;
}

void GroupContext::for_each_shortlex(int max_length, const std::function<bool(const GroupElement&)>& visit) const {
  for (int len = 0; len <= max_length; ++len)
    for (const auto& g : sphere(len))
      if (!visit(g)) return;
}

std::vector<GroupElement> GroupContext::enumerate_nonidentity(std::size_t n) const {
  std::vector<GroupElement> out;
  for (int len = 1; out.size() < n; ++len)
    for (const auto& g : sphere(len)) {
      out.push_back(g);
      if (out.size() == n) break;
    }
  return out;
}

}  // namespace orbitforge
