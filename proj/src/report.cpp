#include "orbitforge/report.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "json.hpp"
#include "orbitforge/errors.hpp"

namespace orbitforge {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long parse_ll(const std::string& text, const std::string& what) {
  std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ParseError("expected an integer for " + what + ": '" + text + "'");
  }
  if (used != t.size()) throw ParseError("expected an integer for " + what + ": '" + text + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------- subsets

SubsetSpec SubsetSpec::parse(const std::string& text_in) {
  SubsetSpec s;
  std::string text = trim(text_in);
  s.text_ = text;
  std::stringstream ss(text);
  std::string part;
  bool none_seen = false;
  while (std::getline(ss, part, '|')) {
    std::string t = trim(part);
    if (t == "none") {
      none_seen = true;
      continue;
    }
    if (t == "all") {
      s.terms_.push_back({Term::Kind::All});
      continue;
    }
    auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')') throw ParseError("bad subset primitive: '" + t + "'");
    std::string head = trim(t.substr(0, open));
    std::string args = t.substr(open + 1, t.size() - open - 2);
    if (head == "ap") {
      auto comma = args.find(',');
      if (comma == std::string::npos) throw ParseError("ap needs two arguments: '" + t + "'");
      Term term{Term::Kind::Ap, parse_ll(args.substr(0, comma), "ap residue"), parse_ll(args.substr(comma + 1), "ap modulus")};
      if (term.b <= 0) throw ParseError("ap modulus must be positive: '" + t + "'");
      s.terms_.push_back(term);
    } else if (head == "ball") {
      Term term{Term::Kind::Ball, parse_ll(args, "ball radius"), 0};
      if (term.a < 0) throw ParseError("ball radius must be nonnegative: '" + t + "'");
      s.terms_.push_back(term);
    } else {
      throw ParseError("unknown subset primitive: '" + head + "'");
    }
  }
  if (s.terms_.empty() && !none_seen) throw ParseError("empty subset spec");
  return s;
}

bool SubsetSpec::contains(const GroupContext& G, const GroupElement& g) const {
  for (const auto& t : terms_) {
    switch (t.kind) {
      case Term::Kind::All:
        return true;
      case Term::Kind::Ball:
        if (G.length(g) <= t.a) return true;
        break;
      case Term::Kind::Ap: {
        long long c = G.kind() == GroupKind::Lattice ? g.data[0] : G.length(g);
        if (((c - t.a) % t.b + t.b) % t.b == 0) return true;
        break;
      }
    }
  }
  return false;
}

std::function<bool(const GroupElement&)> SubsetSpec::predicate(const GroupContext& G) const {
  if (terms_.empty()) return {};
  SubsetSpec copy = *this;
  return [copy, G](const GroupElement& g) { return copy.contains(G, g); };
}

// ---------------------------------------------------------------- rationals

Rational parse_rational(const std::string& text_in) {
  std::string t = trim(text_in);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = trim(t.substr(1, t.size() - 2));
  if (t.empty()) throw ParseError("empty rational");
  auto slash = t.find('/');
  if (slash != std::string::npos) {
    long long d = parse_ll(t.substr(slash + 1), "denominator");
    if (d == 0) throw ParseError("zero denominator: '" + t + "'");
    return Rational(parse_ll(t.substr(0, slash), "numerator"), d);
  }
  auto dot = t.find('.');
  if (dot == std::string::npos) return Rational(parse_ll(t, "rational"));
  std::string ip = t.substr(0, dot), fp = t.substr(dot + 1);
  bool neg = !ip.empty() && ip[0] == '-';
  if (neg) ip = ip.substr(1);
  if (fp.empty() || fp.size() > 15 || !std::all_of(fp.begin(), fp.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw ParseError("bad decimal: '" + t + "'");
  long long den = 1;
  for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
  long long num = (ip.empty() ? 0 : parse_ll(ip, "decimal")) * den + parse_ll(fp, "decimal");
  return Rational(neg ? -num : num, den);
}

std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// ---------------------------------------------------------------- run config

namespace {

json parse_value(const std::string& raw, const std::string& key) {
  std::string t = trim(raw);
  if (t.empty()) throw ParseError("missing value for key '" + key + "'");
  if (t.front() == '[' || t.front() == '"' || t.front() == '{' || std::isdigit(static_cast<unsigned char>(t.front())) ||
      t.front() == '-') {
    try {
      return json::parse(t);
    } catch (const json::exception& e) {
      if (t.front() == '[' || t.front() == '"' || t.front() == '{')
        throw ParseError("malformed value for key '" + key + "': " + e.what());
    }
  }
  return json(t);  // bare word or non-JSON number text
}

int as_int(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) return static_cast<int>(parse_ll(v.get<std::string>(), key));
  throw ParseError("expected an integer for key '" + key + "'");
}

std::string as_string(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ParseError("expected a string for key '" + key + "'");
}

std::vector<std::vector<int>> as_table(const json& v, const std::string& key) {
  if (!v.is_array()) throw ParseError("expected a list of lists for key '" + key + "'");
  std::vector<std::vector<int>> out;
  for (const auto& row : v) {
    if (!row.is_array()) throw ParseError("expected a list of lists for key '" + key + "'");
    std::vector<int> r;
    for (const auto& x : row) r.push_back(as_int(x, key));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<int> as_int_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ParseError("expected a list for key '" + key + "'");
  std::vector<int> out;
  for (const auto& x : v) out.push_back(as_int(x, key));
  return out;
}

std::vector<std::vector<int>> builtin_table(const std::string& name) {
  if (name == "S3") return FiniteGroup::symmetric3().mul;
  if (name == "Z/2xZ/2") return FiniteGroup::klein().mul;
  if (name.rfind("Z/", 0) == 0) return FiniteGroup::cyclic(static_cast<int>(parse_ll(name.substr(2), "cyclic order"))).mul;
  throw ParseError("unknown finite group '" + name + "' (Z/n, Z/2xZ/2, S3)");
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), raw = trim(line.substr(eq + 1));
    if (seen[key]++) throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    json v = parse_value(raw, key);
    try {
      if (key == "group") {
        c.group = as_string(v, key);
      } else if (key == "gen_order") {
        if (!v.is_array()) throw ParseError("expected a list of generator names for 'gen_order'");
        c.gen_order.clear();
        for (const auto& g : v) c.gen_order.push_back(as_string(g, key));
      } else if (key == "radius") {
        if (v.is_string() && v.get<std::string>() == "auto")
          c.radius.reset();
        else
          c.radius = as_int(v, key);
      } else if (key == "core") {
        c.core = as_int(v, key);
      } else if (key == "steps") {
        c.steps = as_int(v, key);
      } else if (key == "mode") {
        c.mode = parse_mode(as_string(v, key));
      } else if (key == "later_mode") {
        c.later_mode = parse_mode(as_string(v, key));
      } else if (key == "epsilon") {
        c.epsilon = parse_rational(raw);
      } else if (key == "density_target") {
        c.density_target = parse_rational(raw);
      } else if (key == "density_radius") {
        c.density_radius = as_int(v, key);
      } else if (key == "bits") {
        c.bits = as_table(v, key);
      } else if (key == "Y") {
        c.Y = SubsetSpec::parse(as_string(v, key));
      } else if (key == "phi0") {
        c.phi0 = SubsetSpec::parse(as_string(v, key));
      } else if (key == "B_tags") {
        c.B_tags = SubsetSpec::parse(as_string(v, key));
      } else if (key == "out") {
        c.out = as_string(v, key);
      } else if (key == "verbosity") {
        c.verbosity = as_int(v, key);
      } else if (key == "max_radius") {
        c.max_radius = parse_ll(as_string(v, key), key);
      } else if (key == "max_set") {
        c.max_set = static_cast<std::size_t>(parse_ll(as_string(v, key), key));
      } else if (key.rfind("measure_", 0) == 0) {
        if (!c.measure) c.measure.emplace();
        MeasureInput& m = *c.measure;
        if (key == "measure_group")
          m.group_table = builtin_table(as_string(v, key));
        else if (key == "measure_group_table")
          m.group_table = as_table(v, key);
        else if (key == "measure_action")
          m.action_table = as_table(v, key);
        else if (key == "measure_weights") {
          if (!v.is_array()) throw ParseError("expected a list of fractions for 'measure_weights'");
          m.weights.clear();
          for (const auto& w : v) m.weights.push_back(parse_rational(as_string(w, key)));
        } else if (key == "measure_partition")
          m.partition = as_int_list(v, key);
        else if (key == "measure_subset")
          m.subset = as_int_list(v, key);
        else if (key == "measure_element")
          m.element = as_int(v, key);
        else
          throw ParseError("unknown key '" + key + "'");
      } else {
        throw ParseError("unknown key '" + key + "'");
      }
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (c.steps < 1 || c.steps > kMaxSteps) throw ParseError("steps must lie in 1.." + std::to_string(kMaxSteps));
  if (c.core < 1) throw ParseError("core must be positive");
  if (c.radius && *c.radius < 1) throw ParseError("radius must be positive");
  if (c.epsilon <= Rational(0) || c.epsilon > Rational(1)) throw ParseError("epsilon must lie in (0, 1]");
  for (const auto& b : c.bits)
    for (int x : b)
      if (x != 0 && x != 1) throw ParseError("bit sequences hold only 0 and 1");
  (void)c.make_group();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read run config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

GroupContext RunConfig::make_group() const { return GroupContext::parse(group, gen_order); }

Seed RunConfig::make_seed() const {
  GroupContext G = make_group();
  Seed s;
  s.Y = Y.predicate(G);
  if (auto p = phi0.predicate(G)) s.phi0 = [p](const GroupElement& g) { return p(g) ? 1 : 0; };
  return s;
}

PipelineOptions RunConfig::pipeline_options() const {
  PipelineOptions o;
  o.mode = mode;
  o.later_mode = later_mode;
  o.tighten_later = mode == Mode::Faithful && later_mode == Mode::Tightened;
  o.steps = steps;
  o.radius = radius;
  o.min_core = core;
  o.max_radius = max_radius;
  o.max_set = max_set;
  return o;
}

FiniteAction make_action(const MeasureInput& in) {
  FiniteAction A;
  A.group = FiniteGroup::from_table("table", in.group_table);
  A.act = in.action_table;
  A.weights = in.weights;
  A.validate();
  return A;
}

// ---------------------------------------------------------------- bundles

DumpNames dump_names(const PipelineState& state) {
  DumpNames n;
  for (std::size_t k = 1; k <= state.steps.size(); ++k) {
    n.steps.push_back("step" + std::to_string(k) + ".dump");
    n.phi5.push_back("step" + std::to_string(k) + ".phi5.dump");
  }
  return n;
}

namespace {

json verification_json(const Verification& v) {
  return json{{"claim", v.claim},         {"verdict", to_string(v.verdict)},
              {"scope", v.scope},         {"points_checked", v.points_checked},
              {"failures", v.failures},   {"counterexample", v.counterexample.empty() ? json(nullptr) : json(v.counterexample)},
              {"detail", v.detail}};
}

json set_json(const GroupContext& G, const FinSet& S) {
  json a = json::array();
  for (const auto& g : S) a.push_back(G.format(g));
  return a;
}

FinSet set_from_json(const GroupContext& G, const json& a) {
  std::vector<GroupElement> v;
  for (const auto& s : a) v.push_back(G.parse_element(s.get<std::string>()));
  return G.make_set(std::move(v));
}

// Membership recomputed from a dump for a recognizability claim.
std::vector<char> claim_member(const WindowConfig& cfg, const json& c, int k) {
  const GroupContext& G = cfg.group();
  std::vector<char> member(static_cast<std::size_t>(cfg.size()));
  if (c["kind"] == "recognizable") {
    Tag t = Tag::parse(c["tag"].get<std::string>());
    for (Index x = 0; x < cfg.size(); ++x) member[x] = cfg.has_tag(x, t);
    return member;
  }
  FinSet B = set_from_json(G, c["B"]);
  Tag delta{Tag::Kind::Delta, k, 0}, D{Tag::Kind::D, k, c["layer"].get<int>()};
  for (Index x = 0; x < cfg.size(); ++x) {
    if (!cfg.has_tag(x, delta)) continue;
    for (const auto& bb : B) {
      Index d = cfg.window().mul(G.inv(bb), x);
      if (d >= 0 && cfg.has_tag(d, D)) {
        member[x] = 1;
        break;
      }
    }
  }
  return member;
}

// Attaches what verify needs to recompute the claim from dumps alone.
json claim_json(const GroupContext& G, const StepResult& r, int k, const Verification& v, const DumpNames& names,
                const std::string& input_dump) {
  json j = verification_json(v);
  const StepPlan& p = r.plan;
  const std::string step_dump = names.steps[k - 1], phi5_dump = names.phi5[k - 1];
  const std::string& c = v.claim;
  auto rec = [&](const std::string& tag, const FinSet& T, const std::string& dump) {
    j["kind"] = "recognizable";
    j["tag"] = tag;
    j["dump"] = dump;
    j["witness"] = set_json(G, T);
  };
  if (c.rfind("(i) ", 0) == 0) {
    j["kind"] = "disjoint";
    j["dump"] = step_dump;
  } else if (c.rfind("(ii) ", 0) == 0) {
    j["kind"] = "extension";
    j["dump"] = step_dump;
    j["input_dump"] = input_dump;
    j["core"] = r.core;
  } else if (c == "(iii) M' syndetic" || c == "(iii) R' syndetic") {
    bool m = c == "(iii) M' syndetic";
    j["kind"] = "syndetic";
    j["tag"] = Tag{m ? Tag::Kind::M : Tag::Kind::R, k, 0}.name();
    j["dump"] = step_dump;
    j["witness"] = set_json(G, m ? p.W_Mprime : p.W_Rprime);
  } else if (c == "(iii) R' recognizable") {
    rec(Tag{Tag::Kind::R, k, 0}.name(), p.T_Rprime, step_dump);
  } else if (c == "(iv) blocking s" || c == "(iv) blocking s^-1") {
    j["kind"] = "blocking";
    j["element"] = G.format(c == "(iv) blocking s" ? p.s : G.inv(p.s));
    j["dump"] = step_dump;
    j["witness"] = set_json(G, p.T_block);
  } else if (c == "Delta recognizable") {
    rec(Tag{Tag::Kind::Delta, k, 0}.name(), p.T_Delta, step_dump);
  } else if (c.rfind("Delta_", 0) == 0) {
    int m = std::stoi(c.substr(6));
    j["kind"] = "recognizable_delta_layer";
    j["step"] = k;
    j["layer"] = m;
    j["dump"] = phi5_dump;
    j["B"] = set_json(G, p.params.B);
    j["witness"] = set_json(G, p.T_Delta_m[m]);
  } else if (c.rfind("D_", 0) == 0) {
    int m = std::stoi(c.substr(2));
    rec(Tag{Tag::Kind::D, k, m}.name(), p.T_D[m], phi5_dump);
  } else {
    j["kind"] = "opaque";
  }
  if (j["kind"] == "recognizable" || j["kind"] == "recognizable_delta_layer") {
    const WindowConfig& cfg = j["dump"] == phi5_dump ? r.phi5 : r.cfg;
    auto table = pattern_table(cfg, claim_member(cfg, j, k), set_from_json(G, j["witness"]), v.scope);
    if (table) j["table"] = json{{"inside", table->inside}, {"outside", table->outside}};
  }
  return j;
}

std::string big(const BigInt& b) { return b.str(); }

}  // namespace

std::string bundle_text(const PipelineState& state, const RunConfig& cfg, const DumpNames& names) {
  const GroupContext& G = state.group;
  json b;
  b["format"] = "orbitforge-bundle v1";
  b["group"] = G.spec();
  b["mode"] = to_string(state.first_mode);
  b["later_mode"] = to_string(state.later_mode);
  b["steps_requested"] = cfg.steps;
  b["steps_built"] = state.steps.size();
  b["radius"] = state.radius;
  b["core"] = state.core;
  b["min_core"] = cfg.core;
  b["Y"] = cfg.Y.text();
  b["phi0"] = cfg.phi0.text();
  b["pass"] = state.pass();
  if (state.refusal) {
    b["refusal"] = json{{"step", state.refusal->step},
                        {"required_radius", state.refusal->required.text()},
                        {"exact", state.refusal->required.exact},
                        {"reason", state.refusal->reason}};
  } else {
    b["refusal"] = nullptr;
  }
  json planned = json::array();
  for (const auto& [k, req] : state.planned) planned.push_back(json{{"step", k}, {"input_radius", req.text()}});
  b["planned"] = planned;
  b["blocking_sequence"] = json::array();
  for (const auto& s : state.s) b["blocking_sequence"].push_back(G.format(s));
  b["dumps"] = json{{"initial", names.initial}, {"steps", names.steps}, {"phi5", names.phi5}};
  json steps = json::array();
  for (std::size_t i = 0; i < state.steps.size(); ++i) {
    const StepResult& r = state.steps[i];
    const StepParameters& P = r.plan.params;
    const int k = static_cast<int>(i) + 1;
    json s;
    s["step"] = k;
    s["s"] = G.format(r.plan.s);
    s["mode"] = to_string(P.mode);
    s["r0"] = r.r0;
    s["core"] = r.core;
    s["valid_after"] = r.valid_after;
    s["parameters"] = json{{"A", set_json(G, P.A)},
                           {"N", P.N},
                           {"B_size", P.B.size()},
                           {"V_size", P.V().size()},
                           {"F_size", P.F().size()},
                           {"F_radius", G.radius(P.F())},
                           {"n", P.counting.n},
                           {"K", P.K},
                           {"ell", P.ell},
                           {"kappa_bits", P.kappa_bits},
                           {"beta", big(P.beta)},
                           {"r", big(P.r_num) + "/" + big(P.r_den)},
                           {"degree_bound", P.degree_bound},
                           {"T_block_size", r.plan.T_block.size()},
                           {"T_block_radius", G.radius(r.plan.T_block)}};
    json shrink = json::array();
    for (const auto& [name, rad] : r.plan.shrink) shrink.push_back(json{{"stage", name}, {"radius", rad}});
    s["shrink"] = shrink;
    s["total_shrink"] = r.plan.total_shrink;
    json pc = json::array();
    for (const auto& c : check_parameters(G, P)) pc.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    s["parameter_checks"] = pc;
    json sc = json::array();
    for (const auto& c : r.checks)
      sc.push_back(json{{"stage", c.stage}, {"name", c.name}, {"pass", c.pass}, {"checked", c.checked}, {"detail", c.detail}});
    s["stage_checks"] = sc;
    s["kappa_colors"] = r.kappa_colors;
    s["Delta_size"] = r.Delta.size();
    json claims = json::array();
    const std::string input = k == 1 ? names.initial : names.steps[k - 2];
    for (const auto& v : r.verifications) claims.push_back(claim_json(G, r, k, v, names, input));
    s["claims"] = claims;
    s["pass"] = r.pass();
    steps.push_back(s);
  }
  b["steps"] = steps;
  json chain = json::array();
  for (const auto& c : state.chain_checks)
    chain.push_back(json{{"stage", c.stage}, {"name", c.name}, {"pass", c.pass}, {"checked", c.checked}, {"detail", c.detail}});
  b["chain_checks"] = chain;
  return b.dump(2) + "\n";
}

// ---------------------------------------------------------------- verify

namespace {

Verification recompute_disjoint(const WindowConfig& cfg, int k, const std::string& claim) {
  Verification v;
  v.claim = claim;
  v.scope = cfg.radius();
  const Index n = cfg.size();
  v.points_checked = n;
  Tag M{Tag::Kind::M, k, 0}, R{Tag::Kind::R, k, 0}, Mprev{Tag::Kind::M, k - 1, 0};
  std::int64_t nm = 0, nr = 0;
  for (Index x = 0; x < n; ++x) {
    bool m = cfg.has_tag(x, M), r = cfg.has_tag(x, R);
    nm += m;
    nr += r;
    if ((m && r) || ((m || r) && !cfg.has_tag(x, Mprev))) {
      if (!v.failures) v.counterexample = cfg.group().format(cfg.window().element(x));
      ++v.failures;
    }
  }
  v.verdict = v.failures ? Verdict::Fail : Verdict::Pass;
  v.detail = std::to_string(nm) + " points in M', " + std::to_string(nr) + " in R'";
  return v;
}

Verification recompute_extension(const WindowConfig& in, const WindowConfig& out, int k, int core,
                                 const std::string& claim) {
  Verification v;
  v.claim = claim;
  v.scope = out.radius();
  const Index n = out.size();
  v.points_checked = n;
  if (in.size() != n) {
    v.verdict = Verdict::Fail;
    v.failures = 1;
    v.detail = "input and output windows differ";
    return v;
  }
  const Index nc = out.window().ball_count(std::max(0, std::min(core, out.radius())));
  std::int64_t unlabeled = 0;
  for (Index x = 0; x < n; ++x) {
    if (in.label(x) != Label::Undefined && in.label(x) != out.label(x)) {
      if (!v.failures) v.counterexample = out.group().format(out.window().element(x));
      ++v.failures;
    }
    if (x >= nc || out.label(x) != Label::Undefined || out.has_tag(x, Tag{Tag::Kind::M, k, 0})) continue;
    bool in_r = false;
    for (int j = 1; j <= k && !in_r; ++j) in_r = out.has_tag(x, Tag{Tag::Kind::R, j, 0});
    if (!in_r) ++unlabeled;
  }
  v.failures += unlabeled;
  v.verdict = v.failures ? Verdict::Fail : Verdict::Pass;
  v.detail = "domain is X minus (M' u R' u R) on the core; " + std::to_string(unlabeled) + " stray unlabeled points";
  return v;
}

}  // namespace

VerifyOutcome verify_bundle(const std::string& bundle_path, const std::optional<std::string>& dump_path) {
  namespace fs = std::filesystem;
  std::ifstream bin(bundle_path);
  if (!bin) throw IoError("cannot read bundle '" + bundle_path + "'");
  json b;
  try {
    b = json::parse(bin);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed bundle: ") + e.what());
  }
  if (!b.contains("format") || b["format"] != "orbitforge-bundle v1") throw ParseError("not an orbitforge bundle");
  const fs::path dir = fs::path(bundle_path).parent_path();
  std::string last_step = b["dumps"]["steps"].empty() ? std::string{} : b["dumps"]["steps"].back().get<std::string>();

  std::map<std::string, WindowConfig> cache;
  auto load = [&](const std::string& name) -> const WindowConfig& {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    fs::path p = (dump_path && name == last_step) ? fs::path(*dump_path) : dir / name;
    std::ifstream in(p);
    if (!in) throw IoError("cannot read dump '" + p.string() + "'");
    return cache.emplace(name, read_dump(in)).first->second;
  };

  VerifyOutcome out;
  out.refused = !b["refusal"].is_null();
  for (const auto& s : b["steps"]) {
    const int k = s["step"].get<int>();
    for (const auto& c : s["claims"]) {
      ++out.claims;
      const std::string claim = c["claim"].get<std::string>();
      const std::string kind = c["kind"].get<std::string>();
      if (kind == "opaque") {
        out.diff.push_back("step " + std::to_string(k) + " " + claim + ": no recipe to recompute");
        ++out.mismatches;
        continue;
      }
      const WindowConfig& cfg = load(c["dump"].get<std::string>());
      const GroupContext& G = cfg.group();
      const int scope = c["scope"].get<int>();
      Verification v;
      if (kind == "disjoint") {
        v = recompute_disjoint(cfg, k, claim);
      } else if (kind == "extension") {
        v = recompute_extension(load(c["input_dump"].get<std::string>()), cfg, k, c["core"].get<int>(), claim);
      } else if (kind == "syndetic") {
        Tag t = Tag::parse(c["tag"].get<std::string>());
        std::vector<char> member(static_cast<std::size_t>(cfg.size()));
        for (Index x = 0; x < cfg.size(); ++x) member[x] = cfg.has_tag(x, t);
        v = verify_syndetic(cfg.window(), member, set_from_json(G, c["witness"]), scope);
      } else if (kind == "recognizable" || kind == "recognizable_delta_layer") {
        std::vector<char> member = claim_member(cfg, c, k);
        FinSet T = set_from_json(G, c["witness"]);
        v = verify_recognizable(cfg, member, T, scope);
        if (c.contains("table") && v.verdict != Verdict::Inconclusive) {
          PatternTable table{c["table"]["inside"].get<std::vector<std::string>>(),
                             c["table"]["outside"].get<std::vector<std::string>>()};
          Verification t = check_pattern_table(cfg, member, T, scope, table);
          if (!t.pass()) {
            v.verdict = Verdict::Fail;
            v.failures += t.failures;
            if (v.counterexample.empty()) v.counterexample = "uncertified pattern at " + t.counterexample;
          }
        }
      } else if (kind == "blocking") {
        v = verify_blocking(cfg, G.parse_element(c["element"].get<std::string>()), set_from_json(G, c["witness"]), scope);
      } else {
        throw ParseError("unknown claim kind '" + kind + "'");
      }
      const std::string verdict = to_string(v.verdict);
      const bool same = verdict == c["verdict"].get<std::string>() && v.failures == c["failures"].get<std::int64_t>() &&
                        v.points_checked == c["points_checked"].get<std::int64_t>();
      if (!v.pass()) ++out.failures;
      if (!same) {
        ++out.mismatches;
        out.diff.push_back("step " + std::to_string(k) + " " + claim + ": bundle " + c["verdict"].get<std::string>() +
                           " (" + std::to_string(c["failures"].get<std::int64_t>()) + " failures), dump " + verdict +
                           " (" + std::to_string(v.failures) + " failures" +
                           (v.counterexample.empty() ? std::string{} : ", first at " + v.counterexample) + ")");
      }
    }
  }
  return out;
}

}  // namespace orbitforge
