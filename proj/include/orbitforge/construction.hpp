#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitforge/certification.hpp"
#include "orbitforge/combinatorics.hpp"
#include "orbitforge/config.hpp"

namespace orbitforge {

using BigInt = boost::multiprecision::cpp_int;

enum class Mode { Faithful, Tightened };
std::string to_string(Mode m);
Mode parse_mode(const std::string& text);

// A radius, exact or known only through a lower bound (as log10).
struct Requirement {
  bool exact = true;
  long long radius = 0;
  double log10_radius = 0;
  std::string reason;

  static Requirement exactly(long long r, std::string why = {});
  static Requirement at_least_log10(double lg, std::string why);
  bool exceeds(long long cap) const;
  std::string text() const;
  // Inverse of text().
  static Requirement parse(const std::string& text, std::string why = {});
};

// ---------------------------------------------------------------- parameters

struct CountingResult {
  std::vector<GroupElement> lambda;  // lambda_1..lambda_n
  FinSet Lambda;
  FinSet F;
  int n = 0;
};

// Least n >= 1 with 2^(n - p/q) >= (p/q) (c + n b)^2, decided exactly.
int counting_lemma_n(std::size_t c, std::size_t b, const BigInt& p, const BigInt& q, int n_cap = 1 << 20);
// |Lambda| >= log2(r |F|^2) + r, decided exactly.
bool counting_inequality(std::size_t lambda, std::size_t f, const BigInt& p, const BigInt& q);

// n defaults to counting_lemma_n; lambda_i are shortlex-greedy.
CountingResult counting_lemma(const GroupContext& G, const FinSet& B, const FinSet& C, const BigInt& p,
                              const BigInt& q, std::optional<int> n = std::nullopt);
CountingResult counting_lemma(const GroupContext& G, const FinSet& B, const FinSet& C, Rational r);

struct VerificationFunction {
  std::vector<std::pair<int, int>> pairs;  // positions in B, first <= second
  std::vector<GroupElement> v;             // aligned with pairs
  FinSet V;

  const GroupElement& at(int i, int j) const;
};

VerificationFunction make_verification_function(const GroupContext& G, const FinSet& B);

// F_w^-1 u F_w^-1 g^-1 with g the shortlex-least element outside F_w F_w^-1,
// together with the identity.
FinSet choose_A(const GroupContext& G, const SyndeticWitness& witness);
// Least k such that the first k shortlex elements A satisfy |A x n M| >= 2
// on ball(region); none if k would exceed k_max.
std::optional<FinSet> shortest_prefix_A(const Window& w, const std::vector<char>& inM, int region, std::size_t k_max);
// Index of the first x in ball(region) with |A x n M| < 2, or -1.
Index first_thin_point(const Window& w, const std::vector<char>& inM, const FinSet& A, int region);
// choose_A, or in tightened mode the shortlex prefix when it is smaller and
// passes on ball(valid - radius).
FinSet select_A(const Window& w, const std::vector<char>& inM, const SyndeticWitness& witness, Mode mode, int valid);

struct StepParameters {
  Mode mode = Mode::Faithful;
  FinSet A;
  int N = 0;
  FinSet B;
  VerificationFunction v;
  FinSet C;  // B^3 u V B^2, the counting lemma input
  CountingResult counting;
  int K = 0;
  int ell = 0;
  int kappa_bits = 0;
  BigInt beta;    // |B|^(3N+3)
  BigInt r_num;   // counting lemma ratio r = r_num / r_den
  BigInt r_den;
  long long degree_bound = 0;

  const FinSet& V() const { return v.V; }
  const FinSet& F() const { return counting.F; }
  const std::vector<GroupElement>& lambda() const { return counting.lambda; }
  // r(b) is the position of b in B.
  int code(const GroupElement& b) const { return static_cast<int>(B.position(b)); }
};

struct ParameterCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<ParameterCheck> check_parameters(const GroupContext& G, const StepParameters& p);

// Sets and radii fixed before touching the window.
struct StepPlan {
  StepParameters params;
  GroupElement s;
  FinSet T_R;
  std::vector<FinSet> H;  // H_m = B^(3m+1) F^-1 F B
  FinSet FB, VB, AL, BL;  // F B, V B, A Lambda, B Lambda
  FinSet Hprime;          // B^2 F^-1 F B^(3N+1)
  FinSet conj;            // {h s h^-1} and inverses, identity removed
  FinSet T_star, T_L;
  std::vector<FinSet> T_Delta_m, T_D;
  FinSet T_Delta, T_Rprime, T_block, W_Mprime, W_Rprime;
  std::vector<std::pair<std::string, int>> shrink;  // ordered chain of radius losses
  int total_shrink = 0;
  int core_margin = 0;  // r' - core

  int core_for(int r0) const { return r0 - total_shrink; }
};

struct PlanOptions {
  Mode mode = Mode::Faithful;
  std::size_t max_set = 200000;  // largest parameter set materialized
  long long max_radius = 10000000;
};

// Throws WindowExhausted (with required radius text) when the parameters
// cannot be materialized or exceed max_radius.
StepPlan plan_step(const GroupContext& G, const FinSet& A, const GroupElement& s, const FinSet& T_R,
                   const PlanOptions& opt, int min_core = 0);

// ---------------------------------------------------------------- the step

struct StageCheck {
  std::string stage;
  std::string name;
  bool pass = true;
  std::int64_t checked = 0;
  std::string detail;
};

struct DeltaPoint {
  Index x = -1;
  Index d = -1;
  int layer = 0;
  int b = 0;  // position in B with x = B[b] d
};

struct StepInput {
  WindowConfig cfg;  // phi, with M_{step-1} and R_1..R_{step-1} tags
  int step = 1;
  SyndeticWitness M_witness;
  FinSet T_R;
  GroupElement s;
  Mode mode = Mode::Faithful;
  int valid = 0;  // labels and tags are final on this ball
  int min_core = 1;
  PlanOptions options;
  std::optional<FinSet> A_override;
};

struct StepResult {
  StepPlan plan;
  WindowConfig cfg;   // phi'
  WindowConfig phi5;  // snapshot after parity coding of B offsets
  std::vector<PointSet> D;
  std::vector<DeltaPoint> Delta;
  PointSet Mprime, Rprime;
  std::vector<int> kappa;
  int kappa_colors = 0;
  SyndeticWitness M_witness, R_witness;
  int r0 = 0;
  int core = 0;
  int valid_after = 0;
  std::vector<StageCheck> checks;
  std::vector<Verification> verifications;

  bool pass() const;
};

// Radius needed for one step from input validity r0 to reach min_core.
int required_input_radius(const StepPlan& plan, int min_core);

StepResult ind_step(const StepInput& in);

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
  Mode mode = Mode::Faithful;
  int steps = 1;
  std::optional<int> radius;  // none = computed requirement
  int min_core = 1000;
  long long max_radius = 10000000;
  std::size_t max_set = 200000;
  Mode later_mode = Mode::Tightened;  // mode for steps >= 2 when mode is faithful
  bool tighten_later = false;
};

// Y and phi0 are functions of the group element; M_0 = X minus Y. Empty
// functions mean Y empty and phi0 = 0.
struct Seed {
  std::function<bool(const GroupElement&)> Y;
  std::function<int(const GroupElement&)> phi0;
  std::optional<FinSet> M_witness;  // otherwise the least covering ball
};

struct Refusal {
  int step = 0;
  Requirement required;
  std::string reason;
};

struct PipelineState {
  Mode mode_of(int step) const { return step <= 1 ? first_mode : later_mode; }
  Mode first_mode = Mode::Faithful, later_mode = Mode::Faithful;
  GroupContext group = GroupContext::lattice(1);
  WindowPtr window;
  int radius = 0;
  std::vector<GroupElement> s;
  std::vector<StepResult> steps;
  WindowConfig initial;
  WindowConfig current;
  std::optional<Refusal> refusal;
  std::vector<StageCheck> chain_checks;
  int core = 0;
  std::vector<std::pair<int, Requirement>> planned;  // per step input radius

  bool pass() const;
};

// Shortlex order of non-identity elements, skipping inverses and conjugates
// of earlier entries.
std::vector<GroupElement> blocking_sequence(const GroupContext& G, int n);
bool conjugate(const GroupContext& G, const GroupElement& a, const GroupElement& b);

// Least ball F with F (X minus Y) covering ball(scope), searching up to r_max.
std::optional<SyndeticWitness> complement_witness(const Window& w, const std::vector<char>& inM, int scope, int r_max);

PipelineState pipeline(const GroupContext& G, const Seed& seed, const PipelineOptions& opt);

struct FamilyResult {
  std::vector<std::vector<int>> bits;
  std::vector<WindowConfig> configs;
  Verification finite_bits;
};

FamilyResult family_builder(const PipelineState& state, const std::vector<std::vector<int>>& bit_sequences);

struct ApproximationResult {
  DensityResult M;
  PipelineState state;
  std::optional<WindowConfig> output;
  Rational symmetric_difference;
  std::int64_t core_points = 0;
  bool density_ok = false;
};

ApproximationResult approximate_with_free_map(const GroupContext& G, const std::function<bool(const GroupElement&)>& B_tags,
                                              Rational epsilon, int density_radius, const PipelineOptions& opt);

}  // namespace orbitforge
