#include <algorithm>

#include "vcot/error.hpp"
#include "vcot/z3proof.hpp"

namespace vcot::z3proof {

namespace {

using L = RuleLevel;
using C = RuleCategory;

// Descriptions are written for the model prompts: what the step establishes
// and how it usually surfaces in a Verus proof.
constexpr RuleInfo kRules[] = {
    {"lemma", L::High, C::Lemma,
     "Closes a hypothetical sub-proof: a contradiction reached under assumption P yields not P. In Verus this "
     "usually becomes a lemma function, a proof block, or a run of assertions."},
    {"th-lemma", L::High, C::TheoryLemma,
     "A clause that is valid in a background theory (linear arithmetic, arrays, bit-vectors, ...) and is "
     "emitted by the theory solver without further justification."},
    {"mp", L::High, C::ModusPonens, "From a proof of P and a proof of P => Q (or P = Q), derives Q."},
    {"mp~", L::High, C::ModusPonens, "Like mp, but the bridge between P and Q is an equisatisfiability step (P ~ Q)."},
    {"unit-resolution", L::High, C::UnitResolution,
     "Resolves a clause against unit literals, striking the complementary literals out of the clause."},
    {"quant-intro", L::High, C::Quantifier,
     "Lifts an equivalence of bodies f(x) <=> g(x) to an equivalence of the quantified formulas."},
    {"quant-inst", L::High, C::Quantifier,
     "Instantiates a universally quantified formula with concrete terms: (forall x. phi) => phi[t/x]."},
    {"skolemize", L::High, C::Quantifier,
     "Replaces an existentially bound variable by a fresh Skolem constant or function."},

    {"asserted", L::Medium, std::nullopt, "An input assertion: a hypothesis, precondition, or axiom of the query."},
    {"hypothesis", L::Medium, std::nullopt, "Opens a local assumption that a later lemma step discharges."},
    {"and-elim", L::Medium, std::nullopt, "Projects one conjunct out of a proven conjunction."},
    {"not-or-elim", L::Medium, std::nullopt,
     "From the negation of a disjunction, derives the negation of one disjunct."},
    {"trans", L::Medium, std::nullopt, "Chains x = y and y = z into x = z."},
    {"trans*", L::Medium, std::nullopt, "Chains an arbitrary sequence of equalities into one equality."},
    {"monotonicity", L::Medium, std::nullopt,
     "Congruence: equal arguments give equal applications, f(a1..an) = f(b1..bn)."},
    {"der", L::Medium, std::nullopt,
     "Destructive equality resolution: drops a bound variable x constrained by x = t by substituting t."},
    {"rewrite", L::Medium, std::nullopt, "One simplifier step t1 = t2 justified by built-in rewriting."},
    {"rewrite*", L::Medium, std::nullopt, "A batch of simplifier steps folded into a single equality."},
    {"def-axiom", L::Medium, std::nullopt,
     "A Tseitin-style clause describing a boolean connective, used during clausification."},
    {"apply-def", L::Medium, std::nullopt, "Replaces an introduced name by the definition it stands for."},

    {"true", L::Low, std::nullopt, "Proves the constant true."},
    {"=/~", L::Low, std::nullopt, "Trivial equality or equisatisfiability between identical terms."},
    {"iff-true", L::Low, std::nullopt, "From a proof of P, derives P <=> true."},
    {"iff-false", L::Low, std::nullopt, "From a proof of not P, derives P <=> false."},
    {"goal", L::Low, std::nullopt, "Marks the formula being proven."},
    {"refl", L::Low, std::nullopt, "Reflexivity: t = t."},
    {"symm", L::Low, std::nullopt, "Symmetry: from t1 = t2, derives t2 = t1."},
    {"commutativity", L::Low, std::nullopt, "Swaps the arguments of a commutative operator."},
    {"pull-quant", L::Low, std::nullopt, "Moves a quantifier outwards across a connective when no capture occurs."},
    {"push-quant", L::Low, std::nullopt, "Distributes a quantifier over the conjuncts of its body."},
    {"elim-unused", L::Low, std::nullopt, "Drops quantified variables that do not occur in the body."},
    {"distributivity", L::Low, std::nullopt, "Expands or factors an operator over another (e.g. * over +, and over or)."},
    {"nnf-pos", L::Low, std::nullopt, "Negation normal form conversion in a positive context."},
    {"nnf-neg", L::Low, std::nullopt, "Negation normal form conversion in a negative context."},
    {"iff-oeq", L::Low, std::nullopt, "Weakens an equivalence P <=> Q to an equisatisfiability P ~ Q."},
    {"def-intro", L::Low, std::nullopt, "Introduces a fresh name as an abbreviation for a subformula."},
};

struct Alias {
  std::string_view spelling;
  std::string_view canonical;
};

// Spellings Z3's proof printer uses for rules whose table name differs.
constexpr Alias kAliases[] = {
    {"sk", "skolemize"}, {"intro-def", "def-intro"}, {"iff~", "iff-oeq"}, {"=", "=/~"}, {"~", "=/~"},
};

}  // namespace

std::span<const RuleInfo> rule_table() { return kRules; }

const RuleInfo* find_rule(std::string_view name) {
  for (const auto& a : kAliases)
    if (a.spelling == name) name = a.canonical;
  auto it = std::find_if(std::begin(kRules), std::end(kRules), [&](const RuleInfo& r) { return r.name == name; });
  return it == std::end(kRules) ? nullptr : &*it;
}

RuleLevel classify_rule(std::string_view rule_name, bool lenient) {
  if (const auto* info = find_rule(rule_name)) return info->level;
  if (lenient) return RuleLevel::Low;
  throw UnknownRule(std::string(rule_name));
}

std::optional<RuleCategory> categorize_rule(std::string_view rule_name) {
  if (const auto* info = find_rule(rule_name)) return info->category;
  return std::nullopt;
}

std::string_view to_string(RuleLevel level) {
  switch (level) {
    case RuleLevel::High: return "high";
    case RuleLevel::Medium: return "medium";
    case RuleLevel::Low: return "low";
  }
  return "?";
}

std::string_view to_string(RuleCategory category) {
  switch (category) {
    case RuleCategory::Lemma: return "lemma";
    case RuleCategory::TheoryLemma: return "theory-lemma";
    case RuleCategory::ModusPonens: return "modus-ponens";
    case RuleCategory::Quantifier: return "quantifier";
    case RuleCategory::UnitResolution: return "unit-resolution";
  }
  return "?";
}

std::optional<RuleCategory> parse_category(std::string_view name) {
  for (auto c : kAllCategories)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::optional<RuleLevel> parse_level(std::string_view name) {
  for (auto l : kAllLevels)
    if (to_string(l) == name) return l;
  return std::nullopt;
}

}  // namespace vcot::z3proof
