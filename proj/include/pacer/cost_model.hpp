#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "pacer/errors.hpp"

namespace pacer {

// Latent per-period cost functions f(b) = c. A supplier maps our period bid
// to an actual spent amount; these are the analytic families the engine can
// be run and analyzed against. All values are immutable after construction.

struct MonomialCost {
    double coefficient = 1.0;  // C > 0, currency per bid^k
    double exponent = 1.0;     // k, any finite real

    MonomialCost() = default;
    MonomialCost(double coefficient, double exponent);
};

struct PolyTerm {
    double coefficient = 0.0;
    double exponent = 0.0;
};

// Sum of power terms with strictly decreasing exponents, evaluated on b > 0.
struct PolynomialCost {
    std::vector<PolyTerm> terms;

    explicit PolynomialCost(std::vector<PolyTerm> terms);

    double leading_coefficient() const { return terms.front().coefficient; }
    double max_exponent() const { return terms.front().exponent; }
    double min_exponent() const { return terms.back().exponent; }
    // C-tilde of the envelope bound: sum of |c_i|.
    double abs_coefficient_sum() const;
};

enum class CapMode {
    kCapAbove,  // min{inner(b), M}: per-period spend guard rail
    kCapBelow,  // max{inner(b), M}: enforced minimum spend
};

struct GuardedCost {
    std::variant<MonomialCost, PolynomialCost> inner;
    double cap = 0.0;  // M > 0
    CapMode mode = CapMode::kCapAbove;

    GuardedCost(MonomialCost inner, double cap, CapMode mode = CapMode::kCapAbove);
    GuardedCost(PolynomialCost inner, double cap, CapMode mode = CapMode::kCapAbove);
};

using CostFn = std::variant<MonomialCost, PolynomialCost, GuardedCost>;

// Evaluates f at a period bid. Pure and deterministic.
// Monomial/polynomial require bid > 0 (a monomial with k <= 0 has a
// singularity at 0); guarded accepts bid >= 0 and caps the inner value.
// Non-finite results raise EvalDomainError naming the offending term.
double evaluate(const MonomialCost& fn, double bid);
double evaluate(const PolynomialCost& fn, double bid);
double evaluate(const GuardedCost& fn, double bid);
double evaluate(const CostFn& fn, double bid);

// Which side of b = 1 the campaign operates on; picks the bounding exponent.
enum class BidRegime {
    kBelowOne,   // 0 < b < 1: bound with the minimal exponent k_m
    kAtLeastOne  // b >= 1: bound with the maximal exponent k_1
};

struct MonomialEnvelope {
    MonomialCost lower;  // c_1 * b^k_env
    MonomialCost upper;  // (sum |c_i|) * b^k_env
};

// Monomial bracket c_1*b^k_env <= poly(b) <= C~*b^k_env on the given regime.
// Only claimed for all-positive coefficients; rejects others.
MonomialEnvelope monomial_envelope(const PolynomialCost& poly, BidRegime regime);

// --- cost-expression mini-grammar -------------------------------------------
//
//   poly    := term ("+" term)*
//   term    := [COEF "*"] "b" ["^" EXP]
//   guarded := ("min" | "max") "(" poly "," M ")"
//
// Examples: "1*b^0.5", "min(1*b^2.3,100)", "2*b^2+3*b^1".
// Throws ContractViolation with a position diagnostic on malformed input.
CostFn parse_cost_expr(const std::string& text);

std::string to_string(const CostFn& fn);

}  // namespace pacer
