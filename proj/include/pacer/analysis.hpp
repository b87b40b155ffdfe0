#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pacer/cost_model.hpp"
#include "pacer/pacing.hpp"

namespace pacer {

// Closed-form and numerical analysis of the pacing map
//   G(b) = (B_r / (c(b) (T - t))) * b
// for monomial cost families c(b) = C b^k, optionally guard-railed at M.

// Fixed point of the period-t map given the costs already observed:
//   b* = ((B - sum(history)) / (C (T - t + 1)))^(1/k).
double fixed_point(double budget, int periods, double coefficient, double exponent,
                   int t = 0, std::span<const double> cost_history = {});

struct StabilityEstimate {
    double magnitude = 0.0;  // |1 - k (T-t+1)/(T-t)|
    bool stable = false;     // magnitude < 1
};
StabilityEstimate stability_multiplier(double exponent, int periods, int t = 0);

// Contraction-based convergence-time bound; defined for k in (0,2), k != 1
// (k = 1 converges in one iteration and returns 1 by convention).
double convergence_time_bound(double epsilon, double budget, int periods,
                              double coefficient, double exponent);

// Bound on |b_t - b*| after t steps from the worst admissible start.
double distance_bound(int t, double budget, int periods, double coefficient,
                      double exponent);

struct InitialDistance {
    double argmax_bid = 0.0;  // b0 attaining the bound
    double distance = 0.0;    // max |b1 - b0|
};
InitialDistance max_initial_distance(double budget, int periods, double coefficient,
                                     double exponent);

struct CyclePair {
    double b_minus = 0.0;
    double b_plus = 0.0;
    // True when the guard rail binds at exactly one of the two points, the
    // branch structure the closed forms assume.
    bool case_consistent = false;
};

// Two-cycle of the guard-railed map min{C b^k, M}, defined for k > 2 with
// B/(CT) < M < B. Rejects k <= 2 (the only period-2 solution there is the
// fixed point itself).
CyclePair two_cycle_points(double budget, int periods, double coefficient,
                           double exponent, double cap);

// Condition under which the discarded branch (cost uncapped at the low point,
// capped at the high one, "Case 2") would have a real root: it requires
// M > B, impossible for admissible parameters.
bool two_cycle_excluded_case_real(double budget, double cap);

enum class Regime {
    kUnstable,            // k <= 0
    kStableSublinear,     // k in (0,1)
    kOneIteration,        // k = 1
    kStableSuperlinear,   // k in (1,2)
    kGuardRailsRequired,  // k >= 2
};
Regime classify_regime(double exponent);
const char* regime_label(Regime regime);

struct MapSample {
    double bid = 0.0;
    double value = 0.0;  // G(bid) or G(G(bid))
    bool valid = false;
};

// Samples the first or second iterate of the early-campaign map over a bid
// grid; per-point evaluation failures are recorded, not fatal.
std::vector<MapSample> iterate_map(double budget, int periods, double coefficient,
                                   double exponent, std::optional<double> cap, int order,
                                   std::span<const double> bid_grid);

// Logarithmic grid spanning [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);

// Sign changes of value - bid across consecutive valid samples.
int count_identity_crossings(std::span<const MapSample> samples);

// Smallest period p <= window such that the last 2*window bids satisfy
// b[i] ~= b[i-p] (relative tolerance) on the final window positions.
// Returns 1 for a settled trajectory, 0 if nothing periodic fits.
int detect_cycle(std::span<const double> bids, int window, double rel_tol = 1e-6);

// Distinct tail values up to a relative gap: sorted values are split where
// neighbours differ by more than `gap` relative; returns cluster means.
std::vector<double> tail_clusters(std::span<const double> bids, double gap = 0.25);

// Banach time bound in the first-step-distance form:
//   tau = ln((1-L) eps / |b1 - b0|) / ln(L).
double banach_time_bound(double epsilon, double lipschitz, double first_step_distance);

// |Algorithm-1(b0, fn) - b0| at t = 0.
double first_step_distance(const CostFn& fn, double budget, int periods, double b0);

struct EnvelopeTimeBracket {
    double tau_lower_envelope = 0.0;  // at c_1 b^k_env
    double tau_upper_envelope = 0.0;  // at (sum |c_i|) b^k_env
};

// Banach time bounds at the two envelope monomials of a polynomial cost; the
// polynomial's own bound computed the same way lands between them.
EnvelopeTimeBracket bracketed_convergence_bound(const PolynomialCost& poly, double budget,
                                                int periods, double epsilon,
                                                BidRegime regime, double b0);

struct AnalysisReport {
    double fixed_point = 0.0;
    std::optional<double> lambda;
    std::optional<double> lipschitz;
    std::optional<double> gamma;
    std::optional<double> convergence_bound;
    std::optional<double> max_initial_distance;
    Regime regime = Regime::kUnstable;
    std::optional<CyclePair> cycle;
};

AnalysisReport make_analysis_report(double budget, int periods, double coefficient,
                                    double exponent, std::optional<double> cap,
                                    double epsilon);

// Report for a polynomial cost: numeric fixed point plus elasticity-based
// stability; the monomial-only fields stay null.
AnalysisReport make_polynomial_report(const PolynomialCost& poly, double budget,
                                      int periods);

// Numeric fixed point of an arbitrary cost function: solves
// f(b) = B/(T+1) by bisection on a log bracket.
double fixed_point_numeric(const CostFn& fn, double budget, int periods);

// Local exponent d ln f / d ln b of a polynomial at b.
double polynomial_elasticity(const PolynomialCost& poly, double bid);

std::string analysis_json(const AnalysisReport& report);

}  // namespace pacer
