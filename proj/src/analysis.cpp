#include "pacer/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace pacer {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

void require_regime(bool cond, const std::string& what) {
    if (!cond) throw RegimeError(what);
}

double sum_span(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
}

}  // namespace

double fixed_point(double budget, int periods, double coefficient, double exponent, int t,
                   std::span<const double> cost_history) {
    require(periods >= 2, "periods must be >= 2");
    require(t >= 0 && t < periods, "period index out of range");
    require(coefficient > 0.0, "coefficient must be positive");
    require_regime(exponent != 0.0, "fixed point undefined for k = 0");
    const double numerator = budget - sum_span(cost_history);
    if (numerator <= 0.0) {
        throw EvalDomainError("remaining budget is non-positive; no fixed point");
    }
    return std::pow(numerator / (coefficient * (periods - t + 1)), 1.0 / exponent);
}

StabilityEstimate stability_multiplier(double exponent, int periods, int t) {
    require(t >= 0 && t < periods, "stability multiplier needs 0 <= t < T");
    const double horizon = static_cast<double>(periods - t);
    const double m = std::abs(1.0 - exponent * (horizon + 1.0) / horizon);
    return {m, m < 1.0};
}

double convergence_time_bound(double epsilon, double budget, int periods,
                              double coefficient, double exponent) {
    require(epsilon > 0.0, "epsilon must be positive");
    require(budget > 0.0 && coefficient > 0.0 && periods >= 2, "invalid campaign parameters");
    if (exponent == 1.0) return 1.0;
    const double contraction = std::abs(1.0 - exponent);
    require_regime(exponent > 0.0 && exponent < 2.0,
                   "convergence bound defined only for k in (0,2)");
    const double gamma = coefficient * periods / budget;
    return (exponent - 1.0) / exponent +
           std::log(std::abs(epsilon * std::pow(gamma, 1.0 / exponent) *
                             (1.0 - contraction))) /
               std::log(contraction);
}

double distance_bound(int t, double budget, int periods, double coefficient,
                      double exponent) {
    require(t >= 1, "distance bound defined for t >= 1");
    const double contraction = std::abs(1.0 - exponent);
    require_regime(contraction > 0.0 && contraction < 1.0,
                   "distance bound defined only inside the contraction regime");
    const double gamma = coefficient * periods / budget;
    return std::pow(gamma, -1.0 / exponent) *
           std::pow(contraction, t - 1.0 + 1.0 / exponent) / (1.0 - contraction);
}

InitialDistance max_initial_distance(double budget, int periods, double coefficient,
                                     double exponent) {
    require(periods >= 2, "periods must be >= 2");
    const double contraction = std::abs(1.0 - exponent);
    require_regime(contraction > 0.0 && contraction < 1.0,
                   "maximal initial distance defined only inside the contraction regime");
    const double argmax =
        std::pow(budget * contraction / (coefficient * periods), 1.0 / exponent);
    const double distance =
        std::abs((periods - contraction) / (contraction * (periods - 1.0)) * argmax);
    return {argmax, distance};
}

CyclePair two_cycle_points(double budget, int periods, double coefficient, double exponent,
                           double cap) {
    require_regime(exponent > 2.0, "two-cycle points exist only for k > 2");
    const double t_d = static_cast<double>(periods);
    require(cap > budget / (coefficient * t_d) && cap < budget,
            "two-cycle requires B/(CT) < M < B");
    const double bm_base = (budget - cap) * (budget - cap) /
                           (coefficient * (budget - cap - cap * t_d + cap * t_d * t_d));
    CyclePair pair;
    pair.b_minus = std::pow(bm_base, 1.0 / exponent);
    const bool capped_at_minus = coefficient * std::pow(pair.b_minus, exponent) > cap;
    pair.b_plus = capped_at_minus ? (budget - cap) / (cap * t_d) * pair.b_minus
                                  : cap * t_d / (budget - cap) * pair.b_minus;
    const bool capped_at_plus = coefficient * std::pow(pair.b_plus, exponent) > cap;
    pair.case_consistent = (capped_at_minus != capped_at_plus) && pair.b_minus > 0.0 &&
                           pair.b_plus > 0.0 && std::isfinite(pair.b_minus) &&
                           std::isfinite(pair.b_plus) && pair.b_minus != pair.b_plus;
    return pair;
}

bool two_cycle_excluded_case_real(double budget, double cap) {
    return cap > budget;
}

Regime classify_regime(double exponent) {
    require(std::isfinite(exponent), "exponent must be finite");
    if (exponent <= 0.0) return Regime::kUnstable;
    if (exponent < 1.0) return Regime::kStableSublinear;
    if (exponent == 1.0) return Regime::kOneIteration;
    if (exponent < 2.0) return Regime::kStableSuperlinear;
    return Regime::kGuardRailsRequired;
}

const char* regime_label(Regime regime) {
    switch (regime) {
        case Regime::kUnstable: return "unstable";
        case Regime::kStableSublinear: return "stable-sublinear";
        case Regime::kOneIteration: return "one-iteration";
        case Regime::kStableSuperlinear: return "stable-superlinear";
        case Regime::kGuardRailsRequired: return "guard-rails-required";
    }
    return "unknown";
}

namespace {

CostFn make_map_cost(double coefficient, double exponent, std::optional<double> cap) {
    if (cap) return GuardedCost(MonomialCost(coefficient, exponent), *cap);
    return CostFn(MonomialCost(coefficient, exponent));
}

}  // namespace

std::vector<MapSample> iterate_map(double budget, int periods, double coefficient,
                                   double exponent, std::optional<double> cap, int order,
                                   std::span<const double> bid_grid) {
    require(order == 1 || order == 2, "iterate order must be 1 or 2");
    const CostFn fn = make_map_cost(coefficient, exponent, cap);

    CampaignConfig config;
    config.budget = budget;
    config.periods = periods;
    config.initial_bid = 1.0;  // unused; steps take explicit state
    config.clamp_enabled = false;

    std::vector<MapSample> out;
    out.reserve(bid_grid.size());
    for (double b : bid_grid) {
        MapSample s;
        s.bid = b;
        try {
            if (b <= 0.0) throw EvalDomainError("non-positive grid bid");
            const double c0 = evaluate(fn, b);
            PacingState st0;
            st0.t = 0;
            st0.bid = b;
            const StepResult r0 = pace_step(config, st0, c0);
            double g = r0.next_bid;
            if (r0.exhausted || g <= 0.0) throw EvalDomainError("map leaves the domain");
            if (order == 2) {
                const double c1 = evaluate(fn, g);
                PacingState st1;
                st1.t = 1;
                st1.bid = g;
                st1.record_cost(c0);
                const StepResult r1 = pace_step(config, st1, c1);
                g = r1.next_bid;
                if (r1.exhausted || g <= 0.0) throw EvalDomainError("map leaves the domain");
            }
            s.value = g;
            s.valid = true;
        } catch (const EvalDomainError&) {
            s.valid = false;
        }
        out.push_back(s);
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    require(lo > 0.0 && hi > lo && points >= 2, "log grid needs 0 < lo < hi, points >= 2");
    std::vector<double> g;
    g.reserve(points);
    const double step = (std::log(hi) - std::log(lo)) / (points - 1);
    for (int i = 0; i < points; ++i) g.push_back(std::exp(std::log(lo) + i * step));
    return g;
}

int count_identity_crossings(std::span<const MapSample> samples) {
    int crossings = 0;
    bool have_prev = false;
    int prev_sign = 0;
    for (const auto& s : samples) {
        if (!s.valid) continue;
        const double h = s.value - s.bid;
        const int sign = h > 0.0 ? 1 : (h < 0.0 ? -1 : 0);
        if (sign == 0) continue;
        if (have_prev && sign != prev_sign) ++crossings;
        prev_sign = sign;
        have_prev = true;
    }
    return crossings;
}

int detect_cycle(std::span<const double> bids, int window, double rel_tol) {
    require(window >= 1, "cycle window must be positive");
    require(static_cast<int>(bids.size()) >= 2 * window,
            "trajectory too short for the requested cycle window");
    const std::size_t n = bids.size();
    for (int p = 1; p <= window; ++p) {
        bool match = true;
        for (std::size_t i = n - window; i < n; ++i) {
            const double a = bids[i];
            const double b = bids[i - p];
            const double scale = std::max(std::abs(a), std::abs(b));
            if (std::abs(a - b) > rel_tol * std::max(scale, 1e-300)) {
                match = false;
                break;
            }
        }
        if (match) return p;
    }
    return 0;
}

std::vector<double> tail_clusters(std::span<const double> bids, double gap) {
    if (bids.empty()) return {};
    std::vector<double> sorted(bids.begin(), bids.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> means;
    double sum = sorted[0];
    int count = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double prev = sorted[i - 1];
        if (prev > 0.0 && (sorted[i] - prev) / prev > gap) {
            means.push_back(sum / count);
            sum = 0.0;
            count = 0;
        }
        sum += sorted[i];
        ++count;
    }
    means.push_back(sum / count);
    return means;
}

double banach_time_bound(double epsilon, double lipschitz, double first_step_dist) {
    require(epsilon > 0.0, "epsilon must be positive");
    require_regime(lipschitz > 0.0 && lipschitz < 1.0, "Lipschitz constant must be in (0,1)");
    require(first_step_dist > 0.0, "first-step distance must be positive");
    return std::log((1.0 - lipschitz) * epsilon / first_step_dist) / std::log(lipschitz);
}

double first_step_distance(const CostFn& fn, double budget, int periods, double b0) {
    require(b0 > 0.0, "initial bid must be positive");
    const double c0 = evaluate(fn, b0);
    if (c0 <= 0.0) throw EvalDomainError("first-period cost must be positive");
    const double b1 = (budget - c0) / (c0 * periods) * b0;
    return std::abs(b1 - b0);
}

EnvelopeTimeBracket bracketed_convergence_bound(const PolynomialCost& poly, double budget,
                                                int periods, double epsilon,
                                                BidRegime regime, double b0) {
    const MonomialEnvelope env = monomial_envelope(poly, regime);
    const double contraction = std::abs(1.0 - env.lower.exponent);
    require_regime(contraction > 0.0 && contraction < 1.0,
                   "envelope exponent outside the (0,2) contraction regime");
    EnvelopeTimeBracket bracket;
    bracket.tau_lower_envelope = banach_time_bound(
        epsilon, contraction, first_step_distance(env.lower, budget, periods, b0));
    bracket.tau_upper_envelope = banach_time_bound(
        epsilon, contraction, first_step_distance(env.upper, budget, periods, b0));
    return bracket;
}

AnalysisReport make_analysis_report(double budget, int periods, double coefficient,
                                    double exponent, std::optional<double> cap,
                                    double epsilon) {
    AnalysisReport r;
    r.fixed_point = fixed_point(budget, periods, coefficient, exponent);
    r.lambda = stability_multiplier(exponent, periods).magnitude;
    r.gamma = coefficient * periods / budget;
    r.regime = classify_regime(exponent);
    const double contraction = std::abs(1.0 - exponent);
    if (contraction < 1.0) r.lipschitz = contraction;
    if (exponent > 0.0 && exponent < 2.0) {
        r.convergence_bound =
            convergence_time_bound(epsilon, budget, periods, coefficient, exponent);
    }
    if (contraction > 0.0 && contraction < 1.0) {
        r.max_initial_distance =
            max_initial_distance(budget, periods, coefficient, exponent).distance;
    }
    if (cap && exponent > 2.0 && *cap > budget / (coefficient * periods) && *cap < budget) {
        r.cycle = two_cycle_points(budget, periods, coefficient, exponent, *cap);
    }
    return r;
}

double fixed_point_numeric(const CostFn& fn, double budget, int periods) {
    const double target = budget / (periods + 1.0);
    double lo = 1e-12, hi = 1e12;
    // Cost families here are monotone increasing in b on (0, inf).
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        double v;
        try {
            v = evaluate(fn, mid);
        } catch (const EvalDomainError&) {
            hi = mid;
            continue;
        }
        (v < target ? lo : hi) = mid;
    }
    const double root = std::sqrt(lo * hi);
    const double residual = std::abs(evaluate(fn, root) - target);
    if (!(residual <= 1e-6 * target)) {
        throw EvalDomainError("cost function never meets the per-period spend target");
    }
    return root;
}

double polynomial_elasticity(const PolynomialCost& poly, double bid) {
    require(bid > 0.0, "elasticity needs bid > 0");
    double num = 0.0, den = 0.0;
    for (const auto& t : poly.terms) {
        const double v = t.coefficient * std::pow(bid, t.exponent);
        num += t.exponent * v;
        den += v;
    }
    if (den == 0.0) throw EvalDomainError("elasticity undefined where the cost vanishes");
    return num / den;
}

AnalysisReport make_polynomial_report(const PolynomialCost& poly, double budget,
                                      int periods) {
    AnalysisReport r;
    r.fixed_point = fixed_point_numeric(CostFn(poly), budget, periods);
    const double k_eff = polynomial_elasticity(poly, r.fixed_point);
    const double horizon = static_cast<double>(periods);
    r.lambda = std::abs(1.0 - k_eff * (horizon + 1.0) / horizon);
    const double contraction = std::abs(1.0 - k_eff);
    if (contraction < 1.0) r.lipschitz = contraction;
    r.regime = classify_regime(k_eff);
    return r;
}

std::string analysis_json(const AnalysisReport& report) {
    nlohmann::json j;
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j["fixed_point"] = report.fixed_point;
    j["lambda"] = opt(report.lambda);
    j["lipschitz"] = opt(report.lipschitz);
    j["gamma"] = opt(report.gamma);
    j["convergence_bound"] = opt(report.convergence_bound);
    j["max_initial_distance"] = opt(report.max_initial_distance);
    j["regime"] = regime_label(report.regime);
    if (report.cycle) {
        j["cycle"] = {{"b_minus", report.cycle->b_minus},
                      {"b_plus", report.cycle->b_plus},
                      {"case_consistent", report.cycle->case_consistent}};
    } else {
        j["cycle"] = nullptr;
    }
    return j.dump(2) + "\n";
}

}  // namespace pacer
