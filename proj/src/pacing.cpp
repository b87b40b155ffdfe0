#include "pacer/pacing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pacer {

namespace {

// Bids above this are meaningless (no affordable impression exists); holding
// there keeps the alpha-max fallback from overflowing to inf on long runs.
constexpr double kBidCeiling = 1e30;

void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

void format_double(char* buf, std::size_t n, double v, std::string* out) {
    auto [p, ec] = std::to_chars(buf, buf + n, v);
    out->append(buf, p);
}

}  // namespace

void CampaignConfig::validate() const {
    require(budget > 0.0 && std::isfinite(budget), "budget must be positive");
    require(periods >= 2, "campaign needs at least 2 periods");
    require(tolerance > 0.0, "tolerance must be positive");
    require(initial_bid >= 0.0 && std::isfinite(initial_bid), "initial bid must be >= 0");
    if (impressions_per_period) {
        require(*impressions_per_period > 0, "impressions per period must be positive");
    }
    if (clamp_enabled) {
        require(clamp.min > 0.0 && clamp.min < 1.0 && clamp.max > 1.0,
                "clamp must satisfy 0 < min < 1 < max");
    }
}

double CampaignConfig::resolved_initial_bid() const {
    if (initial_bid > 0.0) return initial_bid;
    if (impressions_per_period) {
        return budget / (static_cast<double>(*impressions_per_period) * periods);
    }
    return budget / periods;
}

void validate(const PacingSchedule& schedule, int periods) {
    if (const auto* s = std::get_if<ScaledSchedule>(&schedule)) {
        require(static_cast<int>(s->multipliers.size()) >= periods,
                "scaled schedule must cover every period");
        for (double k : s->multipliers) {
            require(k > 0.0 && k <= 1.0, "schedule multiplier must lie in (0,1]");
        }
    } else if (const auto* s = std::get_if<SubthresholdSchedule>(&schedule)) {
        require(s->threshold > 0.0, "subthreshold tau must be positive");
        require(s->sigma > 1.0, "subthreshold sigma must exceed 1");
    }
}

void PacingState::record_cost(double cost) {
    cost_history.push_back(cost);
    cumulative_spend += cost;
}

namespace {

StepResult step_with_budget(const CampaignConfig& config, const PacingState& state,
                            double cost, double pacing_budget) {
    require(state.t < static_cast<std::size_t>(config.periods), "period index out of range");
    require(cost >= 0.0 && std::isfinite(cost), "observed cost must be non-negative");

    StepResult r;
    const double spent = state.cumulative_spend + cost;
    const double true_remaining = config.budget - spent;
    if (true_remaining <= 0.0) {
        r.exhausted = true;
        return r;
    }
    const double pacing_remaining = pacing_budget - spent;
    if (pacing_remaining <= 0.0) {
        // Only a virtual remainder can go negative while the true budget holds.
        r.suppressed = true;
        return r;
    }

    const int periods_left = config.periods - static_cast<int>(state.t);
    double alpha;
    if (cost == 0.0) {
        if (!config.clamp_enabled) {
            std::ostringstream os;
            os << "zero observed cost at period " << state.t << " with clamping disabled";
            throw EvalDomainError(os.str());
        }
        alpha = config.clamp.max;
    } else {
        alpha = (pacing_remaining / periods_left) / cost;
        if (config.clamp_enabled) {
            alpha = std::clamp(alpha, config.clamp.min, config.clamp.max);
        }
    }
    r.alpha = alpha;
    r.next_bid = alpha * state.bid;
    if (!(r.next_bid < kBidCeiling)) {
        r.next_bid = state.bid;  // hold; ratio 1 stays inside any clamp
        r.alpha = 1.0;
    }
    return r;
}

}  // namespace

StepResult pace_step(const CampaignConfig& config, const PacingState& state, double cost) {
    return step_with_budget(config, state, cost, config.budget);
}

StepResult scaled_pace_step(const CampaignConfig& config, const PacingState& state,
                            double cost, double kappa) {
    require(kappa > 0.0 && kappa <= 1.0, "kappa must lie in (0,1]");
    return step_with_budget(config, state, cost, kappa * config.budget);
}

StepResult subthreshold_pace_step(const CampaignConfig& config, const PacingState& state,
                                  double cost, double threshold, double sigma) {
    require(threshold > 0.0, "subthreshold tau must be positive");
    require(sigma > 1.0, "subthreshold sigma must exceed 1");
    const double pacing_budget =
        config.budget < threshold ? sigma * config.budget : config.budget;
    return step_with_budget(config, state, cost, pacing_budget);
}

double AnalyticCostSource::observe(std::size_t, double bid, double remaining_budget) {
    const double raw = bid > 0.0 ? evaluate(fn_, bid) : 0.0;
    return std::min(raw, remaining_budget);
}

std::vector<double> Trajectory::bids() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.bid);
    return out;
}

std::vector<double> Trajectory::costs() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.cost);
    return out;
}

std::optional<int> sustained_convergence_period(std::span<const double> bids,
                                                double tolerance, int min_run) {
    if (bids.size() < 2) return std::nullopt;
    const int diffs = static_cast<int>(bids.size()) - 1;
    int start = diffs;
    for (int i = diffs - 1; i >= 0; --i) {
        if (std::abs(bids[i + 1] - bids[i]) < tolerance) {
            start = i;
        } else {
            break;
        }
    }
    if (diffs - start >= min_run) return start;
    return std::nullopt;
}

Trajectory run_campaign(const CampaignConfig& config, CostSource& source,
                        const PacingSchedule& schedule) {
    config.validate();
    validate(schedule, config.periods);

    PacingState state;
    state.bid = config.resolved_initial_bid();
    require(state.bid > 0.0, "initial bid must be positive");
    double last_positive_bid = state.bid;

    Trajectory traj;
    traj.records.reserve(config.periods);

    for (int t = 0; t < config.periods; ++t) {
        state.t = static_cast<std::size_t>(t);
        const double submitted = state.bid;
        const double remaining_before = state.remaining(config.budget);

        double multiplier = 1.0;
        double pacing_budget = config.budget;
        if (const auto* s = std::get_if<ScaledSchedule>(&schedule)) {
            multiplier = s->multipliers[static_cast<std::size_t>(t)];
            pacing_budget = multiplier * config.budget;
        } else if (const auto* s = std::get_if<SubthresholdSchedule>(&schedule)) {
            multiplier = config.budget < s->threshold ? s->sigma : 1.0;
            pacing_budget = multiplier * config.budget;
        }

        double cost = 0.0;
        if (submitted > 0.0) {
            cost = source.observe(state.t, submitted, remaining_before);
            if (!(cost >= 0.0) || !std::isfinite(cost)) {
                std::ostringstream os;
                os << "cost source returned an invalid value at period " << t;
                throw EvalDomainError(os.str());
            }
            cost = std::min(cost, remaining_before);
        }

        StepResult step;
        if (submitted > 0.0) {
            auto run_step = [&](const PacingState& st) {
                if (std::holds_alternative<ScaledSchedule>(schedule)) {
                    return scaled_pace_step(config, st, cost, multiplier);
                }
                if (const auto* s = std::get_if<SubthresholdSchedule>(&schedule)) {
                    return subthreshold_pace_step(config, st, cost, s->threshold, s->sigma);
                }
                return pace_step(config, st, cost);
            };
            try {
                step = run_step(state);
                if (config.exhaust_last_period && t == config.periods - 2 &&
                    !step.exhausted && !step.suppressed) {
                    // Aim the last bid at the whole remainder (ratio horizon 1).
                    PacingState last = state;
                    last.t = static_cast<std::size_t>(config.periods - 1);
                    step = run_step(last);
                }
            } catch (const EvalDomainError& e) {
                std::ostringstream os;
                os << e.what() << " (period " << t << ")";
                throw EvalDomainError(os.str());
            }
        } else {
            // Suppressed period: nothing was bid, nothing spent. Resume from
            // the last learned bid scale once the virtual remainder recovers;
            // the multiplicative update itself cannot leave 0.
            step.suppressed = pacing_budget - state.cumulative_spend <= 0.0;
            step.next_bid = step.suppressed ? 0.0 : last_positive_bid;
        }

        state.record_cost(cost);

        TrajectoryRecord rec;
        rec.t = t;
        rec.bid = submitted;
        rec.cost = cost;
        rec.alpha = step.alpha;
        rec.remaining = state.remaining(config.budget);
        rec.multiplier = multiplier;
        rec.exit = step.exhausted;
        traj.records.push_back(rec);

        if (step.exhausted) {
            state.exited = true;
            if (t < config.periods - 1) {
                traj.completed = false;
                traj.early_exit_period = t;
            }
            break;
        }

        if (step.suppressed) {
            state.bid = 0.0;
        } else {
            if (submitted > 0.0) last_positive_bid = submitted;
            state.bid = step.next_bid;
        }
    }

    const auto bids = traj.bids();
    traj.converged_at = sustained_convergence_period(bids, config.tolerance);
    return traj;
}

Trajectory run_campaign(const CampaignConfig& config, const CostFn& fn,
                        const PacingSchedule& schedule) {
    AnalyticCostSource source(fn);
    return run_campaign(config, source, schedule);
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::string out = "t,bid,cost,alpha,remaining,multiplier,status\n";
    char buf[64];
    for (const auto& r : trajectory.records) {
        out += std::to_string(r.t);
        out += ',';
        format_double(buf, sizeof buf, r.bid, &out);
        out += ',';
        format_double(buf, sizeof buf, r.cost, &out);
        out += ',';
        format_double(buf, sizeof buf, r.alpha, &out);
        out += ',';
        format_double(buf, sizeof buf, r.remaining, &out);
        out += ',';
        format_double(buf, sizeof buf, r.multiplier, &out);
        out += ',';
        out += r.exit ? "exit" : "ok";
        out += '\n';
    }
    return out;
}

}  // namespace pacer
