#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pacer/cost_model.hpp"

namespace pacer {

struct ClampRange {
    double min = 0.1;
    double max = 10.0;
};

struct CampaignConfig {
    double budget = 0.0;   // B > 0
    int periods = 0;       // T >= 2
    double initial_bid = 0.0;  // b0; 0 means "derive the default"
    double tolerance = 1e-6;   // convergence detection epsilon
    std::optional<long long> impressions_per_period;  // n, for the b0 = B/(nT) default
    bool clamp_enabled = false;
    ClampRange clamp;
    // Harness policy used by auction replay: re-target the final period at
    // the full remaining budget instead of the half-slot the recurrence's
    // horizon indexing leaves behind; the cost source's budget cap keeps the
    // realized spend at or below the remainder.
    bool exhaust_last_period = false;

    void validate() const;
    // b0 = B/(nT) when n is given, else B/T; an explicit initial_bid wins.
    double resolved_initial_bid() const;
};

struct UniformSchedule {};

struct ScaledSchedule {
    std::vector<double> multipliers;  // kappa_t in (0,1], one per period
};

struct SubthresholdSchedule {
    double threshold = 0.0;  // tau > 0
    double sigma = 0.0;      // sigma > 1, provider-fixed inflation
};

using PacingSchedule = std::variant<UniformSchedule, ScaledSchedule, SubthresholdSchedule>;

void validate(const PacingSchedule& schedule, int periods);

// Mutable loop state; cumulative_spend is the left-to-right running sum of
// cost_history, so re-summing the history reproduces it bit-for-bit.
struct PacingState {
    std::size_t t = 0;
    double bid = 0.0;
    std::vector<double> cost_history;
    double cumulative_spend = 0.0;
    bool exited = false;

    double remaining(double budget) const { return budget - cumulative_spend; }
    void record_cost(double cost);
};

struct StepResult {
    double next_bid = 0.0;
    double alpha = 0.0;      // multiplier actually applied (after clamping)
    bool exhausted = false;  // true budget is gone; campaign must stop
    bool suppressed = false; // schedule's virtual remainder was <= 0 this period
};

// One update of the budget-smoothing recurrence:
//   b_{t+1} = alpha * b_t,  alpha = (B_r^t / (T - t)) / c_t,
// where B_r^t is the remaining budget including the cost just observed.
// A zero cost is an error unless clamping is enabled (then alpha = clamp.max).
StepResult pace_step(const CampaignConfig& config, const PacingState& state, double cost);

// Same update against the virtual budget kappa*B. A non-positive virtual
// remainder suppresses the next bid to 0 without ending the campaign.
StepResult scaled_pace_step(const CampaignConfig& config, const PacingState& state,
                            double cost, double kappa);

// Below the threshold the ratio uses sigma*B while the true budget is debited,
// which forces early exhaustion; otherwise identical to pace_step.
StepResult subthreshold_pace_step(const CampaignConfig& config, const PacingState& state,
                                  double cost, double threshold, double sigma);

// Deferred cost source: maps (period, bid) to the amount actually charged.
// Must return a non-negative finite value no greater than remaining_budget.
class CostSource {
public:
    virtual ~CostSource() = default;
    virtual double observe(std::size_t period, double bid, double remaining_budget) = 0;
};

// Evaluates an analytic cost function; spend is capped at the remaining budget.
class AnalyticCostSource final : public CostSource {
public:
    explicit AnalyticCostSource(CostFn fn) : fn_(std::move(fn)) {}
    double observe(std::size_t period, double bid, double remaining_budget) override;

private:
    CostFn fn_;
};

struct TrajectoryRecord {
    int t = 0;
    double bid = 0.0;
    double cost = 0.0;
    double alpha = 0.0;
    double remaining = 0.0;   // true budget minus the exact spend sum
    double multiplier = 1.0;  // schedule multiplier in effect this period
    bool exit = false;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    bool completed = true;
    std::optional<int> early_exit_period;
    // First period t with |b_{t+1} - b_t| < tolerance holding for at least
    // three consecutive diffs and through the end of the run.
    std::optional<int> converged_at;

    std::vector<double> bids() const;
    std::vector<double> costs() const;
};

Trajectory run_campaign(const CampaignConfig& config, CostSource& source,
                        const PacingSchedule& schedule);
Trajectory run_campaign(const CampaignConfig& config, const CostFn& fn,
                        const PacingSchedule& schedule);

// Header: t,bid,cost,alpha,remaining,multiplier,status. Rows ordered by t.
std::string trajectory_csv(const Trajectory& trajectory);

// Convergence scan used by run_campaign; exposed for analysis of raw series.
std::optional<int> sustained_convergence_period(std::span<const double> bids,
                                                double tolerance, int min_run = 3);

}  // namespace pacer
