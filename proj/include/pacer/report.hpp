#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pacer/pacing.hpp"

namespace pacer {

// Objective metrics of a finished campaign: leftover budget and how far each
// period strayed from its (schedule-adjusted) target spend.

struct SpendReport {
    double leftover = 0.0;           // B - sum of costs
    double leftover_fraction = 0.0;  // leftover / B
    std::vector<double> deviations;  // |target_t - c_t| per recorded period
    double max_deviation = 0.0;
    // Fraction of periods with d_t above the configured tolerance; reported,
    // never enforced (the early learning periods always violate it).
    double target_violation_fraction = 0.0;
    std::vector<double> spend_curve;  // cumulative spend fraction per period
    std::optional<int> converged_at;
    std::optional<int> cycle_period;
};

// Per-period target spends implied by the schedule: the recurrence
//   target_t = (mult_t * B - S_t) / (T - t),  S_{t+1} = S_t + target_t,
// capped so the cumulative target never exceeds B. Uniform schedules yield
// B/T per period and a linear cumulative curve.
struct ScheduleTargets {
    std::vector<double> per_period;
    std::vector<double> cumulative_fraction;
};
ScheduleTargets schedule_targets(const CampaignConfig& config,
                                 const PacingSchedule& schedule);

SpendReport spend_report(const Trajectory& trajectory, const CampaignConfig& config,
                         const PacingSchedule& schedule);

std::string spend_report_json(const SpendReport& report);

// CSV: t,spend_fraction,target_fraction.
std::string spend_curve_csv(const SpendReport& report, const ScheduleTargets& targets);

}  // namespace pacer
