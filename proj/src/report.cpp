#include "pacer/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"
#include "pacer/analysis.hpp"

namespace pacer {

ScheduleTargets schedule_targets(const CampaignConfig& config,
                                 const PacingSchedule& schedule) {
    ScheduleTargets targets;
    targets.per_period.reserve(config.periods);
    targets.cumulative_fraction.reserve(config.periods);
    double spent = 0.0;
    for (int t = 0; t < config.periods; ++t) {
        double mult = 1.0;
        if (const auto* s = std::get_if<ScaledSchedule>(&schedule)) {
            mult = s->multipliers[static_cast<std::size_t>(t)];
        } else if (const auto* s = std::get_if<SubthresholdSchedule>(&schedule)) {
            mult = config.budget < s->threshold ? s->sigma : 1.0;
        }
        double c = std::max((mult * config.budget - spent) / (config.periods - t), 0.0);
        if (spent + c > config.budget) c = config.budget - spent;
        spent += c;
        targets.per_period.push_back(c);
        targets.cumulative_fraction.push_back(spent / config.budget);
    }
    return targets;
}

SpendReport spend_report(const Trajectory& trajectory, const CampaignConfig& config,
                         const PacingSchedule& schedule) {
    if (trajectory.records.empty()) throw ContractViolation("empty trajectory");
    const ScheduleTargets targets = schedule_targets(config, schedule);

    SpendReport report;
    report.leftover = trajectory.records.back().remaining;
    report.leftover_fraction = report.leftover / config.budget;
    report.deviations.reserve(trajectory.records.size());
    report.spend_curve.reserve(trajectory.records.size());
    std::size_t violations = 0;
    for (const auto& rec : trajectory.records) {
        const double d = std::abs(targets.per_period[static_cast<std::size_t>(rec.t)] -
                                  rec.cost);
        report.deviations.push_back(d);
        report.max_deviation = std::max(report.max_deviation, d);
        if (d > config.tolerance) ++violations;
        report.spend_curve.push_back(1.0 - rec.remaining / config.budget);
    }
    report.target_violation_fraction =
        static_cast<double>(violations) / trajectory.records.size();
    report.converged_at = trajectory.converged_at;
    if (!report.converged_at) {
        const auto bids = trajectory.bids();
        const int window = 8;
        if (static_cast<int>(bids.size()) >= 2 * window) {
            const int p = detect_cycle(bids, window);
            if (p >= 2) report.cycle_period = p;
        }
    }
    return report;
}

std::string spend_report_json(const SpendReport& report) {
    nlohmann::json j;
    j["leftover"] = report.leftover;
    j["leftover_fraction"] = report.leftover_fraction;
    j["deviations"] = report.deviations;
    j["max_deviation"] = report.max_deviation;
    j["target_violation_fraction"] = report.target_violation_fraction;
    j["spend_curve"] = report.spend_curve;
    j["converged_at"] =
        report.converged_at ? nlohmann::json(*report.converged_at) : nlohmann::json(nullptr);
    j["cycle_period"] =
        report.cycle_period ? nlohmann::json(*report.cycle_period) : nlohmann::json(nullptr);
    return j.dump(2) + "\n";
}

std::string spend_curve_csv(const SpendReport& report, const ScheduleTargets& targets) {
    std::string out = "t,spend_fraction,target_fraction\n";
    char buf[64];
    auto append = [&](double v) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, p);
    };
    for (std::size_t t = 0; t < report.spend_curve.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        append(report.spend_curve[t]);
        out += ',';
        append(targets.cumulative_fraction[t]);
        out += '\n';
    }
    return out;
}

}  // namespace pacer
