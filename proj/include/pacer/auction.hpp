#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pacer/pacing.hpp"
#include "pacer/report.hpp"

namespace pacer {

// First-price auction replay: competitor bid logs, per-period auctions, and
// the empirical cost source they induce for the pacing loop.

struct Impression {
    long long id = 0;
    std::vector<double> competitor_bids;

    bool operator==(const Impression&) const = default;
};

struct PeriodLog {
    long long period_id = 0;
    std::vector<Impression> impressions;  // arrival order

    bool operator==(const PeriodLog&) const = default;
};

struct BidLog {
    std::vector<PeriodLog> periods;  // strictly increasing period_id
    std::string duration_label = "15min";
    std::string source;

    bool operator==(const BidLog&) const = default;
};

enum class TieRule { kWeWin, kWeLose };

struct AuctionOutcome {
    int period = 0;
    long long impressions_contested = 0;
    long long wins = 0;
    double cost = 0.0;  // our_bid * wins, exactly
    double win_rate = 0.0;
};

// Runs one period of first-price auctions: we win an impression iff our bid
// beats the maximum competitor bid (ties per tie_rule); an uncontested
// impression goes to any positive bid. With a budget limit, wins are kept in
// arrival order until the next one would overrun it.
AuctionOutcome run_period_auction(double our_bid, const PeriodLog& period, TieRule tie_rule,
                                  std::optional<double> budget_limit = std::nullopt);

// EmpiricalCost source: charges our_bid per impression won in the log's
// period, truncating wins greedily at the remaining budget.
class AuctionCostSource final : public CostSource {
public:
    AuctionCostSource(const BidLog& log, TieRule tie_rule) : log_(log), tie_(tie_rule) {}
    double observe(std::size_t period, double bid, double remaining_budget) override;
    const std::vector<AuctionOutcome>& outcomes() const { return outcomes_; }

private:
    const BidLog& log_;
    TieRule tie_;
    std::vector<AuctionOutcome> outcomes_;
};

struct ReplayResult {
    Trajectory trajectory;
    SpendReport report;
    std::vector<AuctionOutcome> outcomes;
};

// Couples the pacing loop with per-period auctions over the log. Clamping is
// enabled (with defaults) when the config leaves it off: an empirical period
// can cost nothing, which the raw recurrence cannot absorb.
ReplayResult replay_campaign(const CampaignConfig& config, const BidLog& log,
                             const PacingSchedule& schedule,
                             TieRule tie_rule = TieRule::kWeWin);

struct LogProfile {
    int periods = 96;
    double impressions_mean = 500.0;   // per period, before intensity scaling
    double competitors_mean = 2.0;     // Poisson mean per impression
    double bid_median = 1.0;           // lognormal location (median)
    double bid_spread = 1.5;           // lognormal sigma, >= 0
    std::vector<double> intensity;     // per-period volume curve; empty = flat

    void validate() const;
};

// Morning-low, evening-peak volume curve in [0.7, 1.3].
std::vector<double> evening_peak_intensity(int periods);

// Deterministic synthetic log for a given seed.
BidLog generate_bid_log(std::uint64_t seed, const LogProfile& profile);

// CSV schema (header required): period,impression,bid - one row per
// competitor bid, UTF-8, LF, '.' decimal separator. Impressions without
// competitor bids have no rows and are not representable.
std::string bid_log_csv(const BidLog& log);

enum class IngestMode { kAccumulateRejects, kFailFast };

struct IngestReject {
    int line = 0;
    std::string reason;
};

struct IngestResult {
    BidLog log;
    std::vector<IngestReject> rejects;
};

IngestResult ingest_bid_log(std::istream& in,
                            IngestMode mode = IngestMode::kAccumulateRejects);
IngestResult ingest_bid_log_file(const std::string& path,
                                 IngestMode mode = IngestMode::kAccumulateRejects);

}  // namespace pacer
