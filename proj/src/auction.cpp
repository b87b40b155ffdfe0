#include "pacer/auction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace pacer {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

}  // namespace

AuctionOutcome run_period_auction(double our_bid, const PeriodLog& period, TieRule tie_rule,
                                  std::optional<double> budget_limit) {
    require(our_bid >= 0.0 && std::isfinite(our_bid), "our bid must be non-negative");
    AuctionOutcome out;
    out.period = static_cast<int>(period.period_id);
    out.impressions_contested = static_cast<long long>(period.impressions.size());
    for (const auto& imp : period.impressions) {
        double top = 0.0;
        bool contested = !imp.competitor_bids.empty();
        for (double b : imp.competitor_bids) {
            require(b >= 0.0, "competitor bid log contains a negative bid");
            top = std::max(top, b);
        }
        bool won;
        if (!contested) {
            won = our_bid > 0.0;
        } else if (tie_rule == TieRule::kWeWin) {
            won = our_bid > 0.0 && our_bid >= top;
        } else {
            won = our_bid > top;
        }
        if (won) {
            if (budget_limit && (out.wins + 1) * our_bid > *budget_limit) break;
            ++out.wins;
        }
    }
    out.cost = our_bid * static_cast<double>(out.wins);
    out.win_rate = out.impressions_contested > 0
                       ? static_cast<double>(out.wins) / out.impressions_contested
                       : 0.0;
    return out;
}

double AuctionCostSource::observe(std::size_t period, double bid, double remaining_budget) {
    require(period < log_.periods.size(), "bid log does not cover the requested period");
    AuctionOutcome out = run_period_auction(bid, log_.periods[period], tie_, remaining_budget);
    out.period = static_cast<int>(period);
    outcomes_.push_back(out);
    return out.cost;
}

ReplayResult replay_campaign(const CampaignConfig& config, const BidLog& log,
                             const PacingSchedule& schedule, TieRule tie_rule) {
    require(!log.periods.empty(), "bid log is empty");
    require(static_cast<int>(log.periods.size()) >= config.periods,
            "bid log must cover every campaign period");
    CampaignConfig cfg = config;
    if (!cfg.clamp_enabled) {
        cfg.clamp_enabled = true;
        cfg.clamp = ClampRange{};
    }
    cfg.exhaust_last_period = true;
    AuctionCostSource source(log, tie_rule);
    ReplayResult result;
    result.trajectory = run_campaign(cfg, source, schedule);
    result.report = spend_report(result.trajectory, cfg, schedule);
    result.outcomes = source.outcomes();
    return result;
}

void LogProfile::validate() const {
    require(periods >= 1, "log profile needs at least one period");
    require(impressions_mean > 0.0, "impressions mean must be positive");
    require(competitors_mean >= 0.0, "competitor count mean must be non-negative");
    require(bid_median > 0.0, "bid median must be positive (no negative support)");
    require(bid_spread >= 0.0, "bid spread must be non-negative");
    for (double v : intensity) require(v > 0.0, "intensity values must be positive");
}

std::vector<double> evening_peak_intensity(int periods) {
    std::vector<double> curve(periods);
    for (int t = 0; t < periods; ++t) {
        const double x = periods > 1 ? static_cast<double>(t) / (periods - 1) : 0.0;
        curve[t] = 0.5 + std::sin(0.5 * 3.14159265358979323846 * x);
    }
    return curve;
}

BidLog generate_bid_log(std::uint64_t seed, const LogProfile& profile) {
    profile.validate();
    std::mt19937_64 rng(seed);
    const double mu = std::log(profile.bid_median);

    // Normalize the intensity curve so its mean is 1: intensity shapes volume
    // without changing the expected daily total.
    std::vector<double> intensity(profile.periods, 1.0);
    if (!profile.intensity.empty()) {
        double mean = 0.0;
        for (int t = 0; t < profile.periods; ++t) {
            const std::size_t idx = profile.intensity.size() == 1
                                        ? 0
                                        : static_cast<std::size_t>(
                                              static_cast<double>(t) *
                                              profile.intensity.size() / profile.periods);
            intensity[t] = profile.intensity[std::min(idx, profile.intensity.size() - 1)];
            mean += intensity[t];
        }
        mean /= profile.periods;
        for (double& v : intensity) v /= mean;
    }

    BidLog log;
    log.source = "synthetic:" + std::to_string(seed);
    log.periods.reserve(profile.periods);
    for (int t = 0; t < profile.periods; ++t) {
        PeriodLog period;
        period.period_id = t;
        std::poisson_distribution<long long> imp_count(profile.impressions_mean *
                                                       intensity[t]);
        const long long n = imp_count(rng);
        period.impressions.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) {
            Impression imp;
            imp.id = i;
            long long m = 0;
            if (profile.competitors_mean > 0.0) {
                std::poisson_distribution<long long> comp_count(profile.competitors_mean);
                m = comp_count(rng);
            }
            imp.competitor_bids.reserve(static_cast<std::size_t>(m));
            for (long long c = 0; c < m; ++c) {
                if (profile.bid_spread == 0.0) {
                    imp.competitor_bids.push_back(profile.bid_median);
                } else {
                    std::lognormal_distribution<double> bid(mu, profile.bid_spread);
                    imp.competitor_bids.push_back(bid(rng));
                }
            }
            period.impressions.push_back(std::move(imp));
        }
        log.periods.push_back(std::move(period));
    }
    return log;
}

std::string bid_log_csv(const BidLog& log) {
    std::string out = "period,impression,bid\n";
    char buf[64];
    for (const auto& period : log.periods) {
        for (const auto& imp : period.impressions) {
            for (double b : imp.competitor_bids) {
                out += std::to_string(period.period_id);
                out += ',';
                out += std::to_string(imp.id);
                out += ',';
                auto [p, ec] = std::to_chars(buf, buf + sizeof buf, b);
                out.append(buf, p);
                out += '\n';
            }
        }
    }
    return out;
}

namespace {

bool parse_ll(const std::string& s, long long* out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, *out);
    return ec == std::errc{} && p == e;
}

bool parse_double(const std::string& s, double* out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, *out);
    return ec == std::errc{} && p == e;
}

}  // namespace

IngestResult ingest_bid_log(std::istream& in, IngestMode mode) {
    IngestResult result;
    result.log.source = "file";
    std::string line;
    int line_no = 0;

    auto reject = [&](const std::string& reason) {
        if (mode == IngestMode::kFailFast) {
            throw ContractViolation("bid log line " + std::to_string(line_no) + ": " + reason);
        }
        result.rejects.push_back({line_no, reason});
    };

    if (!std::getline(in, line)) throw ContractViolation("bid log is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "period,impression,bid") {
        throw ContractViolation("bid log must start with header period,impression,bid");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            reject("expected three comma-separated fields");
            continue;
        }
        long long period_id, imp_id;
        double bid;
        if (!parse_ll(line.substr(0, c1), &period_id) || period_id < 0) {
            reject("period must be a non-negative integer");
            continue;
        }
        if (!parse_ll(line.substr(c1 + 1, c2 - c1 - 1), &imp_id)) {
            reject("impression must be an integer");
            continue;
        }
        if (!parse_double(line.substr(c2 + 1), &bid) || !(bid > 0.0) || !std::isfinite(bid)) {
            reject("bid must be a positive decimal");
            continue;
        }
        if (!result.log.periods.empty() && period_id < result.log.periods.back().period_id) {
            reject("period indices must be non-decreasing");
            continue;
        }
        if (result.log.periods.empty() ||
            period_id > result.log.periods.back().period_id) {
            PeriodLog p;
            p.period_id = period_id;
            result.log.periods.push_back(std::move(p));
        }
        PeriodLog& period = result.log.periods.back();
        Impression* imp = nullptr;
        // Rows for one impression are normally contiguous.
        if (!period.impressions.empty() && period.impressions.back().id == imp_id) {
            imp = &period.impressions.back();
        } else {
            for (auto& existing : period.impressions) {
                if (existing.id == imp_id) {
                    imp = &existing;
                    break;
                }
            }
        }
        if (!imp) {
            period.impressions.push_back(Impression{imp_id, {}});
            imp = &period.impressions.back();
        }
        imp->competitor_bids.push_back(bid);
    }
    return result;
}

IngestResult ingest_bid_log_file(const std::string& path, IngestMode mode) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open bid log: " + path);
    return ingest_bid_log(in, mode);
}

}  // namespace pacer
