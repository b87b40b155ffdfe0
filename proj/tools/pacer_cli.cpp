// pacer: budget-pacing simulator, dynamics analyzer, and first-price auction
// replay harness. Subcommands: simulate, analyze, sweep, replay, gen-log.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pacer/analysis.hpp"
#include "pacer/auction.hpp"
#include "pacer/cost_model.hpp"
#include "pacer/pacing.hpp"
#include "pacer/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void atomic_write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw pacer::ContractViolation("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

struct CommonOpts {
    double budget = 50000.0;
    int periods = 1000;
    std::string cost = "1*b^1";
    double b0 = 0.0;
    double tol = 1e-6;
    std::string schedule = "uniform";
    std::string clamp = "0.1,10";
    long long impressions = 0;
    std::string out_dir = ".";
    std::string format = "csv";
    std::string config_path;
};

void add_common_flags(CLI::App* cmd, CommonOpts* o, bool with_cost = true) {
    cmd->add_option("--budget", o->budget, "campaign budget B");
    cmd->add_option("--periods", o->periods, "number of periods T");
    if (with_cost) cmd->add_option("--cost", o->cost, "cost expression, e.g. min(1*b^0.5,100)");
    cmd->add_option("--b0", o->b0, "initial bid (default B/(nT) or B/T)");
    cmd->add_option("--tol", o->tol, "convergence tolerance epsilon");
    cmd->add_option("--schedule", o->schedule,
                    "uniform | scaled:<csv-of-kappa> | subthreshold:<tau>,<sigma>");
    cmd->add_option("--clamp", o->clamp, "alpha clamp '<amin>,<amax>' or 'off'");
    cmd->add_option("--impressions", o->impressions, "impressions per period n");
    cmd->add_option("--out", o->out_dir, "output directory");
    cmd->add_option("--format", o->format, "trajectory format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--config", o->config_path, "JSON config file (flags override it)");
}

pacer::PacingSchedule parse_schedule(const std::string& text, int periods) {
    if (text == "uniform") return pacer::UniformSchedule{};
    if (text.rfind("scaled:", 0) == 0) {
        std::vector<double> values;
        std::string rest = text.substr(7);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            const std::string tok =
                rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (!tok.empty()) values.push_back(std::stod(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (values.empty()) throw pacer::ContractViolation("scaled schedule needs values");
        // Fewer values than periods: treat them as equal-length segments.
        pacer::ScaledSchedule s;
        s.multipliers.resize(periods);
        for (int t = 0; t < periods; ++t) {
            const std::size_t idx =
                values.size() >= static_cast<std::size_t>(periods)
                    ? static_cast<std::size_t>(t)
                    : std::min(values.size() - 1,
                               static_cast<std::size_t>(static_cast<double>(t) *
                                                        values.size() / periods));
            s.multipliers[t] = values[idx];
        }
        return s;
    }
    if (text.rfind("subthreshold:", 0) == 0) {
        const std::string rest = text.substr(13);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw pacer::ContractViolation("subthreshold schedule needs <tau>,<sigma>");
        }
        pacer::SubthresholdSchedule s;
        s.threshold = std::stod(rest.substr(0, comma));
        s.sigma = std::stod(rest.substr(comma + 1));
        return s;
    }
    throw pacer::ContractViolation("unknown schedule: " + text);
}

void parse_clamp(const std::string& text, pacer::CampaignConfig* config) {
    if (text == "off") {
        config->clamp_enabled = false;
        return;
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw pacer::ContractViolation("clamp must be '<amin>,<amax>' or 'off'");
    }
    config->clamp_enabled = true;
    config->clamp.min = std::stod(text.substr(0, comma));
    config->clamp.max = std::stod(text.substr(comma + 1));
}

// Config file mirrors CampaignConfig/PacingSchedule field names; CLI flags
// that were explicitly passed win.
void load_config_file(const std::string& path, const CLI::App* cmd, CommonOpts* o) {
    std::ifstream in(path);
    if (!in) throw pacer::ContractViolation("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw pacer::ContractViolation(std::string("config parse error: ") + e.what());
    }
    auto take = [&](const char* flag, const char* key, auto* dst) {
        if (j.contains(key) && !j[key].is_null() && cmd->count(flag) == 0) {
            *dst = j[key].get<std::decay_t<decltype(*dst)>>();
        }
    };
    take("--budget", "budget", &o->budget);
    take("--periods", "periods", &o->periods);
    take("--b0", "initial_bid", &o->b0);
    take("--tol", "tolerance", &o->tol);
    take("--impressions", "impressions_per_period", &o->impressions);
    if (j.contains("clamp") && cmd->count("--clamp") == 0) {
        const bool enabled = j.value("clamp_enabled", true);
        if (!enabled) {
            o->clamp = "off";
        } else {
            o->clamp = std::to_string(j["clamp"].value("min", 0.1)) + "," +
                       std::to_string(j["clamp"].value("max", 10.0));
        }
    } else if (j.contains("clamp_enabled") && !j["clamp_enabled"].get<bool>() &&
               cmd->count("--clamp") == 0) {
        o->clamp = "off";
    }
    if (j.contains("schedule") && cmd->count("--schedule") == 0) {
        const json& s = j["schedule"];
        const std::string variant = s.value("variant", "uniform");
        if (variant == "uniform") {
            o->schedule = "uniform";
        } else if (variant == "scaled") {
            std::string text = "scaled:";
            bool first = true;
            for (double v : s["multipliers"].get<std::vector<double>>()) {
                if (!first) text += ',';
                text += std::to_string(v);
                first = false;
            }
            o->schedule = text;
        } else if (variant == "subthreshold") {
            o->schedule = "subthreshold:" + std::to_string(s["threshold"].get<double>()) +
                          "," + std::to_string(s["sigma"].get<double>());
        } else {
            throw pacer::ContractViolation("unknown schedule variant: " + variant);
        }
    }
    if (j.contains("cost") && cmd->count("--cost") == 0) {
        o->cost = j["cost"].get<std::string>();
    }
}

pacer::CampaignConfig build_config(const CommonOpts& o) {
    pacer::CampaignConfig config;
    config.budget = o.budget;
    config.periods = o.periods;
    config.initial_bid = o.b0;
    config.tolerance = o.tol;
    if (o.impressions > 0) config.impressions_per_period = o.impressions;
    parse_clamp(o.clamp, &config);
    config.validate();
    return config;
}

pacer::AnalysisReport analyze_cost(const pacer::CostFn& fn, double budget, int periods,
                                   double eps) {
    using namespace pacer;
    if (const auto* m = std::get_if<MonomialCost>(&fn)) {
        return make_analysis_report(budget, periods, m->coefficient, m->exponent,
                                    std::nullopt, eps);
    }
    if (const auto* p = std::get_if<PolynomialCost>(&fn)) {
        return make_polynomial_report(*p, budget, periods);
    }
    const auto& g = std::get<GuardedCost>(fn);
    if (const auto* m = std::get_if<MonomialCost>(&g.inner)) {
        std::optional<double> cap;
        if (g.mode == CapMode::kCapAbove) cap = g.cap;
        return make_analysis_report(budget, periods, m->coefficient, m->exponent, cap, eps);
    }
    AnalysisReport r = make_polynomial_report(std::get<PolynomialCost>(g.inner), budget,
                                              periods);
    r.fixed_point = fixed_point_numeric(fn, budget, periods);
    return r;
}

std::string trajectory_json(const pacer::Trajectory& traj) {
    json rows = json::array();
    for (const auto& r : traj.records) {
        rows.push_back({{"t", r.t},
                        {"bid", r.bid},
                        {"cost", r.cost},
                        {"alpha", r.alpha},
                        {"remaining", r.remaining},
                        {"multiplier", r.multiplier},
                        {"status", r.exit ? "exit" : "ok"}});
    }
    json j;
    j["records"] = rows;
    j["completed"] = traj.completed;
    j["early_exit_period"] = traj.early_exit_period ? json(*traj.early_exit_period)
                                                    : json(nullptr);
    j["converged_at"] = traj.converged_at ? json(*traj.converged_at) : json(nullptr);
    return j.dump(2) + "\n";
}

void write_trajectory(const pacer::Trajectory& traj, const CommonOpts& o) {
    if (o.format == "json") {
        atomic_write(fs::path(o.out_dir) / "trajectory.json", trajectory_json(traj));
    } else {
        atomic_write(fs::path(o.out_dir) / "trajectory.csv", pacer::trajectory_csv(traj));
    }
}

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

int run_simulate(const CommonOpts& o) {
    const pacer::CampaignConfig config = build_config(o);
    const pacer::CostFn fn = pacer::parse_cost_expr(o.cost);
    const pacer::PacingSchedule schedule = parse_schedule(o.schedule, o.periods);

    const pacer::Trajectory traj = pacer::run_campaign(config, fn, schedule);
    write_trajectory(traj, o);
    const pacer::AnalysisReport report = analyze_cost(fn, o.budget, o.periods, o.tol);
    atomic_write(fs::path(o.out_dir) / "analysis.json", pacer::analysis_json(report));
    const pacer::SpendReport spend = pacer::spend_report(traj, config, schedule);
    atomic_write(fs::path(o.out_dir) / "spend_report.json", pacer::spend_report_json(spend));
    const pacer::ScheduleTargets targets = pacer::schedule_targets(config, schedule);
    atomic_write(fs::path(o.out_dir) / "spend_curve.csv",
                 pacer::spend_curve_csv(spend, targets));
    std::cout << "simulate: " << traj.records.size() << " periods, converged_at="
              << (traj.converged_at ? std::to_string(*traj.converged_at) : "none")
              << ", leftover_fraction=" << fmt(spend.leftover_fraction) << "\n";
    return 0;
}

int run_analyze(const CommonOpts& o, bool want_bound, bool want_cycle) {
    const pacer::CostFn fn = pacer::parse_cost_expr(o.cost);
    const pacer::AnalysisReport report = analyze_cost(fn, o.budget, o.periods, o.tol);
    atomic_write(fs::path(o.out_dir) / "analysis.json", pacer::analysis_json(report));
    if (want_bound) {
        const auto* m = std::get_if<pacer::MonomialCost>(&fn);
        const auto* g = std::get_if<pacer::GuardedCost>(&fn);
        const pacer::MonomialCost* inner =
            m ? m : (g ? std::get_if<pacer::MonomialCost>(&g->inner) : nullptr);
        if (!inner) {
            throw pacer::ContractViolation("--bound requires a monomial cost family");
        }
        std::cout << "convergence_bound="
                  << fmt(pacer::convergence_time_bound(o.tol, o.budget, o.periods,
                                                       inner->coefficient, inner->exponent))
                  << "\n";
    }
    if (want_cycle) {
        const auto* g = std::get_if<pacer::GuardedCost>(&fn);
        const auto* inner = g ? std::get_if<pacer::MonomialCost>(&g->inner) : nullptr;
        if (!inner || g->mode != pacer::CapMode::kCapAbove) {
            throw pacer::ContractViolation("--cycle requires a min-guarded monomial cost");
        }
        const pacer::CyclePair cycle = pacer::two_cycle_points(
            o.budget, o.periods, inner->coefficient, inner->exponent, g->cap);
        std::cout << "b_minus=" << fmt(cycle.b_minus) << " b_plus=" << fmt(cycle.b_plus)
                  << " case_consistent=" << (cycle.case_consistent ? "true" : "false")
                  << "\n";
    }
    return 0;
}

struct SweepOpts {
    std::string k_range = "1.8:2.4:0.05";
    double cap = 100.0;
    double coef = 1.0;
    int tail_from = 100;
    int tail_to = 180;
};

int run_sweep(const CommonOpts& o, const SweepOpts& s) {
    double lo, hi, step;
    {
        const auto c1 = s.k_range.find(':');
        const auto c2 = c1 == std::string::npos ? std::string::npos
                                                : s.k_range.find(':', c1 + 1);
        if (c2 == std::string::npos) {
            throw pacer::ContractViolation("--k must be <lo>:<hi>:<step>");
        }
        lo = std::stod(s.k_range.substr(0, c1));
        hi = std::stod(s.k_range.substr(c1 + 1, c2 - c1 - 1));
        step = std::stod(s.k_range.substr(c2 + 1));
        if (step <= 0.0 || hi < lo) throw pacer::ContractViolation("bad --k range");
    }
    const pacer::CampaignConfig config = build_config(o);
    const pacer::PacingSchedule schedule = parse_schedule(o.schedule, o.periods);

    std::string csv = "k,converged_at,tail_distinct,tail_low,tail_high,b_minus,b_plus\n";
    const int steps = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double k = lo + i * step;
        const pacer::CostFn fn =
            pacer::GuardedCost(pacer::MonomialCost(s.coef, k), s.cap);
        const pacer::Trajectory traj = pacer::run_campaign(config, fn, schedule);
        const auto bids = traj.bids();
        const int from = std::min<int>(s.tail_from, static_cast<int>(bids.size()));
        const int to = std::min<int>(s.tail_to, static_cast<int>(bids.size()));
        std::vector<double> tail(bids.begin() + from, bids.begin() + to);
        const auto clusters = pacer::tail_clusters(tail);
        csv += fmt(k);
        csv += ',';
        csv += traj.converged_at ? std::to_string(*traj.converged_at) : std::string();
        csv += ',';
        csv += std::to_string(clusters.size());
        csv += ',';
        csv += clusters.empty() ? std::string() : fmt(clusters.front());
        csv += ',';
        csv += clusters.empty() ? std::string() : fmt(clusters.back());
        csv += ',';
        if (k > 2.0 && s.cap > o.budget / (s.coef * o.periods) && s.cap < o.budget) {
            const pacer::CyclePair cycle =
                pacer::two_cycle_points(o.budget, o.periods, s.coef, k, s.cap);
            csv += fmt(cycle.b_minus);
            csv += ',';
            csv += fmt(cycle.b_plus);
        } else {
            csv += ',';
        }
        csv += '\n';
    }
    atomic_write(fs::path(o.out_dir) / "sweep.csv", csv);
    std::cout << "sweep: wrote sweep.csv\n";
    return 0;
}

int run_replay(const CommonOpts& o, const std::string& log_path, const std::string& tie,
               bool periods_given) {
    const pacer::IngestResult ingest = pacer::ingest_bid_log_file(log_path);
    for (const auto& r : ingest.rejects) {
        std::cerr << "reject line " << r.line << ": " << r.reason << "\n";
    }
    CommonOpts opts = o;
    if (!periods_given) {
        opts.periods = static_cast<int>(ingest.log.periods.size());
    }
    const pacer::CampaignConfig config = build_config(opts);
    const pacer::PacingSchedule schedule = parse_schedule(opts.schedule, opts.periods);
    const pacer::TieRule rule =
        tie == "we-lose" ? pacer::TieRule::kWeLose : pacer::TieRule::kWeWin;

    const pacer::ReplayResult result =
        pacer::replay_campaign(config, ingest.log, schedule, rule);
    write_trajectory(result.trajectory, opts);
    atomic_write(fs::path(opts.out_dir) / "spend_report.json",
                 pacer::spend_report_json(result.report));
    const pacer::ScheduleTargets targets = pacer::schedule_targets(config, schedule);
    atomic_write(fs::path(opts.out_dir) / "spend_curve.csv",
                 pacer::spend_curve_csv(result.report, targets));
    std::cout << "replay: " << result.trajectory.records.size()
              << " periods, leftover_fraction=" << fmt(result.report.leftover_fraction)
              << ", max_deviation=" << fmt(result.report.max_deviation) << "\n";
    return 0;
}

struct GenLogOpts {
    std::uint64_t seed = 42;
    int periods = 96;
    double impressions_mean = 500.0;
    double competitors_mean = 2.0;
    double bid_median = 1.0;
    double bid_spread = 1.5;
    std::string intensity = "evening";
    std::string out_file;
};

int run_gen_log(const CommonOpts& o, const GenLogOpts& g) {
    pacer::LogProfile profile;
    profile.periods = g.periods;
    profile.impressions_mean = g.impressions_mean;
    profile.competitors_mean = g.competitors_mean;
    profile.bid_median = g.bid_median;
    profile.bid_spread = g.bid_spread;
    if (g.intensity == "evening") {
        profile.intensity = pacer::evening_peak_intensity(g.periods);
    } else if (g.intensity != "flat") {
        throw pacer::ContractViolation("--intensity must be flat or evening");
    }
    const pacer::BidLog log = pacer::generate_bid_log(g.seed, profile);
    const fs::path path = g.out_file.empty() ? fs::path(o.out_dir) / "log.csv"
                                             : fs::path(g.out_file);
    atomic_write(path, pacer::bid_log_csv(log));
    std::cout << "gen-log: wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"budget pacing simulator and auction replay harness"};
    app.require_subcommand(1);

    CommonOpts sim_opts, ana_opts, sweep_common, replay_opts, gen_opts;
    SweepOpts sweep_opts;
    GenLogOpts gen_log_opts;
    bool ana_bound = false, ana_cycle = false;
    std::string replay_log, replay_tie = "we-win";

    CLI::App* sim = app.add_subcommand("simulate", "run one campaign");
    add_common_flags(sim, &sim_opts);

    CLI::App* ana = app.add_subcommand("analyze", "closed-form dynamics report");
    add_common_flags(ana, &ana_opts);
    ana->add_flag("--bound", ana_bound, "also print the convergence-time bound");
    ana->add_flag("--cycle", ana_cycle, "also print the two-cycle points");

    CLI::App* swp = app.add_subcommand("sweep", "k-sweep of guarded campaigns");
    add_common_flags(swp, &sweep_common, /*with_cost=*/false);
    swp->add_option("--k", sweep_opts.k_range, "exponent range <lo>:<hi>:<step>");
    swp->add_option("--cap", sweep_opts.cap, "guard-rail cap M");
    swp->add_option("--coef", sweep_opts.coef, "cost coefficient C");
    swp->add_option("--tail-from", sweep_opts.tail_from, "tail window start period");
    swp->add_option("--tail-to", sweep_opts.tail_to, "tail window end period");

    CLI::App* rep = app.add_subcommand("replay", "first-price auction replay");
    add_common_flags(rep, &replay_opts, /*with_cost=*/false);
    rep->add_option("--log", replay_log, "bid log CSV")->required();
    rep->add_option("--tie", replay_tie, "tie rule: we-win|we-lose")
        ->check(CLI::IsMember({"we-win", "we-lose"}));

    CLI::App* gen = app.add_subcommand("gen-log", "generate a synthetic bid log");
    gen->add_option("--seed", gen_log_opts.seed, "RNG seed");
    gen->add_option("--periods", gen_log_opts.periods, "log periods");
    gen->add_option("--impressions-mean", gen_log_opts.impressions_mean,
                    "mean impressions per period");
    gen->add_option("--competitors-mean", gen_log_opts.competitors_mean,
                    "mean competitor count per impression");
    gen->add_option("--bid-median", gen_log_opts.bid_median, "competitor bid median");
    gen->add_option("--bid-spread", gen_log_opts.bid_spread, "competitor bid spread");
    gen->add_option("--intensity", gen_log_opts.intensity, "volume curve: flat|evening");
    gen->add_option("--out", gen_opts.out_dir, "output directory");
    gen->add_option("--out-file", gen_log_opts.out_file, "output CSV path");

    try {
        app.parse(argc, argv);
        auto load_cfg = [&](CLI::App* cmd, CommonOpts* o) {
            if (!o->config_path.empty()) load_config_file(o->config_path, cmd, o);
        };
        if (sim->parsed()) {
            load_cfg(sim, &sim_opts);
            return run_simulate(sim_opts);
        }
        if (ana->parsed()) {
            load_cfg(ana, &ana_opts);
            return run_analyze(ana_opts, ana_bound, ana_cycle);
        }
        if (swp->parsed()) {
            load_cfg(swp, &sweep_common);
            return run_sweep(sweep_common, sweep_opts);
        }
        if (rep->parsed()) {
            load_cfg(rep, &replay_opts);
            return run_replay(replay_opts, replay_log, replay_tie,
                              rep->count("--periods") > 0);
        }
        if (gen->parsed()) {
            return run_gen_log(gen_opts, gen_log_opts);
        }
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const pacer::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
