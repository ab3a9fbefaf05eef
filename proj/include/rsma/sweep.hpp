#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

#include "rsma/phy/lls.hpp"
#include "rsma/sca.hpp"

// Batch experiment driver: seeded Monte-Carlo sweeps over SNR, blocklength,
// scheme and split count. All schemes at a given realization share the channel
// (seed = base_seed + realization), RSMA points are multi-started from the
// paired NOMA/SDMA solutions, and rows are written as JSON lines plus a
// stable, versioned CSV (rewritten sorted on finalize).

namespace rsma::sweep {

inline constexpr const char* kCsvSchema = "rsma-results-v1";

struct ExperimentSpec {
    SystemConfig base;  // Pt, N, scheme, split_set come from the axes below
    std::vector<double> snr_db = {20.0};
    std::vector<int> blocklength = {500};
    std::vector<Scheme> schemes = {Scheme::RSMA, Scheme::NOMA, Scheme::SDMA};
    std::vector<int> split_count = {1};  // RSMA only
    int realizations = 20;
    std::uint64_t base_seed = 1;
    bool run_lls = false;
    int lls_frames = 4;
    phy::LlsOptions lls;
    AoSettings ao;

    void validate() const {
        if (snr_db.empty() || blocklength.empty() || schemes.empty())
            throw std::invalid_argument("sweep axes must be nonempty");
        if (realizations < 1) throw std::invalid_argument("realizations >= 1");
        for (int s : split_count)
            if (s < 1 || s > base.K) throw std::invalid_argument("split_count must be in 1..K");
    }
};

struct ResultRow {
    Scheme scheme = Scheme::NOMA;
    int split_count = 0;  // 0 for NOMA/SDMA
    double snr_db = 0.0;
    int blocklength = 0;
    int realization = 0;
    std::uint64_t seed = 0;
    double mmf = 0.0;
    std::optional<double> throughput;
    std::vector<double> per_user;
    int iterations = 0;
    bool converged = false;
    std::string status = "ok";
    double wall_ms = 0.0;

    std::string key() const {
        std::ostringstream os;
        os << to_string(scheme) << '|' << split_count << '|' << snr_db << '|' << blocklength << '|'
           << realization;
        return os.str();
    }
};

/// (rsma - baseline) / baseline * 100. Baselines <= 0 are undefined.
inline double relative_gain(double rsma_mmf, double baseline_mmf) {
    if (!(baseline_mmf > 0.0)) throw std::domain_error("relative_gain: baseline must be positive");
    return (rsma_mmf - baseline_mmf) / baseline_mmf * 100.0;
}

// --- spec/rows serialization ---

inline nlohmann::json to_json(const ExperimentSpec& s) {
    nlohmann::json j;
    j["K"] = s.base.K;
    j["Nt"] = s.base.Nt;
    j["Nr"] = s.base.Nr;
    j["sigma2"] = s.base.sigma2;
    j["epsilon"] = s.base.epsilon;
    j["snr_db"] = s.snr_db;
    j["blocklength"] = s.blocklength;
    std::vector<std::string> sch;
    for (auto v : s.schemes) sch.push_back(to_string(v));
    j["schemes"] = sch;
    j["split_count"] = s.split_count;
    j["realizations"] = s.realizations;
    j["base_seed"] = s.base_seed;
    j["run_lls"] = s.run_lls;
    j["lls_frames"] = s.lls_frames;
    j["lls_channel_uses"] = s.lls.channel_uses;
    j["ao_tau"] = s.ao.tau;
    j["ao_max_iters"] = s.ao.max_outer_iters;
    return j;
}

inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    s.base.K = j.value("K", 2);
    s.base.Nt = j.value("Nt", 2);
    s.base.Nr = j.value("Nr", 2);
    s.base.sigma2 = j.value("sigma2", 1.0);
    s.base.epsilon = j.value("epsilon", 1e-5);
    if (j.contains("snr_db")) s.snr_db = j.at("snr_db").get<std::vector<double>>();
    if (j.contains("blocklength")) s.blocklength = j.at("blocklength").get<std::vector<int>>();
    if (j.contains("schemes")) {
        s.schemes.clear();
        for (const auto& v : j.at("schemes")) s.schemes.push_back(scheme_from_string(v.get<std::string>()));
    }
    if (j.contains("split_count")) s.split_count = j.at("split_count").get<std::vector<int>>();
    s.realizations = j.value("realizations", 20);
    s.base_seed = j.value("base_seed", std::uint64_t{1});
    s.run_lls = j.value("run_lls", false);
    s.lls_frames = j.value("lls_frames", 4);
    s.lls.channel_uses = j.value("lls_channel_uses", 256);
    s.ao.tau = j.value("ao_tau", 1e-4);
    s.ao.max_outer_iters = j.value("ao_max_iters", 100);
    s.validate();
    return s;
}

inline nlohmann::json to_json(const ResultRow& r) {
    nlohmann::json j;
    j["scheme"] = to_string(r.scheme);
    j["split_count"] = r.split_count;
    j["snr_db"] = r.snr_db;
    j["blocklength"] = r.blocklength;
    j["realization"] = r.realization;
    j["seed"] = r.seed;
    j["mmf"] = r.mmf;
    if (r.throughput) j["throughput"] = *r.throughput;
    j["per_user"] = r.per_user;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["wall_ms"] = r.wall_ms;
    return j;
}

inline ResultRow row_from_json(const nlohmann::json& j) {
    ResultRow r;
    r.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    r.split_count = j.value("split_count", 0);
    r.snr_db = j.at("snr_db").get<double>();
    r.blocklength = j.at("blocklength").get<int>();
    r.realization = j.at("realization").get<int>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.mmf = j.at("mmf").get<double>();
    if (j.contains("throughput")) r.throughput = j.at("throughput").get<double>();
    if (j.contains("per_user")) r.per_user = j.at("per_user").get<std::vector<double>>();
    r.iterations = j.value("iterations", 0);
    r.converged = j.value("converged", false);
    r.status = j.value("status", "ok");
    r.wall_ms = j.value("wall_ms", 0.0);
    return r;
}

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

/// Stable CSV without wall time (byte-identical across reruns of one spec).
inline std::string rows_to_csv(std::vector<ResultRow> rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
    std::ostringstream os;
    os << "# " << kCsvSchema << "\n";
    os << "scheme,split_count,snr_db,blocklength,realization,seed,mmf,throughput,iterations,converged,status\n";
    for (const auto& r : rows) {
        os << to_string(r.scheme) << ',' << r.split_count << ',' << detail::fmt(r.snr_db) << ','
           << r.blocklength << ',' << r.realization << ',' << r.seed << ',' << detail::fmt(r.mmf) << ','
           << (r.throughput ? detail::fmt(*r.throughput) : "") << ',' << r.iterations << ','
           << (r.converged ? 1 : 0) << ',' << r.status << '\n';
    }
    return os.str();
}

struct GroupSummary {
    std::string group;
    int count = 0;
    int failed = 0;
    double mean_mmf = 0.0;
    double std_mmf = 0.0;  // population
    std::optional<double> mean_throughput;
};

/// Groups rows by the given axis columns (subset of scheme/split_count/snr_db/
/// blocklength) and reports exact means and population stds over the ok rows.
inline std::vector<GroupSummary> aggregate(const std::vector<ResultRow>& rows,
                                           const std::vector<std::string>& group_by) {
    auto key_of = [&](const ResultRow& r) {
        std::ostringstream os;
        for (const auto& g : group_by) {
            if (g == "scheme") os << to_string(r.scheme);
            else if (g == "split_count") os << r.split_count;
            else if (g == "snr_db") os << detail::fmt(r.snr_db);
            else if (g == "blocklength") os << r.blocklength;
            else throw std::invalid_argument("unknown group column: " + g);
            os << '|';
        }
        return os.str();
    };
    std::map<std::string, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) groups[key_of(r)].push_back(&r);
    std::vector<GroupSummary> out;
    for (const auto& [k, members] : groups) {
        GroupSummary s;
        s.group = k;
        double acc = 0.0, acc2 = 0.0, accT = 0.0;
        int nT = 0;
        for (const auto* r : members) {
            if (r->status != "ok") {
                ++s.failed;
                continue;
            }
            ++s.count;
            acc += r->mmf;
            acc2 += r->mmf * r->mmf;
            if (r->throughput) {
                accT += *r->throughput;
                ++nT;
            }
        }
        if (s.count == 0) continue;  // empty groups omitted
        s.mean_mmf = acc / s.count;
        s.std_mmf = std::sqrt(std::max(0.0, acc2 / s.count - s.mean_mmf * s.mean_mmf));
        if (nT) s.mean_throughput = accT / nT;
        out.push_back(std::move(s));
    }
    return out;
}

/// Optimizes one point. RSMA points take the paired NOMA/SDMA states as extra
/// starts and keep the best outcome, so RSMA never trails its baselines.
inline AoResult solve_point(const ChannelRealization& ch, const SystemConfig& cfg, const FblParams& fbl,
                            const AoSettings& settings, const std::vector<const AoResult*>& warm) {
    AoResult best = solve_mmf(ch, cfg, fbl, settings);
    if (cfg.scheme == Scheme::RSMA && !cfg.split_set.empty()) {
        const DecodingOrder order = compute_decoding_order(ch, cfg);
        for (const AoResult* base : warm) {
            if (!base) continue;
            SystemConfig base_cfg = cfg;
            base_cfg.scheme = Scheme::NOMA;
            base_cfg.split_set.clear();
            const DecodingOrder base_order = compute_decoding_order(ch, base_cfg);
            DesignState init = expand_to_rsma(base->best_state, base_order, ch, order, cfg, fbl);
            AoSettings s2 = settings;
            s2.init_strategy = InitStrategy::Given;
            s2.given_state = &init;
            AoResult r = solve_mmf(ch, cfg, fbl, s2);
            if (r.mmf > best.mmf) best = std::move(r);
        }
    }
    return best;
}

/// Runs the sweep. Existing rows in `done_keys` are skipped; per-row failures
/// are recorded in the row status, never thrown.
inline std::vector<ResultRow> run_sweep(const ExperimentSpec& spec,
                                        const std::set<std::string>& done_keys = {},
                                        const std::function<void(const ResultRow&)>& on_row = nullptr) {
    spec.validate();
    struct Task {
        double snr = 0.0;
        int n = 0;
        int realization = 0;
    };
    std::vector<Task> tasks;
    for (double snr : spec.snr_db)
        for (int n : spec.blocklength)
            for (int rlz = 0; rlz < spec.realizations; ++rlz) tasks.push_back({snr, n, rlz});

    std::vector<ResultRow> all;
    std::mutex mu;
    parallel_for(tasks.size(), default_workers(), [&](std::size_t ti) {
        const Task task = tasks[ti];
        const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(task.realization);
        SystemConfig proto = spec.base;
        proto.Pt = db_to_linear(task.snr);
        proto.N = task.n;
        const FblParams fbl = FblParams::make(task.n, proto.epsilon);
        ChannelRealization ch;
        {
            SystemConfig chcfg = proto;
            chcfg.scheme = Scheme::NOMA;
            chcfg.split_set.clear();
            chcfg.validate();
            ch = generate_rayleigh_channels(chcfg, seed);
        }

        std::vector<ResultRow> local;
        std::optional<AoResult> noma, sdma;
        auto emit = [&](Scheme scheme, int split, const std::function<AoResult()>& run) {
            ResultRow row;
            row.scheme = scheme;
            row.split_count = split;
            row.snr_db = task.snr;
            row.blocklength = task.n;
            row.realization = task.realization;
            row.seed = seed;
            if (done_keys.count(row.key())) return;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                AoResult res = run();
                row.mmf = res.mmf;
                row.iterations = res.iterations;
                row.converged = res.converged;
                SystemConfig cfg = proto;
                cfg.scheme = scheme;
                cfg.split_set.clear();
                if (scheme == Scheme::RSMA) {
                    const DecodingOrder tmp_order = compute_decoding_order(ch, cfg);
                    for (int i = 1; i <= split; ++i) cfg.split_set.insert(tmp_order.user_at(i));
                }
                const DecodingOrder order = compute_decoding_order(ch, cfg);
                auto rep = user_rates(ch, res.best_state.P, res.best_state.G, order, cfg, fbl);
                row.per_user = rep.per_user;
                if (spec.run_lls) {
                    auto design = phy::make_lls_design(ch, res.best_state.P, res.best_state.G, order, cfg,
                                                       fbl, spec.lls, seed);
                    std::vector<phy::FrameResult> frames;
                    for (int fidx = 0; fidx < spec.lls_frames; ++fidx) {
                        auto frame = phy::transmit_frame(design, seed * 1000 + fidx);
                        auto Y = phy::apply_channel(design, ch, frame, std::sqrt(proto.sigma2),
                                                    seed * 1000 + 500 + fidx);
                        frames.push_back(phy::mmse_sic_receive(Y, ch, design, frame));
                    }
                    row.throughput = phy::max_min_throughput(frames);
                }
            } catch (const std::exception& ex) {
                row.status = std::string("error: ") + ex.what();
            }
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            local.push_back(std::move(row));
        };

        const bool want_rsma = std::count(spec.schemes.begin(), spec.schemes.end(), Scheme::RSMA) > 0;
        for (Scheme scheme : {Scheme::NOMA, Scheme::SDMA}) {
            const bool wanted = std::count(spec.schemes.begin(), spec.schemes.end(), scheme) > 0;
            // NOMA also runs unrequested when RSMA needs its warm start
            if (!wanted && !(scheme == Scheme::NOMA && want_rsma)) continue;
            SystemConfig cfg = proto;
            cfg.scheme = scheme;
            cfg.split_set.clear();
            auto& slot = scheme == Scheme::NOMA ? noma : sdma;
            slot = scheme == Scheme::NOMA ? solve_mmf_noma(ch, cfg, fbl, spec.ao)
                                          : solve_mmf_sdma(ch, cfg, fbl, spec.ao);
            if (wanted) emit(scheme, 0, [&] { return *slot; });
        }
        if (want_rsma) {
            for (int split : spec.split_count) {
                emit(Scheme::RSMA, split, [&] {
                    SystemConfig cfg = proto;
                    cfg.scheme = Scheme::RSMA;
                    const DecodingOrder base_order = compute_decoding_order(ch, [&] {
                        SystemConfig c = proto;
                        c.scheme = Scheme::NOMA;
                        c.split_set.clear();
                        return c;
                    }());
                    for (int i = 1; i <= split; ++i) cfg.split_set.insert(base_order.user_at(i));
                    cfg.validate();
                    std::vector<const AoResult*> warm;
                    if (noma) warm.push_back(&*noma);
                    if (sdma) warm.push_back(&*sdma);
                    return solve_point(ch, cfg, FblParams::make(task.n, cfg.epsilon), spec.ao, warm);
                });
            }
        }
        std::scoped_lock lock(mu);
        for (auto& r : local) {
            if (on_row) on_row(r);
            all.push_back(std::move(r));
        }
    });
    std::stable_sort(all.begin(), all.end(),
                     [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
    return all;
}

/// Loads previously written JSONL rows (resume support); missing file is fine.
inline std::vector<ResultRow> load_jsonl(const std::string& path) {
    std::vector<ResultRow> rows;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(row_from_json(nlohmann::json::parse(line)));
    }
    return rows;
}

/// Full sweep with resumable outputs: appends new rows to <out>.jsonl and
/// rewrites <out>.csv from every known row. Returns all rows.
inline std::vector<ResultRow> run_sweep_to_files(const ExperimentSpec& spec, const std::string& out_base) {
    const std::string jsonl_path = out_base + ".jsonl";
    const std::string csv_path = out_base + ".csv";
    std::vector<ResultRow> known = load_jsonl(jsonl_path);
    std::set<std::string> done;
    for (const auto& r : known)
        if (r.status == "ok") done.insert(r.key());

    std::ofstream jsonl(jsonl_path, std::ios::app);
    std::mutex mu;
    auto rows = run_sweep(spec, done, [&](const ResultRow& r) {
        std::scoped_lock lock(mu);
        jsonl << to_json(r).dump() << "\n";
        jsonl.flush();
    });
    for (auto& r : known) rows.push_back(std::move(r));
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << rows_to_csv(rows);
    return rows;
}

}  // namespace rsma::sweep
