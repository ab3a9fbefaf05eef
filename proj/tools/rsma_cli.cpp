// Batch CLI for max-min uplink design and link-level validation.
//
//   rsma optimize  one design point, prints the state summary
//   rsma sweep     Monte-Carlo sweep driven by a JSON spec file
//   rsma lls       link-level trials on a saved design bundle
//   rsma oracle    small-instance brute-force references
//
// Exit codes: 0 ok, 1 configuration error, 2 partial row failures.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "rsma/oracle.hpp"
#include "rsma/sweep.hpp"

using namespace rsma;

namespace {

nlohmann::json config_to_json(const SystemConfig& cfg) {
    nlohmann::json j;
    j["K"] = cfg.K;
    j["Nt"] = cfg.Nt;
    j["Nr"] = cfg.Nr;
    j["Pt"] = cfg.Pt;
    j["sigma2"] = cfg.sigma2;
    j["N"] = cfg.N;
    j["epsilon"] = cfg.epsilon;
    j["scheme"] = to_string(cfg.scheme);
    j["split_set"] = std::vector<int>(cfg.split_set.begin(), cfg.split_set.end());
    j["noise_norm_squared"] = cfg.noise_norm_squared;
    return j;
}

SystemConfig config_from_json(const nlohmann::json& j) {
    SystemConfig cfg;
    cfg.K = j.at("K").get<int>();
    cfg.Nt = j.at("Nt").get<int>();
    cfg.Nr = j.at("Nr").get<int>();
    cfg.Pt = j.at("Pt").get<double>();
    cfg.sigma2 = j.value("sigma2", 1.0);
    cfg.N = j.at("N").get<int>();
    cfg.epsilon = j.value("epsilon", 1e-5);
    cfg.scheme = scheme_from_string(j.value("scheme", "RSMA"));
    for (int v : j.value("split_set", std::vector<int>{})) cfg.split_set.insert(v);
    cfg.noise_norm_squared = j.value("noise_norm_squared", false);
    cfg.validate();
    return cfg;
}

struct OptimizeArgs {
    int k = 2, nt = 2, nr = 2, n = 500;
    double snr_db = 20.0, epsilon = 1e-5, tau = 1e-4;
    int max_iters = 100;
    std::string scheme = "RSMA";
    int splits = 0;
    std::uint64_t seed = 1;
    std::string warm = "noma";
    std::string trace_out, save_design;
};

int run_optimize(const OptimizeArgs& a) {
    SystemConfig cfg;
    cfg.K = a.k;
    cfg.Nt = a.nt;
    cfg.Nr = a.nr;
    cfg.N = a.n;
    cfg.Pt = db_to_linear(a.snr_db);
    cfg.epsilon = a.epsilon;
    cfg.scheme = scheme_from_string(a.scheme);

    SystemConfig chan_cfg = cfg;
    chan_cfg.scheme = Scheme::NOMA;
    chan_cfg.split_set.clear();
    chan_cfg.validate();
    const auto ch = generate_rayleigh_channels(chan_cfg, a.seed);
    if (cfg.scheme == Scheme::RSMA && a.splits > 0) {
        const auto base_order = compute_decoding_order(ch, chan_cfg);
        for (int i = 1; i <= std::min(a.splits, cfg.K); ++i) cfg.split_set.insert(base_order.user_at(i));
    }
    cfg.validate();
    const auto fbl = FblParams::make(cfg.N, cfg.epsilon);

    AoSettings settings;
    settings.tau = a.tau;
    settings.max_outer_iters = a.max_iters;
    if (a.warm == "noma" && cfg.scheme == Scheme::RSMA && !cfg.split_set.empty())
        settings.init_strategy = InitStrategy::NomaWarmStart;
    const auto res = solve_mmf(ch, cfg, fbl, settings);

    const auto order = compute_decoding_order(ch, cfg);
    const auto rep = user_rates(ch, res.best_state.P, res.best_state.G, order, cfg, fbl);
    std::cout << "scheme        " << to_string(cfg.scheme) << "\n";
    if (!cfg.split_set.empty()) {
        std::cout << "split users  ";
        for (int j : cfg.split_set) std::cout << ' ' << j;
        std::cout << "\n";
    }
    std::cout << "seed          " << a.seed << "\n";
    std::cout << "snr_db        " << a.snr_db << "\n";
    std::cout << "blocklength   " << cfg.N << "\n";
    std::cout << "iterations    " << res.iterations << (res.converged ? " (converged)" : " (cap)") << "\n";
    std::cout << "surrogate t   " << res.state.t << "\n";
    std::cout << "mmf           " << res.mmf << "\n";
    for (int kk = 0; kk < cfg.K; ++kk)
        std::cout << "user " << (kk + 1) << " rate   " << rep.per_user[kk] << "\n";

    if (!a.trace_out.empty()) {
        std::ofstream out(a.trace_out);
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            nlohmann::json j{{"iteration", i}, {"t", res.trace[i]}};
            if (i > 0 && i * 2 <= res.solver_statuses.size())
                j["solver_statuses"] = {to_string(res.solver_statuses[2 * i - 2]),
                                        to_string(res.solver_statuses[2 * i - 1])};
            out << j.dump() << "\n";
        }
    }
    if (!a.save_design.empty()) {
        nlohmann::json bundle;
        bundle["config"] = config_to_json(cfg);
        bundle["channel"] = to_json(ch);
        bundle["design"] = to_json(res.best_state, order);
        bundle["mmf"] = res.mmf;
        std::ofstream out(a.save_design);
        out << bundle.dump(2) << "\n";
    }
    return 0;
}

int run_lls(const std::string& design_path, int frames, double noise_stddev_override, bool noiseless,
            int channel_uses, int list_size, std::uint64_t seed) {
    std::ifstream in(design_path);
    if (!in) throw std::invalid_argument("cannot open design bundle: " + design_path);
    nlohmann::json bundle = nlohmann::json::parse(in);
    const SystemConfig cfg = config_from_json(bundle.at("config"));
    const ChannelRealization ch = channel_from_json(bundle.at("channel"));
    auto [state, order] = design_from_json(bundle.at("design"));
    const auto fbl = FblParams::make(cfg.N, cfg.epsilon);

    phy::LlsOptions opt;
    opt.channel_uses = channel_uses;
    opt.list_size = list_size;
    const auto design = phy::make_lls_design(ch, state.P, state.G, order, cfg, fbl, opt, seed);
    const double noise = noiseless ? 0.0
                                   : (noise_stddev_override > 0 ? noise_stddev_override
                                                                : std::sqrt(cfg.sigma2));
    std::vector<phy::FrameResult> results;
    for (int f = 0; f < frames; ++f) {
        const auto frame = phy::transmit_frame(design, seed * 1000 + f);
        const auto Y = phy::apply_channel(design, ch, frame, noise, seed * 1000 + 500 + f);
        results.push_back(phy::mmse_sic_receive(Y, ch, design, frame));
        const auto& r = results.back();
        nlohmann::json j{{"frame", f},
                         {"recovered_bits", r.recovered_bits},
                         {"channel_uses", r.channel_uses},
                         {"sic_abort_position", r.sic_abort_position}};
        std::cout << j.dump() << "\n";
    }
    std::cout << "max_min_throughput " << phy::max_min_throughput(results) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uplink rate-splitting max-min design and link-level simulation"};
    app.require_subcommand(1);

    OptimizeArgs oa;
    auto* opt = app.add_subcommand("optimize", "optimize one design point");
    opt->add_option("--k", oa.k, "users");
    opt->add_option("--nt", oa.nt, "tx antennas per user");
    opt->add_option("--nr", oa.nr, "rx antennas at the BS");
    opt->add_option("--n", oa.n, "blocklength (channel uses)");
    opt->add_option("--snr-db", oa.snr_db, "transmit SNR in dB (Pt, sigma2 = 1)");
    opt->add_option("--eps", oa.epsilon, "target error probability");
    opt->add_option("--scheme", oa.scheme, "RSMA | NOMA | SDMA");
    opt->add_option("--splits", oa.splits, "number of splitting users (RSMA, strongest first)");
    opt->add_option("--seed", oa.seed, "channel seed");
    opt->add_option("--tau", oa.tau, "AO convergence tolerance");
    opt->add_option("--max-iters", oa.max_iters, "AO iteration cap");
    opt->add_option("--warm-start", oa.warm, "noma | none");
    opt->add_option("--trace-out", oa.trace_out, "write per-iteration trace (JSON lines)");
    opt->add_option("--save-design", oa.save_design, "write design bundle JSON");

    std::string spec_path, out_base = "results";
    auto* sw = app.add_subcommand("sweep", "run a Monte-Carlo sweep from a JSON spec");
    sw->add_option("--spec", spec_path, "experiment spec JSON")->required();
    sw->add_option("--out", out_base, "output base path (.jsonl/.csv)");

    std::string design_path;
    int frames = 10, channel_uses = 256, list_size = 8;
    double noise_std = 0.0;
    bool noiseless = false;
    std::uint64_t lls_seed = 1;
    auto* lls = app.add_subcommand("lls", "link-level trials on a saved design bundle");
    lls->add_option("--design", design_path, "design bundle from optimize --save-design")->required();
    lls->add_option("--frames", frames, "number of frames");
    lls->add_option("--s", channel_uses, "channel uses per frame");
    lls->add_option("--list", list_size, "SCL list size");
    lls->add_option("--noise-std", noise_std, "noise stddev override");
    lls->add_flag("--noiseless", noiseless, "disable noise");
    lls->add_option("--seed", lls_seed, "frame/noise seed");

    auto* orc = app.add_subcommand("oracle", "small-instance brute-force checks");
    double h1 = 1.2, h2 = 0.8, opt_pt = 10.0, osnr = 10.0;
    int on = 500, ogrid = 200, ok = 2, ont = 1, onr = 2, osplits = 1;
    double oeps = 1e-5;
    std::uint64_t oseed = 1;
    auto* grid = orc->add_subcommand("grid", "SISO NOMA grid search vs the SCA result");
    grid->add_option("--h1", h1, "user 1 channel");
    grid->add_option("--h2", h2, "user 2 channel");
    grid->add_option("--pt", opt_pt, "power budget (linear)");
    grid->add_option("--n", on, "blocklength");
    grid->add_option("--eps", oeps, "error probability");
    grid->add_option("--grid", ogrid, "grid points per axis");
    auto* orders = orc->add_subcommand("orders", "rank all decoding orders of a small instance");
    orders->add_option("--k", ok, "users");
    orders->add_option("--nt", ont, "tx antennas");
    orders->add_option("--nr", onr, "rx antennas");
    orders->add_option("--snr-db", osnr, "transmit SNR in dB");
    orders->add_option("--splits", osplits, "number of splitting users");
    orders->add_option("--seed", oseed, "channel seed");
    orc->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (opt->parsed()) return run_optimize(oa);
        if (sw->parsed()) {
            std::ifstream in(spec_path);
            if (!in) throw std::invalid_argument("cannot open spec: " + spec_path);
            const auto spec = sweep::spec_from_json(nlohmann::json::parse(in));
            const auto rows = sweep::run_sweep_to_files(spec, out_base);
            int failed = 0;
            for (const auto& r : rows) failed += r.status != "ok";
            for (const auto& g : sweep::aggregate(rows, {"scheme", "split_count", "snr_db", "blocklength"}))
                std::cout << g.group << " n=" << g.count << " mean_mmf=" << g.mean_mmf
                          << " std=" << g.std_mmf
                          << (g.mean_throughput ? " mean_thr=" + std::to_string(*g.mean_throughput) : "")
                          << (g.failed ? " failed=" + std::to_string(g.failed) : "") << "\n";
            std::cout << "rows " << rows.size() << " -> " << out_base << ".csv\n";
            return failed ? 2 : 0;
        }
        if (lls->parsed())
            return run_lls(design_path, frames, noise_std, noiseless, channel_uses, list_size, lls_seed);
        if (orc->parsed()) {
            if (grid->parsed()) {
                const auto fbl = FblParams::make(on, oeps);
                const auto best = oracle::grid_search_noma_siso(h1, h2, opt_pt, fbl, ogrid);
                SystemConfig cfg;
                cfg.K = 2;
                cfg.Nt = cfg.Nr = 1;
                cfg.Pt = opt_pt;
                cfg.N = on;
                cfg.epsilon = oeps;
                cfg.scheme = Scheme::NOMA;
                cfg.validate();
                ChannelRealization ch;
                ch.H = {MatC::Constant(1, 1, cxd(h1, 0)), MatC::Constant(1, 1, cxd(h2, 0))};
                const auto res = solve_mmf_noma(ch, cfg, fbl);
                std::cout << "grid mmf " << best.mmf << " (p1=" << best.p1 << " p2=" << best.p2 << ")\n";
                std::cout << "sca  mmf " << res.mmf << "\n";
                std::cout << "gap %    " << (best.mmf > 0 ? (best.mmf - res.mmf) / best.mmf * 100.0 : 0.0)
                          << "\n";
            } else {
                SystemConfig cfg;
                cfg.K = ok;
                cfg.Nt = ont;
                cfg.Nr = onr;
                cfg.Pt = db_to_linear(osnr);
                cfg.scheme = osplits > 0 ? Scheme::RSMA : Scheme::NOMA;
                SystemConfig chan_cfg = cfg;
                chan_cfg.scheme = Scheme::NOMA;
                chan_cfg.validate();
                const auto ch = generate_rayleigh_channels(chan_cfg, oseed);
                const auto base_order = compute_decoding_order(ch, chan_cfg);
                for (int i = 1; i <= std::min(osplits, ok); ++i) cfg.split_set.insert(base_order.user_at(i));
                cfg.validate();
                const auto fbl = FblParams::make(on, oeps);
                const auto heuristic = compute_decoding_order(ch, cfg);
                const auto scored = oracle::score_all_orders(ch, cfg, fbl);
                for (std::size_t i = 0; i < scored.size(); ++i) {
                    std::cout << i + 1 << ". mmf=" << scored[i].mmf << "  [";
                    for (const auto& e : scored[i].order.entries)
                        std::cout << " u" << e.user << ":" << to_string(e.part);
                    std::cout << " ]"
                              << (scored[i].order.entries == heuristic.entries ? "  <- heuristic" : "")
                              << "\n";
                }
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
