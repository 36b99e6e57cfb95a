#include "cli.hpp"

#include "critesn/analysis.hpp"
#include "critesn/csv.hpp"
#include "critesn/experiments.hpp"
#include "critesn/reservoir.hpp"
#include "critesn/signals.hpp"
#include "critesn/transfer.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace critesn::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
    std::uint64_t seed = 0;
    std::string out = ".";
    unsigned threads = 0;
    std::string config;

    unsigned workers() const { return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency()); }

    fs::path file(std::string_view name) const
    {
        fs::create_directories(out);
        return fs::path{out} / std::string{name};
    }
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string{s.substr(b, e - b + 1)};
}

// Flat key=value lines; '#' starts a comment. Keys may be written with or without
// the leading dashes of the corresponding flag.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path)
{
    std::ifstream in{path};
    if (!in) throw std::runtime_error(fmt::format("cannot open config file '{}'", path.string()));
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(fmt::format("{}:{}: expected key = value", path.string(), lineno));
        auto key = trim(std::string_view{text}.substr(0, eq));
        while (!key.empty() && key.front() == '-') key.erase(0, 1);
        if (key.empty()) throw std::runtime_error(fmt::format("{}:{}: empty key", path.string(), lineno));
        entries.emplace_back(std::move(key), trim(std::string_view{text}.substr(eq + 1)));
    }
    return entries;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args)
{
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    return path;
}

// Config values are spliced in directly after the subcommand name so that any
// flag given on the command line appears later and takes precedence.
std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args)
{
    const auto path = find_config_path(args);
    if (!path) return args;
    const auto entries = read_config(*path);

    std::size_t insert_at = 0;
    CLI::App* chosen = nullptr;
    for (std::size_t i = 0; i < args.size() && !chosen; ++i) {
        if (auto* sub = app.get_subcommand_no_throw(args[i])) {
            chosen = sub;
            insert_at = i + 1;
        }
    }

    std::vector<std::string> injected;
    for (const auto& [key, value] : entries) {
        const std::string flag = "--" + key;
        if (key == "config") throw std::runtime_error("config files cannot include other config files");
        bool known = app.get_option_no_throw(flag) != nullptr;
        bool applies = known;
        for (auto* sub : app.get_subcommands({})) {
            if (sub->get_option_no_throw(flag) == nullptr) continue;
            known = true;
            if (sub == chosen) applies = true;
        }
        if (!known) throw std::runtime_error(fmt::format("unknown config key '{}'", key));
        if (applies) injected.push_back(flag + "=" + value);
    }

    std::vector<std::string> merged(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
    merged.insert(merged.end(), injected.begin(), injected.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
    return merged;
}

std::vector<double> grid_from(const std::string& text, std::vector<double> fallback)
{
    if (text.empty()) return fallback;
    auto grid = parse_number_list(text);
    if (grid.empty()) throw std::invalid_argument("grid is empty");
    return grid;
}

// transfer-dump -------------------------------------------------------------

struct TransferDumpArgs {
    std::string ecps = "-1,0,1";
    std::string variant = "bridge";
    double lo = -3.0;
    double hi = 3.0;
    std::size_t n = 601;
    bool gnuplot = false;
};

void transfer_dump(const Globals& g, const TransferDumpArgs& a, std::ostream& out)
{
    const MorphableTransfer f{EcpList::parse(a.ecps), parse_variant(a.variant)};
    const auto rows = f.sample(a.lo, a.hi, a.n);
    write_text_file(g.file("transfer.csv"), samples_to_csv(rows));

    std::string markers = "ecp,theta\n";
    for (double p : f.ecps().points()) markers += format_number(p) + "," + format_number(f.eval(p)) + "\n";
    write_text_file(g.file("transfer_ecps.csv"), markers);

    if (a.gnuplot) {
        std::string script;
        script += "set datafile separator ','\n";
        script += "set key top left\n";
        script += "set xlabel 'x'\n";
        script += fmt::format("set title 'ecps {} ({})'\n", f.ecps().to_string(), to_string(f.variant()));
        script += "plot 'transfer.csv' using 1:2 skip 1 with lines title 'theta', \\\n";
        script += "     'transfer.csv' using 1:3 skip 1 with lines title 'slope', \\\n";
        script += "     'transfer_ecps.csv' using 1:2 skip 1 with points pt 7 title 'ecp'\n";
        write_text_file(g.file("transfer.gp"), script);
    }
    const auto flat = std::count_if(rows.begin(), rows.end(), [](const TransferSample& s) { return s.slope == 0.0; });
    out << fmt::format("transfer: {} samples on [{}, {}], {} with zero slope\n", rows.size(), a.lo, a.hi, flat);
}

// sweeps ------------------------------------------------------------------

struct SweepArgs {
    std::string grid;
    std::size_t horizon = default_horizon;
    std::size_t washout = default_washout;
    double d0 = default_d0;
    std::string ecps = "-1,0,1";
    std::string variant = "bridge";

    SweepOptions options(const Globals& g) const
    {
        SweepOptions o;
        o.horizon = horizon;
        o.washout = washout;
        o.d0 = d0;
        o.seed = g.seed;
        o.threads = g.workers();
        o.ecps = EcpList::parse(ecps);
        o.variant = parse_variant(variant);
        return o;
    }
};

void sweep_alpha_cmd(const Globals& g, const SweepArgs& a, std::ostream& out)
{
    const auto rows = sweep_alpha(grid_from(a.grid, default_alpha_grid()), a.options(g));
    std::string csv = "alpha,lambda,stderr\n";
    for (const auto& r : rows)
        csv += fmt::format("{},{},{}\n", format_number(r.alpha), format_number(r.lambda), format_number(r.std_error));
    write_text_file(g.file("sweep_alpha.csv"), csv);
    out << fmt::format("sweep-alpha: {} grid points written\n", rows.size());
}

void sweep_gamma_cmd(const Globals& g, const SweepArgs& a, std::ostream& out)
{
    const auto rows = sweep_gamma(grid_from(a.grid, default_gamma_grid()), a.options(g));
    std::string csv = "gamma,lambda_ecp,lambda_tanh\n";
    for (const auto& r : rows)
        csv += fmt::format("{},{},{}\n", format_number(r.gamma), format_number(r.lambda_ecp),
                           format_number(r.lambda_tanh));
    write_text_file(g.file("sweep_gamma.csv"), csv);
    out << fmt::format("sweep-gamma: {} grid points written\n", rows.size());
}

// forgetting ----------------------------------------------------------------

struct ForgettingArgs {
    std::string input = "alternating";
    double alpha = 1.0;
    std::string init = "fixed-delta";
    double d0 = 1e-3;
    std::size_t horizon = 100000;
    std::size_t replicates = 0;  // 0: 8 for iid input, 1 otherwise
    std::string ecps = "-1,0,1";
    std::string variant = "bridge";
};

void forgetting_cmd(const Globals& g, const ForgettingArgs& a, std::ostream& out)
{
    ForgettingOptions o;
    o.input = parse_signal_kind(a.input);
    o.alpha = a.alpha;
    o.init = parse_init_mode(a.init);
    o.d0 = a.d0;
    o.horizon = a.horizon;
    o.replicates = a.replicates > 0 ? a.replicates : (o.input == SignalKind::IidPlusMinus ? 8 : 1);
    o.seed = g.seed;
    o.ecps = EcpList::parse(a.ecps);
    o.variant = parse_variant(a.variant);

    const auto runs = forgetting(o);
    std::string fits = "replicate,seed," + decay_csv_header() + "\n";
    std::string report = fmt::format("input={} alpha={} init={} d0={} horizon={} replicates={}\n", to_string(o.input),
                                     format_number(o.alpha), to_string(o.init), format_number(o.d0), o.horizon,
                                     o.replicates);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        write_text_file(g.file(fmt::format("forgetting_{}.csv", r)), distances_to_csv(runs[r].series));
        fits += fmt::format("{},{},{}\n", r, runs[r].seed, decay_csv_row(runs[r].fit));
        report += fmt::format("replicate {} (seed {}): {}\n", r, runs[r].seed, describe(runs[r].fit));
    }
    write_text_file(g.file("forgetting_fit.csv"), fits);
    write_text_file(g.file("forgetting_report.txt"), report);
    out << report;
}

// critical-b ----------------------------------------------------------------

void critical_b_cmd(const Globals& g, double amplitude, std::ostream& out)
{
    const auto c = solve_critical_b(amplitude);
    const std::string csv = fmt::format("amplitude,b_star,s_star,residual_orbit,residual_tangent\n{},{},{},{},{}\n",
                                        format_number(amplitude), format_number(c.b_star), format_number(c.s_star),
                                        format_number(c.residual_orbit), format_number(c.residual_tangent));
    write_text_file(g.file("critical_b.csv"), csv);
    const auto text = describe(c, amplitude) + "\n";
    write_text_file(g.file("critical_b.txt"), text);
    out << text;
}

// lyapunov ------------------------------------------------------------------

struct LyapunovArgs {
    std::string reservoir_file;
    std::string kind = "eq7";
    double alpha = 1.0;
    double b = 0.0;
    double amplitude = std::numbers::pi / 4.0;
    std::string ecps = "-1,0,1";
    std::string variant = "bridge";
    std::size_t k = 8;
    std::string input = "alternating";
    std::string input_file;
    double gamma = 1.0;
    std::size_t horizon = default_horizon;
    std::size_t washout = default_washout;
    double d0 = default_d0;
    std::string method = "both";

    CLI::Option* kind_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* b_opt = nullptr;
    CLI::Option* amplitude_opt = nullptr;
    CLI::Option* ecps_opt = nullptr;
    CLI::Option* variant_opt = nullptr;
    CLI::Option* k_opt = nullptr;
};

void lyapunov_cmd(const Globals& g, const LyapunovArgs& a, std::ostream& out)
{
    ReservoirConfig cfg;
    if (!a.reservoir_file.empty()) {
        std::ifstream in{a.reservoir_file};
        if (!in) throw std::runtime_error(fmt::format("cannot open reservoir file '{}'", a.reservoir_file));
        std::ostringstream text;
        text << in.rdbuf();
        cfg = ReservoirConfig::parse(text.str());
    } else {
        cfg.seed = g.seed;
    }
    const bool from_file = !a.reservoir_file.empty();
    auto given = [&](CLI::Option* o) { return !from_file || o->count() > 0; };
    if (given(a.kind_opt)) cfg.kind = a.kind;
    if (given(a.alpha_opt)) cfg.alpha = a.alpha;
    if (a.b_opt->count() > 0) cfg.b = a.b;
    if (given(a.amplitude_opt)) cfg.amplitude = a.amplitude;
    if (given(a.ecps_opt)) cfg.ecps = EcpList::parse(a.ecps);
    if (given(a.variant_opt)) cfg.variant = parse_variant(a.variant);
    if (given(a.k_opt)) cfg.k = a.k;

    std::string start = "zero";
    std::optional<double> orbit_s;
    if (cfg.kind == "eq8") {
        const auto c = solve_critical_b(cfg.amplitude);
        if (!cfg.b) cfg.b = c.b_star;
        if (std::abs(*cfg.b - c.b_star) <= 1e-12 * c.b_star) orbit_s = c.s_star;
    }
    auto r = make_reservoir(cfg);
    if (cfg.kind == "eq7") {
        r.set_state(eq7_orbit_start());
        start = "orbit";
    } else if (orbit_s) {
        r.set_state(eq8_orbit_start(*orbit_s));
        start = "orbit";
    }

    InputSequence seq;
    seq.kind = parse_signal_kind(a.input);
    seq.amplitude = cfg.kind == "eq8" ? cfg.amplitude : 1.0;
    seq.gamma = a.gamma;
    seq.seed = g.seed;
    seq.length = a.washout + a.horizon;
    seq.path = a.input_file;
    if (seq.kind == SignalKind::FromFile && a.input_file.empty()) throw std::invalid_argument("--input file needs --input-file");
    if (a.horizon < min_lyapunov_steps)
        throw std::invalid_argument(fmt::format("horizon {} is below {}", a.horizon, min_lyapunov_steps));
    const auto u = generate(seq);

    std::vector<LyapunovEstimate> estimates;
    if (a.method != "both" && a.method != "renormalized" && a.method != "derivative-product")
        throw std::invalid_argument(fmt::format("unknown method '{}'", a.method));
    if (a.method != "derivative-product") estimates.push_back(lyapunov_renormalized(r, u, a.d0, a.washout, g.seed));
    if (a.method == "derivative-product" || (a.method == "both" && r.k() == 1))
        estimates.push_back(lyapunov_derivative_product(r, u, a.washout));

    std::string csv = lyapunov_csv_header() + "\n";
    std::string text = fmt::format("reservoir {} (k = {}), input {} gamma {}, start {}\n", cfg.kind, r.k(),
                                   to_string(seq.kind), format_number(seq.gamma), start);
    for (const auto& e : estimates) {
        csv += lyapunov_csv_row(e) + "\n";
        text += describe(e) + "\n";
    }
    write_text_file(g.file("lyapunov.csv"), csv);
    write_text_file(g.file("lyapunov.txt"), text);
    write_text_file(g.file("reservoir.txt"), cfg.to_text());
    out << text;
}

// readout-demo --------------------------------------------------------------

void readout_demo_cmd(const Globals& g, ReadoutDemoOptions o, std::ostream& out)
{
    o.seed = g.seed;
    const auto res = readout_demo(o);
    write_text_file(g.file("readout_model.txt"), res.model.to_text());
    write_text_file(g.file("readout_reservoir.txt"), res.reservoir.to_text());
    const std::string csv = fmt::format("split,nrmse\ntrain,{}\ntest,{}\nbaseline,{}\n", format_number(res.train_nrmse),
                                        format_number(res.test_nrmse), format_number(res.baseline_nrmse));
    write_text_file(g.file("readout.csv"), csv);
    out << fmt::format("readout-demo: delay {} recall, k = {}, test nrmse {:.6g} (baseline {:.6g})\n", o.delay, o.k,
                       res.test_nrmse, res.baseline_nrmse);
}

void add_sweep_options(CLI::App* sub, SweepArgs& a, std::string_view grid_name)
{
    sub->add_option(fmt::format("--{}", grid_name), a.grid, "Comma-separated grid (default grid when omitted)");
    sub->add_option("--horizon", a.horizon, "Averaged steps after the washout")->capture_default_str();
    sub->add_option("--washout", a.washout, "Discarded leading steps")->capture_default_str();
    sub->add_option("--d0", a.d0, "Renormalization distance")->capture_default_str();
    sub->add_option("--ecps", a.ecps, "ECP list of the one-neuron network")->capture_default_str();
    sub->add_option("--variant", a.variant, "plateau or bridge")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Critical echo state networks with morphable transfer functions", "critesn"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Base seed of every random stream")->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for sweeps (0: all cores)")->capture_default_str();
    app.add_option("--config", g.config, "Flat key = value file; flags override its entries");

    TransferDumpArgs td;
    auto* cmd_td = app.add_subcommand("transfer-dump", "Sample a transfer function and its ECP markers");
    cmd_td->add_option("--ecps", td.ecps, "Comma-separated ECPs (0 is always added)")->capture_default_str();
    cmd_td->add_option("--variant", td.variant, "plateau or bridge")->capture_default_str();
    cmd_td->add_option("--lo", td.lo, "Left end of the sampled range")->capture_default_str();
    cmd_td->add_option("--hi", td.hi, "Right end of the sampled range")->capture_default_str();
    cmd_td->add_option("--n", td.n, "Number of samples")->capture_default_str();
    cmd_td->add_flag("--gnuplot", td.gnuplot, "Also write a gnuplot script");

    SweepArgs sa;
    auto* cmd_sa = app.add_subcommand("sweep-alpha", "Lyapunov exponent of the one-neuron ECP network against alpha");
    add_sweep_options(cmd_sa, sa, "alphas");

    SweepArgs sg;
    auto* cmd_sg = app.add_subcommand("sweep-gamma", "Lyapunov exponents of the ECP and tanh networks against gamma");
    add_sweep_options(cmd_sg, sg, "gammas");

    ForgettingArgs fa;
    auto* cmd_f = app.add_subcommand("forgetting", "Distance between two networks driven by the same input");
    cmd_f->add_option("--input", fa.input, "alternating, constant or iid")->capture_default_str();
    cmd_f->add_option("--alpha", fa.alpha, "Self-coupling magnitude")->capture_default_str();
    cmd_f->add_option("--init", fa.init, "fixed-delta or bit-scale")->capture_default_str();
    cmd_f->add_option("--d0", fa.d0, "Initial distance for fixed-delta")->capture_default_str();
    cmd_f->add_option("--horizon", fa.horizon, "Steps per run (at most 1e6)")->capture_default_str();
    cmd_f->add_option("--replicates", fa.replicates, "Runs with seeds seed, seed+1, ... (0: 8 for iid, else 1)")
      ->capture_default_str();
    cmd_f->add_option("--ecps", fa.ecps, "ECP list")->capture_default_str();
    cmd_f->add_option("--variant", fa.variant, "plateau or bridge")->capture_default_str();

    double amplitude = std::numbers::pi / 4.0;
    auto* cmd_cb = app.add_subcommand("critical-b", "Critical self-coupling of the alternating tanh neuron");
    cmd_cb->add_option("--amplitude", amplitude, "Input amplitude A")->capture_default_str();

    LyapunovArgs la;
    auto* cmd_l = app.add_subcommand("lyapunov", "Lyapunov exponent of one configured reservoir");
    cmd_l->add_option("--reservoir", la.reservoir_file, "Reservoir key = value file; explicit flags override it");
    la.kind_opt = cmd_l->add_option("--kind", la.kind, "eq7, eq8 or random")->capture_default_str();
    la.alpha_opt = cmd_l->add_option("--alpha", la.alpha, "eq7 self-coupling")->capture_default_str();
    la.b_opt = cmd_l->add_option("--b", la.b, "eq8 self-coupling (critical value when omitted)");
    la.amplitude_opt = cmd_l->add_option("--amplitude", la.amplitude, "eq8 input amplitude")->capture_default_str();
    la.ecps_opt = cmd_l->add_option("--ecps", la.ecps, "ECP list for eq7 and random")->capture_default_str();
    la.variant_opt = cmd_l->add_option("--variant", la.variant, "plateau or bridge")->capture_default_str();
    la.k_opt = cmd_l->add_option("--k", la.k, "Size of a random reservoir")->capture_default_str();
    cmd_l->add_option("--input", la.input, "alternating, constant, iid or file")->capture_default_str();
    cmd_l->add_option("--input-file", la.input_file, "One value per line or comma-separated");
    cmd_l->add_option("--gamma", la.gamma, "Input scale factor")->capture_default_str();
    cmd_l->add_option("--horizon", la.horizon, "Averaged steps after the washout")->capture_default_str();
    cmd_l->add_option("--washout", la.washout, "Discarded leading steps")->capture_default_str();
    cmd_l->add_option("--d0", la.d0, "Renormalization distance")->capture_default_str();
    cmd_l->add_option("--method", la.method, "both, renormalized or derivative-product")->capture_default_str();

    ReadoutDemoOptions ro;
    auto* cmd_r = app.add_subcommand("readout-demo", "Delayed recall through a random orthogonal ECP reservoir");
    cmd_r->add_option("--k", ro.k, "Reservoir size")->capture_default_str();
    cmd_r->add_option("--delay", ro.delay, "Recall delay in steps")->capture_default_str();
    cmd_r->add_option("--length", ro.length, "Input length")->capture_default_str();
    cmd_r->add_option("--washout", ro.washout, "Rows discarded before training")->capture_default_str();
    cmd_r->add_option("--ridge-lambda", ro.ridge_lambda, "Ridge penalty")->capture_default_str();
    cmd_r->add_option("--train-fraction", ro.train_fraction, "Share of rows used for training")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        auto merged = apply_config(app, args);
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);

        if (cmd_td->parsed()) transfer_dump(g, td, out);
        else if (cmd_sa->parsed()) sweep_alpha_cmd(g, sa, out);
        else if (cmd_sg->parsed()) sweep_gamma_cmd(g, sg, out);
        else if (cmd_f->parsed()) forgetting_cmd(g, fa, out);
        else if (cmd_cb->parsed()) critical_b_cmd(g, amplitude, out);
        else if (cmd_l->parsed()) lyapunov_cmd(g, la, out);
        else if (cmd_r->parsed()) readout_demo_cmd(g, ro, out);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "critesn: " << e.what() << '\n';
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    } catch (const std::exception& e) {
        err << "critesn: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace critesn::cli
