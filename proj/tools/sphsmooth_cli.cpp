// sphsmooth command-line front end.
//
// Exit codes: 0 success, 1 bad input (including bad flags), 2 numerical failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/catalogue.hpp"
#include "sphsmooth/diagnostics.hpp"
#include "sphsmooth/error.hpp"
#include "sphsmooth/histospline.hpp"
#include "sphsmooth/model_select.hpp"
#include "sphsmooth/persistence.hpp"
#include "sphsmooth/projection.hpp"
#include "sphsmooth/spline.hpp"

namespace ss = sphsmooth;
using json = nlohmann::json;

namespace {

struct Settings {
    // shared
    int k = 3;
    double s = 2.0;
    std::optional<double> xi;
    bool gcv = false;
    double p = 0.5;
    double b = 4.0;
    double c_exp = 1.0;
    double epsilon = 0.01;
    int m = 25;
    int resolution = 64;
    std::string pole = "NORTH";
    std::uint64_t seed = 1;
    std::string out;
    std::string summary;
    // per command
    std::string data, format = "ANGLES", kernel = "full", archive, grid, binned = "averages", schwarz = "gls";
    std::vector<int> k_range;
    std::vector<double> p_grid = ss::default_p_grid();
    bool hemisphere = false, bayes = false;
    int series_degree = 0;
    std::string what = "all";
    std::vector<int> n_list{100, 200, 400, 800, 1600};
    int replicates = 20;
    double noise_sd = 1.0;
    double rate_s = 5.0;
};

json settings_json(const Settings& st) {
    return json{{"k", st.k},
                {"s", st.s},
                {"xi", st.xi ? json(*st.xi) : json(nullptr)},
                {"gcv", st.gcv},
                {"p", st.p},
                {"b", st.b},
                {"c-exp", st.c_exp},
                {"epsilon", st.epsilon},
                {"m", st.m},
                {"resolution", st.resolution},
                {"pole", st.pole},
                {"seed", st.seed},
                {"out", st.out},
                {"format", st.format},
                {"kernel", st.kernel},
                {"binned", st.binned},
                {"schwarz", st.schwarz},
                {"p-grid", st.p_grid},
                {"series-degree", st.series_degree},
                {"n-list", st.n_list},
                {"replicates", st.replicates},
                {"noise-sd", st.noise_sd},
                {"rate-s", st.rate_s}};
}

ss::KernelSpec make_kernel(const Settings& st) {
    if (st.kernel == "full") return ss::full_kernel(st.k);
    if (st.kernel == "zonal") return ss::zonal_kernel(st.k);
    if (st.kernel == "generic") return ss::generic_kernel(st.k, st.s);
    throw ss::InputError("unknown kernel '" + st.kernel + "' (full, zonal, generic)");
}

void maybe_grid(const Settings& st, const ss::SphereFunction& f, json& rec) {
    if (st.grid.empty()) return;
    ss::emit_grid(f, st.resolution, ss::parse_pole(st.pole), st.hemisphere, st.grid);
    rec["grid"] = st.grid;
}

json report_json(const ss::ParseReport& r) {
    return json{{"lines", r.line_count}, {"accepted", r.accepted}, {"rejected", r.rejected}};
}

json run_fit_spline(const Settings& st) {
    if (st.data.empty()) throw ss::InputError("fit-spline needs --data");
    ss::ParseReport rep;
    const ss::RegressionData data = ss::ingest_regression(st.data, ss::parse_catalogue_format(st.format), &rep);
    const ss::KernelSpec kernel = make_kernel(st);
    json rec{{"input", report_json(rep)}};
    double xi = 0.0;
    if (st.gcv || !st.xi) {
        const ss::GcvResult g = ss::gcv_select_xi(data, kernel, ss::default_xi_grid());
        xi = g.xi;
        rec["gcv"] = {{"xi", g.xi}, {"failed", g.failed.size()}};
    } else {
        xi = *st.xi;
    }
    const ss::SplineFit fit = ss::fit_spline(data, kernel, xi);
    rec["xi"] = xi;
    rec["d"] = std::vector<double>(fit.d().data(), fit.d().data() + fit.d().size());
    if (!st.out.empty()) rec["digest"] = ss::save(fit, st.out);
    maybe_grid(st, [&](const ss::Direction& x) { return fit.evaluate(x); }, rec);
    return rec;
}

json bayes_json(const ss::BayesFit& fit) {
    const Eigen::VectorXd g = fit.gamma();
    return json{{"pstar", fit.pstar},
                {"log_m0", fit.log_m0},
                {"log_m1", fit.log_m1},
                {"gamma", std::vector<double>(g.data(), g.data() + g.size())}};
}

json run_fit_bayes(const Settings& st) {
    if (st.data.empty()) throw ss::InputError("fit-bayes needs --data");
    ss::ParseReport rep;
    const ss::RegressionData data = ss::ingest_regression(st.data, ss::parse_catalogue_format(st.format), &rep);
    const ss::BasisSpec spec(st.k, 2.0, ss::WeightScheme::Iota);
    const ss::BayesFit fit =
        ss::fit_hierarchical(data, spec, ss::PriorSpec::defaults(st.k, st.p, st.epsilon, st.b, st.c_exp));
    json rec = bayes_json(fit);
    rec["input"] = report_json(rep);
    if (!st.out.empty()) rec["digest"] = ss::save(fit, st.out);
    maybe_grid(st, [&](const ss::Direction& x) { return fit.evaluate(x); }, rec);
    return rec;
}

json run_select_k(const Settings& st) {
    if (st.data.empty()) throw ss::InputError("select-k needs --data");
    ss::ParseReport rep;
    const ss::RegressionData data = ss::ingest_regression(st.data, ss::parse_catalogue_format(st.format), &rep);
    std::vector<int> range = st.k_range;
    if (range.empty())
        for (int K = 1; K <= ss::max_truncation(data.size()); ++K) range.push_back(K);
    ss::PriorOptions opt;
    opt.epsilon = st.epsilon;
    opt.b = st.b;
    opt.c_exp = st.c_exp;
    const ss::SelectionTable table = ss::bayes_factor_table(data, range, st.p_grid, opt);
    const ss::SchwarzFit sf = st.schwarz == "ols" ? ss::SchwarzFit::Ols : ss::SchwarzFit::Gls;
    if (st.schwarz != "ols" && st.schwarz != "gls") throw ss::InputError("--schwarz must be gls or ols");
    std::ostringstream csv;
    csv.precision(17);
    csv << "K,p_best,log_marginal,log_bayes_factor,bayes_factor,schwarz\n";
    json rows = json::array();
    for (const auto& sc : table.scores) {
        const double schwarz = sc.K == table.K_max ? 0.0 : ss::schwarz_criterion(data, sc.K, table.K_max, sf);
        csv << sc.K << ',' << sc.p_best << ',' << sc.log_marginal << ',' << sc.log_bayes_factor << ','
            << std::exp(sc.log_bayes_factor) << ',' << schwarz << '\n';
        rows.push_back({{"K", sc.K},
                        {"p_best", sc.p_best},
                        {"log_bayes_factor", sc.log_bayes_factor},
                        {"schwarz", schwarz}});
    }
    if (!st.out.empty()) {
        std::ofstream f(st.out, std::ios::binary | std::ios::trunc);
        if (!f) throw ss::InputError("cannot write " + st.out);
        f << csv.str();
    } else {
        std::cout << csv.str();
    }
    return json{{"input", report_json(rep)}, {"best_K", table.best_K}, {"K_max", table.K_max}, {"table", rows}};
}

json run_histospline(const Settings& st) {
    if (st.data.empty()) throw ss::InputError("histospline needs --data (a direction catalogue)");
    const ss::Catalogue cat = ss::ingest(st.data, ss::parse_catalogue_format(st.format));
    const ss::CellGrid grid = ss::bin_directions(cat.records, st.m);
    json rec{{"input", report_json(cat.report)}, {"m", st.m}};
    if (st.bayes) {
        const ss::BinnedMode mode = st.binned == "centers" ? ss::BinnedMode::CellCenters : ss::BinnedMode::CellAverages;
        if (st.binned != "centers" && st.binned != "averages") throw ss::InputError("--binned must be centers or averages");
        const ss::BasisSpec spec(st.k, 2.0, ss::WeightScheme::Iota);
        const ss::BayesFit fit = ss::fit_hierarchical_binned(
            grid, spec, ss::PriorSpec::defaults(st.k, st.p, st.epsilon, st.b, st.c_exp), mode, st.series_degree);
        rec.update(bayes_json(fit));
        rec["binned"] = st.binned;
        if (!st.out.empty()) rec["digest"] = ss::save(fit, st.out);
        maybe_grid(st, [&](const ss::Direction& x) { return fit.evaluate(x); }, rec);
        return rec;
    }
    const double xi = st.xi.value_or(1e-6);
    const ss::HistosplineFit fit = ss::fit_histospline(grid, st.k, xi, st.series_degree);
    rec["xi"] = xi;
    rec["series_degree"] = fit.series_degree();
    rec["normalizing_constant"] = fit.normalizing_constant();
    rec["roughness"] = fit.roughness();
    if (!st.out.empty()) rec["digest"] = ss::save(fit, st.out);
    maybe_grid(st, [&](const ss::Direction& x) { return fit.evaluate(x); }, rec);
    return rec;
}

json run_project(const Settings& st) {
    if (st.archive.empty()) throw ss::InputError("project needs --archive");
    if (st.out.empty()) throw ss::InputError("project needs --out for the CSV grid");
    const ss::AnyFit fit = ss::load(st.archive);
    ss::emit_grid([&](const ss::Direction& x) { return ss::evaluate(fit, x); }, st.resolution,
                  ss::parse_pole(st.pole), st.hemisphere, st.out);
    return json{{"kind", ss::fit_kind_name(fit)}, {"archive_digest", ss::archive_digest(st.archive)}, {"grid", st.out}};
}

json run_diagnose(const Settings& st) {
    json rec;
    const bool all = st.what == "all";
    bool any = false;
    if (all || st.what == "minimax") {
        any = true;
        const auto c = ss::minimax_constants(st.s, 2, 4.0 * std::numbers::pi);
        rec["minimax"] = {{"s", st.s}, {"W", c.W}, {"phi", c.phi}, {"weyl_ratio_1000", ss::weyl_ratio(1000)}};
    }
    if (all || st.what == "zeta") {
        any = true;
        const auto z = ss::zeta_check(st.s, 100000);
        rec["zeta"] = {{"s", st.s}, {"k_max", 100000}, {"value", z.value()}, {"tail_bound", z.tail_bound}};
    }
    if (all || st.what == "limits") {
        any = true;
        const auto l = ss::limit_suite(st.seed);
        rec["limits"] = {{"shrinkage_discrepancy", l.shrinkage_discrepancy},
                         {"diffuse_limit_discrepancy", l.diffuse_limit_discrepancy},
                         {"hb_limit_discrepancy", l.hb_limit_discrepancy},
                         {"pass", l.pass()}};
    }
    if (all || st.what == "rate") {
        any = true;
        ss::RateOptions opt;
        opt.noise_sd = st.noise_sd;
        const auto r = ss::rate_experiment(st.rate_s, st.n_list, st.replicates, st.seed, opt);
        rec["rate"] = {{"s", r.s},
                       {"n", r.n},
                       {"mise", r.mise},
                       {"slope", r.slope},
                       {"theoretical_slope", r.theoretical_slope},
                       {"M", r.truth_norm_bound}};
    }
    if (!any) throw ss::InputError("--what must be all, minimax, zeta, limits or rate");
    std::cout << rec.dump() << '\n';
    return rec;
}

void describe(const Settings& st) {
    std::cout << "# sphsmooth defaults (config file keys use the long flag names)\n";
    const json all = settings_json(st);
    for (const auto& [key, value] : all.items()) {
        if (value.is_null())
            std::cout << "# " << key << " = (unset)\n";
        else
            std::cout << key << " = " << value.dump() << '\n';
    }
}

void write_summary(const Settings& st, const json& rec) {
    std::string path = st.summary;
    if (path.empty() && !st.out.empty()) path = st.out + ".summary.jsonl";
    if (path.empty()) return;
    std::ofstream f(path, std::ios::app);
    if (!f) throw ss::InputError("cannot write run summary " + path);
    f << rec.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spline and hierarchical-Bayes smoothing on the sphere"};
    app.set_config("--config", "", "key = value file; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();
    Settings st;

    app.add_option("--k", st.k, "truncation level K")->check(CLI::NonNegativeNumber);
    app.add_option("--s", st.s, "smoothness s (generic kernel, diagnostics)");
    auto* xi_opt = app.add_option("--xi", st.xi, "smoothing parameter xi");
    app.add_flag("--gcv", st.gcv, "choose xi by GCV")->excludes(xi_opt);
    app.add_option("--p", st.p, "prior weight of the invariant branch");
    app.add_option("--b", st.b, "F-prior degrees of freedom b, 2 < b <= 4");
    app.add_option("--c-exp", st.c_exp, "tau^2 prior exponent c < b/2");
    app.add_option("--epsilon", st.epsilon, "non-zonal prior variance factor");
    app.add_option("--m", st.m, "histospline cells per axis");
    app.add_option("--resolution", st.resolution, "grid lattice resolution (>= 16)");
    app.add_option("--pole", st.pole, "NORTH or SOUTH");
    app.add_option("--seed", st.seed, "master random seed");
    app.add_option("--out", st.out, "primary output path");
    app.add_option("--summary", st.summary, "JSON-lines run summary path (default <out>.summary.jsonl)");
    app.add_option("--format", st.format, "input rows: ANGLES (theta,phi[,value]) or VECTORS (x,y,z[,value])");
    app.add_option("--grid", st.grid, "also write a projected CSV grid of the fit");
    app.add_flag("--hemisphere", st.hemisphere, "grid over the hemisphere around --pole only");

    auto* c_spline = app.add_subcommand("fit-spline", "smoothing-spline fit of regression data");
    c_spline->add_option("--data", st.data, "CSV of directions and values")->required();
    c_spline->add_option("--kernel", st.kernel, "full, zonal or generic");

    auto* c_bayes = app.add_subcommand("fit-bayes", "symmetry-adaptive hierarchical Bayes fit");
    c_bayes->add_option("--data", st.data, "CSV of directions and values")->required();

    auto* c_select = app.add_subcommand("select-k", "Bayes-factor and Schwarz table over K");
    c_select->add_option("--data", st.data, "CSV of directions and values")->required();
    c_select->add_option("--k-range", st.k_range, "candidate K values (default 1..K_max)");
    c_select->add_option("--p-grid", st.p_grid, "prior weights searched per K");
    c_select->add_option("--schwarz", st.schwarz, "gls or ols likelihood for Schwarz's criterion");

    auto* c_histo = app.add_subcommand("histospline", "density estimate from a direction catalogue");
    c_histo->add_option("--data", st.data, "direction catalogue")->required();
    c_histo->add_option("--series-degree", st.series_degree, "spectral degree of the cell kernels (0 = default)");
    c_histo->add_flag("--bayes", st.bayes, "hierarchical Bayes on the binned data instead of the histospline");
    c_histo->add_option("--binned", st.binned, "centers or averages (with --bayes)");

    auto* c_project = app.add_subcommand("project", "Lambert grid of a saved fit");
    c_project->add_option("--archive", st.archive, "model archive")->required();

    auto* c_diag = app.add_subcommand("diagnose", "constants, zeta bound, limit checks and rate experiment");
    c_diag->add_option("--what", st.what, "all, minimax, zeta, limits or rate");
    c_diag->add_option("--n-list", st.n_list, "sample sizes for the rate experiment");
    c_diag->add_option("--replicates", st.replicates, "rate experiment replicates");
    c_diag->add_option("--noise-sd", st.noise_sd, "rate experiment noise sd");
    c_diag->add_option("--rate-s", st.rate_s, "smoothness of the rate experiment");

    auto* c_describe = app.add_subcommand("describe", "print every default setting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string command;
    json rec;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (c_describe->parsed()) {
            describe(st);
            return 0;
        }
        const std::vector<std::pair<CLI::App*, json (*)(const Settings&)>> table{
            {c_spline, run_fit_spline}, {c_bayes, run_fit_bayes},     {c_select, run_select_k},
            {c_histo, run_histospline}, {c_project, run_project}, {c_diag, run_diagnose}};
        for (const auto& [cmd, run] : table)
            if (cmd->parsed()) {
                command = cmd->get_name();
                rec = run(st);
            }
    } catch (const ss::InputError& e) {
        std::cerr << "sphsmooth: input error: " << e.what() << '\n';
        return 1;
    } catch (const ss::NumericalError& e) {
        std::cerr << "sphsmooth: numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::bad_alloc&) {
        std::cerr << "sphsmooth: out of memory\n";
        return 2;
    }
    json summary{{"command", command},
                 {"status", "ok"},
                 {"settings", settings_json(st)},
                 {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                 {"result", rec}};
    try {
        write_summary(st, summary);
    } catch (const ss::InputError& e) {
        std::cerr << "sphsmooth: " << e.what() << '\n';
        return 1;
    }
    if (command != "diagnose") std::cerr << summary["result"].dump() << '\n';
    return 0;
}
