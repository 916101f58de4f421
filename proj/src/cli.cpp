#include "multiroc/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "multiroc/baselines.hpp"
#include "multiroc/errors.hpp"
#include "multiroc/experiments.hpp"
#include "multiroc/parallel.hpp"
#include "multiroc/pipeline.hpp"
#include "multiroc/uncertainty.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace multiroc {

namespace {

struct Common {
    std::size_t thresholds = 50;
    std::string weights = "unweighted";
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::string labels;
    int max_iter = 500;
    double tol = 1e-8;
};

struct BootstrapFlags {
    std::size_t B = 100;
    double level = 0.95;
};

struct SimulateFlags {
    std::string experiment;
    std::size_t n = 10000;
    std::size_t p = 10;
    std::size_t k = 5;
    std::string d = "1..10";
    std::string alpha = "2,5,9";
    std::string c = "0.1..10";
    std::size_t replicates = 30;
    std::size_t n_sub = 0;
    bool deterministic = false;
    bool run = false;
};

std::string timestamp() {
    // SOURCE_DATE_EPOCH pins the manifest time so reruns compare equal.
    std::time_t t = std::time(nullptr);
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

json manifest(const std::string& command, const std::vector<std::string>& argv) {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["version"] = MULTIROC_VERSION;
    m["timestamp"] = timestamp();
    m["threads"] = thread_limit();
    return m;
}

void write_manifest(const fs::path& dir, const json& m) { open_out(dir / "manifest.json") << m.dump(1) << '\n'; }

ScoredDataset load_input(const std::string& path, const std::string& labels) {
    if (labels.empty()) return load_dataset(fs::path(path));
    return load_dataset_split(path, labels);
}

struct WeightSpec {
    WeightMode mode = WeightMode::unweighted;
    std::optional<CostWeights> custom;
    std::string source;
};

WeightSpec parse_weights(const std::string& s) {
    WeightSpec w;
    w.source = s;
    if (s == "weighted") {
        w.mode = WeightMode::weighted;
    } else if (s == "unweighted") {
        w.mode = WeightMode::unweighted;
    } else if (s.rfind("file=", 0) == 0) {
        const std::string path = s.substr(5);
        std::ifstream in(path);
        if (!in) throw InputError("cannot open weights file '" + path + "'");
        w.mode = WeightMode::custom;
        w.custom = read_weights_csv(in);
    } else {
        throw InputError("--weights must be weighted, unweighted or file=PATH, got '" + s + "'");
    }
    return w;
}

std::string ext(const Common& c) { return c.format == "json" ? ".json" : ".csv"; }

void write_curve(const fs::path& dir, const Common& c, const RocCurve& rc, double d) {
    auto out = open_out(dir / ("curve" + ext(c)));
    if (c.format == "json") {
        write_curve_json(out, rc, d);
    } else {
        write_curve_csv(out, rc);
    }
}

void write_rates(const fs::path& dir, const Common& c, const PairwiseRates& r) {
    if (c.format == "json") {
        auto out = open_out(dir / "rates.json");
        write_rates_json(out, r);
        return;
    }
    auto tp = open_out(dir / "rates_tp.csv");
    write_rates_csv(tp, r.mtp, r.pairs);
    auto fp = open_out(dir / "rates_fp.csv");
    write_rates_csv(fp, r.mfp, r.pairs);
}

Evaluation run_evaluation(const ScoredDataset& data, const Common& c, const WeightSpec& w) {
    EvaluateOptions opts;
    opts.thresholds = c.thresholds;
    opts.mode = w.mode;
    opts.custom = w.custom;
    opts.fit.max_iter = c.max_iter;
    opts.fit.tol = c.tol;
    auto ev = evaluate(data, opts);
    require_converged(ev.fit);
    return ev;
}

json options_json(const Common& c, const WeightSpec& w) {
    json o;
    o["thresholds"] = c.thresholds;
    o["weights"] = w.source;
    o["seed"] = c.seed;
    o["format"] = c.format;
    o["labels"] = c.labels;
    o["max_iter"] = c.max_iter;
    o["tol"] = c.tol;
    return o;
}

int cmd_evaluate(const std::string& input, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const auto data = load_input(input, c.labels);
    const auto w = parse_weights(c.weights);
    const auto ev = run_evaluation(data, c, w);
    const auto dir = prepare_dir(c.out_dir);

    write_curve(dir, c, ev.curve, ev.d);
    open_out(dir / "curve.svg") << curve_svg(ev.curve, ev.d);
    write_rates(dir, c, ev.rates);
    {
        auto f = open_out(dir / "fit.json");
        write_fit_json(f, ev.fit, ev.centered);
    }

    auto m = manifest("evaluate", argv);
    m["inputs"] = {input};
    m["options"] = options_json(c, w);
    m["result"] = {{"D", ev.d}, {"iterations", ev.fit.iterations}, {"deviance", ev.fit.final_deviance()}};
    write_manifest(dir, m);

    out << format_d(ev.d) << '\n';
    return 0;
}

std::string format_ci(double d, const BootstrapResult& r) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "D = %.4f [%.4f, %.4f]", d, r.ci_lower, r.ci_upper);
    return buf;
}

BootstrapResult run_bootstrap(const Evaluation& ev, const Common& c, const BootstrapFlags& b, bool keep_curves) {
    BootstrapOptions opts;
    opts.B = b.B;
    opts.gamma = b.level;
    opts.seed = c.seed;
    opts.keep_curves = keep_curves;
    opts.fit.max_iter = c.max_iter;
    opts.fit.tol = c.tol;
    return bootstrap(ev.rates, ev.fit, ev.costs, opts);
}

int cmd_bootstrap(const std::string& input, const Common& c, const BootstrapFlags& b,
                  const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    const auto data = load_input(input, c.labels);
    const auto w = parse_weights(c.weights);
    const auto ev = run_evaluation(data, c, w);
    const auto r = run_bootstrap(ev, c, b, true);
    if (b.B < 20) err << "warning: with B = " << b.B << " the interval width is unreliable\n";
    if (r.dropped > 0) err << "warning: " << r.dropped << " of " << r.B << " bootstrap refits failed and were dropped\n";

    const auto band = curve_band(r.curves, b.level);
    const auto dir = prepare_dir(c.out_dir);
    write_curve(dir, c, ev.curve, ev.d);
    open_out(dir / "curve.svg") << curve_svg(ev.curve, ev.d, &band);
    {
        auto f = open_out(dir / "bootstrap.json");
        write_bootstrap_json(f, r, ev.d);
    }
    {
        auto f = open_out(dir / ("band" + ext(c)));
        if (c.format == "json") {
            write_band_json(f, band);
        } else {
            write_band_csv(f, band);
        }
    }

    auto m = manifest("bootstrap", argv);
    m["inputs"] = {input};
    auto o = options_json(c, w);
    o["B"] = b.B;
    o["level"] = b.level;
    m["options"] = o;
    m["result"] = {{"D", ev.d}, {"ci", {r.ci_lower, r.ci_upper}}, {"dropped", r.dropped}};
    write_manifest(dir, m);

    out << format_ci(ev.d, r) << '\n';
    return 0;
}

int cmd_compare(const std::vector<std::string>& inputs, std::vector<std::string> names, const Common& c,
                const BootstrapFlags& b, const std::vector<std::string>& argv, std::ostream& out) {
    if (inputs.size() < 2) throw InputError("compare needs at least two model files");
    if (names.empty()) {
        for (const auto& p : inputs) names.push_back(fs::path(p).stem().string());
    }
    if (names.size() != inputs.size()) throw DimensionMismatch("one --names entry per model file required");

    std::vector<ScoredDataset> models;
    for (const auto& p : inputs) models.push_back(load_input(p, c.labels));
    for (std::size_t m = 1; m < models.size(); ++m) {
        if (models[m].n() != models[0].n() || models[m].k() != models[0].k()) {
            throw DimensionMismatch("model '" + names[m] + "' is " + std::to_string(models[m].n()) + "x" +
                                    std::to_string(models[m].k()) + ", expected " + std::to_string(models[0].n()) +
                                    "x" + std::to_string(models[0].k()));
        }
        if (models[m].labels() != models[0].labels()) {
            throw DimensionMismatch("model '" + names[m] + "' has different labels from '" + names[0] + "'");
        }
    }

    const auto w = parse_weights(c.weights);
    std::vector<double> ds, ms;
    std::vector<BootstrapResult> boots;
    for (const auto& data : models) {
        const auto ev = run_evaluation(data, c, w);
        ds.push_back(ev.d);
        ms.push_back(hand_till_m(data));
        boots.push_back(run_bootstrap(ev, c, b, false));
    }
    // Ranking needs equal replicate counts; dropped refits would break that.
    for (std::size_t m = 0; m < boots.size(); ++m) {
        if (boots[m].dropped) {
            throw InsufficientReplicates("model '" + names[m] + "' dropped " + std::to_string(boots[m].dropped) +
                                         " bootstrap refits; ranking needs complete replicate sets");
        }
    }
    const auto table = ranking_probabilities(boots, names);

    const auto dir = prepare_dir(c.out_dir);
    if (c.format == "json") {
        json s = json::array();
        for (std::size_t m = 0; m < names.size(); ++m) {
            s.push_back({{"model", names[m]},
                         {"D", ds[m]},
                         {"ci", {boots[m].ci_lower, boots[m].ci_upper}},
                         {"M", ms[m]},
                         {"d_samples", boots[m].d_samples}});
        }
        open_out(dir / "summary.json") << s.dump(1) << '\n';
        auto f = open_out(dir / "ranking.json");
        write_ranking_json(f, table);
    } else {
        auto s = open_out(dir / "summary.csv");
        s << "model,D,ci_lower,ci_upper,M\n";
        for (std::size_t m = 0; m < names.size(); ++m) {
            s << names[m] << ',' << format_real(ds[m]) << ',' << format_real(boots[m].ci_lower) << ','
              << format_real(boots[m].ci_upper) << ',' << format_real(ms[m]) << '\n';
        }
        auto box = open_out(dir / "samples.csv");
        box << "replicate";
        for (const auto& n : names) box << ',' << n;
        box << '\n';
        for (std::size_t i = 0; i < boots[0].d_samples.size(); ++i) {
            box << i;
            for (const auto& r : boots) box << ',' << format_real(r.d_samples[i]);
            box << '\n';
        }
        auto f = open_out(dir / "ranking.csv");
        write_ranking_csv(f, table, "models");
    }

    auto m = manifest("compare", argv);
    m["inputs"] = inputs;
    auto o = options_json(c, w);
    o["B"] = b.B;
    o["level"] = b.level;
    o["names"] = names;
    m["options"] = o;
    write_manifest(dir, m);

    for (std::size_t i = 0; i < names.size(); ++i) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: D = %.4f [%.4f, %.4f]  M = %.4f", names[i].c_str(), ds[i],
                      boots[i].ci_lower, boots[i].ci_upper, ms[i]);
        out << buf << '\n';
    }
    std::vector<std::pair<double, std::vector<std::size_t>>> rows;
    for (const auto& [perm, p] : table.rows) rows.push_back({p, perm});
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [p, perm] : rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", p);
        out << "P(" << table.label(perm) << ") = " << buf << '\n';
    }
    return 0;
}

// "a..b" for an integer range, otherwise a comma separated list.
std::vector<std::size_t> parse_int_list(const std::string& s) {
    std::vector<std::size_t> out;
    try {
        if (const auto dots = s.find(".."); dots != std::string::npos) {
            const auto lo = std::stoul(s.substr(0, dots));
            const auto hi = std::stoul(s.substr(dots + 2));
            for (auto v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            std::stringstream ss(s);
            for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoul(tok));
        }
    } catch (const std::logic_error&) {
        throw InputError("cannot parse integer list '" + s + "'");
    }
    if (out.empty()) throw InputError("empty list '" + s + "'");
    return out;
}

std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    try {
        std::stringstream ss(s);
        for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
    } catch (const std::logic_error&) {
        throw InputError("cannot parse number list '" + s + "'");
    }
    if (out.empty()) throw InputError("empty list '" + s + "'");
    return out;
}

// "lo..hi" selects the standard cost grid inside [lo, hi].
std::vector<double> parse_cost_list(const std::string& s) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) return parse_real_list(s);
    double lo = 0, hi = 0;
    try {
        lo = std::stod(s.substr(0, dots));
        hi = std::stod(s.substr(dots + 2));
    } catch (const std::logic_error&) {
        throw InputError("cannot parse cost range '" + s + "'");
    }
    std::vector<double> out;
    for (double c : default_cost_grid()) {
        if (c >= lo * (1 - 1e-12) && c <= hi * (1 + 1e-12)) out.push_back(c);
    }
    if (out.empty()) throw InputError("cost range '" + s + "' selects nothing");
    return out;
}

void write_records(const fs::path& dir, const Common& c, const std::vector<CurveRecord>& records) {
    if (c.format == "json") {
        json all = json::array();
        for (const auto& r : records) {
            json pts = json::array();
            for (const auto& p : r.curve.points) pts.push_back({p.x, p.y});
            all.push_back({{"name", r.name},
                           {"parameter", r.parameter},
                           {"replicate", r.replicate},
                           {"z", r.z},
                           {"D", r.d},
                           {"D_weighted", r.d_weighted},
                           {"converged", r.converged},
                           {"curve", pts}});
        }
        open_out(dir / "sweep.json") << all.dump(1) << '\n';
        return;
    }
    auto s = open_out(dir / "sweep.csv");
    s << "name,parameter,replicate,z,D,D_weighted,converged\n";
    for (const auto& r : records) {
        s << '"' << r.name << "\"," << format_real(r.parameter) << ',' << r.replicate << ',' << format_real(r.z)
          << ',' << format_real(r.d) << ',' << format_real(r.d_weighted) << ',' << (r.converged ? 1 : 0) << '\n';
    }
    auto cv = open_out(dir / "curves.csv");
    cv << "name,replicate,x,y\n";
    for (const auto& r : records) {
        for (const auto& p : r.curve.points) {
            cv << '"' << r.name << "\"," << r.replicate << ',' << format_real(p.x) << ',' << format_real(p.y) << '\n';
        }
    }
}

json counts_json(const ScoredDataset& d) { return class_counts(d).counts; }

int cmd_simulate(const SimulateFlags& s, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    if (s.experiment != "discriminative" && s.experiment != "skewness" && s.experiment != "weights") {
        throw UnknownExperiment("unknown experiment '" + s.experiment +
                                "' (expected discriminative, skewness or weights)");
    }
    SimulationConfig cfg;
    cfg.n = s.n;
    cfg.p = s.p;
    cfg.k = s.k;
    cfg.seed = c.seed;
    cfg.label_mode = s.deterministic ? LabelMode::deterministic : LabelMode::random;
    cfg.d = cfg.p;
    cfg.validate();

    const auto dir = prepare_dir(c.out_dir);
    const auto fmt = c.format == "json" ? DataFormat::json : DataFormat::csv;
    const auto data = generate_multinomial(cfg);
    write_dataset(dir / ("truth" + ext(c)), data.truth, fmt);

    auto m = manifest("simulate", argv);
    m["experiment"] = s.experiment;
    m["options"] = {{"n", s.n},   {"p", s.p},         {"k", s.k},     {"seed", c.seed},
                    {"d", s.d},   {"alpha", s.alpha}, {"c", s.c},     {"replicates", s.replicates},
                    {"n_sub", s.n_sub}, {"deterministic", s.deterministic}, {"run", s.run},
                    {"thresholds", c.thresholds}, {"format", c.format}};
    m["class_counts"] = counts_json(data.truth);

    std::vector<CurveRecord> records;
    if (s.experiment == "discriminative") {
        const auto ds = parse_int_list(s.d);
        if (s.run) {
            auto res = discriminative_experiment(cfg, ds, c.thresholds);
            for (std::size_t i = 0; i < res.records.size(); ++i) {
                const auto& name = res.records[i].name;
                const std::string file = (name == "noise" ? std::string("noise") : "d" + name.substr(2)) + ext(c);
                write_dataset(dir / file, res.scored[i], fmt);
            }
            records = std::move(res.records);
        }
    } else if (s.experiment == "skewness") {
        SkewnessOptions o;
        o.ds = parse_int_list(s.d);
        o.alphas = parse_real_list(s.alpha);
        o.replicates = s.replicates;
        if (s.n_sub) o.n_sub = s.n_sub;
        o.thresholds = c.thresholds;
        const auto rows = balanced_rows(data.truth, cfg.seed, o.n_sub);
        m["balanced_size"] = rows.size();
        if (s.run) {
            records = skewness_experiment(cfg, o);
            json zs = json::array();
            for (const auto& r : records) zs.push_back({{"name", r.name}, {"replicate", r.replicate}, {"z", r.z}});
            m["realized_z"] = zs;
        }
    } else {
        WeightsOptions o;
        o.cs = parse_cost_list(s.c);
        o.thresholds = c.thresholds;
        const auto majority = largest_class(class_counts(data.truth));
        const auto scored = majority_classifier(data.truth, majority);
        write_dataset(dir / ("majority" + ext(c)), scored, fmt);
        // Ready-made --weights files: the unweighted base times the schedule.
        const auto rates = rate_matrices(scored, c.thresholds);
        const auto base = cardinality_weights(rates, WeightMode::unweighted);
        for (double cv : o.cs) {
            auto f = open_out(dir / ("weights_c" + format_real(cv) + ".csv"));
            write_weights_csv(f, base * cost_schedule(rates.T(), cfg.k, majority, cv), rates.pairs);
        }
        m["majority_class"] = majority;
        if (s.run) records = weights_experiment(cfg, o);
    }

    if (s.run) {
        write_records(dir, c, records);
        for (const auto& r : records) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s replicate %zu: D = %.4f (weighted %.4f)", r.name.c_str(), r.replicate,
                          r.d, r.d_weighted);
            out << buf << '\n';
        }
    } else {
        out << "wrote " << (dir / ("truth" + ext(c))).string() << '\n';
    }
    write_manifest(dir, m);
    return 0;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--thresholds", c.thresholds, "number of threshold levels T")->check(CLI::Range(2, 100000));
    app->add_option("--weights", c.weights, "weighted | unweighted | file=PATH");
    app->add_option("--out", c.out_dir, "output directory");
    app->add_option("--seed", c.seed, "random seed");
    app->add_option("--format", c.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--max-iter", c.max_iter, "factorization iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--tol", c.tol, "factorization convergence tolerance")->check(CLI::PositiveNumber);
    app->add_option("--labels", c.labels, "label file (one integer per line); probabilities then come without labels");
}

void add_bootstrap(CLI::App* app, BootstrapFlags& b) {
    app->add_option("--B", b.B, "bootstrap replicates")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    app->add_option("--level", b.level, "confidence level")->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    apply_thread_limit_from_env();
    std::vector<std::string> args(argv, argv + argc);

    CLI::App app{"Multiclass ROC curves and the D statistic from a rank-1 binomial factorization"};
    app.set_version_flag("--version", std::string(MULTIROC_VERSION));
    app.require_subcommand(1);

    Common common;
    BootstrapFlags boot;
    SimulateFlags sim;
    std::string input;
    std::vector<std::string> inputs, names;

    auto* ev = app.add_subcommand("evaluate", "fit one model and report D");
    ev->add_option("probs", input, "probability file (CSV or JSON)")->required();
    add_common(ev, common);

    auto* bs = app.add_subcommand("bootstrap", "D with a parametric bootstrap interval and curve band");
    bs->add_option("probs", input, "probability file (CSV or JSON)")->required();
    add_common(bs, common);
    add_bootstrap(bs, boot);

    auto* cmp = app.add_subcommand("compare", "rank several models on shared labels");
    cmp->add_option("models", inputs, "probability files")->required();
    cmp->add_option("--names", names, "display names, one per model")->delimiter(',');
    add_common(cmp, common);
    add_bootstrap(cmp, boot);

    auto* sm = app.add_subcommand("simulate", "generate experiment datasets, optionally run the sweep");
    sm->add_option("experiment", sim.experiment, "discriminative | skewness | weights")->required();
    sm->add_option("--n", sim.n, "observations");
    sm->add_option("--p", sim.p, "covariates");
    sm->add_option("--k", sim.k, "classes");
    sm->add_option("--d", sim.d, "covariates used by the fitted model: a..b or a,b,...");
    sm->add_option("--alpha", sim.alpha, "Dirichlet concentrations");
    sm->add_option("--c", sim.c, "cost parameters, or lo..hi on the standard grid");
    sm->add_option("--replicates", sim.replicates, "Dirichlet resamples per cell");
    sm->add_option("--n-sub", sim.n_sub, "per-class size of the balanced base (0 = smallest class)");
    sm->add_flag("--deterministic", sim.deterministic, "label each row by its most probable class");
    sm->add_flag("--run", sim.run, "run the sweep and write curve data");
    add_common(sm, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ev->parsed()) return cmd_evaluate(input, common, args, out);
        if (bs->parsed()) return cmd_bootstrap(input, common, boot, args, out, err);
        if (cmp->parsed()) return cmd_compare(inputs, names, common, boot, args, out);
        if (sm->parsed()) return cmd_simulate(sim, common, args, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace multiroc
