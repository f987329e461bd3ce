#include "cli.hpp"

#include "CLI11.hpp"

#include <bctx/context_tree.hpp>
#include <bctx/documents.hpp>
#include <bctx/error.hpp>
#include <bctx/forecast.hpp>
#include <bctx/selection.hpp>
#include <bctx/sequential_model.hpp>
#include <bctx/series_io.hpp>
#include <bctx/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace bctx::cli {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataOptions {
    std::string input;
    std::optional<std::string> column;
    std::string transform = "none";
    std::optional<double> split;
    std::optional<std::size_t> test_last;
};

struct ModelOptions {
    std::string model = "ar";
    std::optional<int> depth;
    std::optional<int> order;
    std::optional<double> beta;
    std::optional<int> alphabet;
    std::vector<double> thresholds;
    bool auto_thresholds = false;
    std::vector<int> orders;
    bool intercept = false;
    std::optional<int> fisher_iters;
    std::optional<double> tau;
    std::optional<double> lambda;
    unsigned threads = 0;
};

void add_data_options(CLI::App* app, DataOptions& d) {
    app->add_option("input,--input", d.input, "CSV file with the series")->required();
    app->add_option("--column", d.column, "Column name or 0-based index (default: last)");
    app->add_option("--transform", d.transform, "none | diff | logdiff | logret10")
        ->check(CLI::IsMember({"none", "diff", "logdiff", "logret10"}));
    app->add_option("--split", d.split, "Training fraction in (0,1)");
    app->add_option("--test-last", d.test_last, "Hold out the last N samples instead");
}

void add_model_options(CLI::App* app, ModelOptions& m) {
    app->add_option("--model", m.model, "Base model: ar | arch")->check(CLI::IsMember({"ar", "arch"}));
    app->add_option("--depth", m.depth, "Maximum context depth D (ar: 10, arch: 5)");
    app->add_option("--order", m.order, "AR / ARCH order p (ar: 2, arch: 5)");
    app->add_option("--beta", m.beta, "Prior parameter beta (default 1 - 2^(1-m))");
    app->add_option("--alphabet", m.alphabet, "Alphabet size m (default 2)");
    app->add_option("--thresholds", m.thresholds, "Quantiser thresholds, comma separated")
        ->delimiter(',');
    app->add_flag("--auto-thresholds", m.auto_thresholds,
                  "Choose thresholds (and order unless --order is given) by evidence");
    app->add_option("--orders", m.orders, "Candidate orders for selection (default 1..5)")
        ->delimiter(',');
    app->add_flag("--intercept", m.intercept, "Add a constant term to the AR model");
    app->add_option("--fisher-iters", m.fisher_iters, "Fisher scoring iterations M (default 10)");
    app->add_option("--tau", m.tau, "Inverse-gamma shape tau (default 1)");
    app->add_option("--lambda", m.lambda, "Inverse-gamma scale lambda (default 1)");
    app->add_option("--threads", m.threads, "Worker threads for selection (0 = all cores)");
}

struct LoadedSeries {
    std::vector<double> values;
    std::size_t train_end = 0;
};

LoadedSeries load_series(const DataOptions& d, double default_split) {
    LoadedSeries s;
    s.values = apply_transform(ingest_csv(d.input, d.column), parse_transform(d.transform));
    if (d.split && d.test_last) throw UsageError("--split and --test-last are mutually exclusive");
    if (d.test_last) {
        s.train_end = split_by_test_count(s.values.size(), *d.test_last);
    } else if (d.split || default_split < 1.0) {
        s.train_end = split_by_fraction(s.values.size(), d.split.value_or(default_split));
    } else {
        s.train_end = s.values.size();
    }
    return s;
}

FitConfig base_config(const ModelOptions& m) {
    FitConfig c = FitConfig::defaults(parse_model_kind(m.model));
    if (m.depth) c.depth = *m.depth;
    if (m.order) c.order = *m.order;
    c.beta = m.beta;
    c.intercept = m.intercept;
    if (m.fisher_iters) c.fisher_iters = *m.fisher_iters;
    if (m.tau) c.tau = *m.tau;
    if (m.lambda) c.lambda = *m.lambda;
    if (!m.thresholds.empty() && m.auto_thresholds) {
        throw UsageError("--thresholds and --auto-thresholds are mutually exclusive");
    }
    const int alphabet = m.alphabet.value_or(
        m.thresholds.empty() ? 2 : static_cast<int>(m.thresholds.size()) + 1);
    if (alphabet < 2) throw UsageError("--alphabet must be at least 2");
    if (!m.thresholds.empty()) {
        if (static_cast<int>(m.thresholds.size()) != alphabet - 1) {
            throw UsageError("--thresholds needs exactly alphabet-1 = " + std::to_string(alphabet - 1) +
                             " values");
        }
        c.quantizer = Quantizer(m.thresholds);
    } else if (!m.auto_thresholds) {
        if (alphabet != 2) throw UsageError("--alphabet > 2 needs --thresholds or --auto-thresholds");
        c.quantizer = Quantizer({0.0});
    } else {
        // Placeholder with the right alphabet; replaced by selection.
        std::vector<double> th(static_cast<std::size_t>(alphabet - 1));
        for (std::size_t i = 0; i < th.size(); ++i) th[i] = static_cast<double>(i);
        c.quantizer = Quantizer(th);
    }
    if (!m.orders.empty() && !m.auto_thresholds) throw UsageError("--orders needs --auto-thresholds");
    if (m.intercept && c.kind == ModelKind::arch) throw UsageError("--intercept applies to --model ar only");
    try {
        if (!m.auto_thresholds) c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

SelectionGrid make_grid(const ModelOptions& m, const FitConfig& c, std::span<const double> train) {
    SelectionGrid grid;
    if (!m.orders.empty()) {
        grid.orders = m.orders;
    } else if (m.order) {
        grid.orders = {*m.order};
    }
    if (m.auto_thresholds) {
        grid.thresholds = SelectionGrid::percentile_thresholds(train, c.alphabet_size());
    } else {
        const auto th = c.quantizer.thresholds();
        grid.thresholds.emplace_back(th.begin(), th.end());
    }
    return grid;
}

/// Applies evidence selection when requested.
std::optional<SelectionResult> maybe_select(const ModelOptions& m, FitConfig& c,
                                            std::span<const double> train) {
    if (!m.auto_thresholds) return std::nullopt;
    SelectionResult res = select_hyperparams(train, make_grid(m, c, train), c, m.threads);
    c = res.selected;
    return res;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

bool any_model_flag(const CLI::App* app) {
    for (const char* name : {"--model", "--depth", "--order", "--beta", "--alphabet", "--thresholds",
                             "--auto-thresholds", "--orders", "--intercept", "--fisher-iters",
                             "--tau", "--lambda", "--split", "--test-last", "--transform"}) {
        if (app->count(name) > 0) return true;
    }
    return false;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian context-tree models for real-valued time series"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // fit
    DataOptions fit_data;
    ModelOptions fit_model_opts;
    std::string fit_output;
    std::uint64_t fit_seed = 0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write its JSON document");
    add_data_options(fit_cmd, fit_data);
    add_model_options(fit_cmd, fit_model_opts);
    fit_cmd->add_option("-o,--output", fit_output, "Output JSON file (default stdout)");
    fit_cmd->add_option("--seed", fit_seed, "Seed recorded in the document");

    // forecast
    DataOptions fc_data;
    ModelOptions fc_model;
    std::string fc_output;
    std::string fc_records;
    std::string fc_from_model;
    std::uint64_t fc_seed = 0;
    auto* fc_cmd = app.add_subcommand("forecast", "Rolling one-step-ahead forecast over the test split");
    add_data_options(fc_cmd, fc_data);
    add_model_options(fc_cmd, fc_model);
    fc_cmd->add_option("-o,--output", fc_output, "Report JSON file (default stdout)");
    fc_cmd->add_option("--records", fc_records, "Per-step CSV file");
    fc_cmd->add_option("--from-model", fc_from_model, "Reuse the configuration and split of a fitted model");
    fc_cmd->add_option("--seed", fc_seed, "Seed recorded in the report");

    // simulate
    std::string sim_name;
    std::string sim_spec;
    std::optional<std::size_t> sim_n;
    std::uint64_t sim_seed = 0;
    std::string sim_output;
    bool sim_states = false;
    bool sim_dump = false;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a series from a named or JSON spec");
    auto* name_opt = sim_cmd->add_option("--name", sim_name, "sim_1 | sim_2 | sim_3 | arch_sim");
    auto* spec_opt = sim_cmd->add_option("--spec", sim_spec, "JSON spec file");
    name_opt->excludes(spec_opt);
    sim_cmd->add_option("-n,--length", sim_n, "Number of samples (default: spec length)");
    sim_cmd->add_option("--seed", sim_seed, "Random seed");
    sim_cmd->add_option("-o,--output", sim_output, "Output CSV (default stdout)");
    sim_cmd->add_flag("--with-states", sim_states, "Add a column with the generating state");
    sim_cmd->add_flag("--print-spec", sim_dump, "Print the spec as JSON instead of simulating");

    // sample-trees
    DataOptions st_data;
    ModelOptions st_model;
    std::size_t st_samples = 1000;
    std::uint64_t st_seed = 0;
    std::string st_output;
    auto* st_cmd = app.add_subcommand("sample-trees", "Draw trees from the posterior and tabulate them");
    add_data_options(st_cmd, st_data);
    add_model_options(st_cmd, st_model);
    st_cmd->add_option("-k,--samples", st_samples, "Number of draws");
    st_cmd->add_option("--seed", st_seed, "Random seed");
    st_cmd->add_option("-o,--output", st_output, "Output CSV (default stdout)");

    // evidence-grid
    DataOptions eg_data;
    ModelOptions eg_model;
    std::string eg_output;
    std::vector<double> eg_grid;
    auto* eg_cmd = app.add_subcommand("evidence-grid", "Tabulate the evidence over thresholds and orders");
    add_data_options(eg_cmd, eg_data);
    add_model_options(eg_cmd, eg_model);
    eg_cmd->add_option("--grid", eg_grid, "Candidate thresholds for m=2 (default: percentile grid)")
        ->delimiter(',');
    eg_cmd->add_option("-o,--output", eg_output, "Output CSV (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (fit_cmd->parsed()) {
            LoadedSeries s = load_series(fit_data, 1.0);
            FitConfig cfg = base_config(fit_model_opts);
            std::span<const double> train(s.values.data(), s.train_end);
            maybe_select(fit_model_opts, cfg, train);
            const auto model = fit_model(cfg, s.values, s.train_end);
            ModelDocument doc = ModelDocument::from_model(*model);
            doc.series_length = s.values.size();
            doc.train_end = s.train_end;
            doc.transform = fit_data.transform;
            doc.seed = fit_seed;
            write_text(fit_output, doc.to_json(), out);
            const auto diag = model->diagnostics();
            if (diag.degenerate_nodes > 0 || diag.nonconverged_nodes > 0) {
                err << "warning: " << diag.degenerate_nodes << " under-populated and "
                    << diag.nonconverged_nodes << " non-converged ARCH nodes\n";
            }
            return 0;
        }

        if (fc_cmd->parsed()) {
            FitConfig cfg;
            LoadedSeries s;
            std::optional<SelectionResult> selection;
            if (!fc_from_model.empty()) {
                if (any_model_flag(fc_cmd)) {
                    throw UsageError("--from-model takes its configuration from the document; "
                                     "model and split flags are not allowed");
                }
                const ModelDocument doc = ModelDocument::parse(read_text(fc_from_model));
                DataOptions d = fc_data;
                d.transform = doc.transform;
                s.values = apply_transform(ingest_csv(d.input, d.column), parse_transform(d.transform));
                if (s.values.size() != doc.series_length) {
                    throw std::runtime_error("series length " + std::to_string(s.values.size()) +
                                             " does not match the model document (" +
                                             std::to_string(doc.series_length) + ")");
                }
                if (doc.train_end >= s.values.size()) {
                    throw std::runtime_error("the model was fitted on the whole series; nothing to forecast");
                }
                s.train_end = doc.train_end;
                cfg = doc.config;
            } else {
                s = load_series(fc_data, 0.5);
                cfg = base_config(fc_model);
                selection = maybe_select(fc_model, cfg, std::span<const double>(s.values.data(), s.train_end));
            }
            const EvalReport report = rolling_forecast(s.values, s.train_end, cfg);
            write_text(fc_output, report_to_json(report, fc_seed, selection), out);
            if (!fc_records.empty()) {
                std::ofstream f(fc_records);
                if (!f) throw std::runtime_error("cannot write '" + fc_records + "'");
                write_records_csv(f, report.records);
            }
            return 0;
        }

        if (sim_cmd->parsed()) {
            if (sim_name.empty() && sim_spec.empty()) throw UsageError("simulate needs --name or --spec");
            const GenerativeSpec spec =
                sim_spec.empty() ? builtin_spec(sim_name) : spec_from_json(read_text(sim_spec));
            if (sim_dump) {
                write_text(sim_output, spec_to_json(spec), out);
                return 0;
            }
            const std::size_t n = sim_n.value_or(spec.default_length);
            if (n == 0) throw UsageError("simulate needs --length for this spec");
            const GeneratedSeries g = generate_with_states(spec, n, sim_seed);
            std::ostringstream csv;
            csv << std::setprecision(std::numeric_limits<double>::max_digits10);
            csv << (sim_states ? "value,state\n" : "value\n");
            for (std::size_t i = 0; i < g.values.size(); ++i) {
                csv << g.values[i];
                if (sim_states) {
                    csv << ',' << context_to_string(spec.leaves[g.states[i]].context, spec.tree.alphabet_size());
                }
                csv << '\n';
            }
            write_text(sim_output, csv.str(), out);
            return 0;
        }

        if (st_cmd->parsed()) {
            LoadedSeries s = load_series(st_data, 1.0);
            FitConfig cfg = base_config(st_model);
            maybe_select(st_model, cfg, std::span<const double>(s.values.data(), s.train_end));
            const auto model = fit_model(cfg, s.values, s.train_end);
            auto rng = make_rng(st_seed, 1);
            std::map<std::string, std::size_t> counts;
            std::map<std::string, TreeModel> trees;
            for (std::size_t k = 0; k < st_samples; ++k) {
                TreeModel t = sample_posterior_tree(model->tree(), model->prior(), rng);
                const std::string key = t.to_string();
                ++counts[key];
                trees.emplace(key, std::move(t));
            }
            std::vector<std::pair<std::string, std::size_t>> rows(counts.begin(), counts.end());
            std::stable_sort(rows.begin(), rows.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
            std::ostringstream csv;
            csv << std::setprecision(std::numeric_limits<double>::max_digits10);
            csv << "tree,count,frequency,posterior\n";
            for (const auto& [key, count] : rows) {
                const double post = posterior_of_tree(trees.at(key), model->tree(), model->prior());
                csv << '"' << key << "\"," << count << ','
                    << static_cast<double>(count) / static_cast<double>(st_samples) << ',' << post << '\n';
            }
            write_text(st_output, csv.str(), out);
            return 0;
        }

        if (eg_cmd->parsed()) {
            LoadedSeries s = load_series(eg_data, 1.0);
            ModelOptions without_orders = eg_model;
            without_orders.orders.clear();
            FitConfig cfg = base_config(without_orders);
            const std::span<const double> train(s.values.data(), s.train_end);
            SelectionGrid grid;
            if (!eg_model.orders.empty()) {
                grid.orders = eg_model.orders;
            } else if (eg_model.order) {
                grid.orders = {*eg_model.order};
            }
            if (!eg_grid.empty()) {
                if (cfg.alphabet_size() != 2) throw UsageError("--grid lists single thresholds (m = 2)");
                for (double c : eg_grid) grid.thresholds.push_back({c});
            } else if (eg_model.auto_thresholds || eg_model.thresholds.empty()) {
                grid.thresholds = SelectionGrid::percentile_thresholds(train, cfg.alphabet_size());
            } else {
                const auto th = cfg.quantizer.thresholds();
                grid.thresholds.emplace_back(th.begin(), th.end());
            }
            const SelectionResult res = select_hyperparams(train, grid, cfg, eg_model.threads);
            std::ostringstream csv;
            write_selection_csv(csv, res);
            write_text(eg_output, csv.str(), out);
            return 0;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace bctx::cli
