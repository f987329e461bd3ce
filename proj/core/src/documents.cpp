#include "bctx/documents.hpp"

#include "bctx/error.hpp"

#include "json.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bctx {
namespace {

using Json = nlohmann::ordered_json;

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_config(Json& j, const FitConfig& c) {
    j["model"] = std::string(to_string(c.kind));
    j["alphabet_size"] = c.alphabet_size();
    j["thresholds"] = c.quantizer.thresholds();
    j["depth"] = c.depth;
    j["beta"] = c.prior().beta;
    j["order"] = c.order;
    j["intercept"] = c.intercept;
    if (c.kind == ModelKind::ar) {
        j["tau"] = c.tau;
        j["lambda"] = c.lambda;
    } else {
        j["fisher_iters"] = c.fisher_iters;
        j["warm_iters"] = c.warm_iters;
        j["refresh_every"] = c.refresh_every;
    }
    j["warmup"] = c.warmup_length();
}

FitConfig read_config(const Json& j) {
    FitConfig c = FitConfig::defaults(parse_model_kind(j.at("model").get<std::string>()));
    c.quantizer = Quantizer(j.at("thresholds").get<std::vector<double>>());
    if (j.at("alphabet_size").get<int>() != c.alphabet_size()) {
        throw std::invalid_argument("alphabet_size does not match the thresholds");
    }
    c.depth = j.at("depth").get<int>();
    c.beta = j.at("beta").get<double>();
    c.order = j.at("order").get<int>();
    c.intercept = j.at("intercept").get<bool>();
    if (c.kind == ModelKind::ar) {
        c.tau = j.at("tau").get<double>();
        c.lambda = j.at("lambda").get<double>();
    } else {
        c.fisher_iters = j.at("fisher_iters").get<int>();
        c.warm_iters = j.at("warm_iters").get<int>();
        c.refresh_every = j.at("refresh_every").get<int>();
    }
    c.warmup = j.at("warmup").get<std::size_t>();
    c.validate();
    return c;
}

Json leaf_params(const LeafSummary& leaf, const FitConfig& c) {
    Json p;
    if (c.kind == ModelKind::ar) {
        Eigen::VectorXd phi = leaf.coefficients;
        if (c.intercept) {
            p["intercept"] = phi[0];
            phi = phi.tail(phi.size() - 1).eval();
        }
        p["phi"] = to_std(phi);
        p["sigma2"] = leaf.sigma2;
    } else {
        p["alpha"] = to_std(leaf.coefficients);
    }
    p["count"] = leaf.count;
    return p;
}

LeafSummary read_leaf_params(const Json& p, const FitConfig& c) {
    LeafSummary leaf;
    leaf.count = p.at("count").get<std::int64_t>();
    if (c.kind == ModelKind::ar) {
        std::vector<double> coef;
        if (c.intercept) coef.push_back(p.at("intercept").get<double>());
        const auto phi = p.at("phi").get<std::vector<double>>();
        coef.insert(coef.end(), phi.begin(), phi.end());
        leaf.coefficients = to_eigen(coef);
        leaf.sigma2 = p.at("sigma2").get<double>();
    } else {
        leaf.coefficients = to_eigen(p.at("alpha").get<std::vector<double>>());
    }
    return leaf;
}

Json tree_node(const Context& ctx, const std::vector<LeafSummary>& leaves, const FitConfig& c) {
    const int m = c.alphabet_size();
    Json node;
    node["context"] = context_to_string(ctx, m);
    for (const auto& leaf : leaves) {
        if (leaf.context == ctx) {
            node["params"] = leaf_params(leaf, c);
            return node;
        }
    }
    Json children = Json::array();
    for (int s = 0; s < m; ++s) {
        Context child = ctx;
        child.push_back(static_cast<Symbol>(s));
        children.push_back(tree_node(child, leaves, c));
    }
    node["children"] = std::move(children);
    return node;
}

void read_tree_node(const Json& node, const FitConfig& c, std::vector<LeafSummary>& leaves,
                    std::size_t depth) {
    if (depth > static_cast<std::size_t>(c.depth)) throw std::invalid_argument("tree deeper than D");
    const Context ctx = context_from_string(node.at("context").get<std::string>(), c.alphabet_size());
    if (node.contains("params")) {
        LeafSummary leaf = read_leaf_params(node.at("params"), c);
        leaf.context = ctx;
        leaves.push_back(std::move(leaf));
        return;
    }
    const auto& children = node.at("children");
    if (!children.is_array() || children.size() != static_cast<std::size_t>(c.alphabet_size())) {
        throw std::invalid_argument("internal tree node needs exactly m children");
    }
    for (const auto& child : children) read_tree_node(child, c, leaves, depth + 1);
}

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
}

template <class F>
auto rethrow_as_invalid(F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad document: ") + e.what());
    }
}

}  // namespace

ModelDocument ModelDocument::from_model(const SequentialModel& model) {
    ModelDocument doc;
    doc.config = model.config();
    doc.config.beta = model.prior().beta;
    doc.config.warmup = model.config().warmup_length();
    doc.tree = model.map_tree();
    doc.leaves = model.map_leaves();
    doc.log_evidence = model.log_evidence();
    doc.map_posterior = std::exp(model.map_log_posterior());
    doc.observations = model.observed();
    return doc;
}

std::string ModelDocument::to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    write_config(j, config);
    j["transform"] = transform;
    j["series_length"] = series_length;
    j["train_end"] = train_end;
    j["seed"] = seed;
    j["observations"] = observations;
    j["log_evidence"] = log_evidence;
    j["map_posterior"] = map_posterior;
    j["map_tree"] = tree.to_string();
    j["tree"] = tree_node(Context{}, leaves, config);
    return j.dump(2) + "\n";
}

ModelDocument ModelDocument::parse(std::string_view json) {
    const Json j = parse_json(json);
    return rethrow_as_invalid([&] {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw std::invalid_argument("unsupported model schema version");
        }
        ModelDocument doc;
        doc.config = read_config(j);
        doc.transform = j.at("transform").get<std::string>();
        doc.series_length = j.at("series_length").get<std::size_t>();
        doc.train_end = j.at("train_end").get<std::size_t>();
        doc.seed = j.at("seed").get<std::uint64_t>();
        doc.observations = j.at("observations").get<std::size_t>();
        doc.log_evidence = j.at("log_evidence").get<double>();
        doc.map_posterior = j.at("map_posterior").get<double>();
        read_tree_node(j.at("tree"), doc.config, doc.leaves, 0);
        std::vector<Context> contexts;
        for (const auto& leaf : doc.leaves) contexts.push_back(leaf.context);
        doc.tree = TreeModel(doc.config.alphabet_size(), std::move(contexts));
        if (doc.tree.to_string() != j.at("map_tree").get<std::string>()) {
            throw std::invalid_argument("map_tree does not match the nested tree");
        }
        return doc;
    });
}

std::string report_to_json(const EvalReport& report, std::uint64_t seed,
                           const std::optional<SelectionResult>& selection) {
    Json j;
    j["schema_version"] = ModelDocument::kSchemaVersion;
    write_config(j, report.config);
    j["seed"] = seed;
    j["train_end"] = report.train_end;
    j["test_size"] = report.records.size();
    j["mse"] = report.mse;
    j["cumulative_log_loss"] = report.cumulative_log_loss;
    j["train"] = Json{{"log_evidence", report.train_log_evidence},
                      {"map_tree", report.train_map_tree.to_string()},
                      {"map_posterior", report.train_map_posterior}};
    j["final"] = Json{{"map_tree", report.final_map_tree.to_string()},
                      {"map_posterior", report.final_map_posterior}};
    if (selection) {
        const auto& best = selection->best_row();
        j["selection"] = Json{{"thresholds", best.thresholds},
                              {"order", best.order},
                              {"log_evidence", best.log_evidence},
                              {"candidates", selection->table.size()}};
    }
    return j.dump(2) + "\n";
}

void write_records_csv(std::ostream& out, const std::vector<ForecastRecord>& records) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "time,mean,variance,realised,sq_error,log_density\n";
    for (const auto& r : records) {
        out << r.time << ',' << r.mean << ',' << r.variance << ',' << r.realised << ','
            << r.sq_error << ',' << r.log_density << '\n';
    }
    out.precision(old);
}

void write_selection_csv(std::ostream& out, const SelectionResult& result) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "thresholds,order,log_evidence,neg_log2_evidence,status\n";
    for (const auto& row : result.table) {
        for (std::size_t i = 0; i < row.thresholds.size(); ++i) {
            out << (i > 0 ? ";" : "") << row.thresholds[i];
        }
        out << ',' << row.order << ',';
        if (row.ok) {
            out << row.log_evidence << ',' << -row.log_evidence / std::log(2.0) << ",ok\n";
        } else {
            out << ",,\"failed: " << row.error << "\"\n";
        }
    }
    out.precision(old);
}

std::string spec_to_json(const GenerativeSpec& spec) {
    Json j;
    j["name"] = spec.name;
    j["model"] = std::string(to_string(spec.kind));
    j["thresholds"] = spec.quantizer.thresholds();
    j["tree"] = spec.tree.to_string();
    j["order"] = spec.order;
    j["intercept"] = spec.intercept;
    j["burn_in"] = spec.burn_in;
    j["length"] = spec.default_length;
    Json leaves = Json::array();
    for (const auto& leaf : spec.leaves) {
        Json l;
        l["context"] = context_to_string(leaf.context, spec.tree.alphabet_size());
        l["coefficients"] = to_std(leaf.coefficients);
        if (spec.kind == ModelKind::ar) l["sigma2"] = leaf.sigma2;
        leaves.push_back(std::move(l));
    }
    j["leaves"] = std::move(leaves);
    return j.dump(2) + "\n";
}

GenerativeSpec spec_from_json(std::string_view json) {
    const Json j = parse_json(json);
    return rethrow_as_invalid([&] {
        GenerativeSpec s;
        s.name = j.value("name", std::string("custom"));
        s.kind = parse_model_kind(j.at("model").get<std::string>());
        s.quantizer = Quantizer(j.at("thresholds").get<std::vector<double>>());
        const int m = s.quantizer.alphabet_size();
        s.tree = TreeModel::parse(j.at("tree").get<std::string>(), m);
        s.order = j.at("order").get<int>();
        s.intercept = j.value("intercept", false);
        s.burn_in = j.value("burn_in", std::size_t{200});
        s.default_length = j.value("length", std::size_t{0});
        for (const auto& l : j.at("leaves")) {
            LeafSpec leaf;
            leaf.context = context_from_string(l.at("context").get<std::string>(), m);
            leaf.coefficients = to_eigen(l.at("coefficients").get<std::vector<double>>());
            leaf.sigma2 = l.value("sigma2", 0.0);
            s.leaves.push_back(std::move(leaf));
        }
        s.validate();
        return s;
    });
}

}  // namespace bctx
