#include "commands.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <cpgraph/cpgraph.hpp>

#include "cli_io.hpp"

namespace cpgraph::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Resolved {
    Hyperparams hyper;
    std::string M_source;
    std::optional<DistanceMatrix> dist;
};

Resolved resolve_model(const ModelFlags& f, Index n)
{
    Resolved r;
    r.hyper.lambda = f.lambda;
    r.hyper.e = f.e;
    r.hyper.M = f.M ? *f.M : static_cast<double>(n) / 8.0;
    r.M_source = f.M ? "flag" : "N/8";
    r.hyper.eps_w = f.eps_w;
    r.hyper.glasso_tol = f.glasso_tol;
    r.hyper.lp_tol = f.lp_tol;
    r.hyper.bca_rel_tol = f.bca_rel_tol;
    r.hyper.bca_max_iter = f.bca_max_iter;
    r.hyper.glasso_max_iter = f.glasso_max_iter;
    r.hyper.ridge = f.ridge;
    r.hyper.diagonal_gains = f.diagonal_gains;
    if (f.e > 0.0 && !f.distances) throw ConfigError("--e " + format_number(f.e) + " requires a distance matrix (--distances)");
    if (f.distances) {
        r.dist.emplace(read_square(*f.distances));
        if (r.dist->size() != n)
            throw InputError(f.distances->string() + ": distance matrix has " + std::to_string(r.dist->size()) +
                             " nodes, features have " + std::to_string(n));
    }
    r.hyper.validate(n);
    return r;
}

Json hyper_json(const Hyperparams& h, const std::string& M_source)
{
    Json j;
    j["lambda"] = h.lambda;
    j["e"] = h.e;
    j["M"] = h.M;
    j["M_source"] = M_source;
    j["eps_w"] = h.eps_w;
    j["glasso_tol"] = h.glasso_tol;
    j["lp_tol"] = h.lp_tol;
    j["bca_rel_tol"] = h.bca_rel_tol;
    j["bca_max_iter"] = h.bca_max_iter;
    j["glasso_max_iter"] = h.glasso_max_iter;
    j["ridge"] = h.ridge;
    j["diagonal_gains"] = h.diagonal_gains;
    return j;
}

Json base_metadata()
{
    Json j;
    j["tool"] = "cpgraph";
    j["version"] = kVersion;
    return j;
}

std::vector<std::string> labels_or_default(const std::vector<std::string>& labels, Index n)
{
    return labels.empty() ? default_labels(n) : labels;
}

struct FitOutputs {
    FitResult result;
    Json metadata;
};

FitOutputs run_fit(const fs::path& features, const ModelFlags& flags, std::optional<std::uint64_t> seed)
{
    const FeatureMatrix X = read_features(features);
    const Resolved r = resolve_model(flags, X.nodes());
    FitResult result = fit(X, r.dist ? &*r.dist : nullptr, r.hyper);

    Json meta = base_metadata();
    meta["hyperparameters"] = hyper_json(r.hyper, r.M_source);
    if (seed) meta["seed"] = *seed;
    Json inputs;
    inputs["features"] = input_record(features);
    if (flags.distances) inputs["distances"] = input_record(*flags.distances);
    meta["inputs"] = inputs;
    Json res;
    res["converged"] = result.converged;
    res["outer_iterations"] = result.outer_iterations;
    res["glasso_iterations"] = result.glasso_iterations;
    res["glasso_all_converged"] = result.glasso_all_converged;
    res["objective"] = result.objective_trace.empty() ? 0.0 : result.objective_trace.back();
    res["edges"] = support(result.theta).sum() / 2.0;
    meta["result"] = res;
    meta["labels_from_input"] = !X.labels().empty();
    Json out;
    out["scores"] = "scores.json";
    out["graph"] = "graph.tsv";
    out["precision"] = "precision.csv";
    out["trace"] = "trace.csv";
    meta["outputs"] = out;
    const std::vector<std::string> labels = labels_or_default(X.labels(), X.nodes());
    meta["node_labels"] = labels;
    return {std::move(result), std::move(meta)};
}

void write_fit_outputs(const fs::path& dir, const FitOutputs& fo)
{
    const FitResult& r = fo.result;
    ScoresFile s;
    s.labels = fo.metadata.at("node_labels").get<std::vector<std::string>>();
    s.values = r.c.values();
    s.M = r.c.budget();
    s.metadata = fo.metadata;
    s.metadata.erase("node_labels");
    write_scores(dir / "scores.json", s);
    write_edge_list(dir / "graph.tsv", r.theta.values());
    write_matrix_csv(dir / "precision.csv", r.theta.values(), s.labels, s.labels);
    write_trace(dir / "trace.csv", r.objective_trace);
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

} // namespace

fs::path resolve_output_dir(const std::optional<fs::path>& flag)
{
    if (flag) return *flag;
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return fs::path(env);
    return fs::path(".");
}

int cmd_fit(const FitConfig& cfg, std::ostream& log)
{
    const FitOutputs fo = run_fit(cfg.features, cfg.model, cfg.seed);
    const fs::path dir = resolve_output_dir(cfg.out);
    write_fit_outputs(dir, fo);
    if (!fo.result.converged) {
        log << "warning: stopped at the iteration cap (" << fo.result.outer_iterations
            << " outer iterations) before the objective settled; results written to " << dir.string() << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_scores_from_graph(const ScoresFromGraphConfig& cfg, std::ostream&)
{
    const Table t = read_csv_table(cfg.adjacency);
    if (t.values.rows() != t.values.cols())
        throw InputError(cfg.adjacency.string() + ": adjacency matrix is not square");
    const Index n = t.values.rows();
    const double M = cfg.M ? *cfg.M : static_cast<double>(n) / 8.0;
    if (cfg.e > 0.0 && !cfg.distances)
        throw ConfigError("--e " + format_number(cfg.e) + " requires a distance matrix (--distances)");
    std::optional<DistanceMatrix> dist;
    if (cfg.distances) dist.emplace(read_square(*cfg.distances));
    if (dist && dist->size() != n) throw InputError("distance matrix size does not match the adjacency matrix");

    const LpResult r = scores_from_graph(t.values, dist ? &*dist : nullptr, cfg.e, M, cfg.eps_w, cfg.lp_tol);

    ScoresFile s;
    s.labels = labels_or_default(t.row_labels.empty() ? t.col_labels : t.row_labels, n);
    s.values = r.c.values();
    s.M = M;
    s.metadata = base_metadata();
    Json h;
    h["e"] = cfg.e;
    h["M"] = M;
    h["M_source"] = cfg.M ? "flag" : "N/8";
    h["eps_w"] = cfg.eps_w;
    h["lp_tol"] = cfg.lp_tol;
    s.metadata["hyperparameters"] = h;
    Json inputs;
    inputs["adjacency"] = input_record(cfg.adjacency);
    if (cfg.distances) inputs["distances"] = input_record(*cfg.distances);
    s.metadata["inputs"] = inputs;
    Json res;
    res["objective"] = r.objective;
    res["active_constraints"] = r.active_constraints.size();
    res["simplex_pivots"] = r.iterations;
    res["rounds"] = r.rounds;
    s.metadata["result"] = res;
    write_scores(resolve_output_dir(cfg.out) / "scores.json", s);
    return kExitOk;
}

int cmd_glasso(const GlassoConfig& cfg, std::ostream& log)
{
    const FeatureMatrix X = read_features(cfg.features);
    const Index n = X.nodes();
    ModelFlags flags = cfg.model;
    std::optional<CoreScores> c;
    if (cfg.scores) {
        const ScoresFile sf = read_scores(*cfg.scores);
        if (sf.values.size() != n) throw InputError(cfg.scores->string() + ": score vector length does not match");
        c.emplace(sf.values, sf.values.sum());
        flags.M = sf.values.sum() > 0.0 ? sf.values.sum() : 1.0;
    }
    const Resolved r = resolve_model(flags, n);
    const CoreScores scores = c ? *c : CoreScores(Vector::Zero(n), 0.0);
    const GlassoResult g = fit_graph_given_scores(X, scores, r.dist ? &*r.dist : nullptr, r.hyper);

    const fs::path dir = resolve_output_dir(cfg.out);
    const std::vector<std::string> labels = labels_or_default(X.labels(), n);
    write_edge_list(dir / "graph.tsv", g.theta.values());
    write_matrix_csv(dir / "precision.csv", g.theta.values(), labels, labels);
    Json j = base_metadata();
    Json h;
    h["lambda"] = r.hyper.lambda;
    h["e"] = r.hyper.e;
    h["eps_w"] = r.hyper.eps_w;
    h["glasso_tol"] = r.hyper.glasso_tol;
    h["glasso_max_iter"] = r.hyper.glasso_max_iter;
    h["ridge"] = r.hyper.ridge;
    h["weights_from"] = cfg.scores ? "scores" : "uniform";
    j["hyperparameters"] = h;
    Json inputs;
    inputs["features"] = input_record(cfg.features);
    if (cfg.scores) inputs["scores"] = input_record(*cfg.scores);
    if (cfg.model.distances) inputs["distances"] = input_record(*cfg.model.distances);
    j["inputs"] = inputs;
    j["objective"] = g.objective;
    j["kkt_residual"] = g.kkt_residual;
    j["iterations"] = g.iterations;
    j["converged"] = g.converged;
    j["edges"] = support(g.theta).sum() / 2.0;
    write_text(dir / "glasso.json", j.dump(2) + "\n");
    if (!g.converged) {
        log << "warning: graphical lasso stopped at the iteration cap; results written\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_sample(const SampleConfig& cfg, std::ostream&)
{
    const Index n = cfg.nodes;
    if (n < 2) throw ConfigError("--nodes must be at least 2");
    if (cfg.samples < 1) throw ConfigError("--samples must be at least 1");
    const Index core = cfg.core_count ? *cfg.core_count : n / 4;
    const double M = cfg.M ? *cfg.M : static_cast<double>(n) / 8.0;
    const CoreScores c = planted_core_scores(n, core, cfg.core_value, M, cfg.seed);

    std::optional<Coordinates> xy;
    if (cfg.coordinates || cfg.e > 0.0) xy.emplace(sample_coordinates(n, cfg.seed ^ 0xc2b2ae3d27d4eb4fULL));
    SampleOptions opts;
    opts.sparsify_at = cfg.sparsify_at;
    opts.pd_margin = cfg.pd_margin;
    opts.eps_w = cfg.eps_w;
    const SyntheticInstance inst =
        sample_instance(n, cfg.samples, c, cfg.lambda, cfg.e, xy ? &xy->dist : nullptr, cfg.seed, opts);

    const fs::path dir = resolve_output_dir(cfg.out);
    std::vector<std::string> nodes;
    for (Index i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
    std::vector<std::string> cols;
    for (Index k = 0; k < cfg.samples; ++k) cols.push_back("s" + std::to_string(k));
    write_matrix_csv(dir / "features.csv", inst.X.values(), nodes, cols);
    write_matrix_csv(dir / "theta_true.csv", inst.theta_true.values(), nodes, nodes);
    if (xy) {
        write_matrix_csv(dir / "distances.csv", xy->dist.values(), nodes, nodes);
        write_matrix_csv(dir / "coordinates.csv", xy->points, nodes, {"x", "y"});
    }
    ScoresFile s;
    s.labels = nodes;
    s.values = c.values();
    s.M = M;
    s.metadata = base_metadata();
    Json p;
    p["nodes"] = n;
    p["samples"] = cfg.samples;
    p["core_count"] = core;
    p["core_value"] = cfg.core_value;
    p["M"] = M;
    p["lambda"] = cfg.lambda;
    p["e"] = cfg.e;
    p["sparsify_at"] = cfg.sparsify_at ? Json(*cfg.sparsify_at) : Json("30th percentile");
    p["pd_margin"] = cfg.pd_margin;
    p["eps_w"] = cfg.eps_w;
    p["seed"] = cfg.seed;
    s.metadata["parameters"] = p;
    write_scores(dir / "scores_true.json", s);
    return kExitOk;
}

int cmd_eval(const EvalConfig& cfg, std::ostream&)
{
    const Matrix truth_raw = read_square(cfg.truth);
    const Index n = truth_raw.rows();
    Matrix truth = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) truth(i, j) = (i != j && truth_raw(i, j) != 0.0) ? 1.0 : 0.0;
    const Matrix estimate = read_graph(cfg.estimate, n);
    if (!detail::is_symmetric(estimate)) throw InputError(cfg.estimate.string() + ": estimate is not symmetric");

    std::map<std::string, Vector> methods;
    const ScoresFile proposed = read_scores(cfg.scores);
    methods["proposed"] = proposed.values;
    for (const std::string& spec : cfg.methods) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--method expects NAME=FILE, got '" + spec + "'");
        const std::string name = spec.substr(0, eq);
        if (methods.count(name)) throw ConfigError("duplicate method name '" + name + "'");
        methods[name] = read_scores(spec.substr(eq + 1)).values;
    }
    if (cfg.baselines) {
        methods["minres"] = minres_scores(truth).c;
        methods["kcores"] = kcore_scores(truth).c;
    }

    CompareOptions opts;
    opts.binarize_estimate = cfg.binarize;
    opts.threshold = cfg.threshold;
    const ComparisonTable table = compare_methods(truth, estimate, methods, opts);

    Matrix est_support = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) est_support(i, j) = (i != j && std::abs(estimate(i, j)) > cfg.threshold) ? 1.0 : 0.0;
    const SupportRecovery sr = support_recovery(truth, est_support);

    Json j = base_metadata();
    Json inputs;
    inputs["truth"] = input_record(cfg.truth);
    inputs["estimate"] = input_record(cfg.estimate);
    inputs["scores"] = input_record(cfg.scores);
    if (cfg.truth_scores) inputs["truth_scores"] = input_record(*cfg.truth_scores);
    j["inputs"] = inputs;
    j["t"] = table.t;
    j["estimate_mode"] = cfg.binarize ? "binarized" : "abs";
    j["threshold"] = cfg.threshold;
    Json rows = Json::array();
    std::string csv = "method,truth_distance,estimate_distance\n";
    for (const MethodRow& row : table.rows) {
        Json r;
        r["method"] = row.method;
        r["truth_distance"] = row.truth_distance;
        r["estimate_distance"] = row.estimate_distance ? Json(*row.estimate_distance) : Json(nullptr);
        rows.push_back(r);
        csv += row.method + "," + format_number(row.truth_distance) + "," +
               (row.estimate_distance ? format_number(*row.estimate_distance) : std::string()) + "\n";
    }
    j["table"] = rows;
    Json s;
    s["precision"] = sr.precision;
    s["recall"] = sr.recall;
    s["f1"] = sr.f1;
    s["true_edges"] = sr.true_edges;
    s["estimated_edges"] = sr.estimated_edges;
    s["shared_edges"] = sr.shared_edges;
    j["support"] = s;
    if (cfg.truth_scores) {
        const ScoresFile ts = read_scores(*cfg.truth_scores);
        if (ts.values.size() != n) throw InputError(cfg.truth_scores->string() + ": wrong number of scores");
        j["spearman_vs_truth"] = spearman_correlation(proposed.values, ts.values);
    }
    const fs::path dir = resolve_output_dir(cfg.out);
    write_text(dir / "eval.json", j.dump(2) + "\n");
    write_text(dir / "table.csv", csv);
    return kExitOk;
}

int cmd_group_compare(const GroupCompareConfig& cfg, std::ostream& log)
{
    if (cfg.group_a.empty() || cfg.group_b.empty()) throw ConfigError("both groups need at least one input file");
    std::vector<fs::path> files = cfg.group_a;
    files.insert(files.end(), cfg.group_b.begin(), cfg.group_b.end());

    std::vector<Vector> scores(files.size());
    std::vector<std::vector<std::string>> labels(files.size());
    std::vector<bool> converged(files.size(), true);
    parallel_for(files.size(), cfg.jobs, [&](std::size_t k) {
        if (files[k].extension() == ".json") {
            ScoresFile s = read_scores(files[k]);
            scores[k] = std::move(s.values);
            labels[k] = std::move(s.labels);
        } else {
            const FitOutputs fo = run_fit(files[k], cfg.model, std::nullopt);
            scores[k] = fo.result.c.values();
            labels[k] = fo.metadata.at("node_labels").get<std::vector<std::string>>();
            converged[k] = fo.result.converged;
        }
    });

    const Index n = scores.front().size();
    for (std::size_t k = 0; k < files.size(); ++k)
        if (scores[k].size() != n)
            throw InputError(files[k].string() + ": has " + std::to_string(scores[k].size()) + " nodes, expected " +
                             std::to_string(n));
    Index k = cfg.k;
    if (k < 0) throw ConfigError("--k must be nonnegative");
    if (k > n) {
        log << "warning: --k " << k << " exceeds the node count; using " << n << "\n";
        k = n;
    }
    const std::vector<Vector> a(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(cfg.group_a.size()));
    const std::vector<Vector> b(scores.begin() + static_cast<std::ptrdiff_t>(cfg.group_a.size()), scores.end());
    const GroupDifference g = group_compare(a, b, k);

    const std::vector<std::string> names = labels_or_default(labels.front(), n);
    Json j = base_metadata();
    Json in_a = Json::array(), in_b = Json::array();
    for (std::size_t q = 0; q < files.size(); ++q) (q < cfg.group_a.size() ? in_a : in_b).push_back(input_record(files[q]));
    Json inputs;
    inputs["group_a"] = in_a;
    inputs["group_b"] = in_b;
    j["inputs"] = inputs;
    j["normalization"] = "l1";
    j["k"] = k;
    j["labels"] = names;
    j["diff"] = to_std(g.diff);
    j["top_k"] = g.top_k;
    std::vector<std::string> top_labels;
    for (Index idx : g.top_k) top_labels.push_back(names[static_cast<std::size_t>(idx)]);
    j["top_k_labels"] = top_labels;
    const fs::path dir = resolve_output_dir(cfg.out);
    write_text(dir / "group_compare.json", j.dump(2) + "\n");
    std::string csv = "node,label,diff\n";
    for (Index i = 0; i < n; ++i)
        csv += std::to_string(i) + "," + names[static_cast<std::size_t>(i)] + "," + format_number(g.diff[i]) + "\n";
    write_text(dir / "group_diff.csv", csv);

    for (std::size_t q = 0; q < files.size(); ++q)
        if (!converged[q]) {
            log << "warning: fit for " << files[q].string() << " stopped at the iteration cap\n";
            return kExitNotConverged;
        }
    return kExitOk;
}

int cmd_grid(const GridConfig& cfg, std::ostream& log)
{
    if (cfg.lambdas.empty()) throw ConfigError("empty grid: give at least one value to --lambdas");
    const std::vector<double> es = cfg.es.empty() ? std::vector<double>{cfg.model.e} : cfg.es;
    struct Cell {
        double lambda;
        double e;
    };
    std::vector<Cell> cells;
    for (double e : es)
        for (double l : cfg.lambdas) cells.push_back({l, e});

    std::vector<std::optional<FitOutputs>> results(cells.size());
    parallel_for(cells.size(), cfg.jobs, [&](std::size_t k) {
        ModelFlags f = cfg.model;
        f.lambda = cells[k].lambda;
        f.e = cells[k].e;
        results[k] = run_fit(cfg.features, f, cfg.seed);
    });

    const fs::path dir = resolve_output_dir(cfg.out);
    std::string csv = "cell,lambda,e,edges,edge_percent,converged,outer_iterations,objective\n";
    bool all_converged = true;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const FitResult& r = results[k]->result;
        const Index n = r.theta.size();
        const double edges = support(r.theta, cfg.threshold).sum() / 2.0;
        const double pct = 100.0 * edges / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
        char name[32];
        std::snprintf(name, sizeof name, "cell_%03zu", k);
        write_fit_outputs(dir / name, *results[k]);
        csv += std::string(name) + "," + format_number(cells[k].lambda) + "," + format_number(cells[k].e) + "," +
               format_number(edges) + "," + format_number(pct) + "," + (r.converged ? "true" : "false") + "," +
               std::to_string(r.outer_iterations) + "," + format_number(r.objective_trace.back()) + "\n";
        all_converged = all_converged && r.converged;
    }
    write_text(dir / "grid.csv", csv);
    if (!all_converged) {
        log << "warning: at least one grid cell stopped at the iteration cap; see grid.csv\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int guarded(const std::function<int()>& body, std::ostream& log)
{
    try {
        return body();
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return kExitInput;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task)
{
    if (jobs < 1) throw ConfigError("--jobs must be at least 1");
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) {
            try {
                task(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < count; k = next++) {
                    try {
                        task(k);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        for (std::thread& t : pool) t.join();
    }
    // report the first failure in task order so messages do not depend on scheduling
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace cpgraph::cli
