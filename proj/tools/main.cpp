#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <cpgraph/cpgraph.hpp>

#include "commands.hpp"

using namespace cpgraph::cli;

namespace {

void add_model_flags(CLI::App* cmd, ModelFlags& m)
{
    cmd->add_option("--lambda", m.lambda, "Sparsity penalty")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--e", m.e, "Spatial weight on log distances")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd->add_option("--M", m.M, "Core-score budget (default N/8)");
    cmd->add_option("--eps-w", m.eps_w, "Weight floor")->capture_default_str();
    cmd->add_option("--glasso-tol", m.glasso_tol, "KKT tolerance of the graph step")->capture_default_str();
    cmd->add_option("--lp-tol", m.lp_tol, "Duality-gap tolerance of the score step")->capture_default_str();
    cmd->add_option("--bca-tol", m.bca_rel_tol, "Relative objective change for convergence")->capture_default_str();
    cmd->add_option("--max-iter", m.bca_max_iter, "Outer iteration cap")->capture_default_str();
    cmd->add_option("--glasso-max-iter", m.glasso_max_iter, "Newton iteration cap per graph step")->capture_default_str();
    cmd->add_option("--ridge", m.ridge, "Ridge added to the covariance diagonal")->capture_default_str();
    cmd->add_flag("--diagonal-gains", m.diagonal_gains, "Count |theta_ii| in the score-step gains");
    cmd->add_option("--distances", m.distances, "Square CSV of node distances")->check(CLI::ExistingFile);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse graph learning with core-periphery structure"};
    app.set_version_flag("--version", std::string(cpgraph::kVersion));
    app.require_subcommand(1);

    std::optional<std::filesystem::path> out;
    auto add_out = [&out](CLI::App* cmd) {
        cmd->add_option("--out,-o", out, std::string("Output directory (default $") + kOutputDirEnv + " or .)");
    };

    FitConfig fit_cfg;
    auto* fit = app.add_subcommand("fit", "Learn a graph and core scores from node features");
    fit->add_option("--features,-x", fit_cfg.features, "Features CSV (rows are nodes)")->required()->check(CLI::ExistingFile);
    add_model_flags(fit, fit_cfg.model);
    fit->add_option("--seed", fit_cfg.seed, "Seed recorded in the output metadata")->capture_default_str();
    add_out(fit);

    ScoresFromGraphConfig sg_cfg;
    auto* sg = app.add_subcommand("scores-from-graph", "Core scores of a known graph");
    sg->add_option("--adjacency,-a", sg_cfg.adjacency, "Adjacency CSV")->required()->check(CLI::ExistingFile);
    sg->add_option("--distances", sg_cfg.distances, "Square CSV of node distances")->check(CLI::ExistingFile);
    sg->add_option("--e", sg_cfg.e, "Spatial weight on log distances")->capture_default_str()->check(CLI::NonNegativeNumber);
    sg->add_option("--M", sg_cfg.M, "Core-score budget (default N/8)");
    sg->add_option("--eps-w", sg_cfg.eps_w, "Constraint slack")->capture_default_str();
    sg->add_option("--lp-tol", sg_cfg.lp_tol, "Duality-gap tolerance")->capture_default_str();
    add_out(sg);

    GlassoConfig gl_cfg;
    auto* gl = app.add_subcommand("glasso", "Weighted graphical lasso with weights from given core scores");
    gl->add_option("--features,-x", gl_cfg.features, "Features CSV")->required()->check(CLI::ExistingFile);
    gl->add_option("--scores", gl_cfg.scores, "Core-score JSON (uniform weights when omitted)")->check(CLI::ExistingFile);
    add_model_flags(gl, gl_cfg.model);
    add_out(gl);

    SampleConfig sa_cfg;
    auto* sa = app.add_subcommand("sample", "Draw a synthetic core-periphery instance");
    sa->add_option("--nodes,-n", sa_cfg.nodes, "Number of nodes")->capture_default_str();
    sa->add_option("--samples,-d", sa_cfg.samples, "Number of feature columns")->capture_default_str();
    sa->add_option("--core-count", sa_cfg.core_count, "Planted core size (default N/4)");
    sa->add_option("--core-value", sa_cfg.core_value, "Core score of planted core nodes")->capture_default_str();
    sa->add_option("--M", sa_cfg.M, "Score budget (default N/8)");
    sa->add_option("--lambda", sa_cfg.lambda, "Laplace rate multiplier")->capture_default_str();
    sa->add_option("--e", sa_cfg.e, "Spatial weight (> 0 also writes distances)")->capture_default_str();
    sa->add_flag("--coordinates", sa_cfg.coordinates, "Write node coordinates and distances");
    sa->add_option("--sparsify-at", sa_cfg.sparsify_at, "Zero |theta_ij| below this (default 30th percentile)");
    sa->add_option("--pd-margin", sa_cfg.pd_margin, "Diagonal dominance margin")->capture_default_str();
    sa->add_option("--eps-w", sa_cfg.eps_w, "Weight floor")->capture_default_str();
    sa->add_option("--seed", sa_cfg.seed, "Random seed")->capture_default_str();
    add_out(sa);

    EvalConfig ev_cfg;
    auto* ev = app.add_subcommand("eval", "Block-model distances and support recovery");
    ev->add_option("--truth", ev_cfg.truth, "Ground-truth precision or adjacency CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--estimate", ev_cfg.estimate, "Learnt graph (graph.tsv or square CSV)")->required()->check(CLI::ExistingFile);
    ev->add_option("--scores", ev_cfg.scores, "Proposed core-score JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("--truth-scores", ev_cfg.truth_scores, "Planted core-score JSON")->check(CLI::ExistingFile);
    ev->add_option("--method", ev_cfg.methods, "Extra score file as NAME=FILE (repeatable)");
    ev->add_flag("--baselines", ev_cfg.baselines, "Add MINRES and k-core scores of the truth graph");
    ev->add_option("--threshold", ev_cfg.threshold, "Edge threshold on |theta|")->capture_default_str();
    ev->add_flag("--binarize", ev_cfg.binarize, "Compare the estimate's support instead of |theta|");
    add_out(ev);

    GroupCompareConfig gc_cfg;
    auto* gc = app.add_subcommand("group-compare", "Difference of mean normalized core scores between two groups");
    gc->add_option("--group-a", gc_cfg.group_a, "Score JSON or feature CSV files")->required()->check(CLI::ExistingFile);
    gc->add_option("--group-b", gc_cfg.group_b, "Score JSON or feature CSV files")->required()->check(CLI::ExistingFile);
    gc->add_option("--k", gc_cfg.k, "Number of top nodes to report")->capture_default_str();
    gc->add_option("--jobs,-j", gc_cfg.jobs, "Worker threads for fits")->capture_default_str();
    add_model_flags(gc, gc_cfg.model);
    add_out(gc);

    GridConfig gr_cfg;
    auto* gr = app.add_subcommand("grid", "Fit over a grid of lambda (and e) values");
    gr->add_option("--features,-x", gr_cfg.features, "Features CSV")->required()->check(CLI::ExistingFile);
    gr->add_option("--lambdas", gr_cfg.lambdas, "Penalty values")->delimiter(',');
    gr->add_option("--es", gr_cfg.es, "Spatial weights (default: --e)")->delimiter(',');
    gr->add_option("--jobs,-j", gr_cfg.jobs, "Worker threads")->capture_default_str();
    gr->add_option("--threshold", gr_cfg.threshold, "Edge threshold for the edge counts")->capture_default_str();
    gr->add_option("--seed", gr_cfg.seed, "Seed recorded in the output metadata")->capture_default_str();
    add_model_flags(gr, gr_cfg.model);
    add_out(gr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    std::ostream& log = std::cerr;
    if (*fit) return guarded([&] { fit_cfg.out = out; return cmd_fit(fit_cfg, log); }, log);
    if (*sg) return guarded([&] { sg_cfg.out = out; return cmd_scores_from_graph(sg_cfg, log); }, log);
    if (*gl) return guarded([&] { gl_cfg.out = out; return cmd_glasso(gl_cfg, log); }, log);
    if (*sa) return guarded([&] { sa_cfg.out = out; return cmd_sample(sa_cfg, log); }, log);
    if (*ev) return guarded([&] { ev_cfg.out = out; return cmd_eval(ev_cfg, log); }, log);
    if (*gc) return guarded([&] { gc_cfg.out = out; return cmd_group_compare(gc_cfg, log); }, log);
    if (*gr) return guarded([&] { gr_cfg.out = out; return cmd_grid(gr_cfg, log); }, log);
    return kExitInput;
}
