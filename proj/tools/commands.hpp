#pragma once
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <cpgraph/types.hpp>

namespace cpgraph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNotConverged = 2;

inline constexpr const char* kOutputDirEnv = "CPGRAPH_OUTPUT_DIR";

/// --out if given, else $CPGRAPH_OUTPUT_DIR, else the working directory.
std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& flag);

/// Model flags shared by fit, glasso, grid and group-compare.
struct ModelFlags {
    double lambda = 0.1;
    double e = 0.0;
    std::optional<double> M; // N/8 when unset
    double eps_w = 1e-3;
    double glasso_tol = 1e-5;
    double lp_tol = 1e-9;
    double bca_rel_tol = 1e-5;
    int bca_max_iter = 50;
    int glasso_max_iter = 1000;
    double ridge = 0.0;
    bool diagonal_gains = false;
    std::optional<std::filesystem::path> distances;
};

struct FitConfig {
    std::filesystem::path features;
    ModelFlags model;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

struct ScoresFromGraphConfig {
    std::filesystem::path adjacency;
    std::optional<std::filesystem::path> distances;
    double e = 0.0;
    std::optional<double> M;
    double eps_w = 1e-3;
    double lp_tol = 1e-9;
    std::optional<std::filesystem::path> out;
};

struct GlassoConfig {
    std::filesystem::path features;
    std::optional<std::filesystem::path> scores; // weights from these core scores; uniform when unset
    ModelFlags model;
    std::optional<std::filesystem::path> out;
};

struct SampleConfig {
    Index nodes = 30;
    Index samples = 2000;
    std::optional<Index> core_count; // N/4 when unset
    double core_value = 0.49;
    std::optional<double> M;         // N/8 when unset
    double lambda = 50.0;
    double e = 0.0;
    bool coordinates = false;        // also write coordinates and distances (implied by e > 0)
    std::optional<double> sparsify_at;
    double pd_margin = 0.1;
    double eps_w = 1e-3;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

struct EvalConfig {
    std::filesystem::path truth;    // ground-truth precision or adjacency (square CSV)
    std::filesystem::path estimate; // learnt graph: edge-list TSV or square CSV
    std::filesystem::path scores;   // proposed scores JSON
    std::optional<std::filesystem::path> truth_scores; // planted scores JSON, adds a rank correlation
    std::vector<std::string> methods; // extra "name=path.json" score files
    bool baselines = false;         // add minres and kcores computed on the truth support
    double threshold = 0.0;
    bool binarize = false;
    std::optional<std::filesystem::path> out;
};

struct GroupCompareConfig {
    std::vector<std::filesystem::path> group_a;
    std::vector<std::filesystem::path> group_b;
    Index k = 10;
    int jobs = 1;
    ModelFlags model; // used for feature CSV inputs
    std::optional<std::filesystem::path> out;
};

struct GridConfig {
    std::filesystem::path features;
    std::vector<double> lambdas;
    std::vector<double> es; // {model.e} when empty
    ModelFlags model;
    int jobs = 1;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

int cmd_fit(const FitConfig& cfg, std::ostream& log);
int cmd_scores_from_graph(const ScoresFromGraphConfig& cfg, std::ostream& log);
int cmd_glasso(const GlassoConfig& cfg, std::ostream& log);
int cmd_sample(const SampleConfig& cfg, std::ostream& log);
int cmd_eval(const EvalConfig& cfg, std::ostream& log);
int cmd_group_compare(const GroupCompareConfig& cfg, std::ostream& log);
int cmd_grid(const GridConfig& cfg, std::ostream& log);

/// Runs a command, mapping library and I/O errors to exit code 1.
int guarded(const std::function<int()>& body, std::ostream& log);

/// Runs tasks 0..count-1 on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

} // namespace cpgraph::cli
