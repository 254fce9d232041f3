#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <cpgraph/types.hpp>

namespace cpgraph::cli {

/// Raised for unreadable or malformed files; the message carries the path
/// and, where it applies, the line number.
class IoError : public InputError {
public:
    using InputError::InputError;
};

struct Table {
    Matrix values;
    std::vector<std::string> row_labels; // empty when the file had no label column
    std::vector<std::string> col_labels; // empty when the file had no header row
};

/// Numeric CSV with an optional header row and optional first column of row
/// labels, both auto-detected: a row (or column) is treated as labels when
/// any of its cells does not parse as a number.
Table read_csv_table(const std::filesystem::path& path);

/// N x d features; rows are nodes.
FeatureMatrix read_features(const std::filesystem::path& path);

/// Square matrix file (adjacency, distances, precision).
Matrix read_square(const std::filesystem::path& path);

/// Edge list "i<TAB>j<TAB>value" with an optional header line; symmetric
/// n x n result with a zero diagonal.
Matrix read_edge_list(const std::filesystem::path& path, Index n);

/// Square CSV or, for ".tsv" files, an edge list.
Matrix read_graph(const std::filesystem::path& path, Index n);

struct ScoresFile {
    std::vector<std::string> labels;
    Vector values;
    double M = 0.0;
    nlohmann::ordered_json metadata;
};

ScoresFile read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const ScoresFile& scores);

/// Shortest round-trip decimal form, independent of locale.
std::string format_number(double v);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& row_labels = {},
                      const std::vector<std::string>& col_labels = {}, const std::string& corner = "node");
void write_edge_list(const std::filesystem::path& path, const Matrix& theta, double threshold = 0.0);
void write_trace(const std::filesystem::path& path, const std::vector<double>& trace);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a of the file bytes as 16 hex digits.
std::string fnv1a_file(const std::filesystem::path& path);

nlohmann::ordered_json input_record(const std::filesystem::path& path);

std::vector<std::string> default_labels(Index n);

} // namespace cpgraph::cli
