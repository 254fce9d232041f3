#include "cli_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

namespace cpgraph::cli {

namespace {

std::string read_all(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open file for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(path.string() + ": read failed");
    return ss.str();
}

std::string where(const std::filesystem::path& path, std::size_t line)
{
    return path.string() + ":" + std::to_string(line) + ": ";
}

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

// RFC 4180 style fields: double quotes group, "" escapes a quote.
std::vector<std::string> split_line(std::string_view line, char sep, const std::filesystem::path& path,
                                    std::size_t lineno)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quoted) {
            if (ch == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    cur.push_back('"');
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == sep) {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(ch);
        }
    }
    if (quoted) throw IoError(where(path, lineno) + "unterminated quoted field");
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

std::optional<double> parse_number(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

struct Lines {
    std::vector<std::string> text;
    std::vector<std::size_t> number; // 1-based line numbers of nonblank lines
};

Lines nonblank_lines(const std::string& content)
{
    Lines out;
    std::size_t start = 0, lineno = 0;
    while (start <= content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        ++lineno;
        std::string line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) {
            out.text.push_back(std::move(line));
            out.number.push_back(lineno);
        }
        if (end == content.size()) break;
        start = end + 1;
    }
    return out;
}

void write_or_throw(const std::filesystem::path& path, const std::string& data)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    out << data;
    out.flush();
    if (!out) throw IoError(path.string() + ": write failed");
}

} // namespace

Table read_csv_table(const std::filesystem::path& path)
{
    const Lines lines = nonblank_lines(read_all(path));
    if (lines.text.empty()) throw IoError(path.string() + ": file is empty");

    std::vector<std::vector<std::string>> rows;
    rows.reserve(lines.text.size());
    for (std::size_t r = 0; r < lines.text.size(); ++r) rows.push_back(split_line(lines.text[r], ',', path, lines.number[r]));

    const std::size_t width = rows.front().size();
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].size() != width)
            throw IoError(where(path, lines.number[r]) + "expected " + std::to_string(width) + " fields, found " +
                          std::to_string(rows[r].size()));

    auto numeric_from = [&](const std::vector<std::string>& row, std::size_t first) {
        for (std::size_t k = first; k < row.size(); ++k)
            if (!parse_number(row[k])) return false;
        return true;
    };

    // label column: the first cell of some non-header row is not a number
    const std::size_t probe = rows.size() > 1 ? 1 : 0;
    const bool label_col = width > 1 && !parse_number(rows[probe].front());
    const std::size_t first_col = label_col ? 1 : 0;
    const bool header = rows.size() > 1 && !numeric_from(rows.front(), first_col);
    const std::size_t first_row = header ? 1 : 0;

    Table t;
    const Index n = static_cast<Index>(rows.size() - first_row);
    const Index d = static_cast<Index>(width - first_col);
    if (n == 0 || d == 0) throw IoError(path.string() + ": no numeric data");
    t.values.resize(n, d);
    for (std::size_t r = first_row; r < rows.size(); ++r) {
        for (std::size_t k = first_col; k < width; ++k) {
            const auto v = parse_number(rows[r][k]);
            if (!v)
                throw IoError(where(path, lines.number[r]) + "field " + std::to_string(k + 1) + " is not a number: '" +
                              rows[r][k] + "'");
            t.values(static_cast<Index>(r - first_row), static_cast<Index>(k - first_col)) = *v;
        }
        if (label_col) t.row_labels.push_back(rows[r].front());
    }
    if (header) t.col_labels.assign(rows.front().begin() + static_cast<std::ptrdiff_t>(first_col), rows.front().end());
    return t;
}

FeatureMatrix read_features(const std::filesystem::path& path)
{
    Table t = read_csv_table(path);
    try {
        return FeatureMatrix(std::move(t.values), std::move(t.row_labels));
    } catch (const InputError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Matrix read_square(const std::filesystem::path& path)
{
    Table t = read_csv_table(path);
    if (t.values.rows() != t.values.cols())
        throw IoError(path.string() + ": expected a square matrix, found " + std::to_string(t.values.rows()) + " x " +
                      std::to_string(t.values.cols()));
    return std::move(t.values);
}

Matrix read_edge_list(const std::filesystem::path& path, Index n)
{
    const Lines lines = nonblank_lines(read_all(path));
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t r = 0; r < lines.text.size(); ++r) {
        const auto fields = split_line(lines.text[r], '\t', path, lines.number[r]);
        if (fields.size() != 3) throw IoError(where(path, lines.number[r]) + "expected 3 tab-separated fields");
        const auto i = parse_number(fields[0]);
        const auto j = parse_number(fields[1]);
        const auto v = parse_number(fields[2]);
        if (!i || !j || !v) {
            if (r == 0) continue; // header
            throw IoError(where(path, lines.number[r]) + "malformed edge");
        }
        const auto ii = static_cast<Index>(*i);
        const auto jj = static_cast<Index>(*j);
        if (static_cast<double>(ii) != *i || static_cast<double>(jj) != *j || ii < 0 || jj < 0 || ii >= n ||
            jj >= n || ii == jj)
            throw IoError(where(path, lines.number[r]) + "node index out of range");
        m(ii, jj) = m(jj, ii) = *v;
    }
    return m;
}

Matrix read_graph(const std::filesystem::path& path, Index n)
{
    if (path.extension() == ".tsv") return read_edge_list(path, n);
    Matrix m = read_square(path);
    if (m.rows() != n)
        throw IoError(path.string() + ": expected " + std::to_string(n) + " nodes, found " + std::to_string(m.rows()));
    return m;
}

ScoresFile read_scores(const std::filesystem::path& path)
{
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(read_all(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": invalid JSON: " + e.what());
    }
    ScoresFile s;
    try {
        const auto values = j.at("values").get<std::vector<double>>();
        s.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
        if (j.contains("labels")) s.labels = j.at("labels").get<std::vector<std::string>>();
        s.M = j.contains("M") ? j.at("M").get<double>() : s.values.sum();
        if (j.contains("metadata")) s.metadata = j.at("metadata");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": malformed scores file: " + e.what());
    }
    if (!s.labels.empty() && static_cast<Index>(s.labels.size()) != s.values.size())
        throw IoError(path.string() + ": label count does not match the number of values");
    return s;
}

void write_scores(const std::filesystem::path& path, const ScoresFile& scores)
{
    nlohmann::ordered_json j;
    j["labels"] = scores.labels;
    j["values"] = std::vector<double>(scores.values.data(), scores.values.data() + scores.values.size());
    j["M"] = scores.M;
    j["metadata"] = scores.metadata;
    write_or_throw(path, j.dump(2) + "\n");
}

std::string format_number(double v)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw InternalError("number formatting failed");
    return std::string(buf.data(), ptr);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels, const std::string& corner)
{
    std::string out;
    const bool rl = !row_labels.empty();
    if (!col_labels.empty()) {
        if (rl) out += corner + ",";
        for (std::size_t k = 0; k < col_labels.size(); ++k) {
            if (k) out += ',';
            out += col_labels[k];
        }
        out += '\n';
    }
    for (Index i = 0; i < m.rows(); ++i) {
        if (rl) out += row_labels[static_cast<std::size_t>(i)] + ",";
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_number(m(i, j));
        }
        out += '\n';
    }
    write_or_throw(path, out);
}

void write_edge_list(const std::filesystem::path& path, const Matrix& theta, double threshold)
{
    std::string out = "i\tj\ttheta\n";
    for (Index i = 0; i < theta.rows(); ++i)
        for (Index j = i + 1; j < theta.cols(); ++j)
            if (std::abs(theta(i, j)) > threshold)
                out += std::to_string(i) + '\t' + std::to_string(j) + '\t' + format_number(theta(i, j)) + '\n';
    write_or_throw(path, out);
}

void write_trace(const std::filesystem::path& path, const std::vector<double>& trace)
{
    std::string out = "half_step,outer_iteration,block,objective\n";
    for (std::size_t k = 0; k < trace.size(); ++k)
        out += std::to_string(k + 1) + ',' + std::to_string(k / 2 + 1) + ',' + (k % 2 == 0 ? "theta" : "c") + ',' +
               format_number(trace[k]) + '\n';
    write_or_throw(path, out);
}

void write_text(const std::filesystem::path& path, const std::string& text) { write_or_throw(path, text); }

std::string fnv1a_file(const std::filesystem::path& path)
{
    const std::string bytes = read_all(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

nlohmann::ordered_json input_record(const std::filesystem::path& path)
{
    nlohmann::ordered_json j;
    j["path"] = path.string();
    j["fnv1a64"] = fnv1a_file(path);
    return j;
}

std::vector<std::string> default_labels(Index n)
{
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

} // namespace cpgraph::cli
