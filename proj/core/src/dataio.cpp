#include "misa/dataio.hpp"

#include "misa/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace misa::data {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw load_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Ordinal codes in order of first appearance.
class LevelTable {
public:
    int code(std::string_view level) {
        auto it = index_.find(std::string(level));
        if (it != index_.end()) return it->second;
        const int c = static_cast<int>(levels_.size());
        levels_.emplace_back(level);
        index_.emplace(levels_.back(), c);
        return c;
    }
    const std::vector<std::string>& levels() const { return levels_; }

private:
    std::map<std::string, int> index_;
    std::vector<std::string> levels_;
};

} // namespace

int Dataset::count_kind(ColumnKind k) const {
    return static_cast<int>(std::count(column_kinds.begin(), column_kinds.end(), k));
}

Schema parse_schema(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw load_error(std::string("schema: ") + e.what());
    }
    if (!j.is_object()) throw load_error("schema: expected a JSON object");
    Schema s;
    if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_string()) throw load_error("schema: 'label' must be a string or null");
        s.label = j["label"].get<std::string>();
    }
    if (j.contains("categorical")) {
        if (!j["categorical"].is_array()) throw load_error("schema: 'categorical' must be an array");
        for (const auto& c : j["categorical"]) {
            if (!c.is_string()) throw load_error("schema: categorical entries must be strings");
            s.categorical.push_back(c.get<std::string>());
        }
    }
    return s;
}

Schema load_schema(const std::filesystem::path& path) {
    return parse_schema(read_file(path));
}

Dataset parse_csv(const std::string& text, const Schema& schema, const std::string& source) {
    std::vector<std::string_view> lines;
    {
        std::string_view rest(text);
        while (!rest.empty()) {
            const std::size_t nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            if (!trim(line).empty()) lines.push_back(line);
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
    }
    if (lines.empty()) throw load_error(source + ": empty file");
    if (lines.front().size() >= 3 && lines.front().substr(0, 3) == "\xEF\xBB\xBF")
        lines.front().remove_prefix(3);

    const auto header = split_line(lines.front());
    const std::size_t width = header.size();
    int label_col = -1;
    std::vector<bool> categorical(width, false);
    for (std::size_t c = 0; c < width; ++c) {
        if (schema.label && header[c] == *schema.label) label_col = static_cast<int>(c);
        for (const auto& name : schema.categorical)
            if (header[c] == name) categorical[c] = true;
    }
    if (schema.label && label_col < 0)
        throw load_error(source + ": label column '" + *schema.label + "' not in header");
    for (const auto& name : schema.categorical)
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw load_error(source + ": categorical column '" + name + "' not in header");

    Dataset ds;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < width; ++c) {
        if (static_cast<int>(c) == label_col) continue;
        feature_cols.push_back(c);
        ds.column_names.emplace_back(header[c]);
        ds.column_kinds.push_back(categorical[c] ? ColumnKind::categorical : ColumnKind::numerical);
    }
    if (feature_cols.empty()) throw load_error(source + ": no feature columns");

    const std::size_t n = lines.size() - 1;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
    std::vector<LevelTable> levels(width);
    LevelTable label_levels;

    for (std::size_t r = 0; r < n; ++r) {
        const auto cells = split_line(lines[r + 1]);
        const std::size_t line_no = r + 2;
        if (cells.size() != width)
            throw load_error(source + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(width));
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::size_t c = feature_cols[f];
            double v = 0.0;
            if (categorical[c]) {
                if (cells[c].empty())
                    throw load_error(source + ": empty cell at line " + std::to_string(line_no) +
                                     ", column '" + std::string(header[c]) + "'");
                v = levels[c].code(cells[c]);
            } else {
                auto parsed = parse_number(cells[c]);
                if (!parsed)
                    throw load_error(source + ": cannot parse '" + std::string(cells[c]) +
                                     "' at line " + std::to_string(line_no) + ", column '" +
                                     std::string(header[c]) + "'");
                v = *parsed;
            }
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = v;
        }
        if (label_col >= 0) ds.labels.push_back(label_levels.code(cells[static_cast<std::size_t>(label_col)]));
    }
    if (n == 0) throw load_error(source + ": no data rows");
    ds.class_names = label_levels.levels();
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
    return parse_csv(read_file(path), schema, path.string());
}

ScaleParams fit_scale(const Matrix& x) {
    if (x.rows() == 0) throw config_error("fit_scale: no rows");
    return ScaleParams{x.colwise().minCoeff(), x.colwise().maxCoeff()};
}

ScaleParams fit_scale(const Matrix& x, const MaskMatrix& mask) {
    require_same_shape(x, mask, "fit_scale");
    ScaleParams p{Eigen::RowVectorXd::Zero(x.cols()), Eigen::RowVectorXd::Ones(x.cols())};
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        bool seen = false;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            if (mask(r, c) != 1.0) continue;
            const double v = x(r, c);
            if (!seen) {
                p.min(c) = p.max(c) = v;
                seen = true;
            } else {
                p.min(c) = std::min(p.min(c), v);
                p.max(c) = std::max(p.max(c), v);
            }
        }
    }
    return p;
}

Matrix apply_scale(const Matrix& x, const ScaleParams& p) {
    if (p.min.size() != x.cols() || p.max.size() != x.cols())
        throw dimension_error("apply_scale: parameter width does not match data");
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double range = p.max(c) - p.min(c);
        if (range > 0.0)
            out.col(c) = (x.col(c).array() - p.min(c)) / range;
        else
            out.col(c).setZero();
    }
    return out;
}

Matrix apply_scale_clipped(const Matrix& x, const ScaleParams& p) {
    return apply_scale(x, p).cwiseMax(0.0).cwiseMin(1.0);
}

Matrix unscale(const Matrix& scaled, const ScaleParams& p) {
    if (p.min.size() != scaled.cols())
        throw dimension_error("unscale: parameter width does not match data");
    Matrix out(scaled.rows(), scaled.cols());
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
        const double range = p.max(c) - p.min(c);
        out.col(c) = scaled.col(c).array() * range + p.min(c);
    }
    return out;
}

std::pair<Dataset, ScaleParams> minmax_scale(const Dataset& data) {
    ScaleParams p = fit_scale(data.features);
    Dataset scaled = data;
    scaled.features = apply_scale(data.features, p);
    return {std::move(scaled), std::move(p)};
}

std::vector<Eigen::Index> FoldPlan::test_rows(int fold) const {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
    return rows;
}

std::vector<Eigen::Index> FoldPlan::train_rows(int fold) const {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
    return rows;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
}

FoldPlan make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw config_error("make_folds: need k >= 2");
    if (n < static_cast<std::size_t>(k)) throw config_error("make_folds: fewer rows than folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    // Fisher-Yates with our own uniform draw so the permutation does not
    // depend on the standard library's distribution implementation.
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos)
        plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return plan;
}

} // namespace misa::data
