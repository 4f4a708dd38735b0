#pragma once

#include "misa/random.hpp"
#include "misa/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace misa::data {

enum class ColumnKind { numerical, categorical };

struct Schema {
    std::optional<std::string> label;
    std::vector<std::string> categorical;
};

// Reads {"label": <name or null>, "categorical": [<names>]}.
Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(const std::string& json_text);

struct Dataset {
    Matrix features;
    std::vector<int> labels;  // empty when the schema has no label column
    std::vector<ColumnKind> column_kinds;
    std::vector<std::string> column_names;
    std::vector<std::string> class_names;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }
    bool has_labels() const { return !labels.empty(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
    int count_kind(ColumnKind k) const;
};

// Header line, comma separated, '.' decimal point. Categorical cells (and
// the label) are ordinal-encoded in order of first appearance.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset parse_csv(const std::string& text, const Schema& schema, const std::string& source = "<csv>");

struct ScaleParams {
    Eigen::RowVectorXd min;
    Eigen::RowVectorXd max;
};

// Per-column min/max over all rows.
ScaleParams fit_scale(const Matrix& x);
// Per-column min/max over entries where mask == 1. Columns with no observed
// entry get [0, 1].
ScaleParams fit_scale(const Matrix& x, const MaskMatrix& mask);

// x -> (x - min) / (max - min); constant columns map to 0.
Matrix apply_scale(const Matrix& x, const ScaleParams& p);
// apply_scale followed by clipping into [0, 1].
Matrix apply_scale_clipped(const Matrix& x, const ScaleParams& p);
Matrix unscale(const Matrix& scaled, const ScaleParams& p);

std::pair<Dataset, ScaleParams> minmax_scale(const Dataset& data);

struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> assignments;  // fold index per row

    std::vector<Eigen::Index> test_rows(int fold) const;
    std::vector<Eigen::Index> train_rows(int fold) const;
    std::vector<std::size_t> fold_sizes() const;
};

// Deterministic shuffle under `seed`, then round-robin assignment so fold
// sizes differ by at most one.
FoldPlan make_folds(std::size_t n, int k, std::uint64_t seed);

} // namespace misa::data
