#include "test_support.hpp"

#include "misa/dataio.hpp"
#include "misa/error.hpp"

#include <numeric>
#include <set>

using namespace misa;
using namespace misa::data;

namespace {

const char* toy_csv =
    "color,size,weight,kind\n"
    "red,1.5,10,a\n"
    "blue,2.5,20,b\n"
    "red,3.5,30,a\n"
    "green,4.5,40,c\n";

Schema toy_schema() {
    return parse_schema(R"({"label": "kind", "categorical": ["color"]})");
}

} // namespace

TEST(Schema, ParsesLabelAndCategorical) {
    const Schema s = toy_schema();
    ASSERT_TRUE(s.label.has_value());
    EXPECT_EQ(*s.label, "kind");
    EXPECT_EQ(s.categorical, std::vector<std::string>{"color"});
    EXPECT_FALSE(parse_schema(R"({"label": null})").label.has_value());
    EXPECT_THROW(parse_schema("[1,2]"), load_error);
    EXPECT_THROW(parse_schema(R"({"label": 3})"), load_error);
}

TEST(Csv, EncodesCategoriesInFirstAppearanceOrder) {
    const Dataset ds = parse_csv(toy_csv, toy_schema());
    ASSERT_EQ(ds.rows(), 4);
    ASSERT_EQ(ds.cols(), 3);
    EXPECT_EQ(ds.column_names, (std::vector<std::string>{"color", "size", "weight"}));
    EXPECT_EQ(ds.column_kinds[0], ColumnKind::categorical);
    EXPECT_EQ(ds.column_kinds[1], ColumnKind::numerical);
    EXPECT_EQ(ds.features(0, 0), 0.0);  // red
    EXPECT_EQ(ds.features(1, 0), 1.0);  // blue
    EXPECT_EQ(ds.features(2, 0), 0.0);
    EXPECT_EQ(ds.features(3, 0), 2.0);  // green
    EXPECT_EQ(ds.features(2, 1), 3.5);
    EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 0, 2}));
    EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(ds.num_classes(), 3);
    EXPECT_EQ(ds.count_kind(ColumnKind::categorical), 1);
}

TEST(Csv, WithoutLabelKeepsEveryColumn) {
    const Dataset ds = parse_csv("a,b\n1,2\n3,4\n", Schema{});
    EXPECT_EQ(ds.cols(), 2);
    EXPECT_FALSE(ds.has_labels());
}

TEST(Csv, ReportsLocationOfBadInput) {
    try {
        parse_csv("a,b\n1,2\n3\n", Schema{}, "toy.csv");
        FAIL() << "ragged row accepted";
    } catch (const load_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_csv("a,b\n1,x\n", Schema{}), load_error);
    EXPECT_THROW(parse_csv("a,b\n1,\n", Schema{}), load_error);
    EXPECT_THROW(parse_csv("a,b\n", Schema{}), load_error);
    EXPECT_THROW(parse_csv("a,b\n1,2\n", parse_schema(R"({"label": "c"})")), load_error);
    EXPECT_THROW(parse_csv("a,b\n1,2\n", parse_schema(R"({"categorical": ["z"]})")), load_error);
}

TEST(Csv, MissingFileIsLoadError) {
    EXPECT_THROW(load_csv("/nonexistent/file.csv", Schema{}), load_error);
}

TEST(Scale, MapsColumnsOntoUnitInterval) {
    Matrix x(3, 3);
    x << 1, 10, 5,
         2, 20, 5,
         3, 40, 5;
    const ScaleParams p = fit_scale(x);
    const Matrix s = apply_scale(x, p);
    EXPECT_DOUBLE_EQ(s(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(s(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(s(2, 1), 1.0);
    // Constant column maps to zero.
    EXPECT_EQ(s.col(2), Eigen::VectorXd::Zero(3));
    EXPECT_TRUE(unscale(s, p).block(0, 0, 3, 2).isApprox(x.block(0, 0, 3, 2), 1e-14));
}

TEST(Scale, MaskedFitIgnoresHiddenEntries) {
    Matrix x(3, 2);
    x << 0, 100,
         5, 1,
         10, 2;
    MaskMatrix m = MaskMatrix::Ones(3, 2);
    m(0, 1) = 0.0;
    const ScaleParams p = fit_scale(x, m);
    EXPECT_EQ(p.min(1), 1.0);
    EXPECT_EQ(p.max(1), 2.0);
    MaskMatrix none = MaskMatrix::Zero(3, 2);
    const ScaleParams q = fit_scale(x, none);
    EXPECT_EQ(q.min(0), 0.0);
    EXPECT_EQ(q.max(0), 1.0);
}

TEST(Scale, ClippedApplyStaysInRange) {
    Matrix train(2, 1);
    train << 0, 10;
    Matrix test(3, 1);
    test << -5, 5, 20;
    const ScaleParams p = fit_scale(train);
    const Matrix raw = apply_scale(test, p);
    EXPECT_LT(raw(0, 0), 0.0);
    EXPECT_GT(raw(2, 0), 1.0);
    const Matrix clipped = apply_scale_clipped(test, p);
    EXPECT_EQ(clipped(0, 0), 0.0);
    EXPECT_EQ(clipped(1, 0), 0.5);
    EXPECT_EQ(clipped(2, 0), 1.0);
}

TEST(Folds, SizesDifferByAtMostOne) {
    const FoldPlan plan = make_folds(11, 5, 123);
    auto sizes = plan.fold_sizes();
    std::sort(sizes.rbegin(), sizes.rend());
    EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2, 2, 2}));
}

TEST(Folds, FormAPartition) {
    const FoldPlan plan = make_folds(103, 5, 9);
    std::set<Eigen::Index> all;
    for (int f = 0; f < 5; ++f) {
        const auto test = plan.test_rows(f);
        const auto train = plan.train_rows(f);
        EXPECT_EQ(test.size() + train.size(), 103u);
        for (auto r : test) {
            EXPECT_TRUE(all.insert(r).second) << "row in two folds";
            EXPECT_EQ(std::count(train.begin(), train.end(), r), 0);
        }
    }
    EXPECT_EQ(all.size(), 103u);
}

TEST(Folds, DeterministicPerSeed) {
    EXPECT_EQ(make_folds(50, 5, 1).assignments, make_folds(50, 5, 1).assignments);
    EXPECT_NE(make_folds(50, 5, 1).assignments, make_folds(50, 5, 2).assignments);
    EXPECT_THROW(make_folds(3, 5, 1), config_error);
    EXPECT_THROW(make_folds(10, 1, 1), config_error);
}

struct BundledDataset {
    const char* name;
    Eigen::Index rows;
    Eigen::Index cols;
    int categorical;
    int classes;
};

class Bundled : public ::testing::TestWithParam<BundledDataset> {};

TEST_P(Bundled, MatchesPublishedShape) {
    const auto& p = GetParam();
    const auto dir = misa::testing::data_dir();
    const Schema schema = load_schema(dir / (std::string(p.name) + ".schema.json"));
    const Dataset ds = load_csv(dir / (std::string(p.name) + ".csv"), schema);
    EXPECT_EQ(ds.rows(), p.rows);
    EXPECT_EQ(ds.cols(), p.cols);
    EXPECT_EQ(ds.count_kind(ColumnKind::categorical), p.categorical);
    EXPECT_EQ(ds.num_classes(), p.classes);
    EXPECT_TRUE(all_finite(ds.features));
}

INSTANTIATE_TEST_SUITE_P(Data, Bundled,
                         ::testing::Values(BundledDataset{"wine", 178, 13, 0, 3},
                                           BundledDataset{"sonar", 208, 60, 0, 2},
                                           BundledDataset{"ionosphere", 351, 34, 2, 2},
                                           BundledDataset{"abalone", 4177, 8, 1, 3}),
                         [](const auto& info) { return std::string(info.param.name); });
