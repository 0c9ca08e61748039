#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "medpath/screening.hpp"
#include "test_support.hpp"

using namespace medpath;

TEST_CASE("reduced_dim reproduces the published dimensions") {
    CHECK(reduced_dim(50, 3) == 38);
    CHECK(reduced_dim(50, 4) == 51);
    CHECK(reduced_dim(50, 8) == 102);
    CHECK(reduced_dim(50, 15) == 192);
    CHECK(reduced_dim(50, 20) == 256);
    CHECK(reduced_dim(55, 15) == 206);
}

TEST_CASE("reduced_dim is clamped and monotone") {
    CHECK(reduced_dim(3, 0.01) == 1);
    Index prev = 0;
    for (double k : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 15.0, 20.0}) {
        const Index d = reduced_dim(50, k);
        CHECK(d >= prev);
        prev = d;
    }
    prev = 0;
    for (Index n = 3; n <= 200; ++n) {
        const Index d = reduced_dim(n, 2.0);
        CHECK(d >= prev);
        prev = d;
    }
    CHECK_THROWS_AS(reduced_dim(1, 2.0), ContractError);
}

TEST_CASE("sis_screen keeps perfectly correlated mediators") {
    Dataset data;
    const Index n = 30;
    data.x = Vec::Zero(n);
    data.x[0] = 1.0;
    data.y.resize(n);
    for (Index j = 0; j < n; ++j) data.y[j] = std::sin(0.7 * static_cast<double>(j + 1));
    data.m.resize(n, 3);
    data.m.col(0) = data.y;         // cor = 1
    for (Index j = 0; j < n; ++j)   // noise
        data.m(j, 1) = std::cos(3.1 * static_cast<double>(j * j + 1));
    data.m.col(2) = -data.y;        // cor = -1

    ScreenConfig cfg;
    cfg.d_override = 2;
    const ScreenResult res = sis_screen(data, cfg);
    CHECK(res.kept_indices.size() == 2);
    // |cor| = 1 for both; tie broken toward the smaller index
    CHECK(res.kept_indices[0] == 1);
    CHECK(res.kept_indices[1] == 3);
    CHECK(res.screened.m.col(0) == data.m.col(0));
    CHECK(res.screened.m.col(1) == data.m.col(2));
}

TEST_CASE("sis_screen matches a brute-force correlation table") {
    const Dataset data = oracle::random_dataset(7, 30, 20);
    ScreenConfig cfg;
    cfg.d_override = 5;
    const ScreenResult res = sis_screen(data, cfg);

    // independent correlation computation
    std::vector<std::pair<double, Index>> table;
    const double ymean = data.y.mean();
    for (Index i = 0; i < 20; ++i) {
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        const double mmean = data.m.col(i).mean();
        for (Index j = 0; j < 30; ++j) {
            const double dm = data.m(j, i) - mmean;
            const double dy = data.y[j] - ymean;
            sxy += dm * dy;
            sxx += dm * dm;
            syy += dy * dy;
        }
        table.emplace_back(std::abs(sxy / std::sqrt(sxx * syy)), i + 1);
    }
    std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; r < 5; ++r) {
        CHECK(res.kept_indices[r] == table[r].second);
        CHECK(res.scores[table[r].second - 1] == doctest::Approx(table[r].first).epsilon(1e-12));
    }
}

TEST_CASE("screening: d = p is identity up to score ordering") {
    const Dataset data = oracle::random_dataset(11, 25, 6);
    ScreenConfig cfg;
    cfg.d_override = 6;
    const ScreenResult res = sis_screen(data, cfg);
    CHECK(res.kept_indices.size() == 6);
    std::vector<Index> sorted = res.kept_indices;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < 6; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i + 1);
    // descending score order
    for (std::size_t r = 1; r < 6; ++r)
        CHECK(res.scores[res.kept_indices[r] - 1] <= res.scores[res.kept_indices[r - 1] - 1]);
}

TEST_CASE("screening monotonicity: kept(d) is a subset of kept(d+1)") {
    const Dataset data = oracle::random_dataset(13, 40, 15);
    for (Index d = 1; d < 15; ++d) {
        ScreenConfig a, b;
        a.d_override = d;
        b.d_override = d + 1;
        const auto small = sis_screen(data, a).kept_indices;
        const auto large = sis_screen(data, b).kept_indices;
        for (Index idx : small)
            CHECK(std::find(large.begin(), large.end(), idx) != large.end());
    }
}

TEST_CASE("screening is invariant to column scaling") {
    const Dataset data = oracle::random_dataset(17, 30, 10);
    ScreenConfig cfg;
    cfg.d_override = 4;
    const auto base = sis_screen(data, cfg).kept_indices;
    Dataset scaled = data;
    scaled.m.col(3) *= -7.5;
    scaled.m.col(8) *= 0.001;
    CHECK(sis_screen(scaled, cfg).kept_indices == base);
}

TEST_CASE("screening errors") {
    const Dataset data = oracle::random_dataset(19, 20, 5);
    ScreenConfig cfg;
    cfg.d_override = 9;
    CHECK_THROWS_AS(sis_screen(data, cfg), ContractError);

    Dataset flat = data;
    flat.m.col(2).setConstant(1.0);
    ScreenConfig ok;
    ok.d_override = 3;
    CHECK_THROWS_WITH_AS(sis_screen(flat, ok), doctest::Contains("m3"), ContractError);
}
