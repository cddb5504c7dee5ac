#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "glassform/error.hpp"
#include "glassform/io.hpp"
#include "glassform/numerics.hpp"

using namespace glassform;

TEST(MonotoneCubic, ReproducesLinearData) {
    const std::vector<double> xs{0.0, 0.3, 1.1, 2.0, 3.7};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2.0 * x - 1.0);
    const MonotoneCubic f(xs, ys);
    for (double x = -1.0; x < 5.0; x += 0.13) {
        EXPECT_NEAR(f(x), 2.0 * x - 1.0, 1e-12);
        EXPECT_NEAR(f.derivative(x), 2.0, 1e-12);
    }
}

TEST(MonotoneCubic, NoOvershootOnAStep) {
    const std::vector<double> xs{0, 1, 2, 3, 4, 5};
    const std::vector<double> ys{0, 0, 0, 1, 1, 1};
    const MonotoneCubic f(xs, ys);
    for (double x = 0.0; x <= 5.0; x += 0.01) {
        EXPECT_GE(f(x), 0.0);
        EXPECT_LE(f(x), 1.0);
    }
}

TEST(MonotoneCubic, InterpolatesNodes) {
    const std::vector<double> xs{0, 0.5, 1.5, 2};
    const std::vector<double> ys{1, -2, 4, 3};
    const MonotoneCubic f(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_DOUBLE_EQ(f(xs[i]), ys[i]);
}

TEST(MonotoneCubic, RejectsUnsortedNodes) {
    const std::vector<double> xs{0, 2, 1};
    const std::vector<double> ys{0, 1, 2};
    EXPECT_THROW(MonotoneCubic(xs, ys), GeometryError);
}

TEST(FiniteDifferences, ExactForQuadraticsOnNonUniformGrids) {
    std::vector<double> xs{0.0};
    for (int i = 1; i < 30; ++i) xs.push_back(xs.back() + 0.1 + 0.05 * std::sin(i));
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 * x * x - x + 2.0);
    const auto d = finite_differences(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_NEAR(d.first[i], 6.0 * xs[i] - 1.0, 1e-9);
        EXPECT_NEAR(d.second[i], 6.0, 1e-7);
    }
}

TEST(FiniteDifferences, WeightsAnnihilateConstants) {
    const std::vector<double> nodes{0.0, 0.4, 1.0, 1.3};
    const auto w = fd_weights(0.4, nodes);
    EXPECT_NEAR(std::accumulate(w[0].begin(), w[0].end(), 0.0), 1.0, 1e-14);
    EXPECT_NEAR(std::accumulate(w[1].begin(), w[1].end(), 0.0), 0.0, 1e-12);
    EXPECT_NEAR(std::accumulate(w[2].begin(), w[2].end(), 0.0), 0.0, 1e-10);
}

TEST(Integrate, PolynomialsAreExact) {
    EXPECT_NEAR(integrate([](double x) { return std::pow(x, 9); }, 0.0, 2.0, 1), 102.4, 1e-12);
    EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 20), 2.0, 1e-12);
}

TEST(Pearson, KnownValues) {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    const std::vector<double> c{4, 3, 2, 1};
    const std::vector<double> k{5, 5, 5, 5};
    EXPECT_NEAR(pearson(a, b), 1.0, 1e-15);
    EXPECT_NEAR(pearson(a, c), -1.0, 1e-15);
    EXPECT_EQ(pearson(a, k), 0.0);
}

TEST(Rng, DeterministicAndInRange) {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        differs |= u != c.uniform();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, NormalMoments) {
    Rng r(7);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Rng, ShuffleIsAPermutation) {
    Rng r(3);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    r.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsTaskFailures) {
    EXPECT_THROW(parallel_for(100, 3,
                              [](std::size_t i) {
                                  if (i == 17) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Io, DoublesRoundTripThroughCsv) {
    const auto dir = std::filesystem::temp_directory_path() / "glassform_io_test";
    io::Table t{{"a", "b"}, {{0.1, 1.0 / 3.0, -2.5e-300}, {M_PI, 1e22, 0.0}}};
    io::write_csv(dir / "t.csv", t);
    const auto back = io::read_csv(dir / "t.csv", {"a", "b"});
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_THROW(io::read_csv(dir / "t.csv", {"a", "c"}), ValidationError);
    std::filesystem::remove_all(dir);
}
