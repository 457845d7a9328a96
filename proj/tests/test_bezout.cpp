#include <chrono>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "prodsat/bezout.hpp"
#include "prodsat/qsat.hpp"

using namespace prodsat;

namespace {

// Top coefficient by enumerating every choice of one group per row: a choice
// contributes prod d[i][j(i)] when group j is picked exactly caps[j] times.
BigInt top_coefficient_bruteforce(const DegreeMatrix& d, const std::vector<int>& caps) {
    const std::size_t n = d.size(), g = caps.size();
    BigInt total = 0;
    std::vector<std::size_t> pick(n, 0);
    while (true) {
        std::vector<int> used(g, 0);
        BigInt w = 1;
        for (std::size_t i = 0; i < n && w != 0; ++i) {
            ++used[pick[i]];
            w *= d[i][pick[i]];
        }
        if (w != 0 && used == caps) total += w;
        std::size_t i = 0;
        while (i < n && ++pick[i] == g) pick[i++] = 0;
        if (i == n) break;
    }
    return total;
}

WeightedHypergraph random_balanced(std::mt19937_64& rng) {
    // sum of weights equals the edge count, so the top monomial is reachable
    std::uniform_int_distribution<int> nd(1, 6), wd(0, 3);
    WeightedHypergraph h;
    int n = nd(rng), sum = 0;
    for (int v = 0; v < n; ++v) {
        int w = wd(rng);
        if (sum + w > 8) w = 8 - sum;
        h.weights.push_back(w);
        sum += w;
    }
    std::uniform_int_distribution<int> vd(0, n - 1), kd(1, std::min(n, 3));
    for (int i = 0; i < sum; ++i) {
        std::set<int> e;
        int k = kd(rng);
        while (static_cast<int>(e.size()) < k) e.insert(vd(rng));
        h.edges.emplace_back(e.begin(), e.end());
    }
    return h;
}

} // namespace

TEST(Bezout, TwoGroupSystemIsSix) {
    DegreeMatrix d{{1, 2}, {1, 1}, {0, 2}};
    EXPECT_EQ(bezout_number(d, {2, 3}), 6);
    EXPECT_EQ(top_coefficient_bruteforce(d, {1, 2}), 6);
    EXPECT_TRUE(bezout_nonzero(d, {2, 3}));
}

TEST(Bezout, TwoGroupWeightedCoverCount) {
    // Covering count with multiplicities d_ij: f3 -> Z_2 (2 ways), then f1, f2 split
    // between Z_1 and Z_2 as 1*1 + 2*1. The plain WSDR count of the 0/1 hypergraph is 2.
    DegreeMatrix d{{1, 2}, {1, 1}, {0, 2}};
    auto h = bezout_hypergraph(d, {2, 3});
    EXPECT_EQ(count_wsdr_bruteforce(h), 2u);
    EXPECT_EQ(top_coefficient_bruteforce(d, {1, 2}), 6);
}

TEST(Chow, FourQutritsIs864) {
    std::vector<std::vector<int>> classes{{1, 1, 1, 0}, {0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1},
                                          {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}};
    auto t0 = std::chrono::steady_clock::now();
    auto r = chow_product(classes, {2, 2, 2, 2});
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    ASSERT_EQ(r.coeffs.size(), 1u);
    EXPECT_EQ(r.coefficient({2, 2, 2, 2}), 864);
    EXPECT_LT(ms, 10.0);

    WeightedHypergraph h{{2, 2, 2, 2}, {{0, 1, 2}, {1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}}};
    EXPECT_EQ(count_wsdr_bruteforce(h), 864u);
}

TEST(Chow, TruncationDropsHighPowers) {
    // (H1 + H2)^3 in Z[H1,H2]/(H1^2, H2^2) is zero
    auto r = chow_product({{1, 1}, {1, 1}, {1, 1}}, {1, 1});
    EXPECT_TRUE(r.is_zero());
    auto s = chow_product({{1, 1}, {1, 1}}, {1, 1});
    EXPECT_EQ(s.coefficient({1, 1}), 2);
    EXPECT_EQ(s.to_string(), "2*H1^1*H2^1");
}

TEST(Chow, RejectsBadClasses) {
    EXPECT_THROW(chow_product({{1, -1}}, {1, 1}), InputError);
    EXPECT_THROW(chow_product({{1}}, {1, 1}), InputError);
    EXPECT_THROW(bezout_number({{1, 1}}, {0, 2}), InputError);
}

TEST(Bezout, MatchesBruteForceExpansion) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<int> gd(1, 3), sd(2, 3), dd(0, 2);
        int g = gd(rng);
        std::vector<int> sizes, caps;
        int n = 0;
        for (int j = 0; j < g; ++j) {
            sizes.push_back(sd(rng));
            caps.push_back(sizes.back() - 1);
            n += caps.back();
        }
        DegreeMatrix d(n, std::vector<int>(g));
        for (auto& row : d) {
            for (auto& x : row) x = dd(rng);
            if (std::all_of(row.begin(), row.end(), [](int x) { return x == 0; })) row[0] = 1;
        }
        BigInt b = bezout_number(d, sizes);
        EXPECT_EQ(b, top_coefficient_bruteforce(d, caps)) << "trial " << trial;
        EXPECT_EQ(b != 0, bezout_nonzero(d, sizes)) << "trial " << trial;
    }
}

TEST(Bezout, WsdrCountEqualsBezoutNumber) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        auto h = random_balanced(rng);
        auto [d, sizes] = degrees_of_hypergraph(h);
        BigInt b = bezout_number(d, sizes);
        EXPECT_EQ(b, BigInt(count_wsdr_bruteforce(h))) << "trial " << trial;
        EXPECT_EQ(b != 0, has_wsdr(h)) << "trial " << trial;
    }
}

TEST(Chow, NoWsdrGivesZeroElement) {
    std::mt19937_64 rng(5);
    int zeros = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto h = random_balanced(rng);
        auto [d, sizes] = degrees_of_hypergraph(h);
        std::vector<int> caps;
        for (int s : sizes) caps.push_back(s - 1);
        auto r = chow_product(d, caps);
        bool top = r.coefficient(caps) != 0;
        EXPECT_EQ(top, has_wsdr(h));
        zeros += !top;
    }
    EXPECT_GT(zeros, 5);
}

TEST(Chow, InstanceClassesMatchDims) {
    QsatInstance inst = random_instance({2, 3, 2}, {{0, 1}, {1, 2}, {0, 1, 2}, {1}}, 3);
    auto [classes, caps] = chow_classes(inst);
    EXPECT_EQ(caps, (std::vector<int>{1, 2, 1}));
    ASSERT_EQ(classes.size(), 4u);
    EXPECT_EQ(classes[0], (std::vector<int>{1, 1, 0}));
    EXPECT_EQ(classes[3], (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(chow_product(classes, caps).coefficient(caps) != 0, has_wsdr(underlying_hypergraph(inst)));
}
