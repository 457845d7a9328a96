#include <chrono>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "prodsat/solver.hpp"

using namespace prodsat;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Independent residual check: max |<phi_i|psi>| by explicit Kronecker products.
double max_residual_dense(const QsatInstance& inst, const ProductState& s) {
    double worst = 0;
    for (const auto& c : inst.constraints) {
        CVec psi{1.0};
        for (int q : c.qudits) {
            CVec u = normalized(s.locals[q]), next;
            for (auto a : psi)
                for (auto b : u) next.push_back(a * b);
            psi = next;
        }
        cdouble r = 0;
        for (std::size_t i = 0; i < psi.size(); ++i) r += std::conj(c.amps[i]) * psi[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

// n qubits, n random edges of size <= k, retried until a WSDR exists.
QsatInstance random_sdr_instance(std::mt19937_64& rng, int n, int k) {
    while (true) {
        std::vector<std::vector<int>> edges;
        std::uniform_int_distribution<int> kd(1, k), vd(0, n - 1);
        for (int i = 0; i < n; ++i) {
            std::set<int> e;
            int sz = std::min(kd(rng), n);
            while (static_cast<int>(e.size()) < sz) e.insert(vd(rng));
            edges.emplace_back(e.begin(), e.end());
        }
        auto inst = random_instance(std::vector<int>(n, 2), edges, rng());
        if (has_wsdr(underlying_hypergraph(inst))) return inst;
    }
}

// Coarse grid over the Bloch sphere for every qubit, then coordinate refinement.
double grid_min_energy(const QsatInstance& inst, int steps) {
    const int n = static_cast<int>(inst.dims.size());
    auto bloch = [](double th, double ph) { return CVec{std::cos(th / 2), std::polar(std::sin(th / 2), ph)}; };
    std::vector<std::pair<double, double>> pts;
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; b < 2 * steps; ++b) pts.push_back({M_PI * a / steps, M_PI * b / steps});
    double best = 1e9;
    ProductState s;
    s.locals.assign(n, CVec(2));
    std::vector<std::size_t> idx(n, 0);
    std::vector<std::pair<double, double>> best_angles(n);
    while (true) {
        for (int q = 0; q < n; ++q) s.locals[q] = bloch(pts[idx[q]].first, pts[idx[q]].second);
        double e = energy(inst, s).total;
        if (e < best) {
            best = e;
            for (int q = 0; q < n; ++q) best_angles[q] = pts[idx[q]];
        }
        int q = 0;
        while (q < n && ++idx[q] == pts.size()) idx[q++] = 0;
        if (q == n) break;
    }
    // refine by shrinking coordinate steps
    auto angles = best_angles;
    for (double h = M_PI / steps; h > 1e-9; h *= 0.5)
        for (int q = 0; q < n; ++q)
            for (int coord = 0; coord < 2; ++coord)
                for (double dir : {-1.0, 1.0}) {
                    auto trial = angles;
                    (coord ? trial[q].second : trial[q].first) += dir * h;
                    for (int r = 0; r < n; ++r) s.locals[r] = bloch(trial[r].first, trial[r].second);
                    double e = energy(inst, s).total;
                    if (e < best) {
                        best = e;
                        angles = trial;
                    }
                }
    return best;
}

// Random qutrit cycle with random affine data for the 1-local constraints.
std::pair<QsatInstance, AffineConstraints> qutrit_cycle(int n, std::uint64_t seed) {
    QsatInstance cyc = gen_cycle(3, n, seed);
    std::mt19937_64 rng(seed * 31 + 7);
    std::normal_distribution<double> g;
    AffineConstraints al(n);
    for (auto& a : al) a = {cdouble(g(rng), g(rng)), cdouble(g(rng), g(rng))};
    return {cyc, al};
}

} // namespace

TEST(Verify, FlagsTheWorstConstraint) {
    QsatInstance inst;
    inst.dims = {2, 2};
    inst.constraints.push_back(make_constraint({0}, {1.0, 0.0}));
    inst.constraints.push_back(make_constraint({0, 1}, {0.0, 1.0, -1.0, 0.0}));
    ProductState good{{{0.0, 1.0}, {0.0, 2.0}}};
    auto r = verify(inst, good, 1e-12);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.violated, -1);
    EXPECT_EQ(r.max_residual, 0.0);
    ProductState bad{{{1.0, 1.0}, {0.0, 1.0}}};
    auto b = verify(inst, bad, 1e-12);
    EXPECT_FALSE(b.success);
    EXPECT_EQ(b.violated, 0);
    EXPECT_NEAR(b.residuals[0], 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(b.residuals[1], 0.5, 1e-15);
}

TEST(AlmostExtending, DisjointConstraintsNeedNoRoots) {
    // every qubit in at most one constraint: nullspace assignment directly
    auto inst = random_instance({2, 2, 2, 2, 2, 2}, {{0, 1, 2}, {3, 4}, {5}}, 40);
    auto rep = solve_almost_extending(inst);
    ASSERT_TRUE(rep.success) << rep.message;
    EXPECT_EQ(rep.root_calls, 0);
    EXPECT_LE(max_residual_dense(inst, *rep.state), 1e-8);
}

TEST(AlmostExtending, PathAndTreeInstances) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto inst = random_instance(std::vector<int>(6, 2), {{0, 1}, {1, 2}, {2, 3, 4}, {4, 5}, {1, 5}}, seed);
        auto rep = solve_almost_extending(inst);
        ASSERT_TRUE(rep.success) << "seed " << seed << ": " << rep.message;
        EXPECT_LE(max_residual_dense(inst, *rep.state), 1e-8);
    }
}

TEST(AlmostExtending, ReportsMissingOrder) {
    // two disjoint triangles: each needs one non-extending edge, so a = 2
    auto inst = random_instance(std::vector<int>(6, 2), {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}, 1);
    auto rep = solve_almost_extending(inst);
    EXPECT_FALSE(rep.success);
    EXPECT_FALSE(rep.state.has_value());
    EXPECT_NE(rep.message.find("almost extending"), std::string::npos);
    EXPECT_NE(solve(inst, SolveMode::automatic).message.find("--mode newton"), std::string::npos);
    // the explicit fallback still works
    auto nw = solve(inst, SolveMode::newton);
    EXPECT_TRUE(nw.success) << nw.message;
}

TEST(AlmostExtending, RejectsQudits) {
    auto inst = random_instance({3, 2}, {{0, 1}}, 1);
    EXPECT_THROW(solve_almost_extending(inst), InputError);
}

TEST(Solve, RandomSdrInstances) {
    std::mt19937_64 rng(525);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 3 + trial % 10;
        auto inst = random_sdr_instance(rng, n, 3);
        auto rep = solve(inst, SolveMode::automatic);
        if (!rep.success && !rep.state) rep = solve(inst, SolveMode::newton);
        ASSERT_TRUE(rep.success) << "trial " << trial << ": " << rep.message;
        EXPECT_LE(max_residual_dense(inst, *rep.state), 1e-8) << "trial " << trial;
    }
}

TEST(Solve, MixedQuditsThroughReduction) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = random_instance({3, 2, 2, 3}, {{0, 1}, {0, 3}, {2, 3}, {1, 2}, {0}, {3}}, rng());
        ASSERT_TRUE(has_wsdr(underlying_hypergraph(inst)));
        auto rep = solve(inst, SolveMode::newton);
        ASSERT_TRUE(rep.success) << rep.message;
        EXPECT_LE(max_residual_dense(inst, *rep.state), 1e-8);
        auto via = solve(inst, SolveMode::automatic);
        if (via.state) {
            EXPECT_EQ(via.method.rfind("reduce-to-qubits/", 0), 0u);
            if (via.success) {
                EXPECT_LE(max_residual_dense(inst, *via.state), 1e-8);
            }
        }
    }
}

TEST(Solve, Deterministic) {
    std::mt19937_64 rng(9);
    auto inst = random_sdr_instance(rng, 8, 3);
    auto a = solve(inst, SolveMode::newton), b = solve(inst, SolveMode::newton);
    ASSERT_TRUE(a.state && b.state);
    EXPECT_EQ(a.state->locals, b.state->locals);
    SolveOptions threaded;
    threaded.threads = 3;
    auto c = solve(inst, SolveMode::newton, threaded);
    ASSERT_TRUE(c.state);
    EXPECT_EQ(a.state->locals, c.state->locals);
}

TEST(Cycle, RandomQubitCycles) {
    for (int n = 3; n <= 20; ++n)
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto inst = gen_cycle(2, n, seed * 100 + n);
            auto t0 = std::chrono::steady_clock::now();
            auto rep = solve_cycle_qubits(inst);
            double secs = seconds_since(t0);
            ASSERT_TRUE(rep.success) << "n " << n << " seed " << seed << ": " << rep.message;
            EXPECT_LE(max_residual_dense(inst, *rep.state), n == 3 ? 1e-10 : 1e-8);
            EXPECT_LT(secs, 1.0);
        }
}

TEST(Cycle, ChartSwapWhenZeroComponentVanishes) {
    // plant |1> on every site: the affine chart x = X/Y misses it at Y = 0
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto inst = gen_cycle(2, 5, seed);
        for (auto& c : inst.constraints) {
            c.amps[3] = 0.0;  // <phi|11> = 0
            c.amps = normalized(c.amps);
        }
        auto rep = solve_cycle_qubits(inst);
        ASSERT_TRUE(rep.success) << rep.message;
        EXPECT_LE(max_residual_dense(inst, *rep.state), 1e-8);
    }
}

TEST(Cycle, ShuffledListingIsDetected) {
    auto inst = gen_cycle(2, 6, 3);
    std::swap(inst.constraints[1].qudits[0], inst.constraints[1].qudits[1]);
    std::swap(inst.constraints[0], inst.constraints[4]);
    auto cs = detect_cycle(inst);
    ASSERT_TRUE(cs);
    EXPECT_EQ(cs->sites.size(), 6u);
    auto rep = solve(inst, SolveMode::automatic);
    ASSERT_TRUE(rep.success) << rep.message;
    EXPECT_EQ(rep.method.substr(0, 12), "cycle-qubits");
}

TEST(Cycle, OddSingletCycleHasProductSolution) {
    // <singlet|a b> = (a0 b1 - a1 b0)/sqrt2 vanishes iff a ~ b, so equal locals solve every odd cycle
    QsatInstance tri;
    tri.dims = {2, 2, 2};
    for (int i = 0; i < 3; ++i) tri.constraints.push_back(Constraint{{i, (i + 1) % 3}, singlet_amps()});
    ProductState equal{{{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}}};
    EXPECT_LE(max_residual_dense(tri, equal), 1e-16);
    EXPECT_LE(grid_min_energy(tri, 6), 1e-20);
    auto rep = solve(tri, SolveMode::automatic);
    ASSERT_TRUE(rep.success);
    EXPECT_LE(max_residual_dense(tri, *rep.state), 1e-12);
}

TEST(Cycle, GridOracleSeesFrustration) {
    // |00> + |11> on a triangle is frustrated over the reals but not over C;
    // the oracle over the Bloch sphere finds the complex solution (1, +-i)
    QsatInstance tri;
    tri.dims = {2, 2, 2};
    const double r = 1 / std::sqrt(2.0);
    for (int i = 0; i < 3; ++i) tri.constraints.push_back(Constraint{{i, (i + 1) % 3}, {r, 0.0, 0.0, r}});
    EXPECT_LE(grid_min_energy(tri, 6), 1e-12);
    auto rep = solve_cycle_qubits(tri);
    ASSERT_TRUE(rep.success);
    // a 1-local |0> on one site plus |1> on the next leaves no product solution
    QsatInstance blocked;
    blocked.dims = {2, 2};
    blocked.constraints = {Constraint{{0, 1}, singlet_amps()}, Constraint{{0}, {1.0, 0.0}}, Constraint{{1}, {0.0, 1.0}}};
    EXPECT_GT(grid_min_energy(blocked, 12), 0.1);
    EXPECT_FALSE(solve(blocked, SolveMode::automatic).success);
}

TEST(QutritCycle, CoefficientsMatchDirectElimination) {
    std::mt19937_64 rng(541);
    std::normal_distribution<double> g;
    auto rc = [&] { return cdouble(g(rng), g(rng)); };
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<cdouble>> phi(3, std::vector<cdouble>(3));
        for (auto& row : phi)
            for (auto& x : row) x = rc();
        std::array<cdouble, 2> ai{rc(), rc()}, aj{rc(), rc()};
        auto k = qutrit_cycle_coefficients(phi, ai, aj);
        cdouble X1 = rc(), X2 = rc(), Y1 = rc(), Y2 = rc();
        CVec x{ai[0] * X1 + ai[1] * X2, X1, X2}, y{aj[0] * Y1 + aj[1] * Y2, Y1, Y2};
        cdouble direct = 0;
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) direct += phi[p][q] * x[p] * y[q];
        cdouble formula = k.C * X1 * Y1 + k.A * X1 * Y2 + k.D * X2 * Y1 + k.B * X2 * Y2;
        EXPECT_LT(std::abs(direct - formula), 1e-12 * (1 + std::abs(direct)));
    }
}

TEST(QutritCycle, RandomCyclesWithAffineConstraints) {
    for (int n = 3; n <= 8; ++n)
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto [cyc, al] = qutrit_cycle(n, seed * 10 + n);
            auto t0 = std::chrono::steady_clock::now();
            auto rep = solve_cycle_qutrits(cyc, al);
            double secs = seconds_since(t0);
            ASSERT_TRUE(rep.success) << "n " << n << " seed " << seed << ": " << rep.message;
            auto full = with_affine_constraints(cyc, al);
            EXPECT_LE(max_residual_dense(full, *rep.state), 1e-8);
            EXPECT_LT(secs, 1.0);
        }
}

TEST(QutritCycle, AutoDetectedFromFullInstance) {
    auto [cyc, al] = qutrit_cycle(4, 77);
    auto full = with_affine_constraints(cyc, al);
    auto split = detect_qutrit_cycle(full);
    ASSERT_TRUE(split);
    EXPECT_EQ(split->cycle.constraints.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(std::abs(split->alpha[i][0] - al[i][0]), 0, 1e-12);
        EXPECT_NEAR(std::abs(split->alpha[i][1] - al[i][1]), 0, 1e-12);
    }
    auto rep = solve(full, SolveMode::automatic);
    ASSERT_TRUE(rep.success) << rep.message;
    EXPECT_EQ(rep.method, "cycle-qutrits");
    EXPECT_LE(max_residual_dense(full, *rep.state), 1e-8);
}

TEST(Pinwheel, DetectedAndSolved) {
    for (int n : {1, 2}) {
        auto p = gen_pinwheel(n, 7);
        auto L = detect_pinwheel(p.instance);
        ASSERT_TRUE(L);
        EXPECT_EQ(L->n, n);
        auto t0 = std::chrono::steady_clock::now();
        auto rep = solve(p.instance, SolveMode::automatic);
        double secs = seconds_since(t0);
        ASSERT_TRUE(rep.success) << "n " << n << ": " << rep.message;
        EXPECT_EQ(rep.method, "pinwheel");
        EXPECT_LE(max_residual_dense(p.instance, *rep.state), n == 1 ? 1e-10 : 1e-6);
        EXPECT_LE(secs, 10.0);
    }
    EXPECT_FALSE(detect_pinwheel(gen_cycle(3, 6, 1)));
}

TEST(Pinwheel, SeveralSeeds) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto p = gen_pinwheel(2, seed);
        auto rep = solve_pinwheel(p.instance);
        ASSERT_TRUE(rep.success) << "seed " << seed << ": " << rep.message;
        EXPECT_LE(max_residual_dense(p.instance, *rep.state), 1e-6);
    }
}

TEST(Newton, PolishImprovesNearSolution) {
    auto inst = gen_cycle(2, 8, 5);
    auto rep = solve_cycle_qubits(inst);
    ASSERT_TRUE(rep.success);
    ProductState s = *rep.state;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0, 1e-4);
    for (auto& v : s.locals)
        for (auto& a : v) a += cdouble(g(rng), g(rng));
    double before = max_residual_dense(inst, s);
    double after = max_residual_dense(inst, newton_polish(inst, s));
    EXPECT_LT(after, before * 1e-3);
}
