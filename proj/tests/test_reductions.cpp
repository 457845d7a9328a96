#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "prodsat/reductions.hpp"
#include "prodsat/solver.hpp"

using namespace prodsat;

namespace {

CVec random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    CVec v(n);
    for (auto& a : v) a = {g(rng), g(rng)};
    return v;
}

CVec kron_of(const QsatInstance& inst, const Constraint& c, const ProductState& s) {
    CVec psi{1.0};
    for (int q : c.qudits) {
        CVec next;
        for (auto a : psi)
            for (auto b : s.locals[q]) next.push_back(a * b);
        psi = next;
    }
    (void)inst;
    return psi;
}

// Random instance on `dims` with a planted product solution.
std::pair<QsatInstance, ProductState> planted(const std::vector<int>& dims, const std::vector<std::vector<int>>& edges,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    QsatInstance inst = random_instance(dims, edges, seed + 1);
    ProductState s;
    for (int d : dims) s.locals.push_back(random_unit_vector(d, rng));
    for (auto& c : inst.constraints) {
        CVec psi = kron_of(inst, c, s);
        cdouble ip = 0;
        for (std::size_t i = 0; i < psi.size(); ++i) ip += std::conj(psi[i]) * c.amps[i];
        for (std::size_t i = 0; i < psi.size(); ++i) c.amps[i] -= ip * psi[i];
        c.amps = normalized(c.amps);
    }
    inst.validate();
    return {inst, s};
}

} // namespace

TEST(FMap, NeverZeroOnNonzeroInputs) {
    std::mt19937_64 rng(353);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t d = 2 + trial % 5;
        CVec x = random_vec(rng, 2), y = random_vec(rng, d);
        // sparse supports exercise both cases of the well-definedness argument
        if (trial % 3 == 0) x[0] = 0;
        if (trial % 4 == 0)
            for (std::size_t i = 0; i + 1 < d; ++i) y[i] = 0;
        if (trial % 5 == 0) y[0] = 0;
        EXPECT_GT(vec_norm(f_map(x, y)), 0) << "trial " << trial;
    }
    EXPECT_THROW(f_map({0.0, 0.0}, {1.0, 0.0}), InputError);
}

TEST(FMap, ComponentFormula) {
    CVec x{2.0, 3.0}, y{5.0, 7.0, 11.0};
    CVec z = f_map(x, y);
    ASSERT_EQ(z.size(), 4u);
    EXPECT_EQ(z[0], cdouble(10.0));
    EXPECT_EQ(z[1], cdouble(33.0));
    EXPECT_EQ(z[2], cdouble(14.0 - 15.0));
    EXPECT_EQ(z[3], cdouble(22.0 - 21.0));
}

TEST(FPreimage, RoundTripOnRandomPairs) {
    std::mt19937_64 rng(361);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t d = 2 + trial % 4;
        CVec z = f_map(random_vec(rng, 2), random_vec(rng, d));
        auto p = f_preimage(z);
        double r = proportionality_residual(f_map(p.x, p.y), z);
        worst = std::max(worst, r);
        EXPECT_LE(r, 1e-10) << "trial " << trial;
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(FPreimage, SurjectiveOnRandomTargets) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        CVec z = random_vec(rng, 3 + trial % 4);
        auto p = f_preimage(z);
        EXPECT_LE(proportionality_residual(f_map(p.x, p.y), z), 1e-10) << "trial " << trial;
    }
}

TEST(FPreimage, LeadingZeroCase) {
    // z_0 = 0: x = (0, 1), y_{d-1} = z_1, y_i = -z_{i+2}
    CVec z{0.0, 2.0, 3.0, -5.0};
    auto p = f_preimage(z);
    EXPECT_EQ(p.x, (CVec{0.0, 1.0}));
    EXPECT_EQ(p.y, (CVec{-3.0, 5.0, 2.0}));
    EXPECT_LE(p.residual, 1e-15);
}

TEST(Split, QutritQubitSplitCoefficients) {
    std::mt19937_64 rng(42);
    QsatInstance inst;
    inst.dims = {3, 2};
    inst.constraints.push_back(make_constraint({0, 1}, random_vec(rng, 6)));
    auto [out, step] = split_qudit(inst, 0);
    EXPECT_EQ(out.dims, (std::vector<int>{2, 2, 2}));
    EXPECT_EQ(step.new_indices, (std::vector<int>{0, 2}));
    const auto& c = out.constraints[0];
    EXPECT_EQ(c.qudits, (std::vector<int>{0, 2, 1}));  // (x, y, v)
    auto phi = [&](int i, int j) { return inst.constraints[0].amps[(i - 1) * 2 + (j - 1)]; };
    CVec want{phi(1, 1), phi(1, 2), phi(3, 1), phi(3, 2), -phi(3, 1), -phi(3, 2), phi(2, 1), phi(2, 2)};
    want = normalized(want);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(c.amps[i] - want[i]), 0, 1e-15) << i;
}

TEST(Split, EnergiesCorrespondOnSolutions) {
    auto [inst, sol] = planted({3, 2, 4, 3}, {{0, 1}, {2, 0}, {1, 2, 3}, {3}, {0, 3}}, 369);
    ASSERT_LT(energy(inst, sol).max_per_constraint, 1e-28);
    auto [qinst, chain] = reduce_to_qubits(inst);
    EXPECT_TRUE(qinst.all_qubits());
    EXPECT_EQ(qinst.dims.size(), 2u + 1 + 3 + 2);
    ProductState lifted = transport_solution(chain, sol, Transport::lift);
    auto e0 = energy(inst, sol), e1 = energy(qinst, lifted);
    for (std::size_t i = 0; i < e0.per_constraint.size(); ++i)
        EXPECT_LE(std::abs(std::sqrt(e1.per_constraint[i]) - std::sqrt(e0.per_constraint[i])), 1e-9);
    // and back
    ProductState back = transport_solution(chain, lifted, Transport::push);
    for (std::size_t q = 0; q < sol.locals.size(); ++q)
        EXPECT_LE(proportionality_residual(back.locals[q], sol.locals[q]), 1e-9);
    EXPECT_LE(std::sqrt(energy(inst, back).max_per_constraint), 1e-9);
}

TEST(Split, QubitSolutionPushesToQuditSolution) {
    // solve the reduced instance, push back: the energy stays at the solver's level
    auto [inst, sol] = planted({3, 3, 2}, {{0, 1}, {1, 2}, {0, 2}, {0}}, 384);
    auto [qinst, chain] = reduce_to_qubits(inst);
    auto rep = solve_newton(qinst);
    ASSERT_TRUE(rep.success) << rep.message;
    ProductState pushed = transport_solution(chain, *rep.state, Transport::push);
    EXPECT_LE(std::sqrt(energy(inst, pushed).max_per_constraint), 1e-9);
}

TEST(Split, FourQutritsBecomeEightQubits) {
    std::vector<std::vector<int>> edges{{0, 1, 2}, {1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}};
    auto [qinst, chain] = reduce_to_qubits(random_instance({3, 3, 3, 3}, edges, 39));
    EXPECT_EQ(qinst.dims.size(), 8u);
    EXPECT_EQ(chain.splits.size(), 4u);
    EXPECT_TRUE(has_wsdr(underlying_hypergraph(qinst)));
    auto map = chain_qubit_map(chain, 4);
    std::vector<int> all;
    for (const auto& m : map) all.insert(all.end(), m.begin(), m.end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Split, ChainMapFollowsRepeatedSplits) {
    // a ququart splits twice: z -> (x, y) with y a qutrit, then y -> (x', y')
    QsatInstance inst = random_instance({4, 2}, {{0, 1}, {0}}, 5);
    auto [qinst, chain] = reduce_to_qubits(inst);
    EXPECT_EQ(qinst.dims, (std::vector<int>{2, 2, 2, 2}));
    auto map = chain_qubit_map(chain, 2);
    EXPECT_EQ(map[0], (std::vector<int>{0, 2, 3}));
    EXPECT_EQ(map[1], (std::vector<int>{1}));
    EXPECT_EQ(qinst.constraints[0].qudits.size(), 4u);
}

TEST(Split, RejectsQubits) {
    QsatInstance inst = random_instance({2, 3}, {{0, 1}}, 1);
    EXPECT_THROW(split_qudit(inst, 0), InputError);
    EXPECT_THROW(split_qudit(inst, 5), InputError);
}

TEST(Antisymmetric, DimensionCounts) {
    EXPECT_EQ(antisymmetric_dimension(1), 1);
    EXPECT_EQ(antisymmetric_dimension(2), 3);
    auto s = singlet_amps();
    EXPECT_NEAR(vec_norm(s), 1.0, 1e-15);
}

namespace {

MultiHomSystem two_group_system() {
    // f1 = x0 y0 y1 + x1 y1 y2, f2 = x0 y0 + x1 y1, f3 = y0 y1 + y1 y2
    MultiHomSystem f;
    f.group_sizes = {2, 3};
    f.equations.push_back({{{{{0, 0, 1}, {1, 0, 1}, {1, 1, 1}}, 1.0}, {{{0, 1, 1}, {1, 1, 1}, {1, 2, 1}}, 1.0}}});
    f.equations.push_back({{{{{0, 0, 1}, {1, 0, 1}}, 1.0}, {{{0, 1, 1}, {1, 1, 1}}, 1.0}}});
    f.equations.push_back({{{{{1, 0, 1}, {1, 1, 1}}, 1.0}, {{{1, 1, 1}, {1, 2, 1}}, 1.0}}});
    return f;
}

void expect_two_terms(const CVec& amps, std::size_t i, std::size_t j) {
    const double r = 1 / std::sqrt(2.0);
    for (std::size_t k = 0; k < amps.size(); ++k)
        EXPECT_NEAR(std::abs(amps[k] - cdouble(k == i || k == j ? r : 0.0)), 0, 1e-15) << "index " << k;
}

} // namespace

TEST(MhsCompile, TwoGroupPreReductionLayout) {
    auto comp = mhs_to_prodsat(two_group_system());
    const auto& pre = comp.pre_reduction;
    EXPECT_EQ(pre.dims, (std::vector<int>{2, 3, 3}));
    EXPECT_EQ(comp.copies, (std::vector<std::vector<int>>{{0}, {1, 2}}));
    ASSERT_EQ(pre.constraints.size(), 3u);
    // |001> + |112> on (x, y, y'), |00> + |11> on (x, y), |01> + |12> on (y, y')
    EXPECT_EQ(pre.constraints[0].qudits, (std::vector<int>{0, 1, 2}));
    expect_two_terms(pre.constraints[0].amps, 0 * 9 + 0 * 3 + 1, 1 * 9 + 1 * 3 + 2);
    EXPECT_EQ(pre.constraints[1].qudits, (std::vector<int>{0, 1}));
    expect_two_terms(pre.constraints[1].amps, 0, 4);
    EXPECT_EQ(pre.constraints[2].qudits, (std::vector<int>{1, 2}));
    expect_two_terms(pre.constraints[2].amps, 1, 5);
}

TEST(MhsCompile, TwoGroupQubitInstance) {
    auto comp = mhs_to_prodsat(two_group_system());
    const auto& q = comp.instance;
    EXPECT_TRUE(q.all_qubits());
    EXPECT_EQ(q.dims.size(), 5u);
    ASSERT_EQ(q.constraints.size(), 5u);
    EXPECT_EQ(comp.equation_count, 3u);
    // two singlets tie the qubits of copy 0 of Z_2 to those of copy 1
    EXPECT_EQ(comp.copy_qubits[1].size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& c = q.constraints[3 + k];
        EXPECT_EQ(c.qudits, (std::vector<int>{comp.copy_qubits[1][0][k], comp.copy_qubits[1][1][k]}));
        EXPECT_EQ(c.amps, singlet_amps());
    }
    EXPECT_TRUE(is_valid_wsdr(underlying_hypergraph(q), comp.sdr));
}

TEST(MhsCompile, TwoGroupSolvedAndExtracted) {
    auto f = two_group_system();
    auto comp = mhs_to_prodsat(f);
    auto rep = solve_newton(comp.instance);
    ASSERT_TRUE(rep.success) << rep.message;
    auto ex = extract_mhs_solution(f, comp, *rep.state);
    for (double r : ex.residuals) EXPECT_LE(r, 1e-9);
    EXPECT_LE(ex.singlet_residual, 1e-8);
    EXPECT_LE(ex.copy_disagreement, 1e-6);
}

TEST(MhsCompile, RandomSystemsGiveValidCertificates) {
    std::mt19937_64 rng(394);
    int built = 0;
    for (int trial = 0; trial < 80; ++trial) {
        MultiHomSystem f;
        std::uniform_int_distribution<int> gd(1, 3), sd(2, 3), dd(0, 2);
        int g = gd(rng), n = 0;
        for (int j = 0; j < g; ++j) {
            f.group_sizes.push_back(sd(rng));
            n += f.group_sizes.back() - 1;
        }
        for (int i = 0; i < n; ++i) {
            std::vector<int> deg(g);
            for (auto& x : deg) x = dd(rng);
            if (std::all_of(deg.begin(), deg.end(), [](int x) { return x == 0; })) deg[0] = 1;
            MhsEquation eq;
            for (int t = 0; t < 3; ++t) {
                MhsTerm term;
                for (int j = 0; j < g; ++j)
                    for (int p = 0; p < deg[j]; ++p)
                        term.exps.push_back({j, static_cast<int>(rng() % f.group_sizes[j]), 1});
                term.coeff = random_vec(rng, 1)[0];
                eq.terms.push_back(term);
            }
            f.equations.push_back(eq);
        }
        if (!bezout_nonzero(f)) {
            EXPECT_THROW(mhs_to_prodsat(f), Refusal);
            continue;
        }
        auto comp = mhs_to_prodsat(f);
        ++built;
        EXPECT_TRUE(comp.instance.all_qubits());
        EXPECT_TRUE(is_valid_wsdr(underlying_hypergraph(comp.instance), comp.sdr));
        EXPECT_EQ(comp.instance.constraints.size(), comp.instance.dims.size());
    }
    EXPECT_GT(built, 30);
}

TEST(MhsCompile, WrongEquationCountRefuses) {
    auto f = two_group_system();
    f.equations.pop_back();
    EXPECT_THROW(mhs_to_prodsat(f), Refusal);
}
