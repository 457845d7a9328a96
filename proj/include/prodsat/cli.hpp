#pragma once

#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prodsat/io.hpp"

namespace prodsat::cli {

using io::json;

// 0 success, 1 certified negative / verification failure / refusal, 2 usage error.
enum Exit { ok = 0, failed = 1, usage = 2 };

inline int threads_from_env() {
    const char* s = std::getenv("PRODSAT_THREADS");
    if (!s) return 1;
    try {
        return std::max(1, std::stoi(s));
    } catch (...) {
        return 1;
    }
}

inline void emit(const json& j, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << j.dump(2) << '\n';
    else
        io::write_json(out_path, j);
}

inline WeightedHypergraph hypergraph_of(const json& j) {
    switch (io::kind_of(j)) {
    case io::Kind::hypergraph: return io::hypergraph_from(j);
    case io::Kind::instance: return underlying_hypergraph(io::instance_from(j));
    default: throw InputError("expected a hypergraph or instance file");
    }
}

inline QsatInstance random_generic_instance(int n, int m, int k, int dim, std::uint64_t seed, bool require_wsdr) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::vector<int>> edges;
        for (int i = 0; i < m; ++i) {
            std::vector<int> vs(n);
            for (int v = 0; v < n; ++v) vs[v] = v;
            std::shuffle(vs.begin(), vs.end(), rng);
            vs.resize(k);
            std::sort(vs.begin(), vs.end());
            edges.push_back(vs);
        }
        WeightedHypergraph h;
        h.weights.assign(n, dim - 1);
        h.edges = edges;
        if (require_wsdr && !has_wsdr(h)) continue;
        return random_instance(std::vector<int>(n, dim), edges, rng());
    }
    throw Refusal("gen random: no hypergraph with a WSDR after 1000 draws");
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"prodsat: product-state solutions of quantum satisfiability instances"};
    app.require_subcommand(1);
    app.footer(io::schema_help());

    std::string out_path;
    std::uint64_t seed = 1;

    auto* analyze = app.add_subcommand("analyze", "WSDR / Hall violation, edge order, filtration and radius");
    std::string in_path;
    analyze->add_option("input", in_path, "hypergraph or instance JSON")->required()->check(CLI::ExistingFile);
    analyze->add_option("-o", out_path, "output JSON path");

    auto* bez = app.add_subcommand("bezout", "multi-homogeneous Bezout number and nonzero certificate");
    bez->add_option("input", in_path, "MHS, hypergraph or instance JSON")->required()->check(CLI::ExistingFile);
    bez->add_option("-o", out_path, "certificate JSON path");

    auto* gen = app.add_subcommand("gen", "instance generators");
    gen->require_subcommand(1);
    int g_n = 4, g_dim = 2, g_m = -1, g_k = 3;
    bool g_wsdr = false;
    auto* gcycle = gen->add_subcommand("cycle", "seeded random cycle");
    gcycle->add_option("--n", g_n, "number of sites")->check(CLI::Range(2, 100000));
    gcycle->add_option("--dim", g_dim, "local dimension")->check(CLI::Range(2, 64));
    auto* gpin = gen->add_subcommand("pinwheel", "seeded random pinwheel on qutrits");
    gpin->add_option("--n", g_n, "number of rings")->check(CLI::Range(1, 20));
    auto* grand = gen->add_subcommand("random", "seeded random k-local instance");
    grand->add_option("--n", g_n, "number of qudits")->check(CLI::Range(1, 100000));
    grand->add_option("--m", g_m, "number of constraints (default n)");
    grand->add_option("--k", g_k, "locality")->check(CLI::Range(1, 16));
    grand->add_option("--dim", g_dim, "local dimension")->check(CLI::Range(2, 64));
    grand->add_flag("--require-wsdr", g_wsdr, "redraw until the hypergraph has a WSDR");
    for (auto* s : {gcycle, gpin, grand}) {
        s->add_option("--seed", seed, "RNG seed");
        s->add_option("-o", out_path, "output instance JSON");
    }

    auto* red = app.add_subcommand("reduce", "reductions between formats");
    red->require_subcommand(1);
    std::string chain_path;
    auto* rq = red->add_subcommand("to-qubits", "split qudits into qubits");
    auto* rm = red->add_subcommand("mhs-to-prodsat", "compile a multi-homogeneous system to a qubit instance");
    auto* rt = red->add_subcommand("to-mhs", "instance as a multi-homogeneous system");
    for (auto* s : {rq, rm, rt}) {
        s->add_option("input", in_path, "input JSON")->required()->check(CLI::ExistingFile);
        s->add_option("-o", out_path, "output JSON");
    }
    for (auto* s : {rq, rm}) s->add_option("--sidecar", chain_path, "sidecar JSON path (default <out>.chain.json)");

    auto* emb = app.add_subcommand("embed", "monic polynomial to a qubit instance");
    std::string emb_mode = "sparse";
    emb->add_option("input", in_path, "polynomial JSON")->required()->check(CLI::ExistingFile);
    emb->add_option("--mode", emb_mode, "dense or sparse")->check(CLI::IsMember({"dense", "sparse"}));
    emb->add_option("-o", out_path, "output instance JSON");
    emb->add_option("--sidecar", chain_path, "sidecar JSON path (default <out>.embed.json)");

    auto* sol = app.add_subcommand("solve", "find and verify a product solution");
    std::string mode = "auto";
    double eps = 1e-8;
    int degree_cap = 4096, starts = 64;
    bool timings = false;
    sol->add_option("input", in_path, "instance JSON")->required()->check(CLI::ExistingFile);
    sol->add_option("--mode", mode, "auto, almost-extending, cycle, pinwheel, newton")
        ->check(CLI::IsMember({"auto", "almost-extending", "cycle", "pinwheel", "newton"}));
    sol->add_option("--eps", eps, "residual bound")->check(CLI::PositiveNumber);
    sol->add_option("--degree-cap", degree_cap, "coefficient cap for propagated polynomials")->check(CLI::PositiveNumber);
    sol->add_option("--starts", starts, "multistart budget")->check(CLI::PositiveNumber);
    sol->add_option("--seed", seed, "RNG seed");
    sol->add_flag("--timings", timings, "include wall-clock seconds in the report");
    sol->add_option("-o", out_path, "report JSON");

    auto* ver = app.add_subcommand("verify", "check a product state against an instance");
    std::string state_path;
    ver->add_option("input", in_path, "instance JSON")->required()->check(CLI::ExistingFile);
    ver->add_option("state", state_path, "solution or report JSON")->required()->check(CLI::ExistingFile);
    ver->add_option("--eps", eps, "residual bound")->check(CLI::PositiveNumber);
    ver->add_option("-o", out_path, "report JSON");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return usage;
    }

    try {
        if (*analyze) {
            auto h = hypergraph_of(io::read_json(in_path));
            json rep;
            auto w = find_wsdr(h);
            int code = ok;
            if (auto* hv = std::get_if<HallViolation>(&w)) {
                rep["hall_violation"] = io::to_json(*hv);
                code = failed;
            } else {
                rep["wsdr"] = io::to_json(std::get<Wsdr>(w));
            }
            if (auto o = find_extending_order(h, static_cast<int>(h.edge_count()))) {
                rep["order"] = io::to_json(*o);
                rep["filtration"] = io::to_json(filtration_of_order(h, *o));
            }
            emit(rep, out_path, out);
            if (code == failed) err << "HallViolation: no weighted SDR exists\n";
            return code;
        }
        if (*bez) {
            json j = io::read_json(in_path);
            DegreeMatrix deg;
            std::vector<int> sizes;
            if (io::kind_of(j) == io::Kind::mhs) {
                auto f = io::mhs_from(j);
                f.canonicalize();
                deg = f.degrees();
                sizes = f.group_sizes;
            } else {
                std::tie(deg, sizes) = degrees_of_hypergraph(hypergraph_of(j));
            }
            BigInt b = bezout_number(deg, sizes);
            auto w = find_wsdr(bezout_hypergraph(deg, sizes));
            out << b.str() << '\n';
            if (!out_path.empty()) {
                json c{{"bezout", b.str()}, {"nonzero", b != 0}};
                if (auto* f = std::get_if<Wsdr>(&w))
                    c["wsdr"] = io::to_json(*f);
                else
                    c["hall_violation"] = io::to_json(std::get<HallViolation>(w));
                io::write_json(out_path, c);
            }
            return b != 0 ? ok : failed;
        }
        if (*gen) {
            QsatInstance inst;
            if (*gcycle)
                inst = gen_cycle(g_dim, g_n, seed);
            else if (*gpin)
                inst = gen_pinwheel(g_n, seed).instance;
            else
                inst = random_generic_instance(g_n, g_m < 0 ? g_n : g_m, g_k, g_dim, seed, g_wsdr);
            emit(io::to_json(inst), out_path, out);
            return ok;
        }
        if (*red) {
            json j = io::read_json(in_path);
            auto side = [&](const char* suffix) { return chain_path.empty() && !out_path.empty() ? out_path + suffix : chain_path; };
            if (*rq) {
                auto [q, chain] = reduce_to_qubits(io::instance_from(j));
                emit(io::to_json(q), out_path, out);
                if (auto p = side(".chain.json"); !p.empty()) io::write_json(p, io::to_json(chain));
                return ok;
            }
            if (*rm) {
                auto comp = mhs_to_prodsat(io::mhs_from(j));
                emit(io::to_json(comp.instance), out_path, out);
                if (auto p = side(".chain.json"); !p.empty()) {
                    json s = io::to_json(comp.chain);
                    s["copies"] = comp.copies;
                    s["copy_qubits"] = comp.copy_qubits;
                    s["equation_count"] = comp.equation_count;
                    s["sdr"] = io::to_json(comp.sdr);
                    io::write_json(p, s);
                }
                return ok;
            }
            emit(io::to_json(to_mhs(io::instance_from(j))), out_path, out);
            return ok;
        }
        if (*emb) {
            auto r = embed(io::poly_from(io::read_json(in_path)), emb_mode == "dense" ? EmbedMode::dense : EmbedMode::sparse);
            emit(io::to_json(r.instance), out_path, out);
            std::string p = chain_path.empty() && !out_path.empty() ? out_path + ".embed.json" : chain_path;
            if (!p.empty())
                io::write_json(p, {{"root_qubit", r.root_qubit}, {"target_qubit", r.target_qubit},
                                   {"trailing_power", r.trailing_power.str()}, {"roles", r.roles},
                                   {"sdr", io::to_json(r.sdr)}});
            return ok;
        }
        if (*sol) {
            auto inst = io::instance_from(io::read_json(in_path));
            SolveOptions opt;
            opt.eps = eps;
            opt.degree_cap = degree_cap;
            opt.seed = seed;
            opt.starts = starts;
            opt.threads = threads_from_env();
            SolveMode m = mode == "almost-extending" ? SolveMode::almost_extending
                          : mode == "cycle"          ? SolveMode::cycle
                          : mode == "pinwheel"       ? SolveMode::pinwheel
                          : mode == "newton"         ? SolveMode::newton
                                                     : SolveMode::automatic;
            SolveReport r = solve(inst, m, opt);
            if (r.state) {
                // Independent re-check before reporting success.
                SolveReport v = verify(inst, *r.state, eps);
                r.success = r.success && v.success;
            }
            emit(io::to_json(r, timings), out_path, out);
            if (!r.success) err << "solve failed: " << r.message << '\n';
            return r.success ? ok : failed;
        }
        if (*ver) {
            auto inst = io::instance_from(io::read_json(in_path));
            SolveReport v = verify(inst, io::state_from(io::read_json(state_path)), eps);
            v.state.reset();
            emit(io::to_json(v, false), out_path, out);
            return v.success ? ok : failed;
        }
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n\n" << io::schema_help();
        return usage;
    } catch (const Refusal& e) {
        err << "refused: " << e.what() << '\n';
        return failed;
    } catch (const nlohmann::json::exception& e) {
        err << "input error: " << e.what() << "\n\n" << io::schema_help();
        return usage;
    }
    return usage;
}

inline int dispatch(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return dispatch(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace prodsat::cli
