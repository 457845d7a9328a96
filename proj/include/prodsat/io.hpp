#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "prodsat/bezout.hpp"
#include "prodsat/error.hpp"
#include "prodsat/hypergraph.hpp"
#include "prodsat/mhs.hpp"
#include "prodsat/poly_embed.hpp"
#include "prodsat/qsat.hpp"
#include "prodsat/reductions.hpp"
#include "prodsat/solver.hpp"
#include "prodsat/sparse_poly.hpp"

namespace prodsat::io {

using nlohmann::json;

inline const char* schema_help() {
    return "File formats (0-based indices, complex numbers as [re, im]):\n"
           "  hypergraph  {\"weights\":[w0,...],\"edges\":[[i,...],...]}\n"
           "  instance    {\"dims\":[...],\"constraints\":[{\"qudits\":[...],\"amps\":[[re,im],...]},...]}\n"
           "  solution    {\"locals\":[[[re,im],...],...]}\n"
           "  mhs         {\"groups\":[sizes],\"equations\":[{\"terms\":[{\"exps\":[[g,v,pow],...],\"coeff\":[re,im]},...]},...]}\n"
           "  polynomial  {\"degree\":\"<decimal>\",\"monic\":true,\"terms\":[{\"exp\":\"<decimal>\",\"coeff\":[re,im]},...]}\n"
           "  chain       {\"splits\":[{\"qudit\":i,\"dim\":d,\"new\":[x,y]},...]}\n";
}

// ---- primitives

inline json complex_json(cdouble c) { return json::array({c.real(), c.imag()}); }

inline cdouble complex_from(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError("expected a complex number [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json cvec_json(const CVec& v) {
    json a = json::array();
    for (auto c : v) a.push_back(complex_json(c));
    return a;
}

inline CVec cvec_from(const json& j) {
    if (!j.is_array()) throw InputError("expected an array of complex numbers");
    CVec v;
    for (const auto& e : j) v.push_back(complex_from(e));
    return v;
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("field \"") + key + "\": " + e.what());
    }
}

inline BigInt bigint_from(const json& j) {
    std::string s = j.is_string() ? j.get<std::string>() : j.is_number_integer() ? std::to_string(j.get<long long>()) : "";
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("expected a non-negative decimal integer string");
    return BigInt(s);
}

// ---- hypergraph

inline json to_json(const WeightedHypergraph& h) { return {{"weights", h.weights}, {"edges", h.edges}}; }

inline WeightedHypergraph hypergraph_from(const json& j) {
    WeightedHypergraph h;
    h.weights = field<std::vector<int>>(j, "weights");
    h.edges = field<std::vector<std::vector<int>>>(j, "edges");
    h.validate();
    return h;
}

inline json to_json(const Wsdr& f) { return {{"assignment", f.assignment}}; }
inline json to_json(const HallViolation& hv) {
    return {{"edge_subset", hv.edge_subset}, {"witness_size", hv.witness_size}};
}

// ---- instance, solution

inline json to_json(const QsatInstance& inst) {
    json cs = json::array();
    for (const auto& c : inst.constraints) cs.push_back({{"qudits", c.qudits}, {"amps", cvec_json(c.amps)}});
    return {{"dims", inst.dims}, {"constraints", cs}};
}

inline QsatInstance instance_from(const json& j) {
    QsatInstance inst;
    inst.dims = field<std::vector<int>>(j, "dims");
    if (!j.at("constraints").is_array()) throw InputError("\"constraints\" must be an array");
    for (const auto& c : j.at("constraints"))
        inst.constraints.push_back({field<std::vector<int>>(c, "qudits"), cvec_from(c.at("amps"))});
    inst.validate();
    return inst;
}

inline json to_json(const ProductState& s) {
    json l = json::array();
    for (const auto& v : s.locals) l.push_back(cvec_json(v));
    return {{"locals", l}};
}

// Accepts a solution file or a solve report carrying one under "state".
inline ProductState state_from(const json& j) {
    const json& src = j.contains("locals") ? j : j.contains("state") ? j.at("state") : j;
    if (!src.contains("locals")) throw InputError("missing field \"locals\"");
    ProductState s;
    for (const auto& v : src.at("locals")) s.locals.push_back(cvec_from(v));
    return s;
}

// ---- chain sidecar

inline json to_json(const SplitMapChain& c) {
    json a = json::array();
    for (const auto& s : c.splits) a.push_back({{"qudit", s.qudit}, {"dim", s.dim}, {"new", s.new_indices}});
    return {{"splits", a}};
}

inline SplitMapChain chain_from(const json& j) {
    SplitMapChain c;
    for (const auto& s : j.at("splits"))
        c.splits.push_back({field<int>(s, "qudit"), field<int>(s, "dim"), field<std::vector<int>>(s, "new")});
    return c;
}

// ---- MHS

inline json to_json(const MultiHomSystem& f) {
    json eqs = json::array();
    for (const auto& e : f.equations) {
        json ts = json::array();
        for (const auto& t : e.terms) {
            json ex = json::array();
            for (const auto& p : t.exps) ex.push_back({p.group, p.var, p.pow});
            ts.push_back({{"exps", ex}, {"coeff", complex_json(t.coeff)}});
        }
        eqs.push_back({{"terms", ts}});
    }
    return {{"groups", f.group_sizes}, {"equations", eqs}};
}

inline MultiHomSystem mhs_from(const json& j) {
    MultiHomSystem f;
    f.group_sizes = field<std::vector<int>>(j, "groups");
    for (const auto& e : j.at("equations")) {
        MhsEquation eq;
        for (const auto& t : e.at("terms")) {
            MhsTerm term;
            for (const auto& p : t.at("exps")) {
                if (!p.is_array() || p.size() != 3) throw InputError("exps entries are [group, var, pow]");
                term.exps.push_back({p[0].get<int>(), p[1].get<int>(), p[2].get<int>()});
            }
            term.coeff = complex_from(t.at("coeff"));
            eq.terms.push_back(term);
        }
        f.equations.push_back(eq);
    }
    f.validate();
    return f;
}

// ---- sparse polynomial

inline json to_json(const SparsePoly& p) {
    json ts = json::array();
    for (const auto& [e, c] : p.terms) ts.push_back({{"exp", e.str()}, {"coeff", complex_json(c)}});
    return {{"degree", p.degree.str()}, {"monic", p.monic}, {"terms", ts}};
}

inline SparsePoly poly_from(const json& j) {
    SparsePoly p;
    p.degree = bigint_from(j.at("degree"));
    p.monic = j.value("monic", true);
    for (const auto& t : j.at("terms")) {
        cdouble c = complex_from(t.at("coeff"));
        if (c == cdouble(0)) continue;
        p.terms[bigint_from(t.at("exp"))] += c;
    }
    p.validate();
    return p;
}

// ---- reports

inline json to_json(const SolveReport& r, bool timings) {
    json j;
    j["success"] = r.success;
    j["method"] = r.method;
    j["message"] = r.message;
    j["residuals"] = r.residuals;
    j["max_residual"] = r.max_residual;
    j["energies"] = json::array();
    for (double x : r.residuals) j["energies"].push_back(x * x);
    if (r.violated >= 0) j["violated"] = r.violated;
    j["recursion_depth"] = r.recursion_depth;
    j["radius"] = r.radius;
    j["non_extending"] = r.non_extending;
    j["root_calls"] = r.root_calls;
    j["closing_degrees"] = r.closing_degrees;
    j["closing_degree_bounds"] = r.closing_degree_bounds;
    j["chosen_root"] = r.chosen_root ? complex_json(*r.chosen_root) : json(nullptr);
    j["closing_variable"] = r.closing_variable;
    j["alternatives"] = cvec_json(r.alternatives);
    j["polished"] = r.polished;
    j["starts_used"] = r.starts_used;
    j["notes"] = r.notes;
    if (r.state) j["state"] = to_json(*r.state);
    if (timings) j["seconds"] = r.seconds;
    return j;
}

inline json to_json(const ExtendingOrder& o) {
    return {{"order", o.order}, {"non_extending", o.non_extending_count}, {"added_vertex", o.added_vertex}};
}

inline json to_json(const TransferFiltration& f) {
    return {{"foundation", f.foundation}, {"order", f.order}, {"layer_fn", f.layer_fn},
            {"radius", f.radius}, {"transfer_type", f.transfer_type}};
}

// ---- files

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << '\n';
}

enum class Kind { hypergraph, instance, solution, mhs, polynomial, unknown };

inline Kind kind_of(const json& j) {
    if (!j.is_object()) return Kind::unknown;
    if (j.contains("weights") && j.contains("edges")) return Kind::hypergraph;
    if (j.contains("dims") && j.contains("constraints")) return Kind::instance;
    if (j.contains("groups") && j.contains("equations")) return Kind::mhs;
    if (j.contains("degree") && j.contains("terms")) return Kind::polynomial;
    if (j.contains("locals") || j.contains("state")) return Kind::solution;
    return Kind::unknown;
}

} // namespace prodsat::io
