#pragma once

#include <map>
#include <string>
#include <vector>

#include "prodsat/qsat.hpp"
#include "prodsat/sparse_poly.hpp"
#include "prodsat/transfer.hpp"

namespace prodsat {

enum class EmbedMode { dense, sparse };

struct EmbeddingResult {
    QsatInstance instance;
    Wsdr sdr;
    int root_qubit = 0;      // v_0 = (x, y)
    int target_qubit = 0;    // w_d = (q(x, y), y^d)
    BigInt trailing_power;   // t with p = x^t * (embedded polynomial)
    std::vector<std::string> roles;  // per constraint: copy, power, base, step, final
};

namespace detail {

class EmbedBuilder {
public:
    EmbedBuilder(EmbedMode mode) : mode_(mode) {
        root_ = new_qubit();
    }

    int root() const { return root_; }
    QsatInstance& instance() { return inst_; }

    int new_qubit() {
        inst_.dims.push_back(2);
        creator_.push_back(-1);
        return static_cast<int>(inst_.dims.size()) - 1;
    }

    // Constraint whose transfer onto its last listed qubit defines `output`.
    int add(std::vector<int> qudits, CVec amps, int output, int shift, std::string role) {
        inst_.constraints.push_back(Constraint{std::move(qudits), std::move(amps)});
        int c = static_cast<int>(inst_.constraints.size()) - 1;
        outputs_.push_back(output);
        shifts_.push_back(shift);
        roles_.push_back(std::move(role));
        if (output >= 0) creator_[output] = c;
        return c;
    }

    int copy() {
        if (copy_ < 0) {
            copy_ = new_qubit();
            add({root_, copy_}, equality_gadget(), copy_, root_, "copy");
        }
        return copy_;
    }

    // New qubit (x_p x_q + c0 y_p y_q, y_p y_q) from distinct qubits p, q.
    int multiply(int p, int q, cdouble c0, const std::string& role) {
        int w = new_qubit();
        add({p, q, w}, gadget_quadratic({0.0, 0.0, 0.0, -1.0}, {1.0, 0.0, 0.0, c0}), w, p, role);
        return w;
    }

    // Qubit proportional to (x^j, y^j).
    int power(const BigInt& j) {
        if (j == 1) return root_;
        if (auto it = powers_.find(j); it != powers_.end()) return it->second;
        int q;
        if (mode_ == EmbedMode::dense) {
            q = multiply(power(j - 1), copy(), 0.0, "power");
        } else {
            std::vector<std::size_t> bits;
            for (std::size_t k = 0; k <= msb(j); ++k)
                if (bit_test(j, k)) bits.push_back(k);
            if (bits.size() == 1) {
                q = doubling(bits[0]);
            } else {
                // Strip the top bit: x^j = x^(j - 2^top) * x^(2^top).
                BigInt rest = j - (BigInt(1) << bits.back());
                q = multiply(power(rest), doubling(bits.back()), 0.0, "power");
            }
        }
        powers_[j] = q;
        return q;
    }

    EmbeddingResult finish(int target, BigInt trailing) {
        int fin = add({target}, CVec{1.0, 0.0}, -1, -1, "final");
        EmbeddingResult r;
        r.sdr.assignment = outputs_;
        int c = fin, q = target;
        while (true) {
            r.sdr.assignment[c] = q;
            int up = creator_[q];
            if (up < 0) break;
            q = shifts_[up];
            c = up;
        }
        r.instance = inst_;
        r.root_qubit = root_;
        r.target_qubit = target;
        r.trailing_power = std::move(trailing);
        r.roles = roles_;
        return r;
    }

private:
    // Two parallel chains A_k, B_k holding x^(2^k): A_0 = v_0, B_0 = v_1,
    // A_k = A_{k-1} B_{k-1} and B_k = A_{k-1} B_{k-1} as separate qubits.
    int doubling(std::size_t k) {
        if (chain_a_.empty()) {
            chain_a_.push_back(root_);
            chain_b_.push_back(copy());
        }
        while (chain_a_.size() <= k) {
            std::size_t lvl = chain_a_.size();
            while (chain_b_.size() < lvl)
                chain_b_.push_back(multiply(chain_a_[chain_b_.size() - 1], chain_b_[chain_b_.size() - 1], 0.0, "power"));
            chain_a_.push_back(multiply(chain_a_[lvl - 1], chain_b_[lvl - 1], 0.0, "power"));
        }
        return chain_a_[k];
    }

    EmbedMode mode_;
    QsatInstance inst_;
    int root_ = -1;
    int copy_ = -1;
    std::vector<int> creator_, outputs_, shifts_;
    std::vector<std::string> roles_;
    std::map<BigInt, int> powers_;
    std::vector<int> chain_a_, chain_b_;
};

} // namespace detail

// Encodes the roots of p as product solutions: v_0 = (x, y) extends to an exact
// solution iff p(x/y) = 0, after factoring out the trailing power of x.
inline EmbeddingResult embed(const SparsePoly& input, EmbedMode mode) {
    input.validate();
    if (!input.monic) throw InputError("embed: polynomial must be monic");
    SparsePoly p = input.without_trailing_power();
    if (p.degree == 0) throw InputError("embed: degenerate polynomial (constant after factoring x-powers)");
    if (mode == EmbedMode::dense && p.degree > (1 << 16))
        throw Refusal("embed: dense mode limited to degree 65536; use sparse mode");

    struct Step {
        BigInt j, d;
        cdouble c0;
        bool constant_rest;
        cdouble lead;
    };
    std::vector<Step> steps;
    std::map<BigInt, cdouble> cur = p.terms;
    BigInt deg = p.degree;
    while (deg > 2) {
        auto it = std::next(cur.begin());
        BigInt j = it->first;
        cdouble c0 = cur.begin()->second;
        if (j == deg) {
            steps.push_back({j, deg, c0, true, it->second});
            break;
        }
        steps.push_back({j, deg, c0, false, 0.0});
        std::map<BigInt, cdouble> next;
        for (; it != cur.end(); ++it) next[it->first - j] = it->second;
        cur = std::move(next);
        deg -= j;
    }

    detail::EmbedBuilder b(mode);
    int w = -1;
    if (steps.empty() || !steps.back().constant_rest) {
        auto coef = [&](int k) {
            auto f = cur.find(BigInt(k));
            return f == cur.end() ? cdouble(0) : f->second;
        };
        if (deg == 2) {
            int v1 = b.copy();
            w = b.new_qubit();
            b.add({b.root(), v1, w}, gadget_quadratic({0.0, 0.0, 0.0, -1.0}, {coef(2), coef(1), 0.0, coef(0)}), w, v1,
                  "base");
        } else {
            w = b.new_qubit();
            b.add({b.root(), w}, gadget_linear({0.0, -1.0}, {coef(1), coef(0)}), w, b.root(), "base");
        }
    }
    for (auto s = steps.rbegin(); s != steps.rend(); ++s) {
        int v = b.power(s->j);
        int out = b.new_qubit();
        if (s->constant_rest)
            b.add({v, out}, gadget_linear({0.0, -1.0}, {s->lead, s->c0}), out, v, "step");
        else
            b.add({v, w, out}, gadget_quadratic({0.0, 0.0, 0.0, -1.0}, {1.0, 0.0, 0.0, s->c0}), out, w, "step");
        w = out;
    }
    EmbeddingResult r = b.finish(w, input.trailing_power());
    r.instance.validate();
    if (!is_valid_wsdr(underlying_hypergraph(r.instance), r.sdr))
        throw Refusal("embed: internal error, SDR certificate does not validate");
    return r;
}

// x / y from the root qubit of a solution.
inline cdouble extract_root(const EmbeddingResult& r, const ProductState& state, double tol = 1e-6) {
    check_state(r.instance, state);
    CVec w = normalized(state.locals[r.target_qubit]);
    if (std::abs(w[0]) > tol)
        throw Refusal("extract_root: target qubit is not proportional to |1> (|<0|w>| = " + std::to_string(std::abs(w[0])) + ")");
    CVec v = normalized(state.locals[r.root_qubit]);
    if (std::abs(v[1]) <= 1e-14) throw Refusal("extract_root: root qubit has y = 0");
    return v[0] / v[1];
}

} // namespace prodsat
