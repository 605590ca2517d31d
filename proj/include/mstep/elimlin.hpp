#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mstep/groebner.hpp"
#include "mstep/parse.hpp"

namespace mstep {

/// Variable assignment over a universe: -1 means unassigned.
using Assignment = std::vector<std::int8_t>;

inline Assignment empty_assignment(const Ring& ring) {
    return Assignment(ring.nvars(), -1);
}

enum class ElimKind { FullyLinear, Reduced };

/// Result of the degree-bounded Gröbner + linear-elimination pass. For a
/// Reduced outcome the basis omits the harvested linear polynomials; each of
/// them is recorded as (variable, substitution polynomial) so solutions of
/// the reduced system extend to solutions of the input.
struct ElimOutcome {
    ElimKind kind = ElimKind::Reduced;
    GeneratorSet basis;
    std::vector<std::pair<VarId, Polynomial>> eliminated;
    std::uint32_t nrv = 0;
    GBStats stats;
};

/// Degree-bounded Gröbner basis, then harvest the linear part, eliminate its
/// leading variables from the rest and re-scope the field equations. If the
/// bounded basis is already all-linear (or {1}) it is returned verbatim.
inline ElimOutcome gb_elim_lin(const GeneratorSet& H, std::uint32_t D,
                               const EngineLimits& limits = {}) {
    GBResult gr = groebner_bounded(H, D, limits);
    ElimOutcome out;
    out.stats = gr.stats;
    if (gr.basis.max_degree() <= 1) {
        out.kind = ElimKind::FullyLinear;
        out.basis = gr.basis;
        out.nrv = static_cast<std::uint32_t>(out.basis.support_count());
        return out;
    }
    const RingPtr& ring = H.ring();
    const MonomialOrder& ord = H.order();
    std::vector<Polynomial> linear;
    std::vector<Polynomial> rest;
    for (const Polynomial& p : gr.basis.polys())
        (p.degree() == 1 ? linear : rest).push_back(p);

    for (const Polynomial& l : linear) {
        std::size_t li = l.leading_index(ord);
        const Monomial& lm = l.terms()[li].mono;
        VarId v = 0;
        lm.for_each_var(*ring, [&](VarId var, unsigned) { v = var; });
        // leading coefficient is 1 after interreduction, so v - l is the
        // substitution polynomial for v
        out.eliminated.emplace_back(v, Polynomial::variable(ring, v) - l);
    }
    GeneratorSet g1 = GeneratorSet::make(ring, ord, std::move(linear));
    GeneratorSet g2 = GeneratorSet::make(ring, ord, std::move(rest));
    out.basis = reduce_set(g2, g1);
    if (out.basis.max_degree() <= 1 && !out.basis.empty() && !out.basis.is_unit()) {
        // the reduction dropped everything to linear: bring it to echelon
        // form so hidden inconsistencies surface as {1}
        out.basis = groebner_bounded(out.basis, 1, limits).basis;
    }
    out.nrv = static_cast<std::uint32_t>(out.basis.support_count());
    out.kind = out.basis.max_degree() <= 1 ? ElimKind::FullyLinear : ElimKind::Reduced;
    return out;
}

/// Apply the elimination homomorphism given by explicit equations v = f(v):
/// each (variable, polynomial) pair substitutes the variable away. The
/// substitution polynomials must not mention any eliminated variable.
inline GeneratorSet eliminate_via(std::span<const std::pair<VarId, Polynomial>> explicit_eqs,
                                  const GeneratorSet& J) {
    const RingPtr& ring = J.ring();
    std::vector<const Polynomial*> images(ring->nvars(), nullptr);
    for (const auto& [v, f] : explicit_eqs) {
        ring->check_var(v);
        images[v] = &f;
    }
    for (const auto& [v, f] : explicit_eqs) {
        for (const auto& [w, g] : explicit_eqs) {
            (void)g;
            if (f.uses_var(w))
                throw domain_error("substitution polynomial for " + ring->vars().name(v) +
                                   " mentions eliminated variable " + ring->vars().name(w));
        }
    }
    std::vector<Polynomial> out;
    for (const Polynomial& p : J.polys()) out.push_back(p.substitute_polys(images));
    return GeneratorSet::make(ring, J.order(), std::move(out));
}

/// Extend a partial assignment through recorded eliminations, newest first:
/// every substitution polynomial must be fully determined when reached.
inline Assignment extend_solution(const Ring& ring, Assignment partial,
                                  std::span<const std::pair<VarId, Polynomial>> eliminated) {
    for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it) {
        const auto& [v, f] = *it;
        const Field& fld = ring.field();
        Coeff val = 0;
        for (const Term& t : f.terms()) {
            Coeff prod = t.coeff;
            bool ok = true;
            t.mono.for_each_var(ring, [&](VarId w, unsigned e) {
                if (partial[w] < 0) {
                    ok = false;
                    return;
                }
                prod = fld.mul(prod, fld.pow(static_cast<Coeff>(partial[w]), e));
            });
            if (!ok)
                throw solve_error("unresolved dependency while extending solution through " +
                                  ring.vars().name(v));
            val = fld.add(val, prod);
        }
        if (partial[v] >= 0 && partial[v] != static_cast<std::int8_t>(val))
            throw solve_error("conflicting value for " + ring.vars().name(v) +
                              " while extending solution");
        partial[v] = static_cast<std::int8_t>(val);
    }
    return partial;
}

/// Read the assignment off an all-linear basis {x_i - a_i}. Throws if any
/// polynomial involves more than one variable (the basis does not determine
/// a point).
inline Assignment assignment_from_linear_basis(const GeneratorSet& basis) {
    const Ring& ring = *basis.ring();
    Assignment a = empty_assignment(ring);
    for (const Polynomial& p : basis.polys()) {
        if (p.degree() > 1 || p.term_count() > 2)
            throw solve_error("basis polynomial is not of the form x - a: " + to_string(p));
        VarId v = 0;
        int vars = 0;
        Coeff cv = 1, cconst = 0;
        for (const Term& t : p.terms()) {
            if (t.mono.is_one()) {
                cconst = t.coeff;
            } else if (t.mono.degree() == 1) {
                t.mono.for_each_var(ring, [&](VarId w, unsigned) { v = w; });
                cv = t.coeff;
                ++vars;
            }
        }
        if (vars != 1) throw solve_error("basis polynomial is not univariate linear");
        Coeff val = ring.field().mul(ring.field().neg(cconst), ring.field().inv(cv));
        if (a[v] >= 0 && a[v] != static_cast<std::int8_t>(val))
            throw solve_error("conflicting assignment in linear basis");
        a[v] = static_cast<std::int8_t>(val);
    }
    return a;
}

inline const char* to_cstring(ElimKind k) {
    return k == ElimKind::FullyLinear ? "fully-linear" : "reduced";
}

inline nlohmann::json elim_outcome_to_json(const ElimOutcome& out) {
    nlohmann::json j;
    j["kind"] = to_cstring(out.kind);
    j["nrv"] = out.nrv;
    nlohmann::json basis = nlohmann::json::array();
    for (const Polynomial& p : out.basis.polys()) basis.push_back(to_string(p));
    j["basis"] = std::move(basis);
    nlohmann::json elim = nlohmann::json::array();
    if (out.basis.ring()) {
        const Ring& ring = *out.basis.ring();
        for (const auto& [v, f] : out.eliminated)
            elim.push_back({ring.vars().name(v), to_string(f)});
    }
    j["eliminated"] = std::move(elim);
    return j;
}

}  // namespace mstep
