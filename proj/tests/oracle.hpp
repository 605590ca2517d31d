#pragma once

// Test-only brute-force machinery. Everything here stays independent of the
// Groebner/elimination code paths it is used to check: solution sets come
// from exhaustive enumeration, never from the engine.

#include <cstdint>
#include <vector>

#include "mstep/groebner.hpp"
#include "mstep/parse.hpp"
#include "mstep/rng.hpp"

namespace oracle {

using namespace mstep;

inline std::vector<Coeff> decode_point(const Ring& ring, std::uint64_t index) {
    std::vector<Coeff> pt(ring.nvars());
    unsigned q = ring.q();
    for (std::size_t v = ring.nvars(); v-- > 0;) {
        pt[v] = static_cast<Coeff>(index % q);
        index /= q;
    }
    return pt;
}

/// All common zeros of the set over GF(q)^n by exhaustive enumeration.
inline std::vector<std::vector<Coeff>> brute_force_solutions(const GeneratorSet& g,
                                                             std::uint64_t cap = 1ull << 22) {
    const Ring& ring = *g.ring();
    unsigned q = ring.q();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < ring.nvars(); ++i) {
        total *= q;
        if (total > cap) throw std::runtime_error("brute force cap exceeded");
    }
    std::vector<std::vector<Coeff>> sols;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::vector<Coeff> pt = decode_point(ring, idx);
        bool ok = true;
        for (const Polynomial& p : g.polys()) {
            if (p.eval(pt) != 0) {
                ok = false;
                break;
            }
        }
        if (ok) sols.push_back(std::move(pt));
    }
    return sols;
}

/// Random polynomial of degree <= maxdeg vanishing at `point` (coefficient of
/// the constant adjusted), over GF(q).
inline Polynomial random_poly_through(const RingPtr& ring, CounterRng& rng,
                                      std::span<const Coeff> point, unsigned maxdeg,
                                      unsigned terms) {
    unsigned q = ring->q();
    std::vector<RawTerm> raw;
    for (unsigned t = 0; t < terms; ++t) {
        RawTerm rt;
        rt.coeff = 1 + static_cast<long long>(rng.below(q - 1));
        unsigned d = 1 + static_cast<unsigned>(rng.below(maxdeg));
        for (unsigned i = 0; i < d; ++i)
            rt.exponents.emplace_back(static_cast<VarId>(rng.below(ring->nvars())), 1);
        raw.push_back(std::move(rt));
    }
    Polynomial p = Polynomial::normalize(ring, raw);
    Coeff v = p.eval(point);
    if (v != 0) p.add_scaled(Polynomial::constant(ring, ring->field().neg(v)), 1);
    return p;
}

struct PlantedSystem {
    GeneratorSet system;
    std::vector<Coeff> solution;
};

/// Random GF(q) system with a planted, brute-force-verified unique solution.
/// Extra equations through the planted point are added until uniqueness.
inline PlantedSystem random_planted_unique(const RingPtr& ring, CounterRng& rng, unsigned maxdeg,
                                           unsigned start_eqs, unsigned max_extra = 64) {
    std::vector<Coeff> point(ring->nvars());
    for (auto& c : point) c = static_cast<Coeff>(rng.below(ring->q()));
    std::vector<Polynomial> polys;
    for (unsigned i = 0; i < start_eqs; ++i)
        polys.push_back(random_poly_through(ring, rng, point, maxdeg, 2 + unsigned(rng.below(4))));
    for (unsigned extra = 0; extra <= max_extra; ++extra) {
        GeneratorSet g = GeneratorSet::make(ring, MonomialOrder::degrevlex(), polys);
        auto sols = brute_force_solutions(g);
        if (sols.size() == 1) return {std::move(g), std::move(point)};
        polys.push_back(random_poly_through(ring, rng, point, maxdeg, 2 + unsigned(rng.below(4))));
    }
    throw std::runtime_error("failed to plant a unique solution");
}

/// Random system verified by brute force to have no solution at all.
inline GeneratorSet random_unsatisfiable(const RingPtr& ring, CounterRng& rng, unsigned maxdeg,
                                         unsigned start_eqs, unsigned max_tries = 64) {
    std::vector<Polynomial> polys;
    for (unsigned i = 0; i < start_eqs + 2; ++i) {
        std::vector<RawTerm> raw;
        unsigned terms = 2 + unsigned(rng.below(4));
        for (unsigned t = 0; t < terms; ++t) {
            RawTerm rt;
            rt.coeff = 1 + static_cast<long long>(rng.below(ring->q() - 1));
            unsigned d = 1 + unsigned(rng.below(maxdeg));
            for (unsigned j = 0; j < d; ++j)
                rt.exponents.emplace_back(static_cast<VarId>(rng.below(ring->nvars())), 1);
            raw.push_back(std::move(rt));
        }
        RawTerm c;
        c.coeff = static_cast<long long>(rng.below(ring->q()));
        raw.push_back(std::move(c));
        polys.push_back(Polynomial::normalize(ring, raw));
    }
    for (unsigned tries = 0; tries <= max_tries; ++tries) {
        GeneratorSet g = GeneratorSet::make(ring, MonomialOrder::degrevlex(), polys);
        if (brute_force_solutions(g).empty()) return g;
        // knock out a surviving solution with an equation it violates
        auto sols = brute_force_solutions(g);
        Polynomial p = random_poly_through(ring, rng, sols[0], maxdeg, 2);
        p.add_scaled(Polynomial::constant(ring, 1), 1);
        polys.push_back(std::move(p));
    }
    throw std::runtime_error("failed to build an unsatisfiable system");
}

inline UniversePtr small_universe(unsigned n, const char* prefix = "x") {
    std::vector<std::string> names;
    for (unsigned i = 0; i < n; ++i)
        names.push_back(std::string(prefix) + "(" + std::to_string(i) + ")");
    return Universe::make(std::move(names));
}

}  // namespace oracle
