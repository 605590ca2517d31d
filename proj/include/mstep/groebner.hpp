#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "mstep/matrix.hpp"
#include "mstep/polynomial.hpp"

namespace mstep {

/// A finite set of polynomials generating an ideal, kept canonical: no zero
/// polynomial, sorted, deduplicated, and collapsed to {1} when 1 is present.
class GeneratorSet {
public:
    GeneratorSet() = default;

    static GeneratorSet make(RingPtr ring, MonomialOrder order, std::vector<Polynomial> polys) {
        GeneratorSet g;
        g.ring_ = std::move(ring);
        g.order_ = order;
        bool unit = false;
        for (Polynomial& p : polys) {
            if (p.is_zero()) continue;
            if (p.is_constant()) {
                unit = true;
                break;
            }
            g.polys_.push_back(std::move(p));
        }
        if (unit) {
            g.polys_.clear();
            g.polys_.push_back(Polynomial::constant(g.ring_, 1));
            return g;
        }
        std::sort(g.polys_.begin(), g.polys_.end(),
                  [](const Polynomial& a, const Polynomial& b) {
                      return Polynomial::compare(a, b) > 0;
                  });
        g.polys_.erase(std::unique(g.polys_.begin(), g.polys_.end()), g.polys_.end());
        return g;
    }

    const RingPtr& ring() const { return ring_; }
    const MonomialOrder& order() const { return order_; }
    const std::vector<Polynomial>& polys() const { return polys_; }
    bool empty() const { return polys_.empty(); }
    std::size_t size() const { return polys_.size(); }

    bool is_unit() const { return polys_.size() == 1 && polys_[0].is_one(); }

    std::uint32_t max_degree() const {
        std::uint32_t d = 0;
        for (const Polynomial& p : polys_) d = std::max(d, p.degree());
        return d;
    }

    /// Number of distinct variables occurring in the set.
    std::size_t support_count() const {
        if (!ring_) return 0;
        return count_support(*ring_, polys_);
    }

    std::vector<std::uint64_t> support_mask() const {
        std::vector<std::uint64_t> mask(ring_->mask_words(), 0);
        for (const Polynomial& p : polys_) p.support_into(mask);
        return mask;
    }

private:
    RingPtr ring_;
    MonomialOrder order_;
    std::vector<Polynomial> polys_;
};

/// Engine configuration: matrix caps are a resource contract, not a silent
/// truncation; exceeding them raises resource_error.
struct EngineLimits {
    std::uint64_t max_rows = std::uint64_t(1) << 22;
    std::uint64_t max_cols = std::uint64_t(1) << 22;
    bool chain_criterion = true;
    std::ostream* trace = nullptr;
};

struct GBStats {
    std::uint64_t rounds = 0;
    std::uint64_t max_rows = 0;
    std::uint64_t max_cols = 0;
    std::uint64_t new_pivots = 0;
    double elim_seconds = 0;
};

struct GBResult {
    GeneratorSet basis;
    bool complete = false;
    std::uint32_t max_degree_seen = 0;
    GBStats stats;
};

namespace detail {

/// Normal form of p modulo the reducers, touching only terms of total degree
/// <= max_term_degree (the Macaulay budget of a degree-bounded computation).
inline Polynomial normal_form(Polynomial p, std::span<const Polynomial> reducers,
                              const MonomialOrder& ord,
                              std::uint32_t max_term_degree = UINT32_MAX,
                              const Polynomial* skip = nullptr) {
    if (p.is_zero() || reducers.empty()) return p;
    const RingPtr& ring = p.ring();
    const Field& f = ring->field();

    struct Lead {
        const Polynomial* poly;
        const Monomial* mono;
        Coeff coeff;
    };
    std::vector<Lead> leads;
    leads.reserve(reducers.size());
    for (const Polynomial& r : reducers) {
        if (&r == skip || r.is_zero()) continue;
        std::size_t li = r.leading_index(ord);
        leads.push_back({&r, &r.terms()[li].mono, r.terms()[li].coeff});
    }
    if (leads.empty()) return p;

    while (!p.is_zero()) {
        const Term* best = nullptr;
        const Lead* red = nullptr;
        for (const Term& t : p.terms()) {
            if (t.mono.degree() > max_term_degree) continue;
            if (best && Monomial::compare(*ring, ord, t.mono, best->mono) <= 0) continue;
            for (const Lead& l : leads) {
                if (Monomial::divides(*ring, *l.mono, t.mono)) {
                    best = &t;
                    red = &l;
                    break;
                }
            }
        }
        if (!best) break;
        Monomial u = Monomial::div(*ring, best->mono, *red->mono);
        Coeff c = f.neg(f.mul(best->coeff, f.inv(red->coeff)));
        p.add_term_multiple(c, u, *red->poly);
    }
    return p;
}

/// F4-style fixpoint engine for the ideal generated by the input (plus the
/// field equations when the ring is kept modulo them; those enter as
/// implicit critical pairs, never as rows).
class GbEngine {
public:
    GbEngine(RingPtr ring, MonomialOrder ord, EngineLimits limits)
        : ring_(std::move(ring)), ord_(ord), lim_(limits) {}

    void seed(std::span<const Polynomial> gens, std::uint32_t D) {
        std::vector<Polynomial> low;
        std::vector<Polynomial> high;
        for (const Polynomial& g : gens) {
            if (g.is_zero()) continue;
            if (g.is_constant()) {
                unit_ = true;
                return;
            }
            (g.degree() <= D ? low : high).push_back(g);
        }
        // echelonize the generators within the degree budget so the basis
        // starts interreduced at matrix level
        if (!low.empty()) {
            for (Polynomial& p : echelonize_polys(low))
                if (!add_element(std::move(p))) return;
        }
        for (Polynomial& p : high)
            if (!add_element(std::move(p))) return;
    }

    bool unit() const { return unit_; }

    bool has_pending() const { return !pending_.empty(); }

    std::uint32_t min_pending_degree() const {
        std::uint32_t d = UINT32_MAX;
        for (const Pair& p : pending_) d = std::min(d, p.deg);
        return d;
    }

    void run(std::uint32_t D) {
        while (!unit_) {
            std::uint32_t d = UINT32_MAX;
            for (const Pair& p : pending_)
                if (p.deg <= D && p.deg < d) d = p.deg;
            if (d == UINT32_MAX) break;
            round(d);
        }
        if (unit_) pending_.clear();
    }

    std::uint32_t max_degree_seen() const { return max_degree_seen_; }
    const GBStats& stats() const { return stats_; }

    /// Interreduce and package the basis. Reductions stay within the given
    /// term-degree budget so a bounded run never exceeds its Macaulay size.
    GeneratorSet finalize(std::uint32_t reduce_degree) {
        if (unit_)
            return GeneratorSet::make(ring_, ord_, {Polynomial::constant(ring_, 1)});
        std::vector<Polynomial> polys;
        for (Elem& e : elems_) polys.push_back(std::move(e.p));
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < polys.size(); ++i) {
                if (polys[i].is_zero()) continue;
                Polynomial r =
                    normal_form(polys[i], polys, ord_, reduce_degree, &polys[i]);
                if (r != polys[i]) {
                    changed = true;
                    if (r.is_constant() && !r.is_zero()) {
                        unit_ = true;
                        return GeneratorSet::make(ring_, ord_,
                                                  {Polynomial::constant(ring_, 1)});
                    }
                    polys[i] = std::move(r);
                }
            }
        }
        std::vector<Polynomial> out;
        for (Polynomial& p : polys) {
            if (p.is_zero()) continue;
            std::size_t li = p.leading_index(ord_);
            Coeff lc = p.terms()[li].coeff;
            if (lc != 1) p.scale(ring_->field().inv(lc));
            out.push_back(std::move(p));
        }
        return GeneratorSet::make(ring_, ord_, std::move(out));
    }

private:
    struct Elem {
        Polynomial p;
        Monomial lt;
        Coeff lc;
        bool live;
    };
    struct Pair {
        std::uint32_t i, j;  // j == UINT32_MAX for a field-equation pair
        Monomial lcm;        // regular pairs only
        std::uint32_t deg;
        VarId var;  // field pairs only
        bool field() const { return j == UINT32_MAX; }
    };

    struct MonoGreater {
        const Ring* ring;
        MonomialOrder ord;
        bool operator()(const Monomial& a, const Monomial& b) const {
            return Monomial::compare(*ring, ord, a, b) > 0;
        }
    };

    /// Returns false when the unit ideal was detected.
    bool add_element(Polynomial p, bool check_adoption = false) {
        if (p.is_zero()) return true;
        if (p.is_constant()) {
            unit_ = true;
            return false;
        }
        std::size_t li = p.leading_index(ord_);
        Monomial lt = p.terms()[li].mono;
        Coeff lc = p.terms()[li].coeff;
        if (check_adoption) {
            for (const Elem& e : elems_)
                if (e.live && Monomial::divides(*ring_, e.lt, lt)) return true;
        }
        std::uint32_t t = static_cast<std::uint32_t>(elems_.size());

        // Gebauer-Moeller update of the pending pair set
        if (lim_.chain_criterion) {
            std::erase_if(pending_, [&](const Pair& pr) {
                if (pr.field()) return false;
                if (!Monomial::divides(*ring_, lt, pr.lcm)) return false;
                Monomial l1 = Monomial::lcm(*ring_, elems_[pr.i].lt, lt);
                Monomial l2 = Monomial::lcm(*ring_, elems_[pr.j].lt, lt);
                return l1 != pr.lcm && l2 != pr.lcm;
            });
        }

        struct Cand {
            std::uint32_t i;
            Monomial lcm;
            bool coprime;
            bool dead = false;
        };
        std::vector<Cand> cand;
        for (std::uint32_t i = 0; i < t; ++i) {
            if (!elems_[i].live) continue;
            cand.push_back({i, Monomial::lcm(*ring_, elems_[i].lt, lt),
                            Monomial::coprime(*ring_, elems_[i].lt, lt)});
        }
        if (lim_.chain_criterion) {
            for (std::size_t a = 0; a < cand.size(); ++a) {
                if (cand[a].dead) continue;
                for (std::size_t b = 0; b < cand.size(); ++b) {
                    if (a == b || cand[b].dead) continue;
                    if (cand[b].lcm != cand[a].lcm &&
                        Monomial::divides(*ring_, cand[b].lcm, cand[a].lcm))
                        cand[a].dead = true;
                }
            }
            // one pair per lcm class; a coprime member kills the class
            for (std::size_t a = 0; a < cand.size(); ++a) {
                if (cand[a].dead) continue;
                bool coprime_class = cand[a].coprime;
                for (std::size_t b = a + 1; b < cand.size(); ++b) {
                    if (cand[b].dead || cand[b].lcm != cand[a].lcm) continue;
                    coprime_class = coprime_class || cand[b].coprime;
                    cand[b].dead = true;
                }
                if (coprime_class) cand[a].dead = true;
            }
        } else {
            for (Cand& c : cand)
                if (c.coprime) c.dead = true;
        }
        for (Cand& c : cand) {
            if (c.dead) continue;
            std::uint32_t dg = c.lcm.degree();
            pending_.push_back({c.i, t, std::move(c.lcm), dg, 0});
        }
        // field-equation pairs: one per variable of the leading term
        if (ring_->mod_field_eqs()) {
            const unsigned q = ring_->q();
            lt.for_each_var(*ring_, [&](VarId v, unsigned e) {
                Pair pr;
                pr.i = t;
                pr.j = UINT32_MAX;
                pr.deg = lt.degree() + (q - e);
                pr.var = v;
                pending_.push_back(std::move(pr));
            });
        }
        for (Elem& e : elems_)
            if (e.live && Monomial::divides(*ring_, lt, e.lt)) e.live = false;
        elems_.push_back({std::move(p), std::move(lt), lc, true});
        return true;
    }

    /// One Macaulay round: all pending pairs of exactly this lcm-degree.
    void round(std::uint32_t d) {
        max_degree_seen_ = std::max(max_degree_seen_, d);
        ++stats_.rounds;

        std::vector<Pair> todo;
        for (std::size_t i = 0; i < pending_.size();) {
            if (pending_[i].deg == d) {
                todo.push_back(std::move(pending_[i]));
                pending_[i] = std::move(pending_.back());
                pending_.pop_back();
            } else {
                ++i;
            }
        }
        std::sort(todo.begin(), todo.end(), [](const Pair& a, const Pair& b) {
            if (a.i != b.i) return a.i < b.i;
            if (a.j != b.j) return a.j < b.j;
            return a.var < b.var;
        });

        MonoGreater gt{ring_.get(), ord_};
        std::map<Monomial, std::uint32_t, MonoGreater> cols(gt);
        constexpr std::uint32_t kPivot = 0x80000000u;
        std::vector<Polynomial> rows;

        auto note_row = [&](Polynomial r) {
            if (r.is_zero()) return;
            std::size_t li = r.leading_index(ord_);
            cols[r.terms()[li].mono] |= kPivot;
            for (const Term& t : r.terms()) cols.emplace(t.mono, 0);
            rows.push_back(std::move(r));
        };

        const unsigned q = ring_->q();
        for (const Pair& pr : todo) {
            if (pr.field()) {
                const Elem& e = elems_[pr.i];
                unsigned ev = e.lt.exponent(*ring_, pr.var);
                Monomial xe = Monomial::from_exponents(
                    *ring_, std::vector<std::pair<VarId, unsigned>>{{pr.var, q - ev}});
                note_row(e.p.times_term(xe, 1));
            } else {
                const Elem& ei = elems_[pr.i];
                const Elem& ej = elems_[pr.j];
                note_row(ei.p.times_term(Monomial::div(*ring_, pr.lcm, ei.lt), 1));
                note_row(ej.p.times_term(Monomial::div(*ring_, pr.lcm, ej.lt), 1));
            }
        }

        // symbolic preprocessing: give every reducible monomial its reducer row
        for (auto it = cols.begin(); it != cols.end(); ++it) {
            if (it->second & kPivot) continue;
            const Monomial& m = it->first;
            const Elem* red = nullptr;
            for (const Elem& e : elems_) {
                if (e.live && Monomial::divides(*ring_, e.lt, m)) {
                    red = &e;
                    break;
                }
            }
            if (!red) continue;
            Polynomial r = red->p.times_term(Monomial::div(*ring_, m, red->lt), 1);
            it->second |= kPivot;
            for (const Term& t : r.terms()) cols.emplace(t.mono, 0);
            rows.push_back(std::move(r));
        }

        if (rows.size() > lim_.max_rows || cols.size() > lim_.max_cols)
            throw resource_error("Macaulay matrix cap exceeded: " + std::to_string(rows.size()) +
                                 " rows x " + std::to_string(cols.size()) + " columns");

        std::vector<const Monomial*> colvec;
        colvec.reserve(cols.size());
        std::uint32_t idx = 0;
        for (auto& [m, v] : cols) {
            v = (v & kPivot) | idx++;
            colvec.push_back(&m);
        }
        stats_.max_rows = std::max<std::uint64_t>(stats_.max_rows, rows.size());
        stats_.max_cols = std::max<std::uint64_t>(stats_.max_cols, cols.size());

        auto t0 = std::chrono::steady_clock::now();
        std::uint64_t adopted = 0;
        auto adopt = [&](Polynomial&& np) {
            if (np.is_constant()) {
                unit_ = true;
                return;
            }
            ++adopted;
            add_element(std::move(np));
        };

        if (ring_->q() == 2) {
            Gf2Matrix mat(rows.size(), cols.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (const Term& t : rows[r].terms())
                    mat.set(r, cols.find(t.mono)->second & ~kPivot);
            std::vector<std::uint32_t> pivots = mat.rref();
            for (std::size_t r = 0; r < pivots.size() && !unit_; ++r) {
                const Monomial& lead = *colvec[pivots[r]];
                bool novel = true;
                for (const Elem& e : elems_) {
                    if (e.live && Monomial::divides(*ring_, e.lt, lead)) {
                        novel = false;
                        break;
                    }
                }
                if (!novel && !lead.is_one()) continue;
                Polynomial np(ring_);
                for (std::size_t c = pivots[r]; c < cols.size(); ++c)
                    if (mat.get(r, c)) np.mutable_terms().push_back({*colvec[c], 1});
                np.sort_combine();
                adopt(std::move(np));
            }
        } else {
            GfqMatrix mat(ring_->field(), rows.size(), cols.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (const Term& t : rows[r].terms())
                    mat.at(r, cols.find(t.mono)->second & ~kPivot) = t.coeff;
            std::vector<std::uint32_t> pivots = mat.rref();
            for (std::size_t r = 0; r < pivots.size() && !unit_; ++r) {
                const Monomial& lead = *colvec[pivots[r]];
                bool novel = true;
                for (const Elem& e : elems_) {
                    if (e.live && Monomial::divides(*ring_, e.lt, lead)) {
                        novel = false;
                        break;
                    }
                }
                if (!novel && !lead.is_one()) continue;
                Polynomial np(ring_);
                for (std::size_t c = pivots[r]; c < cols.size(); ++c)
                    if (Coeff v = mat.at(r, c); v != 0)
                        np.mutable_terms().push_back({*colvec[c], v});
                np.sort_combine();
                adopt(std::move(np));
            }
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stats_.elim_seconds += secs;
        stats_.new_pivots += adopted;
        if (lim_.trace) {
            *lim_.trace << "{\"degree\":" << d << ",\"rows\":" << rows.size()
                        << ",\"cols\":" << cols.size() << ",\"new_pivots\":" << adopted
                        << ",\"seconds\":" << secs << "}\n";
        }
    }

    /// Plain matrix interreduction of same-budget polynomials (seeding).
    std::vector<Polynomial> echelonize_polys(std::span<const Polynomial> polys) {
        MonoGreater gt{ring_.get(), ord_};
        std::map<Monomial, std::uint32_t, MonoGreater> cols(gt);
        for (const Polynomial& p : polys)
            for (const Term& t : p.terms()) cols.emplace(t.mono, 0);
        std::vector<const Monomial*> colvec;
        std::uint32_t idx = 0;
        for (auto& [m, v] : cols) {
            v = idx++;
            colvec.push_back(&m);
        }
        std::vector<Polynomial> out;
        if (ring_->q() == 2) {
            Gf2Matrix mat(polys.size(), cols.size());
            for (std::size_t r = 0; r < polys.size(); ++r)
                for (const Term& t : polys[r].terms()) mat.set(r, cols.find(t.mono)->second);
            std::vector<std::uint32_t> pivots = mat.rref();
            for (std::size_t r = 0; r < pivots.size(); ++r) {
                Polynomial np(ring_);
                for (std::size_t c = pivots[r]; c < cols.size(); ++c)
                    if (mat.get(r, c)) np.mutable_terms().push_back({*colvec[c], 1});
                np.sort_combine();
                out.push_back(std::move(np));
            }
        } else {
            GfqMatrix mat(ring_->field(), polys.size(), cols.size());
            for (std::size_t r = 0; r < polys.size(); ++r)
                for (const Term& t : polys[r].terms())
                    mat.at(r, cols.find(t.mono)->second) = t.coeff;
            std::vector<std::uint32_t> pivots = mat.rref();
            for (std::size_t r = 0; r < pivots.size(); ++r) {
                Polynomial np(ring_);
                for (std::size_t c = pivots[r]; c < cols.size(); ++c)
                    if (Coeff v = mat.at(r, c); v != 0)
                        np.mutable_terms().push_back({*colvec[c], v});
                np.sort_combine();
                out.push_back(std::move(np));
            }
        }
        return out;
    }

    RingPtr ring_;
    MonomialOrder ord_;
    EngineLimits lim_;
    std::vector<Elem> elems_;
    std::vector<Pair> pending_;
    bool unit_ = false;
    std::uint32_t max_degree_seen_ = 0;
    GBStats stats_;
};

}  // namespace detail

/// Gröbner basis computation truncated at lcm-degree D: the result generates
/// the same ideal, is closed under S-polynomial reduction for every critical
/// pair of lcm-degree <= D, and is interreduced within the degree budget.
/// Returns {1} as soon as the constant 1 appears.
inline GBResult groebner_bounded(const GeneratorSet& H, std::uint32_t D,
                                 const EngineLimits& limits = {}) {
    if (D < 1) throw domain_error("degree bound must be positive");
    detail::GbEngine eng(H.ring(), H.order(), limits);
    eng.seed(H.polys(), D);
    eng.run(D);
    GBResult res;
    res.complete = eng.unit() || !eng.has_pending();
    res.max_degree_seen = eng.max_degree_seen();
    res.basis = eng.finalize(D);
    res.stats = eng.stats();
    if (res.basis.is_unit()) res.complete = true;
    return res;
}

/// Complete Gröbner basis, obtained by raising the degree bound until no
/// critical pair is pending. For inputs with at most one solution over the
/// base field the result is {1} or a set of linear polynomials.
inline GBResult groebner_complete(const GeneratorSet& H, const EngineLimits& limits = {}) {
    std::uint32_t D = std::max<std::uint32_t>(1, H.max_degree());
    detail::GbEngine eng(H.ring(), H.order(), limits);
    eng.seed(H.polys(), D);
    eng.run(D);
    while (!eng.unit() && eng.has_pending()) {
        D = std::max(D + 1, eng.min_pending_degree());
        eng.run(D);
    }
    GBResult res;
    res.complete = true;
    res.max_degree_seen = eng.max_degree_seen();
    res.basis = eng.finalize(UINT32_MAX);
    res.stats = eng.stats();
    return res;
}

/// Complete reduction: every polynomial of G2 is brought to normal form
/// with respect to R (no term divisible by a leading term of R); zero
/// reductions are dropped.
inline GeneratorSet reduce_set(const GeneratorSet& G2, const GeneratorSet& R) {
    std::vector<Polynomial> out;
    for (const Polynomial& p : G2.polys()) {
        Polynomial r = detail::normal_form(p, R.polys(), G2.order());
        if (!r.is_zero()) out.push_back(std::move(r));
    }
    return GeneratorSet::make(G2.ring(), G2.order(), std::move(out));
}

/// Solving-degree bounds: first the generic bound (n+1)(d-1)+1 for input
/// degree d, second the normal-form bound n^2(q-1) + n(q-2) that applies
/// once generators are reduced modulo the field equations.
inline std::pair<std::uint64_t, std::uint64_t> macaulay_bound(
    unsigned n, unsigned q, std::optional<unsigned> d = std::nullopt) {
    if (n < 2 || q < 2) throw domain_error("macaulay_bound requires n >= 2, q >= 2");
    unsigned dd = d.value_or(n * (q - 1));
    if (dd < q) throw domain_error("macaulay_bound requires d >= q");
    std::uint64_t generic = std::uint64_t(n + 1) * (dd - 1) + 1;
    std::uint64_t nf = std::uint64_t(n) * n * (q - 1) + std::uint64_t(n) * (q - 2);
    return {generic, nf};
}

/// log2 of the binomial-cost estimate omega * log2(C(n + d_s, d_s)).
inline double gb_cost_log2(unsigned n, unsigned d_s, double omega) {
    if (!(omega > 2.0 && omega <= 3.0)) throw domain_error("omega must satisfy 2 < omega <= 3");
    double lb = (std::lgamma(double(n) + d_s + 1) - std::lgamma(double(n) + 1) -
                 std::lgamma(double(d_s) + 1)) /
                std::log(2.0);
    return omega * lb;
}

/// log2 of the single-exponential bound k^(k*omega) with k = n^2 q.
inline double gb_exp_bound_log2(unsigned n, unsigned q, double omega) {
    if (!(omega > 2.0 && omega <= 3.0)) throw domain_error("omega must satisfy 2 < omega <= 3");
    double k = double(n) * n * q;
    return k * omega * std::log2(k);
}

}  // namespace mstep
