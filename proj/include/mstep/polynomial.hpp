#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mstep/monomial.hpp"
#include "mstep/ring.hpp"

namespace mstep {

struct Term {
    Monomial mono;
    Coeff coeff;
};

/// Raw input term for building polynomials: exponent list plus coefficient.
struct RawTerm {
    std::vector<std::pair<VarId, unsigned>> exponents;
    long long coeff = 1;
};

/// Sparse multivariate polynomial in normal form for its ring. Terms are kept
/// strictly descending in the canonical DegRevLex order with nonzero
/// coefficients; a polynomial is zero iff it has no terms.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(RingPtr ring) : ring_(std::move(ring)) {}

    static Polynomial zero(RingPtr ring) { return Polynomial(std::move(ring)); }

    static Polynomial constant(RingPtr ring, Coeff c) {
        Polynomial p(ring);
        if (c % ring->q() != 0) p.terms_.push_back({Monomial(*ring), ring->field().from_int(c)});
        return p;
    }

    static Polynomial variable(RingPtr ring, VarId v) {
        ring->check_var(v);
        Polynomial p(ring);
        Monomial m(*ring);
        m.set_exponent(*ring, v, 1);
        p.terms_.push_back({std::move(m), 1});
        return p;
    }

    static Polynomial term(RingPtr ring, Monomial m, Coeff c) {
        Polynomial p(ring);
        if (c != 0) p.terms_.push_back({std::move(m), c});
        return p;
    }

    /// Normal form of a raw polynomial with arbitrary exponents; agrees with
    /// the input as a function on GF(q)^n.
    static Polynomial normalize(RingPtr ring, std::span<const RawTerm> raw) {
        std::vector<Term> acc;
        acc.reserve(raw.size());
        for (const RawTerm& t : raw) {
            Coeff c = ring->field().from_int(t.coeff);
            if (c == 0) continue;
            acc.push_back({Monomial::from_exponents(*ring, t.exponents), c});
        }
        Polynomial p(ring);
        p.terms_ = std::move(acc);
        p.sort_combine();
        return p;
    }

    const RingPtr& ring() const { return ring_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || terms_[0].mono.is_one(); }
    bool is_one() const {
        return terms_.size() == 1 && terms_[0].mono.is_one() && terms_[0].coeff == 1;
    }

    /// Total degree; 0 for constants and the zero polynomial.
    std::uint32_t degree() const { return terms_.empty() ? 0 : terms_[0].mono.degree(); }

    /// Leading term in canonical DegRevLex.
    const Term& leading() const { return terms_.front(); }

    /// Index of the leading term under an arbitrary order.
    std::size_t leading_index(const MonomialOrder& ord) const {
        if (ord.kind == MonomialOrder::Kind::DegRevLex) return 0;
        std::size_t best = 0;
        for (std::size_t i = 1; i < terms_.size(); ++i)
            if (Monomial::compare(*ring_, ord, terms_[i].mono, terms_[best].mono) > 0) best = i;
        return best;
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial r = *this;
        r.add_scaled(o, 1);
        return r;
    }
    Polynomial operator-(const Polynomial& o) const {
        Polynomial r = *this;
        r.add_scaled(o, ring_->field().neg(1));
        return r;
    }

    /// this += c * o, merging sorted term lists.
    void add_scaled(const Polynomial& o, Coeff c) {
        check_same_ring(ring_, o.ring_);
        if (c == 0 || o.terms_.empty()) return;
        const Field& f = ring_->field();
        std::vector<Term> out;
        out.reserve(terms_.size() + o.terms_.size());
        std::size_t i = 0, j = 0;
        while (i < terms_.size() && j < o.terms_.size()) {
            int cmp = Monomial::canonical_compare(*ring_, terms_[i].mono, o.terms_[j].mono);
            if (cmp > 0) {
                out.push_back(std::move(terms_[i++]));
            } else if (cmp < 0) {
                out.push_back({o.terms_[j].mono, f.mul(c, o.terms_[j].coeff)});
                ++j;
            } else {
                Coeff s = f.add(terms_[i].coeff, f.mul(c, o.terms_[j].coeff));
                if (s != 0) out.push_back({std::move(terms_[i].mono), s});
                ++i;
                ++j;
            }
        }
        while (i < terms_.size()) out.push_back(std::move(terms_[i++]));
        for (; j < o.terms_.size(); ++j)
            out.push_back({o.terms_[j].mono, f.mul(c, o.terms_[j].coeff)});
        terms_ = std::move(out);
    }

    /// this += c * m * o  (used by polynomial reduction).
    void add_term_multiple(Coeff c, const Monomial& m, const Polynomial& o) {
        Polynomial scaled = o.times_term(m, c);
        add_scaled(scaled, 1);
    }

    void scale(Coeff c) {
        if (c == 0) {
            terms_.clear();
            return;
        }
        if (c == 1) return;
        for (Term& t : terms_) t.coeff = ring_->field().mul(t.coeff, c);
    }

    /// c * m * this as a new polynomial.
    Polynomial times_term(const Monomial& m, Coeff c) const {
        Polynomial r(ring_);
        if (c == 0) return r;
        const Field& f = ring_->field();
        r.terms_.reserve(terms_.size());
        for (const Term& t : terms_)
            r.terms_.push_back({Monomial::mul(*ring_, t.mono, m), f.mul(t.coeff, c)});
        // multiplication is order-preserving only when no exponent reduction
        // can merge distinct monomials
        if (ring_->mod_field_eqs()) r.sort_combine();
        return r;
    }

    Polynomial operator*(const Polynomial& o) const {
        check_same_ring(ring_, o.ring_);
        Polynomial r(ring_);
        const Field& f = ring_->field();
        r.terms_.reserve(terms_.size() * o.terms_.size());
        for (const Term& a : terms_)
            for (const Term& b : o.terms_)
                r.terms_.push_back({Monomial::mul(*ring_, a.mono, b.mono), f.mul(a.coeff, b.coeff)});
        r.sort_combine();
        return r;
    }

    Polynomial pow(unsigned e) const {
        Polynomial r = constant(ring_, 1);
        for (unsigned i = 0; i < e; ++i) r = r * *this;
        return r;
    }

    /// Partial evaluation: assign[v] in 0..q-1 substitutes a value, -1 keeps
    /// the variable. The result is re-normalized; a full assignment yields a
    /// constant.
    Polynomial substitute(std::span<const std::int8_t> assign) const {
        const Field& f = ring_->field();
        Polynomial r(ring_);
        r.terms_.reserve(terms_.size());
        if (ring_->packed()) {
            // word-level path: a term dies when it touches a zero-assigned
            // variable, otherwise the assigned variables just drop out
            std::size_t nw = ring_->words();
            std::vector<std::uint64_t> zero_mask(nw, 0), assigned_mask(nw, 0);
            for (std::size_t v = 0; v < assign.size(); ++v) {
                if (assign[v] < 0) continue;
                assigned_mask[v >> 6] |= std::uint64_t(1) << (v & 63);
                if (assign[v] == 0) zero_mask[v >> 6] |= std::uint64_t(1) << (v & 63);
            }
            for (const Term& t : terms_) {
                const std::uint64_t* w = t.mono.words();
                bool dead = false;
                for (std::size_t i = 0; i < nw; ++i)
                    if (w[i] & zero_mask[i]) {
                        dead = true;
                        break;
                    }
                if (dead) continue;
                Monomial rest(*ring_);
                std::uint64_t* rw = rest.words();
                for (std::size_t i = 0; i < nw; ++i) rw[i] = w[i] & ~assigned_mask[i];
                rest.recount_degree(*ring_);
                r.terms_.push_back({std::move(rest), t.coeff});
            }
            r.sort_combine();
            return r;
        }
        for (const Term& t : terms_) {
            Coeff c = t.coeff;
            Monomial rest(*ring_);
            bool dead = false;
            t.mono.for_each_var(*ring_, [&](VarId v, unsigned e) {
                if (dead) return;
                std::int8_t a = assign[v];
                if (a < 0) {
                    rest.set_exponent(*ring_, v, e);
                } else {
                    Coeff val = f.pow(static_cast<Coeff>(a), e);
                    if (val == 0) {
                        dead = true;
                        return;
                    }
                    c = f.mul(c, val);
                }
            });
            if (!dead) r.terms_.push_back({std::move(rest), c});
        }
        r.sort_combine();
        return r;
    }

    /// Full evaluation at a point.
    Coeff eval(std::span<const Coeff> point) const {
        const Field& f = ring_->field();
        Coeff sum = 0;
        for (const Term& t : terms_) {
            Coeff prod = t.coeff;
            t.mono.for_each_var(*ring_, [&](VarId v, unsigned e) {
                if (prod) prod = f.mul(prod, f.pow(point[v], e));
            });
            sum = f.add(sum, prod);
        }
        return sum;
    }

    /// Substitution homomorphism: images[v] (when non-null) replaces variable
    /// v; null entries keep the variable.
    Polynomial substitute_polys(std::span<const Polynomial* const> images) const {
        Polynomial result(ring_);
        std::vector<Term> acc;
        for (const Term& t : terms_) {
            Polynomial factor = constant(ring_, t.coeff);
            Monomial kept(*ring_);
            t.mono.for_each_var(*ring_, [&](VarId v, unsigned e) {
                if (images[v] == nullptr) {
                    kept.set_exponent(*ring_, v,
                                      ring_->mod_field_eqs()
                                          ? ring_->field().reduce_exp(kept.exponent(*ring_, v) + e)
                                          : kept.exponent(*ring_, v) + e);
                } else {
                    factor = factor * images[v]->pow(e);
                }
            });
            Polynomial part = factor.times_term(kept, 1);
            for (Term& pt : part.terms_) acc.push_back(std::move(pt));
        }
        result.terms_ = std::move(acc);
        result.sort_combine();
        return result;
    }

    /// OR the variables occurring in this polynomial into `mask`.
    void support_into(std::vector<std::uint64_t>& mask) const {
        for (const Term& t : terms_) t.mono.support_into(*ring_, mask);
    }

    bool uses_var(VarId v) const {
        for (const Term& t : terms_)
            if (t.mono.exponent(*ring_, v) != 0) return true;
        return false;
    }

    bool operator==(const Polynomial& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i)
            if (terms_[i].coeff != o.terms_[i].coeff || terms_[i].mono != o.terms_[i].mono)
                return false;
        return true;
    }
    bool operator!=(const Polynomial& o) const { return !(*this == o); }

    /// Total order on polynomials of one ring, for canonical set storage.
    static int compare(const Polynomial& a, const Polynomial& b) {
        std::size_t n = std::min(a.terms_.size(), b.terms_.size());
        for (std::size_t i = 0; i < n; ++i) {
            int c = Monomial::canonical_compare(*a.ring_, a.terms_[i].mono, b.terms_[i].mono);
            if (c) return c;
            if (a.terms_[i].coeff != b.terms_[i].coeff)
                return a.terms_[i].coeff < b.terms_[i].coeff ? -1 : 1;
        }
        if (a.terms_.size() != b.terms_.size()) return a.terms_.size() < b.terms_.size() ? -1 : 1;
        return 0;
    }

    /// Restore the term invariant after bulk construction.
    void sort_combine() {
        std::sort(terms_.begin(), terms_.end(), [this](const Term& x, const Term& y) {
            return Monomial::canonical_compare(*ring_, x.mono, y.mono) > 0;
        });
        const Field& f = ring_->field();
        std::size_t out = 0;
        for (std::size_t i = 0; i < terms_.size();) {
            Monomial m = std::move(terms_[i].mono);
            Coeff c = terms_[i].coeff;
            std::size_t j = i + 1;
            while (j < terms_.size() && terms_[j].mono == m) c = f.add(c, terms_[j++].coeff);
            if (c != 0) terms_[out++] = {std::move(m), c};
            i = j;
        }
        terms_.resize(out);
    }

    std::vector<Term>& mutable_terms() { return terms_; }

private:
    RingPtr ring_;
    std::vector<Term> terms_;
};

/// Number of distinct variables occurring in a set of polynomials.
inline std::size_t count_support(const Ring& ring, std::span<const Polynomial> polys) {
    std::vector<std::uint64_t> mask(ring.mask_words(), 0);
    for (const Polynomial& p : polys) p.support_into(mask);
    std::size_t c = 0;
    for (std::uint64_t w : mask) c += std::popcount(w);
    return c;
}

}  // namespace mstep
