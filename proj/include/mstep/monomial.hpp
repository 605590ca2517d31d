#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <utility>
#include <vector>

#include "mstep/ring.hpp"

namespace mstep {

/// Monomial order selector. Product splits the universe at `split`;
/// the first block dominates and both blocks compare DegRevLex.
struct MonomialOrder {
    enum class Kind : std::uint8_t { DegRevLex, Lex, Product };
    Kind kind = Kind::DegRevLex;
    VarId split = 0;

    static MonomialOrder degrevlex() { return {Kind::DegRevLex, 0}; }
    static MonomialOrder lex() { return {Kind::Lex, 0}; }
    static MonomialOrder product(VarId split) { return {Kind::Product, split}; }

    bool operator==(const MonomialOrder&) const = default;
};

/// Exponent vector in normal form for its ring. Packed rings store one bit
/// per variable (squarefree), other rings one byte per variable. Up to five
/// 64-bit words live inline; larger universes go to the heap.
class Monomial {
    static constexpr unsigned kInline = 5;

public:
    Monomial() : deg_(0), nw_(0), heap_(0) {}

    explicit Monomial(const Ring& ring) : deg_(0), nw_(0), heap_(0) { resize(ring.words()); }

    Monomial(const Monomial& o) : deg_(o.deg_), nw_(o.nw_), heap_(0) {
        if (o.heap_) {
            p_ = new std::uint64_t[nw_];
            heap_ = 1;
            std::memcpy(p_, o.p_, nw_ * 8);
        } else {
            std::memcpy(w_, o.w_, sizeof(w_));
        }
    }

    Monomial(Monomial&& o) noexcept : deg_(o.deg_), nw_(o.nw_), heap_(o.heap_) {
        if (heap_) {
            p_ = o.p_;
            o.heap_ = 0;
            o.nw_ = 0;
        } else {
            std::memcpy(w_, o.w_, sizeof(w_));
        }
    }

    Monomial& operator=(const Monomial& o) {
        if (this != &o) {
            Monomial tmp(o);
            *this = std::move(tmp);
        }
        return *this;
    }

    Monomial& operator=(Monomial&& o) noexcept {
        if (this != &o) {
            release();
            deg_ = o.deg_;
            nw_ = o.nw_;
            heap_ = o.heap_;
            if (heap_) {
                p_ = o.p_;
                o.heap_ = 0;
                o.nw_ = 0;
            } else {
                std::memcpy(w_, o.w_, sizeof(w_));
            }
        }
        return *this;
    }

    ~Monomial() { release(); }

    std::uint32_t degree() const { return deg_; }
    bool is_one() const { return deg_ == 0; }
    unsigned word_count() const { return nw_; }

    const std::uint64_t* words() const { return heap_ ? p_ : w_; }
    std::uint64_t* words() { return heap_ ? p_ : w_; }

    bool operator==(const Monomial& o) const {
        if (deg_ != o.deg_ || nw_ != o.nw_) return false;
        return std::memcmp(words(), o.words(), nw_ * 8) == 0;
    }
    bool operator!=(const Monomial& o) const { return !(*this == o); }

    /// Exponent of variable v under the ring's layout.
    unsigned exponent(const Ring& ring, VarId v) const {
        if (ring.packed()) return (words()[v >> 6] >> (v & 63)) & 1u;
        return bytes()[v];
    }

    /// Build from (variable, exponent) pairs, applying the ring's exponent
    /// normal form when the ring is kept modulo the field equations.
    static Monomial from_exponents(const Ring& ring,
                                   std::span<const std::pair<VarId, unsigned>> exps) {
        Monomial m(ring);
        for (auto [v, e] : exps) {
            ring.check_var(v);
            if (e == 0) continue;
            unsigned cur = m.exponent(ring, v);
            unsigned ne = cur + e;
            if (ring.mod_field_eqs()) ne = ring.field().reduce_exp(ne);
            if (ne > 255) throw resource_error("monomial exponent overflow");
            m.set_exponent(ring, v, ne);
        }
        return m;
    }

    /// Recompute the cached degree after direct word edits.
    void recount_degree(const Ring& ring) {
        std::uint32_t d = 0;
        if (ring.packed()) {
            for (unsigned i = 0; i < nw_; ++i) d += std::popcount(words()[i]);
        } else {
            const std::uint8_t* p = bytes();
            for (std::size_t v = 0, n = ring.nvars(); v < n; ++v) d += p[v];
        }
        deg_ = d;
    }

    void set_exponent(const Ring& ring, VarId v, unsigned e) {
        if (ring.packed()) {
            std::uint64_t bit = std::uint64_t(1) << (v & 63);
            std::uint64_t& w = words()[v >> 6];
            deg_ -= static_cast<std::uint32_t>((w >> (v & 63)) & 1u);
            w = e ? (w | bit) : (w & ~bit);
            deg_ += static_cast<std::uint32_t>(e ? 1 : 0);
        } else {
            std::uint8_t& b = bytes()[v];
            deg_ = deg_ - b + e;
            b = static_cast<std::uint8_t>(e);
        }
    }

    /// Product m1*m2 in the ring's normal form.
    static Monomial mul(const Ring& ring, const Monomial& a, const Monomial& b) {
        Monomial r(ring);
        if (ring.packed()) {
            std::uint32_t d = 0;
            for (unsigned i = 0; i < r.nw_; ++i) {
                r.words()[i] = a.words()[i] | b.words()[i];
                d += std::popcount(r.words()[i]);
            }
            r.deg_ = d;
        } else {
            const std::uint8_t* pa = a.bytes();
            const std::uint8_t* pb = b.bytes();
            std::uint8_t* pr = r.bytes();
            std::size_t n = ring.nvars();
            std::uint32_t d = 0;
            const bool modl = ring.mod_field_eqs();
            for (std::size_t v = 0; v < n; ++v) {
                unsigned e = unsigned(pa[v]) + unsigned(pb[v]);
                if (modl) e = ring.field().reduce_exp(e);
                if (e > 255) throw resource_error("monomial exponent overflow");
                pr[v] = static_cast<std::uint8_t>(e);
                d += e;
            }
            r.deg_ = d;
        }
        return r;
    }

    /// True iff b divides a exponentwise (true-ring divisibility).
    static bool divides(const Ring& ring, const Monomial& b, const Monomial& a) {
        if (b.deg_ > a.deg_) return false;
        if (ring.packed()) {
            for (unsigned i = 0; i < a.nw_; ++i)
                if (b.words()[i] & ~a.words()[i]) return false;
            return true;
        }
        const std::uint8_t* pa = a.bytes();
        const std::uint8_t* pb = b.bytes();
        for (std::size_t v = 0, n = ring.nvars(); v < n; ++v)
            if (pb[v] > pa[v]) return false;
        return true;
    }

    /// Exact quotient a/b; caller guarantees divisibility.
    static Monomial div(const Ring& ring, const Monomial& a, const Monomial& b) {
        Monomial r(ring);
        if (ring.packed()) {
            std::uint32_t d = 0;
            for (unsigned i = 0; i < r.nw_; ++i) {
                r.words()[i] = a.words()[i] & ~b.words()[i];
                d += std::popcount(r.words()[i]);
            }
            r.deg_ = d;
        } else {
            const std::uint8_t* pa = a.bytes();
            const std::uint8_t* pb = b.bytes();
            std::uint8_t* pr = r.bytes();
            for (std::size_t v = 0, n = ring.nvars(); v < n; ++v)
                pr[v] = static_cast<std::uint8_t>(pa[v] - pb[v]);
            r.deg_ = a.deg_ - b.deg_;
        }
        return r;
    }

    static Monomial lcm(const Ring& ring, const Monomial& a, const Monomial& b) {
        if (ring.packed()) return mul(ring, a, b);
        Monomial r(ring);
        const std::uint8_t* pa = a.bytes();
        const std::uint8_t* pb = b.bytes();
        std::uint8_t* pr = r.bytes();
        std::uint32_t d = 0;
        for (std::size_t v = 0, n = ring.nvars(); v < n; ++v) {
            pr[v] = pa[v] > pb[v] ? pa[v] : pb[v];
            d += pr[v];
        }
        r.deg_ = d;
        return r;
    }

    static bool coprime(const Ring& ring, const Monomial& a, const Monomial& b) {
        if (ring.packed()) {
            for (unsigned i = 0; i < a.nw_; ++i)
                if (a.words()[i] & b.words()[i]) return false;
            return true;
        }
        const std::uint8_t* pa = a.bytes();
        const std::uint8_t* pb = b.bytes();
        for (std::size_t v = 0, n = ring.nvars(); v < n; ++v)
            if (pa[v] && pb[v]) return false;
        return true;
    }

    /// OR the occurring variables into a per-variable bit mask.
    void support_into(const Ring& ring, std::vector<std::uint64_t>& mask) const {
        if (ring.packed()) {
            for (unsigned i = 0; i < nw_; ++i) mask[i] |= words()[i];
        } else {
            const std::uint8_t* p = bytes();
            for (std::size_t v = 0, n = ring.nvars(); v < n; ++v)
                if (p[v]) mask[v >> 6] |= std::uint64_t(1) << (v & 63);
        }
    }

    template <class Fn>
    void for_each_var(const Ring& ring, Fn&& fn) const {
        if (ring.packed()) {
            for (unsigned i = 0; i < nw_; ++i) {
                std::uint64_t w = words()[i];
                while (w) {
                    unsigned b = std::countr_zero(w);
                    fn(static_cast<VarId>(i * 64 + b), 1u);
                    w &= w - 1;
                }
            }
        } else {
            const std::uint8_t* p = bytes();
            for (std::size_t v = 0, n = ring.nvars(); v < n; ++v)
                if (p[v]) fn(static_cast<VarId>(v), unsigned(p[v]));
        }
    }

    /// Compare under `ord`: -1 if a < b, 0 if equal, +1 if a > b.
    static int compare(const Ring& ring, const MonomialOrder& ord, const Monomial& a,
                       const Monomial& b) {
        const VarId n = static_cast<VarId>(ring.nvars());
        switch (ord.kind) {
            case MonomialOrder::Kind::DegRevLex:
                return degrevlex_block(ring, a, b, 0, n);
            case MonomialOrder::Kind::Lex:
                return lex_block(ring, a, b, 0, n);
            case MonomialOrder::Kind::Product: {
                int c = degrevlex_block(ring, a, b, 0, ord.split);
                if (c) return c;
                return degrevlex_block(ring, a, b, ord.split, n);
            }
        }
        return 0;
    }

    /// Canonical order used for term storage: global DegRevLex.
    static int canonical_compare(const Ring& ring, const Monomial& a, const Monomial& b) {
        if (a.deg_ != b.deg_) return a.deg_ < b.deg_ ? -1 : 1;
        if (ring.packed()) {
            const std::uint64_t* pa = a.words();
            const std::uint64_t* pb = b.words();
            for (int i = int(a.nw_) - 1; i >= 0; --i) {
                std::uint64_t x = pa[i] ^ pb[i];
                if (x) {
                    unsigned bit = 63 - std::countl_zero(x);
                    // highest differing variable: lacking it makes the monomial larger
                    return (pa[i] >> bit) & 1u ? -1 : 1;
                }
            }
            return 0;
        }
        return degrevlex_block(ring, a, b, 0, static_cast<VarId>(ring.nvars()));
    }

private:
    static int degrevlex_block(const Ring& ring, const Monomial& a, const Monomial& b, VarId lo,
                               VarId hi) {
        if (lo == 0 && hi == ring.nvars() && a.deg_ != b.deg_) return a.deg_ < b.deg_ ? -1 : 1;
        if (ring.packed()) {
            unsigned da = popcount_range(a, lo, hi);
            unsigned db = popcount_range(b, lo, hi);
            if (da != db) return da < db ? -1 : 1;
            // scan for the highest differing variable in [lo, hi)
            int wlo = lo >> 6, whi = (hi + 63) >> 6;
            for (int i = whi - 1; i >= wlo; --i) {
                std::uint64_t m = range_mask(i, lo, hi);
                std::uint64_t x = (a.words()[i] ^ b.words()[i]) & m;
                if (x) {
                    unsigned bit = 63 - std::countl_zero(x);
                    return (a.words()[i] >> bit) & 1u ? -1 : 1;
                }
            }
            return 0;
        }
        const std::uint8_t* pa = a.bytes();
        const std::uint8_t* pb = b.bytes();
        unsigned da = 0, db = 0;
        for (VarId v = lo; v < hi; ++v) {
            da += pa[v];
            db += pb[v];
        }
        if (da != db) return da < db ? -1 : 1;
        for (VarId v = hi; v-- > lo;)
            if (pa[v] != pb[v]) return pa[v] < pb[v] ? 1 : -1;
        return 0;
    }

    static int lex_block(const Ring& ring, const Monomial& a, const Monomial& b, VarId lo,
                         VarId hi) {
        if (ring.packed()) {
            int wlo = lo >> 6, whi = (hi + 63) >> 6;
            for (int i = wlo; i < whi; ++i) {
                std::uint64_t m = range_mask(i, lo, hi);
                std::uint64_t x = (a.words()[i] ^ b.words()[i]) & m;
                if (x) {
                    unsigned bit = std::countr_zero(x);
                    return (a.words()[i] >> bit) & 1u ? 1 : -1;
                }
            }
            return 0;
        }
        const std::uint8_t* pa = a.bytes();
        const std::uint8_t* pb = b.bytes();
        for (VarId v = lo; v < hi; ++v)
            if (pa[v] != pb[v]) return pa[v] > pb[v] ? 1 : -1;
        return 0;
    }

    static unsigned popcount_range(const Monomial& m, VarId lo, VarId hi) {
        unsigned c = 0;
        int wlo = lo >> 6, whi = int((hi + 63) >> 6);
        for (int i = wlo; i < whi; ++i) c += std::popcount(m.words()[i] & range_mask(i, lo, hi));
        return c;
    }

    static std::uint64_t range_mask(int word, VarId lo, VarId hi) {
        std::uint64_t m = ~std::uint64_t(0);
        VarId wlo = VarId(word) * 64;
        if (lo > wlo) m &= ~std::uint64_t(0) << (lo - wlo);
        if (hi < wlo + 64) m &= (hi == wlo) ? 0 : (~std::uint64_t(0) >> (wlo + 64 - hi));
        return m;
    }

    const std::uint8_t* bytes() const { return reinterpret_cast<const std::uint8_t*>(words()); }
    std::uint8_t* bytes() { return reinterpret_cast<std::uint8_t*>(words()); }

    void resize(std::size_t nwords) {
        release();
        nw_ = static_cast<std::uint8_t>(nwords);
        if (nwords > kInline) {
            p_ = new std::uint64_t[nwords]();
            heap_ = 1;
        } else {
            heap_ = 0;
            std::memset(w_, 0, sizeof(w_));
        }
        deg_ = 0;
    }

    void release() {
        if (heap_) {
            delete[] p_;
            heap_ = 0;
        }
    }

    std::uint32_t deg_;
    std::uint8_t nw_;
    std::uint8_t heap_;
    union {
        std::uint64_t w_[kInline];
        std::uint64_t* p_;
    };
};

}  // namespace mstep
