#pragma once

#include <array>
#include <cstdint>

#include "mstep/errors.hpp"

namespace mstep {

/// Coefficient value in GF(q), stored as its canonical representative 0..q-1.
using Coeff = std::uint8_t;

/// GF(q) scalar arithmetic. q = 2 is the optimized case; odd primes up to 7
/// are supported at correctness grade via lookup tables. Other prime powers
/// (which would need extension-field arithmetic) are rejected.
class Field {
public:
    explicit Field(unsigned q) : q_(q) {
        if (q != 2 && q != 3 && q != 5 && q != 7)
            throw domain_error("unsupported field size q=" + std::to_string(q) +
                               " (supported: 2, 3, 5, 7)");
        for (unsigned a = 0; a < q; ++a) {
            for (unsigned b = 0; b < q; ++b) {
                mul_[a][b] = static_cast<Coeff>((a * b) % q);
                if (mul_[a][b] == 1) inv_[a] = static_cast<Coeff>(b);
            }
            neg_[a] = static_cast<Coeff>((q - a) % q);
        }
        inv_[0] = 0;
    }

    unsigned q() const { return q_; }

    Coeff add(Coeff a, Coeff b) const {
        unsigned s = unsigned(a) + unsigned(b);
        return static_cast<Coeff>(s >= q_ ? s - q_ : s);
    }
    Coeff sub(Coeff a, Coeff b) const { return add(a, neg_[b]); }
    Coeff neg(Coeff a) const { return neg_[a]; }
    Coeff mul(Coeff a, Coeff b) const { return mul_[a][b]; }
    Coeff inv(Coeff a) const {
        if (a == 0) throw domain_error("inverse of zero");
        return inv_[a];
    }

    Coeff pow(Coeff a, unsigned e) const {
        if (e == 0) return 1;
        Coeff r = 1;
        while (e--) r = mul(r, a);
        return r;
    }

    /// Canonical representative of an arbitrary integer.
    Coeff from_int(long long v) const {
        long long m = v % static_cast<long long>(q_);
        if (m < 0) m += q_;
        return static_cast<Coeff>(m);
    }

    /// Exponent normal form modulo x^q = x: e >= 1 maps to ((e-1) mod (q-1)) + 1.
    unsigned reduce_exp(unsigned e) const {
        if (e <= 1) return e;
        return (e - 1) % (q_ - 1) + 1;
    }

    bool operator==(const Field& o) const { return q_ == o.q_; }

private:
    unsigned q_;
    std::array<std::array<Coeff, 8>, 8> mul_{};
    std::array<Coeff, 8> inv_{};
    std::array<Coeff, 8> neg_{};
};

}  // namespace mstep
