#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "mstep/errors.hpp"

namespace mstep {

/// Unsigned big integer, little-endian base-2^64 limbs, no leading zero limb.
/// Just enough arithmetic for exact accumulation of p * q^k at 2^116 scale.
class BigUint {
public:
    BigUint() = default;
    BigUint(std::uint64_t v) {
        if (v) limbs_.push_back(v);
    }

    static BigUint pow(std::uint64_t base, unsigned exp) {
        BigUint r(1);
        for (unsigned i = 0; i < exp; ++i) r = r.mul_small(base);
        return r;
    }

    bool is_zero() const { return limbs_.empty(); }

    BigUint add(const BigUint& o) const {
        BigUint r;
        std::size_t n = std::max(limbs_.size(), o.limbs_.size());
        r.limbs_.reserve(n + 1);
        unsigned __int128 carry = 0;
        for (std::size_t i = 0; i < n; ++i) {
            unsigned __int128 s = carry;
            if (i < limbs_.size()) s += limbs_[i];
            if (i < o.limbs_.size()) s += o.limbs_[i];
            r.limbs_.push_back(static_cast<std::uint64_t>(s));
            carry = s >> 64;
        }
        if (carry) r.limbs_.push_back(static_cast<std::uint64_t>(carry));
        return r;
    }

    /// this - o; requires this >= o.
    BigUint sub(const BigUint& o) const {
        if (cmp(o) < 0) throw domain_error("BigUint::sub underflow");
        BigUint r;
        r.limbs_.reserve(limbs_.size());
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            unsigned __int128 a = limbs_[i];
            unsigned __int128 b = (i < o.limbs_.size() ? o.limbs_[i] : 0);
            b += static_cast<std::uint64_t>(borrow);
            if (a >= b) {
                r.limbs_.push_back(static_cast<std::uint64_t>(a - b));
                borrow = 0;
            } else {
                unsigned __int128 radix = static_cast<unsigned __int128>(1) << 64;
                r.limbs_.push_back(static_cast<std::uint64_t>(a + radix - b));
                borrow = 1;
            }
        }
        r.trim();
        return r;
    }

    BigUint mul_small(std::uint64_t m) const {
        BigUint r;
        if (m == 0 || is_zero()) return r;
        r.limbs_.reserve(limbs_.size() + 1);
        unsigned __int128 carry = 0;
        for (std::uint64_t l : limbs_) {
            unsigned __int128 p = (unsigned __int128)l * m + carry;
            r.limbs_.push_back(static_cast<std::uint64_t>(p));
            carry = p >> 64;
        }
        if (carry) r.limbs_.push_back(static_cast<std::uint64_t>(carry));
        return r;
    }

    BigUint mul(const BigUint& o) const {
        BigUint r;
        if (is_zero() || o.is_zero()) return r;
        r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            unsigned __int128 carry = 0;
            for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
                unsigned __int128 p =
                    (unsigned __int128)limbs_[i] * o.limbs_[j] + r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<std::uint64_t>(p);
                carry = p >> 64;
            }
            std::size_t k = i + o.limbs_.size();
            while (carry) {
                unsigned __int128 p = (unsigned __int128)r.limbs_[k] + carry;
                r.limbs_[k] = static_cast<std::uint64_t>(p);
                carry = p >> 64;
                ++k;
            }
        }
        r.trim();
        return r;
    }

    int cmp(const BigUint& o) const {
        if (limbs_.size() != o.limbs_.size()) return limbs_.size() < o.limbs_.size() ? -1 : 1;
        for (std::size_t i = limbs_.size(); i-- > 0;)
            if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
        return 0;
    }

    bool operator==(const BigUint& o) const { return cmp(o) == 0; }
    bool operator<(const BigUint& o) const { return cmp(o) < 0; }

    /// Exact double of log2(this); requires nonzero.
    double log2() const {
        if (is_zero()) throw domain_error("log2 of zero");
        std::size_t top = limbs_.size() - 1;
        double mant = static_cast<double>(limbs_[top]);
        if (top >= 1) mant += static_cast<double>(limbs_[top - 1]) * std::pow(2.0, -64.0);
        if (top >= 2) mant += static_cast<double>(limbs_[top - 2]) * std::pow(2.0, -128.0);
        return std::log2(mant) + 64.0 * static_cast<double>(top);
    }

    bool fits_u64() const { return limbs_.size() <= 1; }
    std::uint64_t as_u64() const {
        if (!fits_u64()) throw domain_error("BigUint does not fit in 64 bits");
        return limbs_.empty() ? 0 : limbs_[0];
    }

    std::string to_string() const {  // decimal, for reports on toy scales
        if (is_zero()) return "0";
        std::vector<std::uint64_t> tmp = limbs_;
        std::string digits;
        while (!tmp.empty()) {
            unsigned __int128 rem = 0;
            for (std::size_t i = tmp.size(); i-- > 0;) {
                unsigned __int128 cur = (rem << 64) | tmp[i];
                tmp[i] = static_cast<std::uint64_t>(cur / 10);
                rem = cur % 10;
            }
            digits.push_back(static_cast<char>('0' + int(rem)));
            while (!tmp.empty() && tmp.back() == 0) tmp.pop_back();
        }
        return std::string(digits.rbegin(), digits.rend());
    }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }
    std::vector<std::uint64_t> limbs_;
};

/// Signed rational with exact arithmetic; denominators stay products of
/// testset sizes, so no reduction is needed at the scales involved.
class BigRat {
public:
    BigRat() : num_(0), den_(1), neg_(false) {}
    BigRat(std::uint64_t v) : num_(v), den_(1), neg_(false) {}
    static BigRat fraction(std::uint64_t num, std::uint64_t den) {
        if (den == 0) throw domain_error("zero denominator");
        BigRat r;
        r.num_ = BigUint(num);
        r.den_ = BigUint(den);
        return r;
    }
    static BigRat from_parts(BigUint num, BigUint den, bool neg) {
        if (den.is_zero()) throw domain_error("zero denominator");
        BigRat r;
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        r.neg_ = neg && !r.num_.is_zero();
        return r;
    }

    bool is_zero() const { return num_.is_zero(); }
    bool negative() const { return neg_; }
    const BigUint& num() const { return num_; }
    const BigUint& den() const { return den_; }

    BigRat add(const BigRat& o) const {
        // a/b + c/d = (ad + cb) / bd with sign handling on the numerator
        BigUint ad = num_.mul(o.den_);
        BigUint cb = o.num_.mul(den_);
        BigUint den = den_.mul(o.den_);
        if (neg_ == o.neg_) return from_parts(ad.add(cb), std::move(den), neg_);
        if (ad.cmp(cb) >= 0) return from_parts(ad.sub(cb), std::move(den), neg_);
        return from_parts(cb.sub(ad), std::move(den), o.neg_);
    }

    BigRat sub(const BigRat& o) const {
        BigRat t = o;
        if (!t.num_.is_zero()) t.neg_ = !t.neg_;
        return add(t);
    }

    BigRat mul_uint(const BigUint& m) const { return from_parts(num_.mul(m), den_, neg_); }

    /// Compare with sign.
    int cmp(const BigRat& o) const {
        if (neg_ != o.neg_) return neg_ ? -1 : 1;
        int c = num_.mul(o.den_).cmp(o.num_.mul(den_));
        return neg_ ? -c : c;
    }

    bool operator<(const BigRat& o) const { return cmp(o) < 0; }
    bool operator==(const BigRat& o) const { return cmp(o) == 0; }

    /// Exact equality with an integer.
    bool equals_u64(std::uint64_t v) const {
        if (neg_) return false;
        return num_ == den_.mul_small(v);
    }

    double log2() const {
        if (num_.is_zero() || neg_) throw domain_error("log2 of a nonpositive rational");
        return num_.log2() - den_.log2();
    }

    double to_double() const {
        if (num_.is_zero()) return 0.0;
        double v = std::exp2(num_.log2() - den_.log2());
        return neg_ ? -v : v;
    }

private:
    BigUint num_;
    BigUint den_;
    bool neg_ = false;
};

}  // namespace mstep
