#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mstep/errors.hpp"
#include "mstep/field.hpp"

namespace mstep {

/// Index of a variable within its universe.
using VarId = std::uint32_t;

/// An immutable, ordered set of named variables. Names must be unique;
/// the index order fixes the monomial-order convention x_i > x_j iff i < j.
class Universe {
public:
    static std::shared_ptr<const Universe> make(std::vector<std::string> names) {
        return std::shared_ptr<const Universe>(new Universe(std::move(names)));
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(VarId v) const { return names_.at(v); }

    std::optional<VarId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<std::string>& names() const { return names_; }

private:
    explicit Universe(std::vector<std::string> names) : names_(std::move(names)) {
        for (VarId i = 0; i < names_.size(); ++i) {
            auto [it, fresh] = index_.emplace(names_[i], i);
            (void)it;
            if (!fresh) throw domain_error("duplicate variable name: " + names_[i]);
        }
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, VarId> index_;
};

using UniversePtr = std::shared_ptr<const Universe>;

/// Polynomial ring context: coefficient field, variable universe and whether
/// exponents are kept in normal form modulo the field equations x^q = x.
/// With q = 2 and mod_field_eqs the monomials are squarefree and stored as
/// bitsets; every other combination stores one exponent byte per variable.
class Ring {
public:
    static std::shared_ptr<const Ring> make(Field field, UniversePtr vars,
                                            bool mod_field_eqs = true) {
        return std::shared_ptr<const Ring>(new Ring(field, std::move(vars), mod_field_eqs));
    }

    const Field& field() const { return field_; }
    unsigned q() const { return field_.q(); }
    const Universe& vars() const { return *vars_; }
    const UniversePtr& vars_ptr() const { return vars_; }
    std::size_t nvars() const { return vars_->size(); }
    bool mod_field_eqs() const { return modl_; }

    /// True when monomials are squarefree bitsets (one bit per variable).
    bool packed() const { return packed_; }

    /// Number of 64-bit words in a monomial of this ring.
    std::size_t words() const { return words_; }

    /// Words in a plain bit mask over the universe (used for variable-support sets).
    std::size_t mask_words() const { return (nvars() + 63) / 64; }

    void check_var(VarId v) const {
        if (v >= nvars())
            throw universe_error("variable id " + std::to_string(v) + " outside universe of size " +
                                 std::to_string(nvars()));
    }

private:
    Ring(Field field, UniversePtr vars, bool modl)
        : field_(field), vars_(std::move(vars)), modl_(modl) {
        packed_ = (field_.q() == 2 && modl_);
        std::size_t n = vars_->size();
        words_ = packed_ ? (n + 63) / 64 : (n + 7) / 8;
        if (words_ > 250) throw resource_error("variable universe too large for this build");
    }

    Field field_;
    UniversePtr vars_;
    bool modl_;
    bool packed_;
    std::size_t words_;
};

using RingPtr = std::shared_ptr<const Ring>;

inline void check_same_ring(const RingPtr& a, const RingPtr& b) {
    if (a.get() != b.get()) throw universe_error("values belong to different rings");
}

}  // namespace mstep
