#pragma once

#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstep/groebner.hpp"
#include "mstep/parse.hpp"

namespace mstep {

struct RegisterSpec {
    std::string name;
    std::uint32_t len = 0;
};

/// A stream cipher presented as explicit difference equations: register
/// lengths r_i, update polynomials f_i over the state variables, a keystream
/// polynomial g, and the warm-up clock count. The state variable universe is
/// name(0) .. name(r_i - 1) per register, in register order.
class DifferenceCipherSpec {
public:
    DifferenceCipherSpec(Field field, std::vector<RegisterSpec> regs,
                         const std::vector<std::string>& update_texts,
                         const std::string& keystream_text, std::uint32_t warmup)
        : regs_(std::move(regs)), warmup_(warmup) {
        if (regs_.empty()) throw domain_error("cipher needs at least one register");
        if (update_texts.size() != regs_.size())
            throw domain_error("one update polynomial per register required");
        std::vector<std::string> names;
        base_.reserve(regs_.size());
        for (const RegisterSpec& r : regs_) {
            if (r.len == 0) throw domain_error("register length must be positive");
            base_.push_back(static_cast<VarId>(names.size()));
            for (std::uint32_t j = 0; j < r.len; ++j)
                names.push_back(r.name + "(" + std::to_string(j) + ")");
        }
        ring_ = Ring::make(field, Universe::make(std::move(names)));
        for (const std::string& t : update_texts) update_.push_back(parse_polynomial(ring_, t));
        keystream_ = parse_polynomial(ring_, keystream_text);
    }

    const RingPtr& ring() const { return ring_; }
    const std::vector<RegisterSpec>& registers() const { return regs_; }
    const Polynomial& update(std::size_t i) const { return update_.at(i); }
    const Polynomial& keystream_poly() const { return keystream_; }
    std::uint32_t warmup() const { return warmup_; }
    std::uint32_t state_size() const { return static_cast<std::uint32_t>(ring_->nvars()); }

    VarId var_of(std::size_t reg, std::uint32_t offset) const {
        if (reg >= regs_.size() || offset >= regs_[reg].len)
            throw domain_error("register cell out of range");
        return base_[reg] + offset;
    }

    std::pair<std::size_t, std::uint32_t> cell_of(VarId v) const {
        for (std::size_t i = regs_.size(); i-- > 0;)
            if (v >= base_[i]) return {i, v - base_[i]};
        throw domain_error("variable outside the state");
    }

    nlohmann::json to_json() const {
        nlohmann::json regs = nlohmann::json::array();
        for (const RegisterSpec& r : regs_) regs.push_back({{"name", r.name}, {"len", r.len}});
        nlohmann::json upd = nlohmann::json::array();
        for (const Polynomial& f : update_) upd.push_back(to_string(f));
        return {{"q", ring_->q()},
                {"registers", std::move(regs)},
                {"update", std::move(upd)},
                {"keystream", to_string(keystream_)},
                {"warmup", warmup_}};
    }

    static DifferenceCipherSpec from_json(const nlohmann::json& j) {
        std::vector<RegisterSpec> regs;
        for (const auto& r : j.at("registers"))
            regs.push_back({r.at("name").get<std::string>(), r.at("len").get<std::uint32_t>()});
        std::vector<std::string> upd;
        for (const auto& u : j.at("update")) upd.push_back(u.get<std::string>());
        return DifferenceCipherSpec(Field(j.at("q").get<unsigned>()), std::move(regs), upd,
                                    j.at("keystream").get<std::string>(),
                                    j.at("warmup").get<std::uint32_t>());
    }

private:
    std::vector<RegisterSpec> regs_;
    std::vector<VarId> base_;
    std::uint32_t warmup_;
    RingPtr ring_;
    std::vector<Polynomial> update_;
    Polynomial keystream_;
};

/// Concrete register contents: one value per state variable, in universe order.
using State = std::vector<Coeff>;

/// The shift map sigma^t restricted to the finite state window: every
/// variable name(s) becomes name(s + t). Shifting past the end of a register
/// leaves the window and is rejected.
inline Polynomial shift(const DifferenceCipherSpec& spec, const Polynomial& p, std::uint32_t t) {
    if (t == 0) return p;
    const Ring& ring = *spec.ring();
    std::vector<RawTerm> raw;
    raw.reserve(p.term_count());
    for (const Term& tm : p.terms()) {
        RawTerm rt;
        rt.coeff = tm.coeff;
        bool ok = true;
        tm.mono.for_each_var(ring, [&](VarId v, unsigned e) {
            auto [reg, off] = spec.cell_of(v);
            if (off + t >= spec.registers()[reg].len) {
                ok = false;
                return;
            }
            rt.exponents.emplace_back(spec.var_of(reg, off + t), e);
        });
        if (!ok)
            throw domain_error("shift by " + std::to_string(t) + " leaves the state window");
        raw.push_back(std::move(rt));
    }
    return Polynomial::normalize(spec.ring(), raw);
}

/// A substitution endomorphism of the state algebra: images indexed by VarId.
struct EndoMap {
    RingPtr ring;
    std::vector<Polynomial> images;

    const Polynomial& image(VarId v) const { return images.at(v); }

    static EndoMap identity(const RingPtr& r) {
        EndoMap m{r, {}};
        for (VarId v = 0; v < r->nvars(); ++v) m.images.push_back(Polynomial::variable(r, v));
        return m;
    }
};

/// The one-clock state transition endomorphism: each cell maps to its right
/// neighbour and the last cell of register i maps to the update polynomial.
inline EndoMap transition_endo(const DifferenceCipherSpec& spec) {
    EndoMap m{spec.ring(), {}};
    m.images.reserve(spec.state_size());
    for (std::size_t reg = 0; reg < spec.registers().size(); ++reg) {
        std::uint32_t len = spec.registers()[reg].len;
        for (std::uint32_t j = 0; j + 1 < len; ++j)
            m.images.push_back(Polynomial::variable(spec.ring(), spec.var_of(reg, j + 1)));
        m.images.push_back(spec.update(reg));
    }
    return m;
}

/// Apply the substitution homomorphism to a polynomial. Single-monomial
/// images (the register shifts) translate monomials directly; only the few
/// boundary variables expand into polynomial products.
inline Polynomial apply_endo(const EndoMap& m, const Polynomial& p) {
    const RingPtr& ring = m.ring;
    check_same_ring(ring, p.ring());
    const Field& f = ring->field();
    std::vector<Term> acc;
    acc.reserve(p.term_count());
    std::vector<std::pair<const Polynomial*, unsigned>> general;
    std::vector<std::pair<VarId, unsigned>> translated;
    for (const Term& t : p.terms()) {
        general.clear();
        translated.clear();
        Coeff c = t.coeff;
        bool dead = false;
        t.mono.for_each_var(*ring, [&](VarId v, unsigned e) {
            const Polynomial& img = m.images[v];
            if (img.is_zero()) {
                dead = true;
            } else if (img.term_count() == 1) {
                const Term& it = img.terms()[0];
                c = f.mul(c, f.pow(it.coeff, e));
                it.mono.for_each_var(*ring, [&](VarId w, unsigned we) {
                    translated.emplace_back(w, we * e);
                });
            } else {
                general.emplace_back(&img, e);
            }
        });
        if (dead || c == 0) continue;
        Monomial base = Monomial::from_exponents(*ring, translated);
        if (general.empty()) {
            acc.push_back({std::move(base), c});
        } else {
            Polynomial prod = Polynomial::constant(ring, 1);
            for (auto [img, e] : general) prod = prod * img->pow(e);
            prod = prod.times_term(base, c);
            for (Term& pt : prod.mutable_terms()) acc.push_back(std::move(pt));
        }
    }
    Polynomial out(ring);
    out.mutable_terms() = std::move(acc);
    out.sort_combine();
    return out;
}

/// T^t applied by iterating the one-clock map.
inline Polynomial apply_endo_power(const EndoMap& m, Polynomial p, std::uint32_t t) {
    while (t--) p = apply_endo(m, p);
    return p;
}

/// Evaluate every image at a concrete state: the polynomial map behind the
/// endomorphism.
inline State apply_endo_state(const EndoMap& m, const State& s) {
    State out(m.images.size());
    for (std::size_t v = 0; v < m.images.size(); ++v)
        out[v] = m.images[v].eval(std::span<const Coeff>(s.data(), s.size()));
    return out;
}

struct InvertResult {
    std::optional<EndoMap> inverse;
    GeneratorSet basis;  // the product-order reduced basis that was examined
};

namespace detail {
/// Rebuild a polynomial in another ring, mapping variable v to var_map(v).
template <class VarMap>
Polynomial transplant(const Polynomial& p, const RingPtr& target, VarMap&& var_map) {
    std::vector<RawTerm> raw;
    raw.reserve(p.term_count());
    for (const Term& t : p.terms()) {
        RawTerm rt;
        rt.coeff = t.coeff;
        t.mono.for_each_var(*p.ring(), [&](VarId v, unsigned e) {
            rt.exponents.emplace_back(var_map(v), e);
        });
        raw.push_back(std::move(rt));
    }
    return Polynomial::normalize(target, raw);
}
}  // namespace detail

/// Invertibility test and inverse via the product-order Gröbner basis of
/// the graph ideal <x'_i - g_i> in the doubled plain polynomial ring. The
/// map is an automorphism iff the reduced basis has the shape {x_i - g'_i}
/// with every g'_i over the primed block; the g'_i then define the inverse.
inline InvertResult invert_endo(const EndoMap& m, const EngineLimits& limits = {}) {
    const RingPtr& ring = m.ring;
    const std::uint32_t r = static_cast<std::uint32_t>(ring->nvars());
    std::vector<std::string> names;
    names.reserve(2 * r);
    for (VarId v = 0; v < r; ++v) names.push_back(ring->vars().name(v));
    for (VarId v = 0; v < r; ++v) {
        std::string n = ring->vars().name(v);
        std::size_t paren = n.find('(');
        names.push_back(paren == std::string::npos ? n + "'"
                                                   : n.substr(0, paren) + "'" + n.substr(paren));
    }
    RingPtr qring = Ring::make(ring->field(), Universe::make(std::move(names)), false);

    std::vector<Polynomial> gens;
    gens.reserve(r);
    for (VarId v = 0; v < r; ++v) {
        Polynomial g = detail::transplant(m.images[v], qring, [](VarId w) { return w; });
        gens.push_back(Polynomial::variable(qring, r + v) - g);
    }
    GeneratorSet J = GeneratorSet::make(qring, MonomialOrder::product(r), std::move(gens));
    GBResult gb = groebner_complete(J, limits);

    InvertResult res;
    res.basis = gb.basis;
    if (gb.basis.size() != r) return res;
    std::vector<Polynomial> inv_images(r, Polynomial(ring));
    std::vector<bool> seen(r, false);
    for (const Polynomial& p : gb.basis.polys()) {
        std::size_t li = p.leading_index(J.order());
        const Monomial& lt = p.terms()[li].mono;
        if (lt.degree() != 1) return res;
        VarId v = 0;
        lt.for_each_var(*qring, [&](VarId w, unsigned) { v = w; });
        if (v >= r || seen[v]) return res;
        // the tail must live entirely in the primed block
        Polynomial tail = Polynomial::variable(qring, v) - p;
        bool primed_only = true;
        for (const Term& t : tail.terms())
            t.mono.for_each_var(*qring, [&](VarId w, unsigned) {
                if (w < r) primed_only = false;
            });
        if (!primed_only) return res;
        seen[v] = true;
        inv_images[v] = detail::transplant(tail, ring, [&](VarId w) { return w - r; });
    }
    res.inverse = EndoMap{ring, std::move(inv_images)};
    return res;
}

/// One concrete clock of the state.
inline State clock_state(const DifferenceCipherSpec& spec, const State& s) {
    State out(spec.state_size());
    std::span<const Coeff> view(s.data(), s.size());
    for (std::size_t reg = 0; reg < spec.registers().size(); ++reg) {
        std::uint32_t len = spec.registers()[reg].len;
        VarId base = spec.var_of(reg, 0);
        for (std::uint32_t j = 0; j + 1 < len; ++j) out[base + j] = s[base + j + 1];
        out[base + len - 1] = spec.update(reg).eval(view);
    }
    return out;
}

/// Keystream of length `count` after `warmup` silent clocks: b(t) = g(v(t)).
inline std::vector<Coeff> keystream(const DifferenceCipherSpec& spec, State s,
                                    std::uint32_t warmup, std::uint32_t count) {
    for (std::uint32_t t = 0; t < warmup; ++t) s = clock_state(spec, s);
    std::vector<Coeff> out;
    out.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        out.push_back(spec.keystream_poly().eval(std::span<const Coeff>(s.data(), s.size())));
        s = clock_state(spec, s);
    }
    return out;
}

/// The symbolic keystream polynomials T^t(g) for t in [from, from + count),
/// computed incrementally.
inline std::vector<Polynomial> keystream_images(const DifferenceCipherSpec& spec,
                                                std::uint32_t from, std::uint32_t count) {
    EndoMap T = transition_endo(spec);
    Polynomial cur = spec.keystream_poly();
    for (std::uint32_t t = 0; t < from; ++t) cur = apply_endo(T, cur);
    std::vector<Polynomial> out;
    out.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        out.push_back(cur);
        if (t + 1 < count) cur = apply_endo(T, cur);
    }
    return out;
}

/// Keystream ideal generators T^t(g) - b(t) for u <= t < u + h.
inline GeneratorSet keystream_ideal(const DifferenceCipherSpec& spec, std::uint32_t u,
                                    std::uint32_t h, std::span<const Coeff> observed) {
    if (observed.size() != h) throw domain_error("observed keystream length must equal h");
    std::vector<Polynomial> imgs = keystream_images(spec, u, h);
    for (std::uint32_t t = 0; t < h; ++t)
        imgs[t] = imgs[t] - Polynomial::constant(spec.ring(), observed[t]);
    return GeneratorSet::make(spec.ring(), MonomialOrder::degrevlex(), std::move(imgs));
}

struct AttackSystem {
    GeneratorSet system;
    std::vector<std::pair<VarId, Polynomial>> eliminated;
    std::uint32_t variables = 0;  // distinct variables occurring in the system
};

/// Build the u=0 keystream system and eliminate variables through the
/// leading run of linear generators (each solves for its highest variable).
/// Harvesting stops at the first nonlinear generator.
inline AttackSystem attack_system(const DifferenceCipherSpec& spec,
                                  std::span<const Coeff> observed) {
    const RingPtr& ring = spec.ring();
    std::vector<Polynomial> imgs =
        keystream_images(spec, 0, static_cast<std::uint32_t>(observed.size()));
    for (std::size_t t = 0; t < observed.size(); ++t)
        imgs[t] = imgs[t] - Polynomial::constant(ring, observed[t]);

    AttackSystem out;
    std::vector<const Polynomial*> images(ring->nvars(), nullptr);
    std::vector<Polynomial> exprs;
    exprs.reserve(observed.size());
    std::size_t t = 0;
    bool harvesting = true;
    std::vector<Polynomial> rest;
    for (; t < imgs.size(); ++t) {
        Polynomial p = imgs[t].substitute_polys(images);
        if (harvesting && p.is_zero()) continue;
        if (harvesting && p.degree() <= 1 && !p.is_constant()) {
            // solve for the highest occurring variable
            VarId v = 0;
            Coeff cv = 0;
            for (const Term& tm : p.terms())
                tm.mono.for_each_var(*ring, [&](VarId w, unsigned) {
                    if (w >= v) {
                        v = w;
                        cv = tm.coeff;
                    }
                });
            Polynomial vpoly = Polynomial::variable(ring, v);
            Polynomial expr = vpoly - p.times_term(Monomial(*ring), ring->field().inv(cv));
            exprs.push_back(std::move(expr));
            images[v] = &exprs.back();
            out.eliminated.emplace_back(v, exprs.back());
            continue;
        }
        if (harvesting && p.is_constant() && !p.is_zero()) {
            // contradictory keystream: the ideal is the unit ideal
            out.system = GeneratorSet::make(ring, MonomialOrder::degrevlex(),
                                            {Polynomial::constant(ring, 1)});
            return out;
        }
        harvesting = false;
        rest.push_back(std::move(p));
    }
    out.system = GeneratorSet::make(ring, MonomialOrder::degrevlex(), std::move(rest));
    out.variables = static_cast<std::uint32_t>(out.system.support_count());
    return out;
}

inline std::string state_to_string(const State& s) {
    std::string out;
    out.reserve(s.size());
    for (Coeff c : s) out.push_back(static_cast<char>('0' + c));
    return out;
}

inline State state_from_string(const RingPtr& ring, std::string_view text) {
    if (text.size() != ring->nvars())
        throw domain_error("state string length must equal the state size");
    State s;
    s.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c >= char('0' + int(ring->q())))
            throw parse_error("state character out of range", i);
        s.push_back(static_cast<Coeff>(c - '0'));
    }
    return s;
}

}  // namespace mstep
