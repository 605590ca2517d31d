#pragma once

#include <array>
#include <cstdint>

#include "mstep/dsc.hpp"
#include "mstep/multistep.hpp"

namespace mstep {

/// The 288-bit Trivium difference system: three quadratic update equations
/// and the linear keystream polynomial, warm-up 4 * 288 = 1152.
inline const DifferenceCipherSpec& trivium_spec() {
    static const DifferenceCipherSpec spec(
        Field(2), {{"x", 93}, {"y", 84}, {"z", 111}},
        {"z(0) + x(24) + z(45) + z(1)*z(2)", "x(0) + y(6) + x(27) + x(1)*x(2)",
         "y(0) + y(15) + z(24) + y(1)*y(2)"},
        "x(0) + x(27) + y(0) + y(15) + z(0) + z(45)", 1152);
    return spec;
}

/// Bit-packed Trivium state: x in bits 0..92, y in 0..83, z in 0..110 of
/// two words per register. Cell j of a register is bit j; clocking shifts
/// every register down one bit and feeds the update value into the top cell.
class TriviumBits {
public:
    TriviumBits() : x_{0, 0}, y_{0, 0}, z_{0, 0} {}

    static TriviumBits from_state(const State& s) {
        if (s.size() != 288) throw domain_error("trivium state must have 288 bits");
        TriviumBits t;
        for (unsigned j = 0; j < 93; ++j) t.set(t.x_, j, s[j]);
        for (unsigned j = 0; j < 84; ++j) t.set(t.y_, j, s[93 + j]);
        for (unsigned j = 0; j < 111; ++j) t.set(t.z_, j, s[177 + j]);
        return t;
    }

    State to_state() const {
        State s(288);
        for (unsigned j = 0; j < 93; ++j) s[j] = get(x_, j);
        for (unsigned j = 0; j < 84; ++j) s[93 + j] = get(y_, j);
        for (unsigned j = 0; j < 111; ++j) s[177 + j] = get(z_, j);
        return s;
    }

    /// Keystream bit of the current state.
    unsigned output() const {
        return get(x_, 0) ^ get(x_, 27) ^ get(y_, 0) ^ get(y_, 15) ^ get(z_, 0) ^ get(z_, 45);
    }

    void clock() {
        unsigned tx = get(z_, 0) ^ get(x_, 24) ^ get(z_, 45) ^ (get(z_, 1) & get(z_, 2));
        unsigned ty = get(x_, 0) ^ get(y_, 6) ^ get(x_, 27) ^ (get(x_, 1) & get(x_, 2));
        unsigned tz = get(y_, 0) ^ get(y_, 15) ^ get(z_, 24) ^ (get(y_, 1) & get(y_, 2));
        shift_down(x_);
        shift_down(y_);
        shift_down(z_);
        set(x_, 92, tx);
        set(y_, 83, ty);
        set(z_, 110, tz);
    }

private:
    using Reg = std::array<std::uint64_t, 2>;

    static unsigned get(const Reg& r, unsigned j) { return (r[j >> 6] >> (j & 63)) & 1u; }
    static void set(Reg& r, unsigned j, unsigned v) {
        std::uint64_t bit = std::uint64_t(1) << (j & 63);
        if (v)
            r[j >> 6] |= bit;
        else
            r[j >> 6] &= ~bit;
    }
    static void shift_down(Reg& r) {
        r[0] = (r[0] >> 1) | (r[1] << 63);
        r[1] >>= 1;
    }

    Reg x_, y_, z_;
};

/// Fast bit-level twin of keystream(): emits b(0..clocks) and the final state.
inline std::pair<State, std::vector<Coeff>> trivium_bits(const State& s, std::uint32_t clocks) {
    TriviumBits t = TriviumBits::from_state(s);
    std::vector<Coeff> bits;
    bits.reserve(clocks);
    for (std::uint32_t i = 0; i < clocks; ++i) {
        bits.push_back(static_cast<Coeff>(t.output()));
        t.clock();
    }
    return {t.to_state(), std::move(bits)};
}

/// The stepwise evaluation sets from the attack configuration: the 73
/// always-guessed variables and the 43 variables appended one step at a
/// time. Together they form the 116 evaluated variables.
inline const std::vector<std::string>& trivium_guess_primary() {
    static const std::vector<std::string> v = [] {
        std::vector<std::string> names;
        for (unsigned i = 2; i <= 44; i += 3) {
            names.push_back("x(" + std::to_string(i) + ")");
            names.push_back("y(" + std::to_string(i) + ")");
            names.push_back("z(" + std::to_string(i) + ")");
        }
        for (unsigned i = 47; i <= 80; i += 3) {
            names.push_back("x(" + std::to_string(i) + ")");
            names.push_back("y(" + std::to_string(i) + ")");
        }
        names.push_back("x(83)");
        names.push_back("x(86)");
        names.push_back("x(89)");
        names.push_back("x(92)");
        return names;
    }();
    return v;
}

inline const std::vector<std::string>& trivium_guess_secondary() {
    static const std::vector<std::string> v = [] {
        std::vector<std::string> names;
        for (unsigned i = 3; i <= 42; i += 3) {
            names.push_back("x(" + std::to_string(i) + ")");
            names.push_back("y(" + std::to_string(i) + ")");
            names.push_back("z(" + std::to_string(i) + ")");
        }
        names.push_back("y(45)");
        return names;
    }();
    return v;
}

/// FNV-1a over the comma-joined guess lists; transcription guard.
inline std::uint64_t trivium_guess_checksum() {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](const std::vector<std::string>& names) {
        for (const std::string& n : names) {
            for (char c : n) {
                h ^= static_cast<unsigned char>(c);
                h *= 1099511628211ull;
            }
            h ^= static_cast<unsigned char>(',');
            h *= 1099511628211ull;
        }
    };
    feed(trivium_guess_primary());
    feed(trivium_guess_secondary());
    return h;
}

/// Guess variables in stepwise order (primary block then secondary block),
/// as VarIds of the Trivium state ring.
inline std::vector<VarId> trivium_guess_vars() {
    const DifferenceCipherSpec& spec = trivium_spec();
    std::vector<VarId> out;
    auto push = [&](const std::vector<std::string>& names) {
        for (const std::string& n : names) {
            auto v = spec.ring()->vars().find(n);
            if (!v) throw domain_error("guess variable missing from state: " + n);
            out.push_back(*v);
        }
    };
    push(trivium_guess_primary());
    push(trivium_guess_secondary());
    return out;
}

/// The keystream system for a 240-bit observation: the first 66 generators
/// are independent linear polynomials and eliminate z(45..110), leaving a
/// system over 222 variables of degree at most 5.
inline AttackSystem trivium_attack_system(std::span<const Coeff> observed) {
    if (observed.size() != 240) throw domain_error("the attack uses exactly 240 keystream bits");
    AttackSystem sys = attack_system(trivium_spec(), observed);
    if (sys.eliminated.size() != 66)
        throw error("expected 66 linear eliminations, got " +
                    std::to_string(sys.eliminated.size()));
    if (sys.variables != 222)
        throw error("expected 222 remaining variables, got " + std::to_string(sys.variables));
    return sys;
}

/// Full multistep plan over the stepwise evaluation order. The first step
/// drops the last ten secondary variables (k = 106); every further step adds
/// one of them back.
inline GuessPlan trivium_guess_plan(std::uint32_t B, std::uint32_t D, std::uint32_t k_first,
                                    std::uint32_t k_last) {
    if (k_first < 106 || k_last > 116 || k_first > k_last)
        throw domain_error("full-scale steps must satisfy 106 <= k_first <= k_last <= 116");
    GuessPlan plan;
    plan.guess_vars = trivium_guess_vars();
    for (std::uint32_t k = k_first; k <= k_last; ++k) plan.steps.push_back(k);
    plan.B = B;
    plan.D = D;
    return plan;
}

/// Desk-scale Trivium-shaped cipher: three registers with proportionally
/// scaled taps, the same cross-register wiring and quadratic feedback, and a
/// verified invertible transition. Deterministic for fixed parameters.
inline DifferenceCipherSpec reduced_trivium(std::uint32_t r1, std::uint32_t r2, std::uint32_t r3,
                                            std::uint64_t seed = 0) {
    if (r1 < 4 || r2 < 4 || r3 < 4)
        throw domain_error("reduced registers need at least 4 cells for the tap pattern");
    auto scale = [](std::uint32_t off, std::uint32_t from, std::uint32_t to) -> std::uint32_t {
        std::uint32_t s = static_cast<std::uint32_t>(std::uint64_t(off) * to / from);
        return s;
    };
    auto clamp_tap = [](std::uint32_t tap, std::uint32_t len) {
        return std::max<std::uint32_t>(1, std::min(tap, len - 1));
    };
    CounterRng rng(seed);
    for (unsigned attempt = 0; attempt < 32; ++attempt) {
        std::uint32_t jitter = attempt == 0 ? 0 : unsigned(rng.below(3));
        auto tap = [&](std::uint32_t off, std::uint32_t from, std::uint32_t to) {
            return clamp_tap(scale(off, from, to) + (attempt ? jitter : 0), to);
        };
        std::uint32_t x_own = tap(24, 93, r1);
        std::uint32_t z_in_x = tap(45, 111, r3);
        std::uint32_t y_own = tap(6, 84, r2);
        std::uint32_t x_in_y = tap(27, 93, r1);
        std::uint32_t z_own = tap(24, 111, r3);
        std::uint32_t y_in_z = tap(15, 84, r2);
        auto cell = [](const char* reg, std::uint32_t j) {
            return std::string(reg) + "(" + std::to_string(j) + ")";
        };
        std::string fx = cell("z", 0) + " + " + cell("x", x_own) + " + " + cell("z", z_in_x) +
                         " + " + cell("z", 1) + "*" + cell("z", 2);
        std::string fy = cell("x", 0) + " + " + cell("y", y_own) + " + " + cell("x", x_in_y) +
                         " + " + cell("x", 1) + "*" + cell("x", 2);
        std::string fz = cell("y", 0) + " + " + cell("y", y_in_z) + " + " + cell("z", z_own) +
                         " + " + cell("y", 1) + "*" + cell("y", 2);
        std::string g = cell("x", 0) + " + " + cell("x", x_in_y) + " + " + cell("y", 0) + " + " +
                        cell("y", y_in_z) + " + " + cell("z", 0) + " + " + cell("z", z_in_x);
        try {
            DifferenceCipherSpec spec(Field(2), {{"x", r1}, {"y", r2}, {"z", r3}}, {fx, fy, fz},
                                      g, 4 * (r1 + r2 + r3));
            if (invert_endo(transition_endo(spec)).inverse) return spec;
        } catch (const domain_error&) {
            // fall through to the next perturbation
        }
    }
    throw error("could not construct an invertible reduced cipher for these parameters");
}

/// Cap on the keystream length for desk-scale attacks: twice the state size.
inline std::uint32_t reduced_default_h(const DifferenceCipherSpec& spec) {
    return 2 * spec.state_size();
}

/// A desk-scale attack instance: a planted state, the shortest keystream
/// prefix that pins it down uniquely (verified by exhaustive enumeration,
/// capped at twice the state size), and the preprocessed keystream system.
struct DeskInstance {
    State state;
    std::vector<Coeff> bits;
    AttackSystem attack;
    std::vector<VarId> free_vars;  // variables occurring in the system, ascending
};

inline std::optional<DeskInstance> make_desk_instance(const DifferenceCipherSpec& spec,
                                                      CounterRng& rng,
                                                      std::uint32_t h_cap = 0) {
    const std::uint32_t r = spec.state_size();
    if (r > 24) throw resource_error("exhaustive uniqueness check is desk-scale only (r <= 24)");
    if (spec.ring()->q() != 2) throw domain_error("desk instances assume GF(2)");
    const std::uint32_t cap = h_cap ? h_cap : reduced_default_h(spec);

    State s(r);
    for (auto& c : s) c = static_cast<Coeff>(rng.bit());
    std::vector<Coeff> ks = keystream(spec, s, 0, cap);

    // shortest prefix separating s from every other state
    const std::size_t nregs = spec.registers().size();
    std::uint32_t h_unique = 1;
    std::uint64_t s_index = 0;
    for (std::uint32_t b = 0; b < r; ++b) s_index |= std::uint64_t(s[b]) << b;
    State w(r), nw(r);
    for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << r); ++idx) {
        if (idx == s_index) continue;
        for (std::uint32_t b = 0; b < r; ++b) w[b] = static_cast<Coeff>((idx >> b) & 1);
        std::uint32_t match = 0;
        while (match < cap &&
               spec.keystream_poly().eval(std::span<const Coeff>(w.data(), r)) == ks[match]) {
            std::span<const Coeff> wview(w.data(), r);
            for (std::size_t reg = 0; reg < nregs; ++reg) {
                std::uint32_t len = spec.registers()[reg].len;
                VarId base = spec.var_of(reg, 0);
                for (std::uint32_t j = 0; j + 1 < len; ++j) nw[base + j] = w[base + j + 1];
                nw[base + len - 1] = spec.update(reg).eval(wview);
            }
            w = nw;
            ++match;
        }
        if (match >= cap) return std::nullopt;  // not unique within the cap
        h_unique = std::max(h_unique, match + 1);
    }

    DeskInstance inst;
    inst.state = std::move(s);
    inst.bits.assign(ks.begin(), ks.begin() + h_unique);
    inst.attack = attack_system(spec, inst.bits);
    auto mask = inst.attack.system.support_mask();
    for (VarId v = 0; v < r; ++v)
        if ((mask[v >> 6] >> (v & 63)) & 1) inst.free_vars.push_back(v);
    return inst;
}

}  // namespace mstep
