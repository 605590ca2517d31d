#include <doctest.h>

#include <set>

#include "mstep/dsc.hpp"
#include "mstep/trivium.hpp"
#include "oracle.hpp"

using namespace mstep;

namespace {

DifferenceCipherSpec toy_spec() {
    // single register of 3 cells, quadratic feedback
    return DifferenceCipherSpec(Field(2), {{"x", 3}}, {"x(0) + x(1)*x(2)"}, "x(0)", 0);
}

}  // namespace

TEST_SUITE("dsc") {

TEST_CASE("shift map on the state window") {
    const DifferenceCipherSpec& spec = trivium_spec();
    Polynomial p = parse_polynomial(spec.ring(), "x(0) + y(3)");
    CHECK(to_string(shift(spec, p, 2)) == "x(2) + y(5)");
    CHECK(shift(spec, p, 0) == p);

    CounterRng rng(12);
    for (int it = 0; it < 30; ++it) {
        std::vector<RawTerm> raw;
        for (int t = 0; t < 4; ++t) {
            RawTerm rt;
            rt.coeff = 1;
            rt.exponents.emplace_back(VarId(rng.below(40)), 1);          // x(0..39)
            rt.exponents.emplace_back(VarId(93 + rng.below(40)), 1);     // y(0..39)
            raw.push_back(std::move(rt));
        }
        Polynomial q = Polynomial::normalize(spec.ring(), raw);
        std::uint32_t a = unsigned(rng.below(10)), b = unsigned(rng.below(10));
        CHECK(shift(spec, shift(spec, q, a), b) == shift(spec, q, a + b));
    }
    CHECK_THROWS_AS(shift(spec, parse_polynomial(spec.ring(), "x(92)"), 1), domain_error);
}

TEST_CASE("transition endomorphism of a 2-cell register is the swap") {
    DifferenceCipherSpec spec(Field(2), {{"x", 2}}, {"x(0)"}, "x(0)", 0);
    EndoMap T = transition_endo(spec);
    CHECK(T.image(0) == Polynomial::variable(spec.ring(), 1));
    CHECK(T.image(1) == Polynomial::variable(spec.ring(), 0));
    State s{1, 0};
    CHECK(apply_endo_state(T, s) == State{0, 1});
}

TEST_CASE("linear updates give a linear transition map matching its matrix") {
    DifferenceCipherSpec spec(Field(2), {{"x", 3}, {"y", 2}},
                              {"x(0) + y(1)", "y(0) + x(2)"}, "x(0)", 0);
    EndoMap T = transition_endo(spec);
    unsigned r = spec.state_size();
    // explicit matrix: row w of M = coefficients of T(x_w)
    std::vector<std::vector<Coeff>> M(r, std::vector<Coeff>(r, 0));
    for (VarId w = 0; w < r; ++w)
        for (VarId v = 0; v < r; ++v)
            if (T.image(w).uses_var(v)) M[w][v] = 1;
    CounterRng rng(5);
    for (int it = 0; it < 40; ++it) {
        State s(r);
        for (auto& c : s) c = Coeff(rng.bit());
        State via_endo = apply_endo_state(T, s);
        State via_matrix(r, 0);
        for (VarId w = 0; w < r; ++w) {
            Coeff acc = 0;
            for (VarId v = 0; v < r; ++v) acc ^= M[w][v] & s[v];
            via_matrix[w] = acc;
        }
        CHECK(via_endo == via_matrix);
        CHECK(clock_state(spec, s) == via_endo);
    }
}

TEST_CASE("apply_endo fixes constants and composes with evaluation") {
    const DifferenceCipherSpec& spec = trivium_spec();
    EndoMap T = transition_endo(spec);
    Polynomial c = Polynomial::constant(spec.ring(), 1);
    CHECK(apply_endo(T, c) == c);

    // evaluate(T(p), v) == p(clock(v)) on random states
    CounterRng rng(77);
    Polynomial g = spec.keystream_poly();
    Polynomial tg = apply_endo(T, g);
    CHECK(tg.degree() <= 2);
    for (int it = 0; it < 25; ++it) {
        State s(spec.state_size());
        for (auto& x : s) x = Coeff(rng.bit());
        CHECK(tg.eval(s) == g.eval(clock_state(spec, s)));
    }
}

TEST_CASE("iterated application equals the incremental keystream images") {
    const DifferenceCipherSpec& spec = trivium_spec();
    EndoMap T = transition_endo(spec);
    std::vector<Polynomial> imgs = keystream_images(spec, 0, 8);
    CHECK(apply_endo_power(T, spec.keystream_poly(), 0) == imgs[0]);
    CHECK(apply_endo_power(T, spec.keystream_poly(), 3) == imgs[3]);
    CHECK(apply_endo_power(T, spec.keystream_poly(), 7) == imgs[7]);
}

TEST_CASE("invert_endo: identity, a random linear map, and a failure shape") {
    auto ring = Ring::make(Field(2), oracle::small_universe(8));
    EndoMap id = EndoMap::identity(ring);
    InvertResult inv = invert_endo(id);
    REQUIRE(inv.inverse.has_value());
    for (VarId v = 0; v < 8; ++v) CHECK(inv.inverse->image(v) == id.image(v));

    // random invertible linear map: start from the identity matrix and mix rows
    CounterRng rng(31);
    std::vector<std::vector<Coeff>> M(8, std::vector<Coeff>(8, 0));
    for (unsigned i = 0; i < 8; ++i) M[i][i] = 1;
    for (int ops = 0; ops < 40; ++ops) {
        unsigned a = unsigned(rng.below(8)), b = unsigned(rng.below(8));
        if (a == b) continue;
        for (unsigned j = 0; j < 8; ++j) M[a][j] ^= M[b][j];
    }
    EndoMap lin{ring, {}};
    for (unsigned i = 0; i < 8; ++i) {
        Polynomial p = Polynomial::zero(ring);
        for (unsigned j = 0; j < 8; ++j)
            if (M[i][j]) p = p + Polynomial::variable(ring, j);
        lin.images.push_back(p);
    }
    InvertResult linv = invert_endo(lin);
    REQUIRE(linv.inverse.has_value());
    // oracle: invert the matrix by Gaussian elimination and compare images
    std::vector<std::vector<Coeff>> A(8, std::vector<Coeff>(16, 0));
    for (unsigned i = 0; i < 8; ++i) {
        for (unsigned j = 0; j < 8; ++j) A[i][j] = M[i][j];
        A[i][8 + i] = 1;
    }
    for (unsigned c = 0, rank = 0; c < 8; ++c) {
        for (unsigned rr = rank; rr < 8; ++rr)
            if (A[rr][c]) {
                std::swap(A[rr], A[rank]);
                break;
            }
        REQUIRE(A[rank][c] == 1);
        for (unsigned rr = 0; rr < 8; ++rr)
            if (rr != rank && A[rr][c])
                for (unsigned j = 0; j < 16; ++j) A[rr][j] ^= A[rank][j];
        ++rank;
    }
    for (unsigned i = 0; i < 8; ++i) {
        Polynomial want = Polynomial::zero(ring);
        for (unsigned j = 0; j < 8; ++j)
            if (A[i][8 + j]) want = want + Polynomial::variable(ring, j);
        CHECK(linv.inverse->image(i) == want);
    }

    // double inversion returns the original map
    InvertResult twice = invert_endo(*linv.inverse);
    REQUIRE(twice.inverse.has_value());
    for (VarId v = 0; v < 8; ++v) CHECK(twice.inverse->image(v) == lin.images[v]);

    // a non-injective map fails the shape test
    auto r2 = Ring::make(Field(2), Universe::make({"a", "b"}));
    EndoMap bad{r2, {Polynomial::variable(r2, 1), Polynomial::variable(r2, 1)}};
    InvertResult binv = invert_endo(bad);
    CHECK_FALSE(binv.inverse.has_value());
    CHECK(binv.basis.size() > 0);
}

TEST_CASE("toy keystream matches a hand simulation") {
    DifferenceCipherSpec spec = toy_spec();
    // state (s0, s1, s2); clock: (s1, s2, s0 + s1*s2); output s0
    State s{1, 0, 1};
    std::vector<Coeff> want;
    std::array<Coeff, 3> w{1, 0, 1};
    for (int t = 0; t < 10; ++t) {
        want.push_back(w[0]);
        w = {w[1], w[2], Coeff(w[0] ^ (w[1] & w[2]))};
    }
    CHECK(keystream(spec, s, 0, 10) == want);
    // warm-up skips the first bits
    std::vector<Coeff> tail = keystream(spec, s, 3, 7);
    CHECK(std::equal(tail.begin(), tail.end(), want.begin() + 3));
}

TEST_CASE("keystream ideal at desk scale: zero set = consistent initial states") {
    DifferenceCipherSpec spec = reduced_trivium(4, 4, 4, 1);
    REQUIRE(spec.state_size() == 12);
    CounterRng rng(9);
    State s(12);
    for (auto& c : s) c = Coeff(rng.bit());
    for (std::uint32_t h : {0u, 3u, 8u, 14u}) {
        std::vector<Coeff> ks = keystream(spec, s, 0, h);
        GeneratorSet J = keystream_ideal(spec, 0, h, ks);
        if (h == 0) {
            CHECK(J.empty());
            continue;
        }
        auto zeros = oracle::brute_force_solutions(J);
        std::set<std::vector<Coeff>> zs(zeros.begin(), zeros.end());
        // oracle: enumerate all states and compare keystreams directly
        std::set<std::vector<Coeff>> match;
        for (std::uint64_t idx = 0; idx < (1ull << 12); ++idx) {
            State w(12);
            for (unsigned b = 0; b < 12; ++b) w[b] = (idx >> b) & 1;
            if (keystream(spec, w, 0, h) == ks) match.insert(w);
        }
        CHECK(zs == match);
        CHECK(zs.count(s) == 1);
        // solution count never grows with h
    }
}

TEST_CASE("attack_system eliminates the leading linear run and keeps solutions") {
    DifferenceCipherSpec spec = reduced_trivium(4, 4, 5, 1);
    CounterRng rng(21);
    std::optional<DeskInstance> inst;
    for (int tries = 0; tries < 10 && !inst; ++tries) inst = make_desk_instance(spec, rng);
    REQUIRE(inst.has_value());
    // planted state vanishes on the reduced system
    for (const Polynomial& p : inst->attack.system.polys()) CHECK(p.eval(inst->state) == 0);
    // extension through the eliminated variables reproduces the planted state
    Assignment a = empty_assignment(*spec.ring());
    auto mask = inst->attack.system.support_mask();
    for (VarId v = 0; v < spec.state_size(); ++v)
        if ((mask[v >> 6] >> (v & 63)) & 1) a[v] = std::int8_t(inst->state[v]);
    Assignment full = extend_solution(*spec.ring(), a, inst->attack.eliminated);
    for (VarId v = 0; v < spec.state_size(); ++v) CHECK(full[v] == std::int8_t(inst->state[v]));
    // the regenerated keystream agrees with the observation
    State rec(full.begin(), full.end());
    CHECK(keystream(spec, rec, 0, std::uint32_t(inst->bits.size())) == inst->bits);
}

TEST_CASE("cipher spec json round trip") {
    DifferenceCipherSpec spec = reduced_trivium(7, 6, 8, 0);
    nlohmann::json j = spec.to_json();
    DifferenceCipherSpec back = DifferenceCipherSpec::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.state_size() == 21);
    CHECK(to_string(back.keystream_poly()) == to_string(spec.keystream_poly()));
}

TEST_CASE("state text io") {
    DifferenceCipherSpec spec = toy_spec();
    State s = state_from_string(spec.ring(), "101");
    CHECK(s == State{1, 0, 1});
    CHECK(state_to_string(s) == "101");
    CHECK_THROWS_AS(state_from_string(spec.ring(), "10"), domain_error);
    CHECK_THROWS_AS(state_from_string(spec.ring(), "102"), parse_error);
}

}  // TEST_SUITE
