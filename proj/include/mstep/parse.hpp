#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mstep/polynomial.hpp"

namespace mstep {

/// Grammar: terms joined by '+' or '-'; term = coefficient('*'factors)? or
/// factors; factor = name('^'int)?; name = ident with optional "(index)".
inline Polynomial parse_polynomial(const RingPtr& ring, std::string_view text) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto fail = [&](const std::string& msg) -> void { throw parse_error(msg, pos); };

    auto parse_uint = [&]() -> unsigned long long {
        std::size_t start = pos;
        unsigned long long v = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            v = v * 10 + (text[pos] - '0');
            if (v > (1ull << 40)) fail("integer literal too large");
            ++pos;
        }
        if (pos == start) fail("expected integer");
        return v;
    };

    auto parse_name = [&]() -> VarId {
        std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                     text[pos] == '_' || text[pos] == '\''))
            ++pos;
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos >= text.size() || text[pos] != ')') fail("expected ')' in variable name");
            ++pos;
        }
        std::string_view name = text.substr(start, pos - start);
        auto id = ring->vars().find(name);
        if (!id) {
            pos = start;
            fail("unknown variable '" + std::string(name) + "'");
        }
        return *id;
    };

    std::vector<RawTerm> raw;
    skip_ws();
    if (pos >= text.size()) fail("empty polynomial");
    long long sign = 1;
    if (text[pos] == '-') {
        sign = -1;
        ++pos;
    } else if (text[pos] == '+') {
        ++pos;
    }
    while (true) {
        skip_ws();
        RawTerm term;
        term.coeff = sign;
        bool saw_factor = false;
        if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            term.coeff = sign * static_cast<long long>(parse_uint());
            saw_factor = true;
            skip_ws();
            if (pos < text.size() && text[pos] == '*') {
                ++pos;
                skip_ws();
            } else {
                goto term_done;
            }
        }
        while (true) {
            if (pos >= text.size() ||
                !(std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                fail("expected variable name");
            {
                VarId v = parse_name();
                unsigned e = 1;
                skip_ws();
                if (pos < text.size() && text[pos] == '^') {
                    ++pos;
                    skip_ws();
                    unsigned long long ev = parse_uint();
                    if (ev > 10000) fail("exponent too large");
                    e = static_cast<unsigned>(ev);
                }
                term.exponents.emplace_back(v, e);
                saw_factor = true;
            }
            skip_ws();
            if (pos < text.size() && text[pos] == '*') {
                ++pos;
                skip_ws();
                continue;
            }
            break;
        }
    term_done:
        if (!saw_factor) fail("expected term");
        raw.push_back(std::move(term));
        skip_ws();
        if (pos >= text.size()) break;
        if (text[pos] == '+') {
            sign = 1;
            ++pos;
        } else if (text[pos] == '-') {
            sign = -1;
            ++pos;
        } else {
            fail("expected '+', '-' or end of input");
        }
    }
    return Polynomial::normalize(ring, raw);
}

/// Canonical text form: terms descending in DegRevLex, '*' between factors,
/// '^e' for exponents above one. print(parse(s)) is the identity on
/// canonical forms.
inline std::string to_string(const Polynomial& p) {
    if (p.is_zero()) return "0";
    const Ring& ring = *p.ring();
    std::ostringstream os;
    bool first = true;
    for (const Term& t : p.terms()) {
        if (!first) os << " + ";
        first = false;
        bool coeff_shown = false;
        if (t.coeff != 1 || t.mono.is_one()) {
            os << unsigned(t.coeff);
            coeff_shown = true;
        }
        bool first_factor = true;
        t.mono.for_each_var(ring, [&](VarId v, unsigned e) {
            if (!first_factor || coeff_shown) os << "*";
            first_factor = false;
            os << ring.vars().name(v);
            if (e > 1) os << "^" << e;
        });
    }
    return os.str();
}

/// JSON form: array of terms, term = [coeff, factor...], factor = "name" or
/// ["name", exponent].
inline nlohmann::json poly_to_json(const Polynomial& p) {
    const Ring& ring = *p.ring();
    nlohmann::json terms = nlohmann::json::array();
    for (const Term& t : p.terms()) {
        nlohmann::json jt = nlohmann::json::array();
        jt.push_back(unsigned(t.coeff));
        t.mono.for_each_var(ring, [&](VarId v, unsigned e) {
            if (e == 1)
                jt.push_back(ring.vars().name(v));
            else
                jt.push_back(nlohmann::json::array({ring.vars().name(v), e}));
        });
        terms.push_back(std::move(jt));
    }
    return terms;
}

inline Polynomial poly_from_json(const RingPtr& ring, const nlohmann::json& j) {
    std::vector<RawTerm> raw;
    for (const auto& jt : j) {
        if (!jt.is_array() || jt.empty() || !jt[0].is_number())
            throw domain_error("bad polynomial JSON: term must be [coeff, factors...]");
        RawTerm t;
        t.coeff = jt[0].get<long long>();
        for (std::size_t i = 1; i < jt.size(); ++i) {
            std::string name;
            unsigned e = 1;
            if (jt[i].is_string()) {
                name = jt[i].get<std::string>();
            } else if (jt[i].is_array() && jt[i].size() == 2) {
                name = jt[i][0].get<std::string>();
                e = jt[i][1].get<unsigned>();
            } else {
                throw domain_error("bad polynomial JSON: factor must be name or [name, exp]");
            }
            auto v = ring->vars().find(name);
            if (!v) throw domain_error("unknown variable '" + name + "' in polynomial JSON");
            t.exponents.emplace_back(*v, e);
        }
        raw.push_back(std::move(t));
    }
    return Polynomial::normalize(ring, raw);
}

}  // namespace mstep
