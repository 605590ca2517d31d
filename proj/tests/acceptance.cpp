// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each check pins its tolerances in code.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mstep/stats.hpp"
#include "mstep/trivium.hpp"
#include "oracle.hpp"

using namespace mstep;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Criterion {
    int id;
    std::string name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream detail;

    Criterion(int id, std::string name) : id(id), name(std::move(name)) {}

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }

    void finish(double budget_seconds) {
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > budget_seconds) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << "runtime " << secs << "s over budget "
                   << budget_seconds << "s";
        }
        std::printf("%s criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                    secs, detail.str().empty() ? "" : " -- ", detail.str().c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

std::string data_path(const char* name) { return std::string(MSTEP_DATA_DIR) + "/" + name; }

// ---------------------------------------------------------------------------
// 1. published-table reproduction through the report command
void criterion1() {
    Criterion c(1, "report reproduces the published final steps and complexities");
    fs::path dir = fs::path(MSTEP_BUILD_DIR) / "acceptance_c1";
    fs::create_directories(dir);
    std::string out = (dir / "report.json").string();
    std::string cmd = std::string(MSTEP_CLI) + " report --random " + data_path("trivium_p_random.csv") +
                      " --correct " + data_path("trivium_p_correct.csv") +
                      " --k-first 106 --out " + out + " > " + (dir / "stdout.txt").string();
    int rc = std::system(cmd.c_str());
    c.require(rc == 0, "report command failed");
    if (rc == 0) {
        nlohmann::json rep;
        std::ifstream(out) >> rep;
        const std::uint32_t want_kpp[7] = {116, 115, 115, 114, 114, 113, 112};
        const std::uint32_t want_kbar[7] = {111, 111, 110, 109, 109, 108, 108};
        const double want_c2[7] = {111.63, 111.13, 110.47, 109.93, 109.37, 108.85, 108.29};
        const double want_c2bar[7] = {108.79, 108.88, 107.67, 107.06, 107.13, 106.20, 106.35};
        for (const auto& row : rep.at("rows")) {
            std::uint32_t B = row.at("B").get<std::uint32_t>();
            if (B < 32 || B > 38) continue;
            std::size_t i = B - 32;
            char buf[160];
            if (row.at("k_final").get<std::uint32_t>() != want_kpp[i]) {
                std::snprintf(buf, sizeof buf, "k''[B=%u] = %u, published %u", B,
                              row.at("k_final").get<std::uint32_t>(), want_kpp[i]);
                c.require(false, buf);
            }
            if (row.at("k_final_median").get<std::uint32_t>() != want_kbar[i]) {
                std::snprintf(buf, sizeof buf, "kbar''[B=%u] = %u, published %u", B,
                              row.at("k_final_median").get<std::uint32_t>(), want_kbar[i]);
                c.require(false, buf);
            }
            double c2 = row.at("log2_C2").get<double>();
            if (std::abs(c2 - want_c2[i]) > 0.02) {
                std::snprintf(buf, sizeof buf, "log2(C2)[B=%u] = %.4f, published %.2f, |diff| %.4f > 0.02",
                              B, c2, want_c2[i], std::abs(c2 - want_c2[i]));
                c.require(false, buf);
            }
            double c2b = row.at("log2_C2_median").get<double>();
            if (std::abs(c2b - want_c2bar[i]) > 0.02) {
                std::snprintf(buf, sizeof buf,
                              "log2(C2bar)[B=%u] = %.4f, published %.2f, |diff| %.4f > 0.02", B,
                              c2b, want_c2bar[i], std::abs(c2b - want_c2bar[i]));
                c.require(false, buf);
            }
        }
    }
    c.finish(1.0);
}

// ---------------------------------------------------------------------------
// 2. step-subset optimality over the published probabilities
void criterion2() {
    Criterion c(2, "full chain minimizes C2 over all 2^10 step subsets (B=32)");
    ProbabilityTable t = ProbabilityTable::load_csv(data_path("trivium_p_random.csv"));
    OptimalityReport rep = optimality_check(t, 32, 106, 116, 2);
    c.require(rep.subsets == 1024, "expected 1024 subsets");
    c.require(rep.full_chain_minimal, "full chain not minimal");
    c.require(rep.singleton_maximal, "one-step subset not maximal");
    c.require(std::abs(rep.worst_log2 - 116.0) < 1e-9, "one-step complexity != 2^116");
    c.require(std::abs(rep.best_log2 - 111.63) <= 0.02, "minimum differs from published 111.63");
    c.require(rep.best_steps == full_chain(106, 116), "minimizer is not the full chain");
    c.finish(1.0);
}

// ---------------------------------------------------------------------------
// 3. exact-count oracle on desk-scale instances
void criterion3() {
    Criterion c(3, "exhaustive tables plugged into C1/C2 equal actual run counters");
    DifferenceCipherSpec spec = reduced_trivium(7, 6, 8, 0);
    const std::uint32_t B = 4, k_first = 8;
    int verified = 0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 5ull, 6ull}) {
        CounterRng rng(seed);
        auto inst = make_desk_instance(spec, rng);
        if (!inst) {
            c.require(false, "seed " + std::to_string(seed) + ": no unique instance");
            continue;
        }
        InstanceSource src = [&](std::uint64_t) {
            std::vector<Coeff> correct;
            for (VarId v : inst->free_vars) correct.push_back(inst->state[v]);
            return EstimateInstance{inst->attack.system, inst->free_vars, correct};
        };
        std::vector<std::uint32_t> ks = full_chain(k_first, 13), Bs{B};
        TestsetSpec ex;
        ex.kind = TestsetSpec::Kind::Exhaustive;
        ProbabilityTable table = estimate_probabilities(src, ks, Bs, 2, ex);
        std::uint32_t kpp = final_step(table, B);
        c.require((1ull << kpp) <= (1ull << 14), "q^{k''} exceeds 2^14");

        GuessPlan plan;
        plan.guess_vars = inst->free_vars;
        plan.steps = full_chain(k_first, kpp);
        plan.B = B;
        plan.D = 2;
        RunConfig cfg;
        cfg.mode = RunMode::CountEverything;
        MultiResult res = multi_solve(inst->attack.system, plan, cfg);
        std::uint64_t calls = 0, tamed = 0;
        for (const StepCounters& sc : res.steps) {
            calls += sc.gbelim_calls;
            tamed += sc.tamed;
        }
        BigRat c1 = complexity_C1(table, B, plan.steps, 2);
        BigRat c2 = complexity_C2(table, B, plan.steps, 2);
        bool ok = c1.equals_u64(calls) && c2.equals_u64(tamed);
        if (ok) ++verified;
        c.require(ok, "seed " + std::to_string(seed) + ": C1/C2 mismatch (calls=" +
                          std::to_string(calls) + ", tamed=" + std::to_string(tamed) + ")");
    }
    c.require(verified >= 5, "fewer than 5 verified instances");
    c.finish(600.0);
}

// ---------------------------------------------------------------------------
// 4. complete-basis correctness against brute force
void criterion4() {
    Criterion c(4, "groebner_complete returns {x_i - a_i} / {1} on 200+200 systems");
    CounterRng rng(20240604);
    int unique_checked = 0, unsat_checked = 0;
    for (int inst = 0; inst < 200; ++inst) {
        unsigned n = 8 + unsigned(rng.below(9));  // 8..16
        auto ring = Ring::make(Field(2), oracle::small_universe(n));
        auto planted = oracle::random_planted_unique(ring, rng, 2, n, 40);
        GBResult res = groebner_complete(planted.system);
        bool ok = res.complete && res.basis.size() == n && res.basis.max_degree() == 1;
        if (ok) {
            Assignment a = assignment_from_linear_basis(res.basis);
            for (VarId v = 0; v < n; ++v)
                if (a[v] != std::int8_t(planted.solution[v])) ok = false;
        }
        if (!ok) c.require(false, "planted instance " + std::to_string(inst) + " failed");
        ++unique_checked;
    }
    for (int inst = 0; inst < 200; ++inst) {
        unsigned n = 8 + unsigned(rng.below(7));  // 8..14
        auto ring = Ring::make(Field(2), oracle::small_universe(n));
        GeneratorSet sys = oracle::random_unsatisfiable(ring, rng, 2, n);
        GBResult res = groebner_complete(sys);
        if (!res.basis.is_unit())
            c.require(false, "unsatisfiable instance " + std::to_string(inst) + " not {1}");
        ++unsat_checked;
    }
    c.require(unique_checked >= 200 && unsat_checked >= 200, "insufficient instances");
    c.finish(300.0);
}

// ---------------------------------------------------------------------------
// 5. elimination soundness: extensions reproduce the input solution set
void criterion5() {
    Criterion c(5, "extend_solution maps reduced-system solutions onto input solutions");
    CounterRng rng(777);
    int processed = 0, reduced_seen = 0;
    while (processed < 200) {
        unsigned n = 8 + unsigned(rng.below(7));  // 8..14
        auto ring = Ring::make(Field(2), oracle::small_universe(n));
        // sparse cyclic systems stay Reduced at D=2 much more often than
        // dense planted ones
        std::vector<Polynomial> polys;
        unsigned m = n - 1 - unsigned(rng.below(3));
        for (unsigned i = 0; i < m; ++i) {
            std::string s = "x(" + std::to_string(rng.below(n)) + ")*x(" +
                            std::to_string(rng.below(n)) + ") + x(" +
                            std::to_string(rng.below(n)) + ")*x(" + std::to_string(rng.below(n)) +
                            ") + x(" + std::to_string(rng.below(n)) + ")";
            if (rng.bit()) s += " + 1";
            polys.push_back(parse_polynomial(ring, s));
        }
        GeneratorSet H = GeneratorSet::make(ring, MonomialOrder::degrevlex(), polys);
        if (H.is_unit() || H.empty()) continue;
        ++processed;

        auto input_sols = oracle::brute_force_solutions(H);
        ElimOutcome out = gb_elim_lin(H, 2);
        std::set<std::vector<Coeff>> extended;
        bool skip = false;
        if (out.kind == ElimKind::FullyLinear) {
            if (out.basis.is_unit()) {
                c.require(input_sols.empty(), "inconsistent claim on a satisfiable system");
                continue;
            }
            // underdetermined linear bases describe an affine solution set;
            // enumerate it by brute force like the Reduced path
        } else {
            ++reduced_seen;
        }
        auto reduced_sols = oracle::brute_force_solutions(out.basis);
        auto mask = out.basis.support_mask();
        std::vector<VarId> free_of_both;  // variables in neither basis nor records
        {
            std::vector<bool> covered(n, false);
            for (VarId v = 0; v < n; ++v)
                if ((mask[v >> 6] >> (v & 63)) & 1) covered[v] = true;
            for (const auto& [v, f] : out.eliminated) covered[v] = true;
            for (VarId v = 0; v < n; ++v)
                if (!covered[v]) free_of_both.push_back(v);
        }
        if (free_of_both.size() > 8) continue;  // keep the enumeration small
        for (const auto& s : reduced_sols) {
            Assignment base = empty_assignment(*ring);
            for (VarId v = 0; v < n; ++v)
                if ((mask[v >> 6] >> (v & 63)) & 1) base[v] = std::int8_t(s[v]);
            // unconstrained variables range over the whole field
            for (std::uint64_t fr = 0; fr < (1ull << free_of_both.size()); ++fr) {
                Assignment a = base;
                for (std::size_t j = 0; j < free_of_both.size(); ++j)
                    a[free_of_both[j]] = std::int8_t((fr >> j) & 1);
                Assignment full = extend_solution(*ring, a, out.eliminated);
                bool total = true;
                for (VarId v = 0; v < n; ++v)
                    if (full[v] < 0) total = false;
                if (total) extended.insert(std::vector<Coeff>(full.begin(), full.end()));
            }
        }
        std::set<std::vector<Coeff>> want(input_sols.begin(), input_sols.end());
        if (extended != want) {
            c.require(false, "instance " + std::to_string(processed) + " solution sets differ");
            skip = true;
        }
        (void)skip;
    }
    c.require(reduced_seen >= 50, "too few Reduced outcomes exercised: " +
                                      std::to_string(reduced_seen));
    c.finish(300.0);
}

// ---------------------------------------------------------------------------
// 6. symbolic/bit-level consistency and inversion for the full cipher
void criterion6() {
    Criterion c(6, "symbolic keystream, published inverse and round trips");
    const DifferenceCipherSpec& spec = trivium_spec();
    std::vector<Polynomial> imgs = keystream_images(spec, 0, 300);
    CounterRng rng(60606);
    for (int it = 0; it < 100; ++it) {
        State s(288);
        for (auto& b : s) b = Coeff(rng.bit());
        auto [fin, bits] = trivium_bits(s, 300);
        for (unsigned t = 0; t < 300; ++t) {
            if (imgs[t].eval(s) != bits[t]) {
                c.require(false, "symbolic/bit mismatch at state " + std::to_string(it) +
                                     " clock " + std::to_string(t));
                break;
            }
        }
    }

    InvertResult inv = invert_endo(transition_endo(spec));
    c.require(inv.inverse.has_value(), "transition not inverted");
    if (inv.inverse) {
        const Ring& ring = *spec.ring();
        auto img = [&](const char* n) { return inv.inverse->image(*ring.vars().find(n)); };
        c.require(img("x(0)") == parse_polynomial(spec.ring(), "y(5) + x(26) + y(83) + x(0)*x(1)"),
                  "x(0) inverse image differs from the published display");
        c.require(img("y(0)") == parse_polynomial(spec.ring(), "y(14) + z(23) + z(110) + y(0)*y(1)"),
                  "y(0) inverse image differs from the published display");
        c.require(img("z(0)") == parse_polynomial(spec.ring(), "x(23) + z(44) + x(92) + z(0)*z(1)"),
                  "z(0) inverse image differs from the published display");
        bool shifts = true;
        for (unsigned j = 1; j <= 92 && shifts; ++j)
            shifts = img(("x(" + std::to_string(j) + ")").c_str()) ==
                     parse_polynomial(spec.ring(), "x(" + std::to_string(j - 1) + ")");
        c.require(shifts, "inverse shift images differ");

        int bad = 0;
        for (int it = 0; it < 10000; ++it) {
            State s(288);
            for (auto& b : s) b = Coeff(rng.bit());
            if (apply_endo_state(*inv.inverse, clock_state(spec, s)) != s) ++bad;
        }
        c.require(bad == 0, std::to_string(bad) + " round-trip failures");
    }
    c.finish(600.0);
}

// ---------------------------------------------------------------------------
// 7. attack-system shape for the full cipher
void criterion7() {
    Criterion c(7, "240-bit keystream systems: 66 eliminated, 222 variables, degree <= 5");
    CounterRng rng(70707);
    for (int it = 0; it < 20; ++it) {
        State s(288);
        for (auto& b : s) b = Coeff(rng.bit());
        auto [fin, bits] = trivium_bits(s, 240);
        AttackSystem atk = trivium_attack_system(bits);
        c.require(atk.eliminated.size() == 66,
                  "state " + std::to_string(it) + ": eliminated != 66");
        c.require(atk.variables == 222, "state " + std::to_string(it) + ": variables != 222");
        c.require(atk.system.max_degree() <= 5,
                  "state " + std::to_string(it) + ": degree > 5");
        for (const Polynomial& p : atk.system.polys()) {
            if (p.eval(s) != 0) {
                c.require(false, "state " + std::to_string(it) + ": generator does not vanish");
                break;
            }
        }
    }
    c.finish(600.0);
}

// ---------------------------------------------------------------------------
// 8. end-to-end desk-scale attacks
void criterion8() {
    Criterion c(8, "multistep attack recovers 20 planted desk-scale states");
    DifferenceCipherSpec spec = reduced_trivium(7, 6, 8, 0);
    CounterRng rng(88888);
    int recovered = 0, attempts = 0;
    while (recovered < 20 && attempts < 40) {
        ++attempts;
        auto inst = make_desk_instance(spec, rng);
        if (!inst) continue;
        GuessPlan plan;
        plan.guess_vars = inst->free_vars;
        plan.steps = full_chain(8, 12);
        plan.B = 4;  // 16 free variables: the final step is guaranteed tame
        plan.D = 2;
        RunConfig cfg;
        cfg.mode = RunMode::EarlyExit;
        MultiResult res = multi_solve(inst->attack.system, plan, cfg);
        if (!res.solution || res.solution->assignment.empty()) {
            c.require(false, "attempt " + std::to_string(attempts) + ": no solution");
            continue;
        }
        Assignment full =
            extend_solution(*spec.ring(), res.solution->assignment, inst->attack.eliminated);
        State rec(full.begin(), full.end());
        bool state_ok = rec == inst->state;
        bool ks_ok = keystream(spec, rec, 0, std::uint32_t(inst->bits.size())) == inst->bits;
        c.require(state_ok, "attempt " + std::to_string(attempts) + ": wrong state");
        c.require(ks_ok, "attempt " + std::to_string(attempts) + ": keystream mismatch");
        if (state_ok && ks_ok) ++recovered;
    }
    c.require(recovered >= 20, "recovered only " + std::to_string(recovered) + " states");
    c.finish(600.0);
}

// ---------------------------------------------------------------------------
// 9. scale note
void criterion9() {
    Criterion c(9, "full-scale attack is not executable; figures validated via criteria 1-3");
    // The full-scale run would take ~2^106.2 complete-basis calls; this
    // suite validates its complexity figures only through the statistics
    // pipeline (criteria 1-3), so there is nothing to execute here.
    c.finish(1.0);
}

}  // namespace

int main() {
    std::printf("acceptance suite (library version %s)\n", "0.1.0");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures ? 1 : 0;
}
