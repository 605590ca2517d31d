// Command-line front end: reproducible experiments over the multistep
// solver, the cipher framework and the statistics pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "mstep/stats.hpp"
#include "mstep/trivium.hpp"
#include "mstep/version.hpp"

using namespace mstep;
namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kNoSolution = 2, kPlanViolation = 3, kResource = 4 };

nlohmann::json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw resource_error("cannot read " + path);
    nlohmann::json j;
    f >> j;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw resource_error("cannot write " + path);
    f << text;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

struct SystemFile {
    RingPtr ring;
    GeneratorSet system;
};

SystemFile load_system(const std::string& path) {
    nlohmann::json j = read_json(path);
    std::vector<std::string> names;
    for (const auto& v : j.at("variables")) names.push_back(v.get<std::string>());
    RingPtr ring = Ring::make(Field(j.at("q").get<unsigned>()), Universe::make(std::move(names)));
    std::vector<Polynomial> polys;
    for (const auto& p : j.at("polynomials"))
        polys.push_back(parse_polynomial(ring, p.get<std::string>()));
    return {ring, GeneratorSet::make(ring, MonomialOrder::degrevlex(), std::move(polys))};
}

std::vector<Coeff> load_keystream(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw resource_error("cannot read " + path);
    std::string text;
    std::string line;
    while (std::getline(f, line)) text += line;
    std::vector<Coeff> bits;
    if (text.rfind("0x", 0) == 0) {
        for (std::size_t i = 2; i < text.size(); ++i) {
            char c = text[i];
            int v = c >= '0' && c <= '9'   ? c - '0'
                    : c >= 'a' && c <= 'f' ? c - 'a' + 10
                    : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                           : -1;
            if (v < 0) throw parse_error("bad hex digit in keystream", i);
            for (int b = 3; b >= 0; --b) bits.push_back(static_cast<Coeff>((v >> b) & 1));
        }
    } else {
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            if (c < '0' || c > '7') throw parse_error("bad keystream character", i);
            bits.push_back(static_cast<Coeff>(c - '0'));
        }
    }
    return bits;
}

std::string keystream_to_text(std::span<const Coeff> bits, bool hex) {
    if (!hex) {
        std::string out;
        for (Coeff b : bits) out.push_back(static_cast<char>('0' + b));
        return out;
    }
    std::string out = "0x";
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int v = 0;
        for (std::size_t b = 0; b < 4; ++b)
            v = (v << 1) | (i + b < bits.size() ? bits[i + b] : 0);
        out.push_back("0123456789abcdef"[v]);
    }
    return out;
}

std::vector<std::uint32_t> parse_range(const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789:") != std::string::npos)
        throw domain_error("bad range '" + text + "' (expected N or lo:hi)");
    auto colon = text.find(':');
    if (colon == std::string::npos) return {static_cast<std::uint32_t>(std::stoul(text))};
    std::uint32_t lo = static_cast<std::uint32_t>(std::stoul(text.substr(0, colon)));
    std::uint32_t hi = static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)));
    if (hi < lo) throw domain_error("empty range " + text);
    std::vector<std::uint32_t> out;
    for (std::uint32_t v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

std::vector<VarId> resolve_vars(const RingPtr& ring, const std::vector<std::string>& names) {
    std::vector<VarId> out;
    for (const std::string& n : names) {
        auto v = ring->vars().find(n);
        if (!v) throw domain_error("unknown variable '" + n + "'");
        out.push_back(*v);
    }
    return out;
}

unsigned resolved_workers(unsigned flag_value) {
    if (const char* env = std::getenv("MSTEP_WORKERS")) {
        unsigned w = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        if (w >= 1) return w;
    }
    return std::max(1u, flag_value);
}

nlohmann::json assignment_json(const Ring& ring, const Assignment& a) {
    nlohmann::json j = nlohmann::json::object();
    for (VarId v = 0; v < a.size(); ++v)
        if (a[v] >= 0) j[ring.vars().name(v)] = int(a[v]);
    return j;
}

struct SolveArgs {
    std::string system_file, spec_file, keystream_file, out_dir = ".";
    std::vector<std::string> guess_names;
    std::string steps_text;
    std::uint32_t B = 0, D = 2;
    std::string mode = "early-exit";
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::uint64_t max_rows = std::uint64_t(1) << 22, max_cols = std::uint64_t(1) << 22;
};

int cmd_solve(const SolveArgs& a) {
    GeneratorSet H;
    RingPtr ring;
    std::vector<std::pair<VarId, Polynomial>> pre_elim;
    if (!a.system_file.empty()) {
        SystemFile sf = load_system(a.system_file);
        ring = sf.ring;
        H = sf.system;
    } else {
        DifferenceCipherSpec spec = DifferenceCipherSpec::from_json(read_json(a.spec_file));
        std::vector<Coeff> bits = load_keystream(a.keystream_file);
        AttackSystem atk = attack_system(spec, bits);
        ring = spec.ring();
        H = atk.system;
        pre_elim = std::move(atk.eliminated);
    }

    GuessPlan plan;
    if (a.guess_names.empty()) {
        auto mask = H.support_mask();
        for (VarId v = 0; v < ring->nvars(); ++v)
            if ((mask[v >> 6] >> (v & 63)) & 1) plan.guess_vars.push_back(v);
    } else {
        plan.guess_vars = resolve_vars(ring, a.guess_names);
    }
    {
        std::istringstream ss(a.steps_text);
        std::string part;
        while (std::getline(ss, part, ','))
            for (std::uint32_t s : parse_range(part)) plan.steps.push_back(s);
    }
    plan.B = a.B;
    plan.D = a.D;
    plan.validate(*ring);

    RunConfig cfg;
    cfg.mode = a.mode == "count-everything" ? RunMode::CountEverything : RunMode::EarlyExit;
    cfg.workers = resolved_workers(a.workers);
    cfg.limits.max_rows = a.max_rows;
    cfg.limits.max_cols = a.max_cols;

    fs::create_directories(a.out_dir);
    auto wall0 = std::chrono::steady_clock::now();
    int code = kOk;
    nlohmann::json result;
    std::vector<StepCounters> steps;
    try {
        MultiResult res = multi_solve(H, plan, cfg);
        steps = res.steps;
        if (res.solution) {
            Assignment full = res.solution->assignment;
            if (!full.empty() && !pre_elim.empty())
                full = extend_solution(*ring, std::move(full), pre_elim);
            result["status"] = "solution";
            result["step"] = res.solution->step_k;
            result["guess_index"] = res.solution->guess_index;
            nlohmann::json basis = nlohmann::json::array();
            for (const Polynomial& p : res.solution->basis.polys()) basis.push_back(to_string(p));
            result["basis"] = std::move(basis);
            if (!full.empty()) result["assignment"] = assignment_json(*ring, full);
            nlohmann::json elim = nlohmann::json::array();
            for (const auto& [v, f] : res.solution->eliminated)
                elim.push_back({ring->vars().name(v), to_string(f)});
            result["eliminated"] = std::move(elim);
        } else {
            result["status"] = "no-solution";
            result["basis"] = {"1"};
            code = kNoSolution;
        }
    } catch (const plan_violation_error& e) {
        result["status"] = "plan-violation";
        result["error"] = e.what();
        code = kPlanViolation;
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = "solve";
    manifest["config"] = {{"B", plan.B},
                          {"D", plan.D},
                          {"steps", plan.steps},
                          {"mode", a.mode},
                          {"seed", a.seed},
                          {"workers", cfg.workers},
                          {"max_rows", a.max_rows},
                          {"max_cols", a.max_cols}};
    manifest["plan"] = plan_to_json(*ring, plan);
    nlohmann::json jsteps = nlohmann::json::array();
    for (const StepCounters& c : steps) jsteps.push_back(counters_to_json(c, false));
    manifest["steps"] = std::move(jsteps);
    manifest["result"] = result;
    write_json(a.out_dir + "/manifest.json", manifest);

    nlohmann::json timings;
    timings["wall_seconds"] = wall;
    nlohmann::json tsteps = nlohmann::json::array();
    for (const StepCounters& c : steps)
        tsteps.push_back(
            {{"k", c.k},
             {"gbelim_seconds", c.gbelim_seconds},
             {"gb_seconds", c.gb_seconds},
             {"sigma", c.gbelim_calls ? c.gbelim_seconds / double(c.gbelim_calls) : 0.0},
             {"tau", c.gb_calls ? c.gb_seconds / double(c.gb_calls) : 0.0}});
    timings["steps"] = std::move(tsteps);
    write_json(a.out_dir + "/timings.json", timings);
    write_json(a.out_dir + "/solution.json", result);
    std::cout << result["status"].get<std::string>() << "\n";
    return code;
}

struct EstimateArgs {
    std::string system_file, spec_file, out_prefix = "table";
    std::vector<std::string> guess_names;
    std::string k_range, b_range;
    std::uint32_t D = 2;
    std::string testset = "exhaustive";
    std::uint64_t instances = 1, seed = 0;
    std::uint64_t exhaustive_cap = std::uint64_t(1) << 20;
    bool fresh_draws = false;
    std::string render;
};

std::string render_probability_grid(const ProbabilityTable& t) {
    std::vector<std::uint32_t> bs = t.bs();
    std::set<std::uint32_t> kset;
    for (std::uint32_t B : bs)
        for (std::uint32_t k : t.ks(B)) kset.insert(k);
    std::ostringstream os;
    os << std::left << std::setw(8) << "k / B";
    for (std::uint32_t B : bs) os << std::right << std::setw(10) << B;
    os << "\n";
    for (std::uint32_t k : kset) {
        os << std::left << std::setw(8) << k;
        for (std::uint32_t B : bs) {
            char buf[16];
            if (t.has(B, k))
                std::snprintf(buf, sizeof buf, "%.5f", t.p_double(B, k));
            else
                std::snprintf(buf, sizeof buf, "-");
            os << std::right << std::setw(10) << buf;
        }
        os << "\n";
    }
    return os.str();
}

int cmd_estimate(const EstimateArgs& a) {
    std::vector<std::uint32_t> ks = parse_range(a.k_range);
    std::vector<std::uint32_t> Bs = parse_range(a.b_range);
    if (ks.empty() || Bs.empty()) throw domain_error("empty k or B range");

    TestsetSpec spec;
    spec.seed = a.seed;
    spec.instances = a.instances;
    spec.nested = !a.fresh_draws;
    spec.exhaustive_cap = a.exhaustive_cap;
    if (a.testset == "exhaustive") {
        spec.kind = TestsetSpec::Kind::Exhaustive;
    } else if (a.testset.rfind("random", 0) == 0) {
        spec.kind = TestsetSpec::Kind::Random;
        auto colon = a.testset.find(':');
        spec.samples_per_instance =
            colon == std::string::npos ? 256 : std::stoull(a.testset.substr(colon + 1));
    } else if (a.testset == "correct") {
        spec.kind = TestsetSpec::Kind::Correct;
    } else {
        throw domain_error("testset must be exhaustive, random[:N] or correct");
    }

    InstanceSource source;
    if (!a.system_file.empty()) {
        SystemFile sf = load_system(a.system_file);
        std::vector<VarId> gvars;
        if (a.guess_names.empty()) {
            auto mask = sf.system.support_mask();
            for (VarId v = 0; v < sf.ring->nvars(); ++v)
                if ((mask[v >> 6] >> (v & 63)) & 1) gvars.push_back(v);
        } else {
            gvars = resolve_vars(sf.ring, a.guess_names);
        }
        if (spec.kind == TestsetSpec::Kind::Correct)
            throw domain_error("correct testsets need a cipher spec with planted states");
        source = [sf, gvars](std::uint64_t) {
            return EstimateInstance{sf.system, gvars, {}};
        };
    } else {
        auto cipher = std::make_shared<DifferenceCipherSpec>(
            DifferenceCipherSpec::from_json(read_json(a.spec_file)));
        std::vector<std::string> guess_names = a.guess_names;
        std::uint64_t seed = a.seed;
        source = [cipher, guess_names, seed](std::uint64_t i) {
            CounterRng rng(seed, i + 1);
            for (int tries = 0; tries < 64; ++tries) {
                auto inst = make_desk_instance(*cipher, rng);
                if (!inst) continue;
                std::vector<VarId> gvars = guess_names.empty()
                                               ? inst->free_vars
                                               : resolve_vars(cipher->ring(), guess_names);
                std::vector<Coeff> correct;
                for (VarId v : gvars) correct.push_back(inst->state[v]);
                return EstimateInstance{inst->attack.system, std::move(gvars),
                                        std::move(correct)};
            }
            throw resource_error("could not draw a unique desk instance");
        };
    }

    ProbabilityTable table = estimate_probabilities(source, ks, Bs, a.D, spec);
    table.save_csv(a.out_prefix + ".csv");
    if (!a.render.empty()) write_text(a.render, render_probability_grid(table));
    nlohmann::json j = table.to_json();
    j["version"] = kVersion;
    write_json(a.out_prefix + ".json", j);
    std::cout << "wrote " << a.out_prefix << ".csv and " << a.out_prefix << ".json\n";
    return kOk;
}

struct ReportArgs {
    std::string random_csv, correct_csv, timings_file;
    std::string b_range;
    std::uint32_t k_first = 0;
    unsigned q = 2;
    std::string out_json, render_txt, figure_csv;
    bool optimality = false;
    std::uint64_t optimality_cap = std::uint64_t(1) << 12;
};

int cmd_report(const ReportArgs& a) {
    ProbabilityTable rnd = ProbabilityTable::load_csv(a.random_csv);
    std::optional<ProbabilityTable> cor;
    if (!a.correct_csv.empty()) cor = ProbabilityTable::load_csv(a.correct_csv);
    std::vector<std::uint32_t> Bs = a.b_range.empty() ? rnd.bs() : parse_range(a.b_range);

    std::optional<std::map<std::uint32_t, double>> sigma, tau;
    if (!a.timings_file.empty()) {
        nlohmann::json tj = read_json(a.timings_file);
        sigma.emplace();
        tau.emplace();
        for (const auto& row : tj.at("steps")) {
            std::uint32_t k = row.at("k").get<std::uint32_t>();
            (*sigma)[k] = row.at("sigma").get<double>();
            (*tau)[k] = row.at("tau").get<double>();
        }
    }

    nlohmann::json rows = nlohmann::json::array();
    std::vector<ComplexityReport> reports;
    for (std::uint32_t B : Bs) {
        ComplexityReport rep = make_report(rnd, cor ? &*cor : nullptr, B, a.k_first, a.q,
                                           sigma ? &*sigma : nullptr, tau ? &*tau : nullptr);
        reports.push_back(rep);
        nlohmann::json row = report_to_json(rep);
        if (a.optimality) {
            OptimalityReport orep =
                optimality_check(rnd, B, a.k_first, rep.k_final, a.q, a.optimality_cap);
            row["optimality"] = {{"subsets", orep.subsets},
                                 {"full_chain_minimal", orep.full_chain_minimal},
                                 {"singleton_maximal", orep.singleton_maximal},
                                 {"best_log2", orep.best_log2},
                                 {"worst_log2", orep.worst_log2}};
        }
        rows.push_back(std::move(row));
    }

    nlohmann::json out = {{"version", kVersion},
                          {"k_first", a.k_first},
                          {"q", a.q},
                          {"random_table", a.random_csv},
                          {"correct_table", a.correct_csv},
                          {"rows", rows}};
    if (!a.out_json.empty()) write_json(a.out_json, out);

    std::ostringstream txt;
    auto line = [&](const std::string& label, auto fn) {
        txt << std::left << std::setw(14) << label;
        for (const ComplexityReport& r : reports) txt << std::right << std::setw(9) << fn(r);
        txt << "\n";
    };
    auto fmt2 = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    line("B", [](const ComplexityReport& r) { return std::to_string(r.B); });
    line("k''", [](const ComplexityReport& r) { return std::to_string(r.k_final); });
    line("log2(C)", [](const ComplexityReport& r) { return std::to_string(r.k_final); });
    line("log2(C2)", [&](const ComplexityReport& r) { return fmt2(r.log2_c2); });
    if (cor) {
        line("kbar''", [](const ComplexityReport& r) {
            return r.k_final_median ? std::to_string(*r.k_final_median) : std::string("-");
        });
        line("log2(C2bar)", [&](const ComplexityReport& r) {
            return r.log2_c2_median ? fmt2(*r.log2_c2_median) : std::string("-");
        });
    }
    std::cout << txt.str();
    if (!a.render_txt.empty()) write_text(a.render_txt, txt.str());

    if (!a.figure_csv.empty()) {
        std::ostringstream fig;
        fig << "B,log2_one_step,log2_multistep\n";
        for (const ComplexityReport& r : reports)
            fig << r.B << "," << r.k_final << "," << r.log2_c2 << "\n";
        write_text(a.figure_csv, fig.str());
    }
    return kOk;
}

int cmd_keystream(const std::string& spec_file, const std::string& state_text, bool random_state,
                  std::uint64_t seed, long long warmup, std::uint32_t count,
                  const std::string& out, const std::string& state_out, bool hex) {
    DifferenceCipherSpec spec = DifferenceCipherSpec::from_json(read_json(spec_file));
    State s;
    if (random_state) {
        CounterRng rng(seed);
        s.resize(spec.state_size());
        for (auto& c : s) c = static_cast<Coeff>(rng.below(spec.ring()->q()));
    } else {
        s = state_from_string(spec.ring(), state_text);
    }
    std::uint32_t u = warmup < 0 ? spec.warmup() : static_cast<std::uint32_t>(warmup);
    std::vector<Coeff> bits = keystream(spec, s, u, count);
    std::string text = keystream_to_text(bits, hex);
    if (out.empty())
        std::cout << text << "\n";
    else
        write_text(out, text + "\n");
    if (!state_out.empty()) write_text(state_out, state_to_string(s) + "\n");
    return kOk;
}

int cmd_invert(const std::string& spec_file, const std::string& out) {
    DifferenceCipherSpec spec = DifferenceCipherSpec::from_json(read_json(spec_file));
    InvertResult inv = invert_endo(transition_endo(spec));
    if (!inv.inverse) {
        std::cerr << "not invertible: the reduced basis does not have the required shape\n";
        return kNoSolution;
    }
    std::ostringstream os;
    for (VarId v = 0; v < spec.state_size(); ++v)
        os << spec.ring()->vars().name(v) << " = " << to_string(inv.inverse->image(v)) << "\n";
    if (out.empty())
        std::cout << os.str();
    else
        write_text(out, os.str());
    return kOk;
}

int cmd_rank(const std::string& system_file, const std::string& subsets_file,
             std::uint64_t samples, std::uint64_t seed, std::uint32_t D, const std::string& out) {
    SystemFile sf = load_system(system_file);
    nlohmann::json sj = read_json(subsets_file);
    std::vector<std::vector<VarId>> candidates;
    for (const auto& subset : sj) {
        std::vector<std::string> names;
        for (const auto& n : subset) names.push_back(n.get<std::string>());
        candidates.push_back(resolve_vars(sf.ring, names));
    }
    auto ranked = rank_guess_sets(sf.system, candidates, samples, seed, D);
    nlohmann::json j = nlohmann::json::array();
    for (const RankEntry& e : ranked) {
        nlohmann::json names = nlohmann::json::array();
        for (VarId v : candidates[e.candidate]) names.push_back(sf.ring->vars().name(v));
        j.push_back({{"candidate", e.candidate},
                     {"average_nrv", e.average_nrv},
                     {"variables", std::move(names)}});
    }
    nlohmann::json outj = {{"version", kVersion},
                           {"seed", seed},
                           {"samples", samples},
                           {"D", D},
                           {"ranking", j}};
    if (out.empty())
        std::cout << outj.dump(2) << "\n";
    else
        write_json(out, outj);
    return kOk;
}

int cmd_make_reduced(std::uint32_t r1, std::uint32_t r2, std::uint32_t r3, std::uint64_t seed,
                     const std::string& out) {
    DifferenceCipherSpec spec = reduced_trivium(r1, r2, r3, seed);
    nlohmann::json j = spec.to_json();
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(out, j);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multistep guess-and-determine solving over finite fields"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand("solve", "run the multistep solver on a system or cipher");
    solve->add_option("--system", sa.system_file, "polynomial system JSON");
    solve->add_option("--spec", sa.spec_file, "cipher spec JSON");
    solve->add_option("--keystream", sa.keystream_file, "observed keystream file");
    solve->add_option("--guess-vars", sa.guess_names, "guess variables in order")->delimiter(',');
    solve->add_option("--steps", sa.steps_text, "steps, e.g. 8,9,10 or 8:12")->required();
    solve->add_option("-B,--bound", sa.B, "NRV bound")->required();
    solve->add_option("-D,--degree", sa.D, "Groebner degree bound");
    solve->add_option("--mode", sa.mode, "early-exit | count-everything");
    solve->add_option("--seed", sa.seed, "run seed (recorded in the manifest)");
    solve->add_option("--workers", sa.workers, "worker threads");
    solve->add_option("--max-rows", sa.max_rows, "matrix row cap");
    solve->add_option("--max-cols", sa.max_cols, "matrix column cap");
    solve->add_option("--out-dir", sa.out_dir, "output directory");

    EstimateArgs ea;
    CLI::App* estimate = app.add_subcommand("estimate", "estimate wild-guess probabilities");
    estimate->add_option("--system", ea.system_file, "polynomial system JSON");
    estimate->add_option("--spec", ea.spec_file, "cipher spec JSON");
    estimate->add_option("--guess-vars", ea.guess_names, "guess variables")->delimiter(',');
    estimate->add_option("--k", ea.k_range, "k range lo:hi")->required();
    estimate->add_option("--B", ea.b_range, "B range lo:hi")->required();
    estimate->add_option("-D,--degree", ea.D, "Groebner degree bound");
    estimate->add_option("--testset", ea.testset, "exhaustive | random[:N] | correct");
    estimate->add_option("--instances", ea.instances, "number of sampled instances");
    estimate->add_option("--seed", ea.seed, "testset seed")->required();
    estimate->add_option("--exhaustive-cap", ea.exhaustive_cap, "cap on q^k enumeration");
    estimate->add_flag("--fresh-draws", ea.fresh_draws, "draw fresh guesses per k");
    estimate->add_option("--out-prefix", ea.out_prefix, "output file prefix");
    estimate->add_option("--render", ea.render, "write the k-by-B probability grid");

    ReportArgs ra;
    CLI::App* report = app.add_subcommand("report", "complexity report from probability tables");
    report->add_option("--random", ra.random_csv, "random-testset CSV")->required();
    report->add_option("--correct", ra.correct_csv, "correct-testset CSV");
    report->add_option("--B", ra.b_range, "B range (default: all in table)");
    report->add_option("--k-first", ra.k_first, "first step k'")->required();
    report->add_option("--q", ra.q, "field size");
    report->add_option("--timings", ra.timings_file, "timings JSON for T1/T2");
    report->add_option("--out", ra.out_json, "report JSON path");
    report->add_option("--render", ra.render_txt, "rendered text table path");
    report->add_option("--figure-csv", ra.figure_csv, "one-step vs multistep CSV");
    report->add_flag("--optimality", ra.optimality, "enumerate step subsets per B");
    report->add_option("--optimality-cap", ra.optimality_cap, "subset enumeration cap");

    std::string ks_spec, ks_state, ks_out, ks_state_out;
    bool ks_random = false, ks_hex = false;
    std::uint64_t ks_seed = 0;
    long long ks_warmup = -1;
    std::uint32_t ks_count = 0;
    CLI::App* keystream_cmd = app.add_subcommand("keystream", "emit keystream bits");
    keystream_cmd->add_option("--spec", ks_spec, "cipher spec JSON")->required();
    keystream_cmd->add_option("--state", ks_state, "initial state string");
    keystream_cmd->add_flag("--random-state", ks_random, "draw the state from --seed");
    keystream_cmd->add_option("--seed", ks_seed, "state seed");
    keystream_cmd->add_option("--warmup", ks_warmup, "override warm-up clocks");
    keystream_cmd->add_option("--count", ks_count, "bits to emit")->required();
    keystream_cmd->add_option("--out", ks_out, "keystream file");
    keystream_cmd->add_option("--state-out", ks_state_out, "write the initial state");
    keystream_cmd->add_flag("--hex", ks_hex, "hex output");

    std::string inv_spec, inv_out;
    CLI::App* invert = app.add_subcommand("invert", "invert the state transition map");
    invert->add_option("--spec", inv_spec, "cipher spec JSON")->required();
    invert->add_option("--out", inv_out, "inverse map file");

    std::string rk_system, rk_subsets, rk_out;
    std::uint64_t rk_samples = 64, rk_seed = 0;
    std::uint32_t rk_D = 2;
    CLI::App* rank = app.add_subcommand("rank-subsets", "rank guess subsets by average NRV");
    rank->add_option("--system", rk_system, "polynomial system JSON")->required();
    rank->add_option("--subsets", rk_subsets, "JSON list of variable-name lists")->required();
    rank->add_option("--samples", rk_samples, "samples per candidate");
    rank->add_option("--seed", rk_seed, "sampling seed")->required();
    rank->add_option("-D,--degree", rk_D, "Groebner degree bound");
    rank->add_option("--out", rk_out, "ranking JSON path");

    std::uint32_t mr_r1 = 7, mr_r2 = 6, mr_r3 = 8;
    std::uint64_t mr_seed = 0;
    std::string mr_out;
    CLI::App* make_reduced = app.add_subcommand("make-reduced", "emit a reduced cipher spec");
    make_reduced->add_option("--r1", mr_r1, "first register length");
    make_reduced->add_option("--r2", mr_r2, "second register length");
    make_reduced->add_option("--r3", mr_r3, "third register length");
    make_reduced->add_option("--seed", mr_seed, "tap perturbation seed");
    make_reduced->add_option("--out", mr_out, "spec JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            if (sa.system_file.empty() == sa.spec_file.empty())
                throw domain_error("solve needs exactly one of --system or --spec");
            if (!sa.spec_file.empty() && sa.keystream_file.empty())
                throw domain_error("--spec needs --keystream");
            return cmd_solve(sa);
        }
        if (estimate->parsed()) {
            if (ea.system_file.empty() == ea.spec_file.empty())
                throw domain_error("estimate needs exactly one of --system or --spec");
            return cmd_estimate(ea);
        }
        if (report->parsed()) return cmd_report(ra);
        if (keystream_cmd->parsed()) {
            if (ks_state.empty() && !ks_random)
                throw domain_error("keystream needs --state or --random-state");
            return cmd_keystream(ks_spec, ks_state, ks_random, ks_seed, ks_warmup, ks_count,
                                 ks_out, ks_state_out, ks_hex);
        }
        if (invert->parsed()) return cmd_invert(inv_spec, inv_out);
        if (rank->parsed())
            return cmd_rank(rk_system, rk_subsets, rk_samples, rk_seed, rk_D, rk_out);
        if (make_reduced->parsed()) return cmd_make_reduced(mr_r1, mr_r2, mr_r3, mr_seed, mr_out);
    } catch (const plan_violation_error& e) {
        std::cerr << "plan violation: " << e.what() << "\n";
        return kPlanViolation;
    } catch (const resource_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kResource;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
