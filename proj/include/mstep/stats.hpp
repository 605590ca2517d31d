#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mstep/bigint.hpp"
#include "mstep/multistep.hpp"

namespace mstep {

struct ProbEntry {
    std::uint64_t wild = 0;
    std::uint64_t total = 0;
};

/// Estimated wild-guess probabilities p_B(k), stored as exact counts so the
/// complexity formulas can be evaluated without floating drift.
class ProbabilityTable {
public:
    ProbabilityTable() = default;
    explicit ProbabilityTable(std::string kind, nlohmann::json provenance = {})
        : kind_(std::move(kind)), provenance_(std::move(provenance)) {}

    const std::string& kind() const { return kind_; }
    const nlohmann::json& provenance() const { return provenance_; }

    void record(std::uint32_t B, std::uint32_t k, bool wild) {
        ProbEntry& e = entries_[{B, k}];
        e.total += 1;
        if (wild) e.wild += 1;
    }

    void set(std::uint32_t B, std::uint32_t k, std::uint64_t wild, std::uint64_t total) {
        if (total == 0 || wild > total) throw domain_error("bad probability entry");
        entries_[{B, k}] = {wild, total};
    }

    bool has(std::uint32_t B, std::uint32_t k) const { return entries_.count({B, k}) > 0; }

    const ProbEntry& entry(std::uint32_t B, std::uint32_t k) const {
        auto it = entries_.find({B, k});
        if (it == entries_.end())
            throw domain_error("missing probability entry B=" + std::to_string(B) +
                               " k=" + std::to_string(k));
        return it->second;
    }

    BigRat p(std::uint32_t B, std::uint32_t k) const {
        const ProbEntry& e = entry(B, k);
        return BigRat::fraction(e.wild, e.total);
    }

    double p_double(std::uint32_t B, std::uint32_t k) const {
        const ProbEntry& e = entry(B, k);
        return double(e.wild) / double(e.total);
    }

    std::vector<std::uint32_t> bs() const {
        std::vector<std::uint32_t> out;
        for (const auto& [key, e] : entries_)
            if (out.empty() || out.back() != key.first) out.push_back(key.first);
        return out;
    }

    std::vector<std::uint32_t> ks(std::uint32_t B) const {
        std::vector<std::uint32_t> out;
        for (const auto& [key, e] : entries_)
            if (key.first == B) out.push_back(key.second);
        return out;
    }

    const std::map<std::pair<std::uint32_t, std::uint32_t>, ProbEntry>& entries() const {
        return entries_;
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "kind,B,k,wild,total,p\n";
        for (const auto& [key, e] : entries_) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.5f", double(e.wild) / double(e.total));
            os << kind_ << "," << key.first << "," << key.second << "," << e.wild << ","
               << e.total << "," << buf << "\n";
        }
        return os.str();
    }

    void save_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw resource_error("cannot write " + path);
        f << to_csv();
    }

    static ProbabilityTable from_csv(std::istream& in, const std::string& origin) {
        ProbabilityTable t;
        t.provenance_ = {{"source", origin}};
        std::string line;
        if (!std::getline(in, line) || line.rfind("kind,B,k,wild,total", 0) != 0)
            throw parse_error("probability CSV must start with 'kind,B,k,wild,total,p'", 0);
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string kind, field;
            std::uint32_t B, k;
            std::uint64_t wild, total;
            if (!std::getline(ls, kind, ',')) continue;
            auto next_u64 = [&]() -> std::uint64_t {
                if (!std::getline(ls, field, ','))
                    throw parse_error("short probability CSV row", lineno);
                return std::stoull(field);
            };
            B = static_cast<std::uint32_t>(next_u64());
            k = static_cast<std::uint32_t>(next_u64());
            wild = next_u64();
            total = next_u64();
            t.set(B, k, wild, total);
            if (t.kind_.empty()) t.kind_ = kind;
        }
        return t;
    }

    static ProbabilityTable load_csv(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw resource_error("cannot read " + path);
        return from_csv(f, path);
    }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [key, e] : entries_)
            rows.push_back({{"B", key.first},
                            {"k", key.second},
                            {"wild", e.wild},
                            {"total", e.total},
                            {"p", double(e.wild) / double(e.total)}});
        return {{"kind", kind_}, {"provenance", provenance_}, {"entries", rows}};
    }

    void set_kind(std::string k) { kind_ = std::move(k); }
    void set_provenance(nlohmann::json p) { provenance_ = std::move(p); }

private:
    std::string kind_;
    nlohmann::json provenance_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, ProbEntry> entries_;
};

/// k'' = least k with p_B(k) = 0.
inline std::uint32_t final_step(const ProbabilityTable& t, std::uint32_t B) {
    for (std::uint32_t k : t.ks(B))
        if (t.entry(B, k).wild == 0) return k;
    throw no_final_step_error("no k with p_B(k) = 0 for B = " + std::to_string(B));
}

/// Median final step: least k with p_B(k) < 1/2 (correct testsets).
inline std::uint32_t median_final_step(const ProbabilityTable& t, std::uint32_t B) {
    for (std::uint32_t k : t.ks(B)) {
        const ProbEntry& e = t.entry(B, k);
        if (2 * e.wild < e.total) return k;
    }
    throw no_final_step_error("no k with p_B(k) < 1/2 for B = " + std::to_string(B));
}

namespace detail {
inline BigRat step_probability(const ProbabilityTable& t, std::uint32_t B, std::uint32_t k,
                               std::uint32_t first_step) {
    if (k < first_step) return BigRat(1);  // convention p_B(k'-1) = 1
    return t.p(B, k);
}
}  // namespace detail

/// Number of GBElimLin calls: C1 = sum_i p(k_{i-1}) q^{k_i} with p(k_0) = 1.
inline BigRat complexity_C1(const ProbabilityTable& t, std::uint32_t B,
                            std::span<const std::uint32_t> steps, unsigned q) {
    if (steps.empty()) throw domain_error("no steps");
    BigRat c1(0);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        BigRat p = i == 0 ? BigRat(1) : t.p(B, steps[i - 1]);
        c1 = c1.add(p.mul_uint(BigUint::pow(q, steps[i])));
    }
    return c1;
}

/// Number of tamed guesses (complete solver calls):
/// C2 = sum_i (p(k_{i-1}) - p(k_i)) q^{k_i} with p(k_0) = 1 and p read from
/// the table at every step, so truncating at the median final step uses the
/// true residual probability.
inline BigRat complexity_C2(const ProbabilityTable& t, std::uint32_t B,
                            std::span<const std::uint32_t> steps, unsigned q) {
    if (steps.empty()) throw domain_error("no steps");
    BigRat c2(0);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        BigRat prev = i == 0 ? BigRat(1) : t.p(B, steps[i - 1]);
        BigRat cur = t.p(B, steps[i]);
        c2 = c2.add(prev.sub(cur).mul_uint(BigUint::pow(q, steps[i])));
    }
    return c2;
}

/// Consecutive steps k_first..k_last.
inline std::vector<std::uint32_t> full_chain(std::uint32_t k_first, std::uint32_t k_last) {
    if (k_first > k_last) throw domain_error("empty step chain");
    std::vector<std::uint32_t> s;
    for (std::uint32_t k = k_first; k <= k_last; ++k) s.push_back(k);
    return s;
}

struct RuntimeEstimate {
    double t1 = 0;
    double t2 = 0;
    double total = 0;
};

/// Eq-style running times from per-step average timings sigma (GBElimLin)
/// and tau (complete GrobnerBasis), keyed by the step size k.
inline RuntimeEstimate runtime_T(const ProbabilityTable& t, std::uint32_t B,
                                 std::span<const std::uint32_t> steps,
                                 const std::map<std::uint32_t, double>& sigma,
                                 const std::map<std::uint32_t, double>& tau, unsigned q) {
    RuntimeEstimate est;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::uint32_t k = steps[i];
        auto is = sigma.find(k);
        auto it = tau.find(k);
        if (is == sigma.end() || it == tau.end())
            throw domain_error("missing timing for step " + std::to_string(k));
        double prev = i == 0 ? 1.0 : t.p_double(B, steps[i - 1]);
        double cur = t.p_double(B, k);
        double qk = std::pow(double(q), double(k));
        est.t1 += is->second * prev * qk;
        est.t2 += it->second * (prev - cur) * qk;
    }
    est.total = est.t1 + est.t2;
    return est;
}

struct OptimalityReport {
    std::uint64_t subsets = 0;
    double best_log2 = 0;
    double worst_log2 = 0;
    double full_chain_log2 = 0;
    std::vector<std::uint32_t> best_steps;
    bool full_chain_minimal = false;
    bool singleton_maximal = false;
};

/// Enumerate every step subset of {k_first..k_last} containing k_last and
/// compare C2 values: the full chain must attain the minimum (Thm-style
/// optimality) and the one-step strategy the maximum.
inline OptimalityReport optimality_check(const ProbabilityTable& t, std::uint32_t B,
                                         std::uint32_t k_first, std::uint32_t k_last, unsigned q,
                                         std::uint64_t max_subsets = std::uint64_t(1) << 12) {
    if (k_last < k_first) throw domain_error("bad step range");
    std::uint32_t m = k_last - k_first;
    if (m >= 63 || (std::uint64_t(1) << m) > max_subsets)
        throw resource_error("too many step subsets to enumerate");
    OptimalityReport rep;
    BigRat best, worst;
    std::vector<std::uint32_t> full = full_chain(k_first, k_last);
    BigRat full_c2 = complexity_C2(t, B, full, q);
    rep.full_chain_log2 = full_c2.log2();
    BigRat singleton_c2;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
        std::vector<std::uint32_t> steps;
        for (std::uint32_t b = 0; b < m; ++b)
            if ((mask >> b) & 1) steps.push_back(k_first + b);
        steps.push_back(k_last);
        BigRat c2 = complexity_C2(t, B, steps, q);
        if (rep.subsets == 0 || c2 < best) {
            best = c2;
            rep.best_steps = steps;
        }
        if (rep.subsets == 0 || worst < c2) worst = c2;
        if (mask == 0) singleton_c2 = c2;
        ++rep.subsets;
    }
    rep.best_log2 = best.log2();
    rep.worst_log2 = worst.log2();
    rep.full_chain_minimal = !(best < full_c2);
    rep.singleton_maximal = !(singleton_c2 < worst);
    return rep;
}

struct ComplexityReport {
    std::uint32_t B = 0;
    std::uint32_t k_first = 0;
    std::uint32_t k_final = 0;  // k'' (worst case)
    std::optional<std::uint32_t> k_final_median;
    double log2_c1 = 0;
    double log2_c2 = 0;
    std::optional<double> log2_c2_median;
    std::optional<RuntimeEstimate> runtime;
};

/// Assemble the per-B report: worst-case final step and complexities from
/// the random-testset table, average-case versions from the correct-testset
/// table when present.
inline ComplexityReport make_report(const ProbabilityTable& random_table,
                                    const ProbabilityTable* correct_table, std::uint32_t B,
                                    std::uint32_t k_first, unsigned q,
                                    const std::map<std::uint32_t, double>* sigma = nullptr,
                                    const std::map<std::uint32_t, double>* tau = nullptr) {
    ComplexityReport rep;
    rep.B = B;
    rep.k_first = k_first;
    rep.k_final = final_step(random_table, B);
    std::vector<std::uint32_t> chain = full_chain(k_first, rep.k_final);
    rep.log2_c1 = complexity_C1(random_table, B, chain, q).log2();
    rep.log2_c2 = complexity_C2(random_table, B, chain, q).log2();
    if (correct_table) {
        rep.k_final_median = median_final_step(*correct_table, B);
        std::vector<std::uint32_t> mchain = full_chain(k_first, *rep.k_final_median);
        rep.log2_c2_median = complexity_C2(random_table, B, mchain, q).log2();
    }
    if (sigma && tau) rep.runtime = runtime_T(random_table, B, chain, *sigma, *tau, q);
    return rep;
}

inline nlohmann::json report_to_json(const ComplexityReport& r) {
    nlohmann::json j;
    j["B"] = r.B;
    j["k_first"] = r.k_first;
    j["k_final"] = r.k_final;
    j["log2_one_step"] = r.k_final;  // one-step complexity is q^{k''}
    j["log2_C1"] = r.log2_c1;
    j["log2_C2"] = r.log2_c2;
    if (r.k_final_median) j["k_final_median"] = *r.k_final_median;
    if (r.log2_c2_median) j["log2_C2_median"] = *r.log2_c2_median;
    if (r.runtime) {
        j["T1_seconds"] = r.runtime->t1;
        j["T2_seconds"] = r.runtime->t2;
        j["T_seconds"] = r.runtime->total;
    }
    return j;
}

/// One system instance for probability estimation: the generating set, the
/// ordered guess variables and the correct guess values of the planted state.
struct EstimateInstance {
    GeneratorSet system;
    std::vector<VarId> guess_vars;
    std::vector<Coeff> correct_values;
};

using InstanceSource = std::function<EstimateInstance(std::uint64_t)>;

struct TestsetSpec {
    enum class Kind { Exhaustive, Random, Correct } kind = Kind::Random;
    std::uint64_t instances = 1;
    std::uint64_t samples_per_instance = 1;  // random testsets
    bool nested = true;                      // prefix-nested draws across k
    std::uint64_t seed = 0;
    std::uint64_t exhaustive_cap = std::uint64_t(1) << 20;
};

/// Estimate p_B(k) over the requested (B, k) grid: every sampled guess runs
/// GBElimLin once per k and the resulting NRV is compared against each B.
/// Exhaustive mode enumerates all of GF(q)^k and yields exact counts.
inline ProbabilityTable estimate_probabilities(const InstanceSource& source,
                                               std::span<const std::uint32_t> ks,
                                               std::span<const std::uint32_t> Bs, std::uint32_t D,
                                               const TestsetSpec& spec, const RunConfig& cfg = {}) {
    const char* kind = spec.kind == TestsetSpec::Kind::Exhaustive ? "exhaustive"
                       : spec.kind == TestsetSpec::Kind::Random   ? "random"
                                                                  : "correct";
    ProbabilityTable table;
    table.set_kind(kind);
    table.set_provenance({{"seed", spec.seed},
                          {"instances", spec.instances},
                          {"samples_per_instance", spec.samples_per_instance},
                          {"nested", spec.nested},
                          {"D", D}});
    if (ks.empty() || Bs.empty()) throw domain_error("empty k or B range");

    std::uint32_t kmax = *std::max_element(ks.begin(), ks.end());
    for (std::uint64_t inst = 0; inst < spec.instances; ++inst) {
        EstimateInstance in = source(inst);
        const RingPtr& ring = in.system.ring();
        const unsigned q = ring->q();
        if (in.guess_vars.size() < kmax)
            throw domain_error("instance provides fewer guess variables than max k");

        auto classify = [&](std::span<const Coeff> values, std::uint32_t k) {
            Assignment assign = empty_assignment(*ring);
            for (std::uint32_t j = 0; j < k; ++j)
                assign[in.guess_vars[j]] = static_cast<std::int8_t>(values[j]);
            std::vector<Polynomial> sub;
            sub.reserve(in.system.size());
            for (const Polynomial& p : in.system.polys()) sub.push_back(p.substitute(assign));
            ElimOutcome out =
                gb_elim_lin(GeneratorSet::make(ring, in.system.order(), std::move(sub)), D,
                            cfg.limits);
            bool reduced = out.kind == ElimKind::Reduced;
            for (std::uint32_t B : Bs) table.record(B, k, reduced && out.nrv > B);
        };

        switch (spec.kind) {
            case TestsetSpec::Kind::Exhaustive: {
                for (std::uint32_t k : ks) {
                    std::uint64_t total = 1;
                    for (std::uint32_t i = 0; i < k; ++i) {
                        total *= q;
                        if (total > spec.exhaustive_cap)
                            throw resource_error("exhaustive testset exceeds cap at k=" +
                                                 std::to_string(k));
                    }
                    std::vector<Coeff> values(k);
                    for (std::uint64_t idx = 0; idx < total; ++idx) {
                        std::uint64_t v = idx;
                        for (std::uint32_t j = k; j-- > 0;) {
                            values[j] = static_cast<Coeff>(v % q);
                            v /= q;
                        }
                        classify(values, k);
                    }
                }
                break;
            }
            case TestsetSpec::Kind::Random: {
                for (std::uint64_t s = 0; s < spec.samples_per_instance; ++s) {
                    CounterRng rng(spec.seed, inst * spec.samples_per_instance + s);
                    std::vector<Coeff> draw(kmax);
                    for (auto& c : draw) c = static_cast<Coeff>(rng.below(q));
                    for (std::uint32_t k : ks) {
                        if (!spec.nested)
                            for (auto& c : draw) c = static_cast<Coeff>(rng.below(q));
                        classify(std::span<const Coeff>(draw.data(), k), k);
                    }
                }
                break;
            }
            case TestsetSpec::Kind::Correct: {
                if (in.correct_values.size() < kmax)
                    throw domain_error("instance provides fewer correct values than max k");
                for (std::uint32_t k : ks)
                    classify(std::span<const Coeff>(in.correct_values.data(), k), k);
                break;
            }
        }
    }
    return table;
}

}  // namespace mstep
