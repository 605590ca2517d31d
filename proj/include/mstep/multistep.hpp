#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "mstep/elimlin.hpp"
#include "mstep/rng.hpp"

#ifdef __unix__
#include <unistd.h>
#endif

namespace mstep {

/// Stepwise evaluation plan: the ordered guess variables, the strictly
/// increasing step sizes k_1 < ... < k_r, the NRV bound B and the Gröbner
/// degree bound D.
struct GuessPlan {
    std::vector<VarId> guess_vars;
    std::vector<std::uint32_t> steps;
    std::uint32_t B = 0;
    std::uint32_t D = 1;

    void validate(const Ring& ring) const {
        if (steps.empty()) throw domain_error("plan has no steps");
        for (std::size_t i = 1; i < steps.size(); ++i)
            if (steps[i] <= steps[i - 1]) throw domain_error("plan steps must strictly increase");
        if (steps.front() == 0) throw domain_error("plan steps must be positive");
        if (steps.back() > guess_vars.size())
            throw domain_error("final step exceeds the guess variable list");
        if (D < 1) throw domain_error("plan needs D >= 1");
        if (B > ring.nvars()) throw domain_error("plan needs B <= number of variables");
        for (VarId v : guess_vars) ring.check_var(v);
    }
};

enum class RunMode { EarlyExit, CountEverything };

struct RunConfig {
    RunMode mode = RunMode::EarlyExit;
    unsigned workers = 1;
    EngineLimits limits;
    std::uint64_t wildset_memory_threshold = std::uint64_t(1) << 24;  // prefixes kept in memory
};

/// Per-step call accounting. wild + tamed = gbelim_calls; inconsistent
/// counts the {1} outcomes (a subset of tamed); gb_calls <= tamed.
struct StepCounters {
    std::uint32_t k = 0;
    std::uint64_t inputs_wild = 0;
    std::uint64_t gbelim_calls = 0;
    std::uint64_t gb_calls = 0;
    std::uint64_t wild = 0;
    std::uint64_t tamed = 0;
    std::uint64_t inconsistent = 0;
    double gbelim_seconds = 0;
    double gb_seconds = 0;

    void merge(const StepCounters& o) {
        gbelim_calls += o.gbelim_calls;
        gb_calls += o.gb_calls;
        wild += o.wild;
        tamed += o.tamed;
        inconsistent += o.inconsistent;
        gbelim_seconds += o.gbelim_seconds;
        gb_seconds += o.gb_seconds;
    }
};

/// Sorted set of wild guess prefixes, stored as mixed-radix indices over
/// GF(q)^k (first guess variable most significant). Appends beyond the
/// memory threshold spill to a sequential run file; the global append order
/// is ascending so the file needs no merging.
class WildSet {
public:
    explicit WildSet(std::uint32_t k, std::uint64_t mem_threshold = std::uint64_t(1) << 24)
        : k_(k), threshold_(std::max<std::uint64_t>(1, mem_threshold)) {}

    std::uint32_t k() const { return k_; }
    std::uint64_t size() const { return spilled_ + mem_.size(); }
    bool empty() const { return size() == 0; }

    void append(std::uint64_t prefix) {
        mem_.push_back(prefix);
        if (mem_.size() >= threshold_) flush();
    }

    /// Copy prefixes [start, start+count) into out (out is resized).
    void fetch(std::uint64_t start, std::uint64_t count, std::vector<std::uint64_t>& out) const {
        out.resize(count);
        std::uint64_t got = 0;
        if (start < spilled_) {
            std::uint64_t from_file = std::min(count, spilled_ - start);
#ifdef __unix__
            ssize_t rd = pread(fileno(spill_.get()), out.data(),
                               from_file * sizeof(std::uint64_t),
                               static_cast<off_t>(16 + start * sizeof(std::uint64_t)));
            if (rd != static_cast<ssize_t>(from_file * sizeof(std::uint64_t)))
                throw resource_error("wild-set spill read failed");
#else
            throw resource_error("wild-set spill unsupported on this platform");
#endif
            got = from_file;
        }
        for (; got < count; ++got) out[got] = mem_[start + got - spilled_];
    }

    void save(const std::string& path) const {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        if (!f) throw resource_error("cannot write wild-set file " + path);
        write_header(f, k_, static_cast<std::uint32_t>(size()));
        std::vector<std::uint64_t> buf;
        const std::uint64_t chunk = 1 << 16;
        for (std::uint64_t at = 0; at < size(); at += chunk) {
            std::uint64_t n = std::min(chunk, size() - at);
            fetch(at, n, buf);
            if (std::fwrite(buf.data(), sizeof(std::uint64_t), n, f) != n) {
                std::fclose(f);
                throw resource_error("wild-set write failed");
            }
        }
        std::fclose(f);
    }

    static WildSet load(const std::string& path,
                        std::uint64_t mem_threshold = std::uint64_t(1) << 24) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) throw resource_error("cannot read wild-set file " + path);
        char magic[4];
        std::uint32_t version = 0, k = 0, count = 0;
        if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "MSWS", 4) != 0 ||
            std::fread(&version, 4, 1, f) != 1 || version != 1 || std::fread(&k, 4, 1, f) != 1 ||
            std::fread(&count, 4, 1, f) != 1) {
            std::fclose(f);
            throw parse_error("bad wild-set header in " + path, 0);
        }
        WildSet w(k, mem_threshold);
        std::vector<std::uint64_t> buf(1 << 16);
        std::uint64_t remaining = count;
        while (remaining) {
            std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), remaining));
            if (std::fread(buf.data(), sizeof(std::uint64_t), n, f) != n) {
                std::fclose(f);
                throw parse_error("truncated wild-set file " + path, 16);
            }
            for (std::size_t i = 0; i < n; ++i) w.append(buf[i]);
            remaining -= n;
        }
        std::fclose(f);
        return w;
    }

private:
    static void write_header(std::FILE* f, std::uint32_t k, std::uint32_t count) {
        std::uint32_t version = 1;
        if (std::fwrite("MSWS", 1, 4, f) != 4 || std::fwrite(&version, 4, 1, f) != 1 ||
            std::fwrite(&k, 4, 1, f) != 1 || std::fwrite(&count, 4, 1, f) != 1)
            throw resource_error("wild-set header write failed");
    }

    void flush() {
        if (!spill_) {
            std::FILE* f = std::tmpfile();
            if (!f) throw resource_error("cannot create wild-set spill file");
            spill_.reset(f);
            write_header(f, k_, 0);
        }
        if (std::fwrite(mem_.data(), sizeof(std::uint64_t), mem_.size(), spill_.get()) !=
            mem_.size())
            throw resource_error("wild-set spill write failed");
        std::fflush(spill_.get());
        spilled_ += mem_.size();
        mem_.clear();
    }

    struct FileCloser {
        void operator()(std::FILE* f) const {
            if (f) std::fclose(f);
        }
    };

    std::uint32_t k_;
    std::uint64_t threshold_;
    std::vector<std::uint64_t> mem_;
    std::unique_ptr<std::FILE, FileCloser> spill_;
    std::uint64_t spilled_ = 0;
};

/// A recovered solution: the final linear basis, the elimination records
/// that reconstruct the full point, and the assembled assignment.
struct Solution {
    GeneratorSet basis;
    std::vector<std::pair<VarId, Polynomial>> eliminated;
    Assignment assignment;
    std::uint32_t step_k = 0;
    std::uint64_t guess_index = 0;
};

struct StepOutcome {
    std::optional<Solution> solution;
    WildSet wild{0};
    StepCounters counters;
};

namespace detail {

inline void decode_guess(std::uint64_t index, std::uint32_t k, unsigned q,
                         std::span<const VarId> vars, Assignment& assign) {
    for (std::uint32_t j = k; j-- > 0;) {
        assign[vars[j]] = static_cast<std::int8_t>(index % q);
        index /= q;
    }
}

inline std::uint64_t pow_u64(std::uint64_t b, std::uint32_t e) {
    std::uint64_t r = 1;
    while (e--) {
        if (r > (std::uint64_t(1) << 62) / b)
            throw resource_error("guess space exceeds the enumerable range");
        r *= b;
    }
    return r;
}

/// Evaluate one guess: substitute, run GBElimLin, optionally complete.
/// Returns a solution when the guess leads to one.
inline std::optional<Solution> evaluate_guess(const GeneratorSet& H, const GuessPlan& plan,
                                              std::uint32_t l, std::uint64_t index,
                                              const RunConfig& cfg, StepCounters& ctr,
                                              bool& is_wild) {
    const RingPtr& ring = H.ring();
    const unsigned q = ring->q();
    is_wild = false;

    Assignment assign = empty_assignment(*ring);
    decode_guess(index, l, q, plan.guess_vars, assign);

    // sigma covers the whole evaluation: substituting the guess is part of
    // running GBElimLin on H plus the evaluation equations
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Polynomial> sub;
    sub.reserve(H.size());
    for (const Polynomial& p : H.polys()) sub.push_back(p.substitute(assign));
    GeneratorSet Hs = GeneratorSet::make(ring, H.order(), std::move(sub));
    ElimOutcome out = gb_elim_lin(Hs, plan.D, cfg.limits);
    ctr.gbelim_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++ctr.gbelim_calls;

    auto guess_records = [&] {
        std::vector<std::pair<VarId, Polynomial>> rec;
        rec.reserve(l + out.eliminated.size());
        for (std::uint32_t j = 0; j < l; ++j)
            rec.emplace_back(plan.guess_vars[j],
                             Polynomial::constant(ring, Coeff(assign[plan.guess_vars[j]])));
        for (auto& e : out.eliminated) rec.push_back(e);
        return rec;
    };

    // underdetermined linear bases (possible when the at-most-one-solution
    // promise is violated) are returned verbatim with an empty assignment
    auto assemble = [&](const GeneratorSet& basis) {
        Solution sol;
        sol.basis = basis;
        sol.eliminated = guess_records();
        try {
            Assignment base = assignment_from_linear_basis(basis);
            sol.assignment = extend_solution(*ring, std::move(base), sol.eliminated);
        } catch (const solve_error&) {
            sol.assignment.clear();
        }
        sol.step_k = l;
        sol.guess_index = index;
        return sol;
    };

    if (out.kind == ElimKind::FullyLinear) {
        ++ctr.tamed;
        if (out.basis.is_unit()) {
            ++ctr.inconsistent;
            return std::nullopt;
        }
        return assemble(out.basis);
    }

    if (out.nrv <= plan.B) {
        ++ctr.tamed;
        ++ctr.gb_calls;
        auto t1 = std::chrono::steady_clock::now();
        GBResult g = groebner_complete(out.basis, cfg.limits);
        ctr.gb_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        if (g.basis.is_unit()) {
            ++ctr.inconsistent;
            return std::nullopt;
        }
        if (g.basis.max_degree() <= 1) return assemble(g.basis);
        // complete basis of degree > 1: more than one solution survived,
        // which violates the caller's promise; mirror the literal control
        // flow and fall through silently
        return std::nullopt;
    }

    is_wild = true;
    ++ctr.wild;
    return std::nullopt;
}

}  // namespace detail

/// One step of the multistep strategy: extend the wild set W (or, when W is
/// null, enumerate all of GF(q)^l), classify every guess through GBElimLin,
/// run the complete engine on tamed guesses, and collect the new wild set.
inline StepOutcome step_solve(const GeneratorSet& H, const WildSet* W, std::uint32_t l,
                              const GuessPlan& plan, const RunConfig& cfg = {}) {
    plan.validate(*H.ring());
    if (std::find(plan.steps.begin(), plan.steps.end(), l) == plan.steps.end())
        throw domain_error("step l must be one of the plan steps");
    const unsigned q = H.ring()->q();
    const std::uint32_t k = W ? W->k() : 0;
    if (W && k >= l) throw domain_error("wild-set prefixes must be shorter than the step");

    const std::uint64_t ext = detail::pow_u64(q, l - k);
    const std::uint64_t total = W ? W->size() * ext : detail::pow_u64(q, l);

    StepOutcome so;
    so.wild = WildSet(l, cfg.wildset_memory_threshold);
    so.counters.k = l;
    so.counters.inputs_wild = W ? W->size() : 0;

    const unsigned workers = std::max(1u, cfg.workers);
    const bool early = cfg.mode == RunMode::EarlyExit;

    struct Chunk {
        StepCounters ctr;
        std::vector<std::uint64_t> wild;
        std::optional<Solution> sol;
        bool done = false;
    };
    const std::uint64_t chunk_size =
        std::max<std::uint64_t>(64, total / (std::uint64_t(workers) * 16) + 1);
    const std::uint64_t nchunks = (total + chunk_size - 1) / chunk_size;
    std::vector<Chunk> chunks(static_cast<std::size_t>(nchunks));

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> cancel{false};

    auto run_chunk = [&](std::uint64_t c) {
        Chunk& out = chunks[static_cast<std::size_t>(c)];
        std::uint64_t g0 = c * chunk_size;
        std::uint64_t g1 = std::min(total, g0 + chunk_size);
        std::vector<std::uint64_t> prefixes;
        if (W) W->fetch(g0 / ext, (g1 - 1) / ext - g0 / ext + 1, prefixes);
        for (std::uint64_t g = g0; g < g1; ++g) {
            if (early && cancel.load(std::memory_order_relaxed)) break;
            std::uint64_t index =
                W ? prefixes[static_cast<std::size_t>(g / ext - g0 / ext)] * ext + g % ext : g;
            bool wild = false;
            std::optional<Solution> sol =
                detail::evaluate_guess(H, plan, l, index, cfg, out.ctr, wild);
            if (wild) out.wild.push_back(index);
            if (sol && !out.sol) {
                out.sol = std::move(sol);
                if (early) {
                    cancel.store(true, std::memory_order_relaxed);
                    break;
                }
            }
        }
        out.done = true;
    };

    if (workers == 1) {
        for (std::uint64_t c = 0; c < nchunks; ++c) {
            run_chunk(c);
            if (early && cancel.load()) break;
        }
    } else {
        std::vector<std::thread> pool;
        for (unsigned wkr = 0; wkr < workers; ++wkr) {
            pool.emplace_back([&] {
                for (;;) {
                    std::uint64_t c = next.fetch_add(1);
                    if (c >= nchunks) return;
                    if (early && cancel.load(std::memory_order_relaxed)) return;
                    run_chunk(c);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // deterministic merge in chunk order; the first solution in guess order wins
    for (Chunk& c : chunks) {
        so.counters.merge(c.ctr);
        for (std::uint64_t p : c.wild) so.wild.append(p);
        if (c.sol && !so.solution) so.solution = std::move(c.sol);
    }
    return so;
}

struct MultiResult {
    std::optional<Solution> solution;
    GeneratorSet final_basis;  // the solution basis, or {1} on failure
    std::vector<StepCounters> steps;
};

/// The multistep strategy: thread wild sets through the plan steps, return
/// the first solution, or the failure basis {1} when the final wild set is
/// empty. A nonempty final wild set without a solution violates the plan's
/// final-step assumption and raises plan_violation_error.
inline MultiResult multi_solve(const GeneratorSet& H, const GuessPlan& plan,
                               const RunConfig& cfg = {}) {
    plan.validate(*H.ring());
    MultiResult res;
    std::optional<WildSet> W;
    for (std::uint32_t l : plan.steps) {
        StepOutcome so = step_solve(H, W ? &*W : nullptr, l, plan, cfg);
        res.steps.push_back(so.counters);
        if (so.solution && !res.solution) {
            res.solution = std::move(so.solution);
            if (cfg.mode == RunMode::EarlyExit) {
                res.final_basis = res.solution->basis;
                return res;
            }
        }
        W.emplace(std::move(so.wild));
    }
    if (res.solution) {
        res.final_basis = res.solution->basis;
        return res;
    }
    if (!W->empty())
        throw plan_violation_error("final wild set nonempty after step " +
                                   std::to_string(plan.steps.back()) + " (" +
                                   std::to_string(W->size()) + " prefixes)");
    res.final_basis =
        GeneratorSet::make(H.ring(), H.order(), {Polynomial::constant(H.ring(), 1)});
    return res;
}

struct RankEntry {
    std::size_t candidate;
    double average_nrv;
};

/// Rank candidate guess-variable subsets by the average NRV of GBElimLin
/// over a shared sample of evaluations; ascending order, ties keep input
/// position. Deterministic for a fixed seed.
inline std::vector<RankEntry> rank_guess_sets(const GeneratorSet& H,
                                              const std::vector<std::vector<VarId>>& candidates,
                                              std::uint64_t samples, std::uint64_t seed,
                                              std::uint32_t D, const RunConfig& cfg = {}) {
    if (candidates.empty()) return {};
    if (samples < 1) throw domain_error("need at least one sample");
    std::size_t k = candidates[0].size();
    for (const auto& c : candidates)
        if (c.size() != k) throw domain_error("candidate subsets must have equal size");
    const RingPtr& ring = H.ring();
    const unsigned q = ring->q();

    std::vector<RankEntry> out;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        CounterRng rng(seed);  // shared draws across candidates
        double total_nrv = 0;
        for (std::uint64_t s = 0; s < samples; ++s) {
            Assignment assign = empty_assignment(*ring);
            for (VarId v : candidates[ci]) assign[v] = static_cast<std::int8_t>(rng.below(q));
            std::vector<Polynomial> sub;
            for (const Polynomial& p : H.polys()) sub.push_back(p.substitute(assign));
            ElimOutcome o =
                gb_elim_lin(GeneratorSet::make(ring, H.order(), std::move(sub)), D, cfg.limits);
            total_nrv += (o.kind == ElimKind::FullyLinear) ? 0.0 : double(o.nrv);
        }
        out.push_back({ci, total_nrv / double(samples)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
        return a.average_nrv < b.average_nrv;
    });
    return out;
}

inline nlohmann::json counters_to_json(const StepCounters& c, bool with_timings) {
    nlohmann::json j;
    j["k"] = c.k;
    j["inputs_wild"] = c.inputs_wild;
    j["gbelim_calls"] = c.gbelim_calls;
    j["gb_calls"] = c.gb_calls;
    j["wild"] = c.wild;
    j["tamed"] = c.tamed;
    j["inconsistent"] = c.inconsistent;
    if (with_timings) {
        j["gbelim_seconds"] = c.gbelim_seconds;
        j["gb_seconds"] = c.gb_seconds;
    }
    return j;
}

inline nlohmann::json plan_to_json(const Ring& ring, const GuessPlan& plan) {
    nlohmann::json j;
    nlohmann::json vars = nlohmann::json::array();
    for (VarId v : plan.guess_vars) vars.push_back(ring.vars().name(v));
    j["guess_vars"] = std::move(vars);
    j["steps"] = plan.steps;
    j["B"] = plan.B;
    j["D"] = plan.D;
    return j;
}

}  // namespace mstep
