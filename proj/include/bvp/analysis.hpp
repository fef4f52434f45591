#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bvp/agents.hpp"
#include "bvp/core.hpp"
#include "bvp/knowledge.hpp"
#include "bvp/protocol.hpp"
#include "bvp/rng.hpp"

namespace bvp {

// --- Scenario ----------------------------------------------------------------

struct SweepAxis {
    std::string path;
    std::vector<double> values;
};

struct Scenario {
    ElectionConfig config;
    std::vector<VoterProfile> roster;
    std::vector<AdversaryStrategy> strategies;
    bool spb = false;  // protocol under test: BVP1 or the paper-ballot baseline
    int trials = 1000;
    std::uint64_t master_seed = 0;
    std::vector<SweepAxis> sweep;
};

// Every sweepable parameter, addressed by a dotted path. Unknown paths are a
// validation error so typos cannot silently sweep nothing.
inline void apply_sweep_value(Scenario& s, const std::string& path, double value) {
    auto& p = s.config.physical;
    auto& d = s.config.detection;
    if (path == "physical.nominal_weight_g") p.nominal_weight_g = value;
    else if (path == "physical.weight_jitter_g") p.weight_jitter_g = value;
    else if (path == "physical.scale_tolerance_g") p.scale_tolerance_g = value;
    else if (path == "physical.pattern_space") p.pattern_space = static_cast<int>(value);
    else if (path == "physical.p_desc") p.p_desc = value;
    else if (path == "physical.p_conf") p.p_conf = value;
    else if (path == "physical.p_peek") p.p_peek = value;
    else if (path == "physical.p_orientation_leak") p.p_orientation_leak = value;
    else if (path == "physical.p_label_leak") p.p_label_leak = value;
    else if (path == "physical.stamp_charges") p.stamp_charges = static_cast<int>(value);
    else if (path == "physical.audit_sample") p.audit_sample = static_cast<int>(value);
    else if (path == "detection.chain_voting") d.chain_voting = value;
    else if (path == "detection.under_table_chain_factor") d.under_table_chain_factor = value;
    else if (path == "detection.ea_replacement_plain_sight") d.ea_replacement_plain_sight = value;
    else if (path == "detection.ea_replacement_otherwise") d.ea_replacement_otherwise = value;
    else if (path == "detection.feint_mitigated") d.feint_mitigated = value;
    else if (path == "detection.feint_unmitigated") d.feint_unmitigated = value;
    else if (path == "detection.identifying_mark") d.identifying_mark = value;
    else if (path == "election.extras") s.config.extras = static_cast<int>(value);
    else if (path == "roster.p_forget") {
        for (auto& v : s.roster) v.p_forget = value;
    } else if (path == "roster.p_orient") {
        for (auto& v : s.roster) v.p_orient = value;
    } else if (path == "roster.p_desc") {
        for (auto& v : s.roster) v.p_desc = value;
    } else if (path.rfind("strategies.", 0) == 0) {
        auto rest = path.substr(11);
        auto dot = rest.find('.');
        if (dot == std::string::npos)
            throw SimError(Err::ValidationError, "sweep path " + path);
        std::size_t idx = static_cast<std::size_t>(std::stoi(rest.substr(0, dot)));
        if (idx >= s.strategies.size())
            throw SimError(Err::ValidationError, "sweep path " + path + ": no such strategy");
        std::string field = rest.substr(dot + 1);
        if (field == "p_detect") s.strategies[idx].p_detect = value;
        else if (field == "count") s.strategies[idx].count = static_cast<int>(value);
        else throw SimError(Err::ValidationError, "sweep path " + path);
    } else {
        throw SimError(Err::ValidationError, "unknown sweep path " + path);
    }
}

// One sweep point: the cartesian product index decoded into per-axis values.
inline std::vector<std::pair<std::string, double>> sweep_point_params(const Scenario& s,
                                                                      std::size_t point) {
    std::vector<std::pair<std::string, double>> params;
    std::size_t rest = point;
    for (const auto& axis : s.sweep) {
        std::size_t idx = rest % axis.values.size();
        rest /= axis.values.size();
        params.emplace_back(axis.path, axis.values[idx]);
    }
    return params;
}

inline std::size_t sweep_point_count(const Scenario& s) {
    std::size_t count = 1;
    for (const auto& axis : s.sweep) {
        if (axis.values.empty()) throw SimError(Err::ValidationError, "empty sweep axis");
        count *= axis.values.size();
    }
    return count;
}

inline Scenario scenario_at_point(const Scenario& base, std::size_t point) {
    Scenario s = base;
    for (const auto& [path, value] : sweep_point_params(base, point))
        apply_sweep_value(s, path, value);
    return s;
}

// --- Per-trial metrics -----------------------------------------------------------

struct RunMetrics {
    OutcomeKind outcome = OutcomeKind::Annulled;
    AnnulReason reason = AnnulReason::None;
    bool integrity_violated = false;
    bool cast_as_intended_violated = false;
    bool collected_as_cast_violated = false;
    bool counted_as_collected_violated = false;
    bool violation_detected = false;
    bool annulled = false;
    bool false_annulment = false;
    bool any_privacy_breach = false;
    bool audit_detected = false;
    bool coercion_attempted = false;
    bool coercion_caught = false;
    bool coercion_cover_missing = false;
    bool coercion_claim_collision = false;
    int objections = 0;
    int validated = -1;  // -1: no adjudication ran
    double mean_disclosure_size = 0.0;
    double mean_anonymity_size = 0.0;
    std::vector<int> disclosure_sizes;  // per voter, strongest observer != voter
    std::array<int, kStrategyKindCount> detections{};
    int steps = 0;
    int n = 0;
};

namespace detail {

inline std::vector<int> intended_histogram(const std::vector<VoterProfile>& roster, int k) {
    std::vector<int> h(static_cast<std::size_t>(k), 0);
    for (const auto& v : roster) ++h[static_cast<std::size_t>(v.preference)];
    return h;
}

// An objection is "valid" from the harness vantage when the objector was
// genuinely wronged: their cast ballot left the pool or decodes away from
// their preference.
inline bool objection_is_true(const ElectionState& st, const VoterProfile& voter) {
    const VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
    if (trace.cast_serial < 0) return false;
    if (st.custody[static_cast<std::size_t>(trace.cast_serial)].kind == CustodyKind::Removed)
        return true;
    const Ballot& cast = st.ballots[static_cast<std::size_t>(trace.cast_serial)];
    auto choice = st.spb ? decode_plain(cast) : decode(cast);
    return !choice || *choice != voter.preference;
}

}  // namespace detail

// Run one seeded trial and judge it against simulation ground truth (a
// vantage the room's participants never have; used only for metrics).
inline RunMetrics run_trial(const Scenario& scenario, std::size_t point_index,
                            std::size_t trial_index) {
    Scenario s = scenario_at_point(scenario, point_index);
    Rng rng(derive_seed(s.master_seed, point_index, trial_index));
    Rng protocol_rng = rng.fork(1);
    Rng metrics_rng = rng.fork(2);

    ElectionState st = s.spb ? run_spb(s.config, s.roster, s.strategies, protocol_rng)
                             : run_bvp1(s.config, s.roster, s.strategies, protocol_rng);

    RunMetrics m;
    m.n = s.config.n;
    m.outcome = st.outcome.kind;
    m.reason = st.outcome.reason;
    m.annulled = st.outcome.kind == OutcomeKind::Annulled;
    m.objections = static_cast<int>(st.objections.size());
    m.validated = st.outcome.validated.value_or(-1);
    m.steps = st.action_steps;
    m.audit_detected = st.audit_failed;

    const auto intended = detail::intended_histogram(s.roster, s.config.k);
    m.integrity_violated = !st.audit_failed && st.tally.counts != intended;
    m.false_annulment =
        m.annulled && st.outcome.reason == AnnulReason::ObjectionThreshold && !m.integrity_violated;

    for (const auto& voter : s.roster) {
        const VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
        if (trace.cast_serial < 0) continue;
        if (trace.vote_stolen) m.cast_as_intended_violated = true;
        if (voter.role != RoleKind::Malicious) {
            const Ballot& cast = st.ballots[static_cast<std::size_t>(trace.cast_serial)];
            auto choice = st.spb ? decode_plain(cast) : decode(cast);
            if (!trace.vote_stolen && (!choice || *choice != voter.preference))
                m.cast_as_intended_violated = true;
        }
    }
    m.collected_as_cast_violated = st.attack_removed > 0 || st.attack_injected > 0;
    m.counted_as_collected_violated = false;  // the tally is computed from the pool as laid out

    bool any_detection_event = st.log.count_of<Detection>() > 0 ||
                               st.log.count_of<MultipleCastDetected>() > 0 ||
                               st.log.count_of<BallotCountMismatch>() > 0 ||
                               st.log.count_of<BoxTallyMismatch>() > 0 || st.audit_failed;
    bool any_true_objection = false;
    for (const auto& obj : st.objections)
        if (detail::objection_is_true(st, s.roster[static_cast<std::size_t>(obj.voter)]))
            any_true_objection = true;
    m.violation_detected = any_detection_event || any_true_objection;

    for (const auto& ev : st.log.events()) {
        if (const auto* d = std::get_if<Detection>(&ev.body))
            ++m.detections[static_cast<std::size_t>(d->strategy)];
        else if (std::get_if<MultipleCastDetected>(&ev.body))
            ++m.detections[static_cast<std::size_t>(StrategyKind::DoubleCast)];
    }

    // Epistemic metrics: what the strongest observer other than the voter
    // can pin down once everything public has happened.
    if (!st.audit_failed && !st.revealed_view.empty()) {
        KnowledgeState knowledge(s.config.n, s.config.k);
        knowledge.ingest_all(st.log);
        const auto& pool = st.revealed_view;
        std::set<Choice> pool_choices;
        for (const auto& b : pool)
            if (b.choice) pool_choices.insert(*b.choice);

        std::vector<CompiledConstraints> compiled;
        compiled.reserve(static_cast<std::size_t>(s.config.n) + 2);
        for (AgentId o = 0; o <= s.config.n + 1; ++o)
            compiled.push_back(compile_constraints(knowledge, o, pool));

        double disclosure_sum = 0.0;
        double anonymity_sum = 0.0;
        m.disclosure_sizes.resize(static_cast<std::size_t>(s.config.n), 0);
        for (VoterId v = 0; v < s.config.n; ++v) {
            std::size_t min_disclosure = pool_choices.empty() ? 0 : pool_choices.size() + 1;
            std::size_t min_anonymity = pool.size() + 1;
            for (AgentId o = 0; o <= s.config.n + 1; ++o) {
                if (o == v) continue;
                std::size_t anon, disc;
                if (compiled[static_cast<std::size_t>(o)].trivial) {
                    anon = pool.size();
                    disc = pool_choices.size();
                } else {
                    auto set = anonymity_set_from(compiled[static_cast<std::size_t>(o)], pool, v);
                    std::set<Choice> choices;
                    for (int p : set)
                        if (pool[static_cast<std::size_t>(p)].choice)
                            choices.insert(*pool[static_cast<std::size_t>(p)].choice);
                    anon = set.size();
                    disc = choices.size();
                }
                if (anon < min_anonymity) min_anonymity = anon;
                if (disc < min_disclosure) min_disclosure = disc;
            }
            m.disclosure_sizes[static_cast<std::size_t>(v)] = static_cast<int>(min_disclosure);
            disclosure_sum += static_cast<double>(min_disclosure);
            anonymity_sum += static_cast<double>(min_anonymity);
            if (min_disclosure == 1 && pool_choices.size() >= 2) m.any_privacy_breach = true;
        }
        m.mean_disclosure_size = disclosure_sum / s.config.n;
        m.mean_anonymity_size = anonymity_sum / s.config.n;

        // Coercion outcomes.
        std::map<int, int> claims_seen;
        for (const auto& strat : s.strategies) {
            if (strat.kind != StrategyKind::CoercionDemand) continue;
            m.coercion_attempted = true;
            const VoterTrace& trace = st.traces[static_cast<std::size_t>(strat.target)];
            if (!trace.claim_position) {
                m.coercion_cover_missing = true;
                m.coercion_caught = true;  // nothing to claim exposes the voter
                continue;
            }
            if (++claims_seen[*trace.claim_position] > 1) m.coercion_claim_collision = true;
            Rng catch_rng = metrics_rng.fork(static_cast<std::uint64_t>(strat.target));
            if (coercion_catch(knowledge, strat.actor, strat.target, *trace.claim_position, pool,
                               catch_rng))
                m.coercion_caught = true;
        }
    }

    return m;
}

// --- Wilson score interval ---------------------------------------------------------

struct RateStat {
    int successes = 0;
    int trials = 0;
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

inline RateStat wilson_rate(int successes, int trials, double z = 1.959963985) {
    RateStat r;
    r.successes = successes;
    r.trials = trials;
    if (trials == 0) return r;
    double p = static_cast<double>(successes) / trials;
    double n = static_cast<double>(trials);
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double centre = p + z2 / (2.0 * n);
    double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    r.mean = p;
    r.lo = (centre - spread) / denom;
    r.hi = (centre + spread) / denom;
    if (r.lo < 0.0) r.lo = 0.0;
    if (r.hi > 1.0) r.hi = 1.0;
    return r;
}

// --- Aggregation ----------------------------------------------------------------

struct PointReport {
    std::vector<std::pair<std::string, double>> params;
    int trials = 0;
    std::map<std::string, RateStat> rates;
    std::map<std::string, double> means;
    std::map<int, std::int64_t> disclosure_hist;
};

struct AggregateReport {
    std::string schema = "bvp-report/1";
    std::string protocol = "bvp1";
    std::uint64_t master_seed = 0;
    int trials_per_point = 0;
    std::vector<PointReport> points;
};

namespace detail {

struct Accumulator {
    int trials = 0;
    std::map<std::string, int> successes;
    std::map<std::string, double> sums;
    std::map<int, std::int64_t> disclosure_hist;
    std::array<int, kStrategyKindCount> detection_trials{};  // trials with >=1 detection

    void add(const RunMetrics& m) {
        ++trials;
        auto hit = [&](const char* name, bool value) {
            if (value) ++successes[name];
            else successes.try_emplace(name, 0);
        };
        hit("integrity_violated", m.integrity_violated);
        hit("cast_as_intended_violated", m.cast_as_intended_violated);
        hit("collected_as_cast_violated", m.collected_as_cast_violated);
        hit("counted_as_collected_violated", m.counted_as_collected_violated);
        hit("violation_detected", m.violation_detected);
        hit("undetected_violation", m.integrity_violated && !m.violation_detected);
        hit("annulled", m.annulled);
        hit("false_annulment", m.false_annulment);
        hit("privacy_breach", m.any_privacy_breach);
        hit("audit_detected", m.audit_detected);
        if (m.coercion_attempted) {
            hit("coercion_caught", m.coercion_caught);
            hit("coercion_cover_missing", m.coercion_cover_missing);
            hit("coercion_claim_collision", m.coercion_claim_collision);
        }
        sums["objections"] += m.objections;
        if (m.validated >= 0) sums["validated_objections"] += m.validated;
        sums["mean_disclosure_size"] += m.mean_disclosure_size;
        sums["mean_anonymity_size"] += m.mean_anonymity_size;
        sums["steps_per_voter"] += m.n > 0 ? static_cast<double>(m.steps) / m.n : 0.0;
        for (int size : m.disclosure_sizes) ++disclosure_hist[size];
        for (std::size_t k = 0; k < m.detections.size(); ++k)
            if (m.detections[k] > 0) ++detection_trials[k];
    }
};

}  // namespace detail

// Aggregate over all trials and sweep points. Trials are embarrassingly
// parallel; results land in per-trial slots and are folded in index order,
// so the report is byte-identical for any worker count.
inline AggregateReport monte_carlo(const Scenario& scenario, int workers = 1) {
    if (scenario.trials < 1) throw SimError(Err::ValidationError, "trials must be >= 1");
    const std::size_t points = sweep_point_count(scenario);
    const std::size_t total = points * static_cast<std::size_t>(scenario.trials);

    std::vector<RunMetrics> slots(total);
    auto worker_body = [&](std::size_t worker_index, std::size_t worker_count) {
        for (std::size_t i = worker_index; i < total; i += worker_count) {
            std::size_t point = i / static_cast<std::size_t>(scenario.trials);
            std::size_t trial = i % static_cast<std::size_t>(scenario.trials);
            slots[i] = run_trial(scenario, point, trial);
        }
    };
    if (workers <= 1) {
        worker_body(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker_body, static_cast<std::size_t>(w),
                              static_cast<std::size_t>(workers));
        for (auto& t : pool) t.join();
    }

    AggregateReport report;
    report.protocol = scenario.spb ? "spb" : "bvp1";
    report.master_seed = scenario.master_seed;
    report.trials_per_point = scenario.trials;
    for (std::size_t point = 0; point < points; ++point) {
        detail::Accumulator acc;
        for (std::size_t t = 0; t < static_cast<std::size_t>(scenario.trials); ++t)
            acc.add(slots[point * static_cast<std::size_t>(scenario.trials) + t]);

        PointReport pr;
        pr.params = sweep_point_params(scenario, point);
        pr.trials = acc.trials;
        for (const auto& [name, successes] : acc.successes)
            pr.rates[name] = wilson_rate(successes, acc.trials);
        for (std::size_t k = 0; k < acc.detection_trials.size(); ++k) {
            bool present = false;
            for (const auto& s : scenario.strategies)
                if (static_cast<std::size_t>(s.kind) == k) present = true;
            if (present)
                pr.rates[std::string("detected_") + strategy_name(static_cast<StrategyKind>(k))] =
                    wilson_rate(acc.detection_trials[k], acc.trials);
        }
        for (const auto& [name, sum] : acc.sums) pr.means[name] = sum / acc.trials;
        pr.disclosure_hist = acc.disclosure_hist;
        report.points.push_back(std::move(pr));
    }
    return report;
}

// --- Exhaustive small-instance oracles ------------------------------------------

// Independent restatement of the decision rule for the oracle tables: sort a
// copy, read the top two, apply the paper's sentence directly.
inline Outcome oracle_decision(const std::vector<int>& counts, int objections) {
    if (counts.empty()) throw SimError(Err::EmptyTally, "oracle needs counts");
    std::vector<int> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    int top = sorted.back();
    int runner = sorted.size() >= 2 ? sorted[sorted.size() - 2] : 0;
    Outcome out;
    out.objections = objections;
    if (top == runner) {
        out.kind = OutcomeKind::Annulled;
        out.reason = AnnulReason::Tie;
        out.margin = 0;
        return out;
    }
    out.margin = top - runner;
    if (objections * 2 < out.margin) {
        out.kind = OutcomeKind::Elected;
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] == top) out.winner = static_cast<Choice>(c);
    } else {
        out.kind = OutcomeKind::Annulled;
        out.reason = AnnulReason::ObjectionThreshold;
    }
    return out;
}

struct DecisionRow {
    std::vector<int> counts;
    int objections = 0;
    Outcome outcome;
};

inline void enumerate_count_vectors(int total, int k, std::vector<int>& counts,
                                    std::vector<std::vector<int>>& out) {
    if (counts.size() + 1 == static_cast<std::size_t>(k)) {
        counts.push_back(total);
        out.push_back(counts);
        counts.pop_back();
        return;
    }
    for (int c = 0; c <= total; ++c) {
        counts.push_back(c);
        enumerate_count_vectors(total - c, k, counts, out);
        counts.pop_back();
    }
}

// All count vectors with sum <= max_n and every objection count, evaluated
// through the restatement. The suite diffs decide() against these rows.
inline std::vector<DecisionRow> exhaustive_decision_table(int max_n, int k) {
    if (max_n > 12 || k > 3) throw SimError(Err::BoundTooLarge, "decision oracle caps at n=12, k=3");
    if (k < 2) throw SimError(Err::BoundTooLarge, "need at least two choices");
    std::vector<DecisionRow> rows;
    for (int total = 0; total <= max_n; ++total) {
        std::vector<std::vector<int>> vectors;
        std::vector<int> scratch;
        enumerate_count_vectors(total, k, scratch, vectors);
        for (const auto& counts : vectors) {
            for (int j = 0; j <= total; ++j) {
                DecisionRow row;
                row.counts = counts;
                row.objections = j;
                row.outcome = oracle_decision(counts, j);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

// Brute-force anonymity sets: enumerate every injective voter-to-position
// assignment consistent with the constraints. Caps at n = 7.
inline std::vector<std::vector<int>> oracle_anonymity_sets(
    const CompiledConstraints& c, const std::vector<RevealedBallot>& pool) {
    if (c.n > 7) throw SimError(Err::BoundTooLarge, "enumeration oracle caps at n=7");
    std::vector<std::vector<int>> sets(static_cast<std::size_t>(c.n));
    std::vector<std::vector<char>> member(static_cast<std::size_t>(c.n),
                                          std::vector<char>(static_cast<std::size_t>(c.pool), 0));
    std::vector<int> assignment(static_cast<std::size_t>(c.n), -1);
    std::uint64_t used = 0;
    bool any = false;

    auto recurse = [&](auto&& self, int voter) -> void {
        if (voter == c.n) {
            any = true;
            for (int v = 0; v < c.n; ++v)
                member[static_cast<std::size_t>(v)]
                      [static_cast<std::size_t>(assignment[static_cast<std::size_t>(v)])] = 1;
            return;
        }
        for (int p = 0; p < c.pool; ++p) {
            if (used & (1ULL << p)) continue;
            if (!c.allowed(voter, p, pool)) continue;
            used |= 1ULL << p;
            assignment[static_cast<std::size_t>(voter)] = p;
            self(self, voter + 1);
            used &= ~(1ULL << p);
        }
    };
    recurse(recurse, 0);
    if (!any) throw SimError(Err::InfeasibleConstraints, "no assignment fits the constraints");
    for (int v = 0; v < c.n; ++v)
        for (int p = 0; p < c.pool; ++p)
            if (member[static_cast<std::size_t>(v)][static_cast<std::size_t>(p)])
                sets[static_cast<std::size_t>(v)].push_back(p);
    return sets;
}

// Random constraint instances for the matching-vs-enumeration oracle: a pool
// of n readable ballots plus forced pairs, choice restrictions, and forbidden
// positions. Instances may be infeasible; both computation routes must then
// agree on that too.
struct ConstraintInstance {
    CompiledConstraints constraints;
    std::vector<RevealedBallot> pool;
};

inline ConstraintInstance random_constraint_instance(int n, int k, Rng& rng) {
    ConstraintInstance inst;
    inst.pool.resize(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
        inst.pool[static_cast<std::size_t>(p)].serial = p;
        inst.pool[static_cast<std::size_t>(p)].pattern = p;
        inst.pool[static_cast<std::size_t>(p)].choice =
            static_cast<Choice>(rng.below(static_cast<std::uint64_t>(k)));
    }
    CompiledConstraints& c = inst.constraints;
    c.n = n;
    c.pool = n;
    c.full_mask = static_cast<std::uint8_t>((1u << k) - 1);
    c.forced.assign(static_cast<std::size_t>(n), -1);
    c.forced_owner.assign(static_cast<std::size_t>(n), -1);
    c.choice_mask.assign(static_cast<std::size_t>(n), c.full_mask);
    c.forbidden.assign(static_cast<std::size_t>(n), 0);
    c.trivial = false;

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (int v = 0; v < n; ++v) {
        if (rng.bernoulli(0.2)) {
            int p = perm[static_cast<std::size_t>(v)];
            c.forced[static_cast<std::size_t>(v)] = p;
            c.forced_owner[static_cast<std::size_t>(p)] = v;
        }
        if (rng.bernoulli(0.3)) {
            std::uint8_t mask = static_cast<std::uint8_t>(rng.below(c.full_mask) + 1);
            c.choice_mask[static_cast<std::size_t>(v)] = mask;
        }
        for (int p = 0; p < n; ++p)
            if (rng.bernoulli(0.1)) c.forbidden[static_cast<std::size_t>(v)] |= 1ULL << p;
    }
    return inst;
}

// --- Protocol comparison -----------------------------------------------------------

struct ComparisonReport {
    AggregateReport first;
    AggregateReport second;
};

inline bool scenarios_match_except_protocol(const Scenario& a, const Scenario& b) {
    if (a.trials != b.trials || a.master_seed != b.master_seed) return false;
    if (a.roster.size() != b.roster.size()) return false;
    if (a.config.n != b.config.n || a.config.k != b.config.k || a.config.extras != b.config.extras)
        return false;
    for (std::size_t i = 0; i < a.roster.size(); ++i) {
        const auto& x = a.roster[i];
        const auto& y = b.roster[i];
        if (x.preference != y.preference || x.role != y.role || x.seat != y.seat) return false;
    }
    if (a.strategies.size() != b.strategies.size()) return false;
    for (std::size_t i = 0; i < a.strategies.size(); ++i)
        if (a.strategies[i].kind != b.strategies[i].kind) return false;
    if (a.sweep.size() != b.sweep.size()) return false;
    for (std::size_t i = 0; i < a.sweep.size(); ++i)
        if (a.sweep[i].path != b.sweep[i].path || a.sweep[i].values != b.sweep[i].values)
            return false;
    return true;
}

inline ComparisonReport compare_protocols(const Scenario& a, const Scenario& b, int workers = 1) {
    if (a.spb == b.spb || !scenarios_match_except_protocol(a, b))
        throw SimError(Err::MismatchedScenarios,
                       "comparison needs two scenarios identical except the protocol");
    ComparisonReport report;
    report.first = monte_carlo(a, workers);
    report.second = monte_carlo(b, workers);
    return report;
}

}  // namespace bvp
