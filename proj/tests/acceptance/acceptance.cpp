// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit code is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "bvp/analysis.hpp"
#include "bvp/knowledge.hpp"
#include "bvp/protocol.hpp"
#include "bvp/report.hpp"

using namespace bvp;

namespace {

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0: no stated budget
    std::function<bool(std::string&)> run;
};

std::vector<VoterProfile> roster_with(const std::vector<Choice>& preferences) {
    std::vector<VoterProfile> roster;
    for (std::size_t i = 0; i < preferences.size(); ++i) {
        VoterProfile v;
        v.id = static_cast<VoterId>(i);
        v.seat = static_cast<int>(i);
        v.preference = preferences[i];
        roster.push_back(v);
    }
    return roster;
}

Scenario scenario_with(int n, int k, std::vector<Choice> preferences, int trials,
                       std::uint64_t seed) {
    Scenario s;
    s.config.n = n;
    s.config.k = k;
    s.config.extras = 2;
    s.roster = roster_with(preferences);
    s.trials = trials;
    s.master_seed = seed;
    return s;
}

// --- 1. rotation round trip -------------------------------------------------

bool criterion_rotation(std::string& detail) {
    int cases = 0, failures = 0;
    for (int k = 2; k <= 6; ++k) {
        BallotDesign d{k, k == 2 ? Layout::BinaryTwoColumn : Layout::KGon, 4.0};
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) {
                ++cases;
                if (choice_for_cell(d, r, cell_for_choice(d, r, c)) != c) ++failures;
            }
        }
    }
    detail = std::to_string(cases) + " cases, " + std::to_string(failures) + " failures";
    return failures == 0;
}

// --- 2. honest completeness ---------------------------------------------------

bool criterion_honest_completeness(std::string& detail) {
    const std::vector<int> sizes = {3, 10, 22, 40};
    const std::vector<int> arities = {2, 3};
    int trials_per_combo = 125;  // 125 * 8 = 1000 seeded trials
    int run = 0, bad = 0;
    for (int n : sizes) {
        for (int k : arities) {
            for (int t = 0; t < trials_per_combo; ++t) {
                Rng seed_rng(derive_seed(2024, static_cast<std::uint64_t>(n * 10 + k),
                                         static_cast<std::uint64_t>(t)));
                std::vector<Choice> prefs;
                for (int i = 0; i < n; ++i)
                    prefs.push_back(static_cast<Choice>(seed_rng.below(
                        static_cast<std::uint64_t>(k))));
                Rng trial_rng(seed_rng.next_u64());
                ElectionState st =
                    run_bvp1([&] {
                        ElectionConfig c;
                        c.n = n;
                        c.k = k;
                        c.extras = 2;
                        return c;
                    }(), roster_with(prefs), {}, trial_rng);
                ++run;

                std::vector<int> histogram(static_cast<std::size_t>(k), 0);
                for (Choice c : prefs) ++histogram[static_cast<std::size_t>(c)];
                bool tally_ok = st.tally.counts == histogram && st.tally.spoiled == 0;
                Outcome expected = oracle_decision(histogram, 0);
                bool outcome_ok = st.outcome.kind == expected.kind &&
                                  (expected.kind != OutcomeKind::Elected ||
                                   st.outcome.winner == expected.winner) &&
                                  (expected.kind != OutcomeKind::Annulled ||
                                   st.outcome.reason == AnnulReason::Tie);
                if (!tally_ok || !outcome_ok || !st.objections.empty()) ++bad;
            }
        }
    }
    detail = std::to_string(run) + " trials, " + std::to_string(bad) + " mismatches";
    return bad == 0;
}

// --- 3. decision-rule oracle ---------------------------------------------------

bool criterion_decision_oracle(std::string& detail) {
    long rows = 0, diffs = 0;
    for (int k = 2; k <= 3; ++k) {
        for (const auto& row : exhaustive_decision_table(12, k)) {
            ++rows;
            Tally t;
            t.counts = row.counts;
            t.ballot_count = std::accumulate(row.counts.begin(), row.counts.end(), 0);
            Outcome got = decide(t, row.objections);
            bool same = got.kind == row.outcome.kind && got.margin == row.outcome.margin;
            if (same && got.kind == OutcomeKind::Elected) same = got.winner == row.outcome.winner;
            if (same && got.kind == OutcomeKind::Annulled) same = got.reason == row.outcome.reason;
            if (!same) ++diffs;
        }
    }
    detail = std::to_string(rows) + " rows, " + std::to_string(diffs) + " diffs";
    return diffs == 0;
}

// --- 4. receipt adjudication ----------------------------------------------------

bool criterion_receipt_adjudication(std::string& detail) {
    int scenarios = 0, bad = 0;
    for (int n = 3; n <= 8; ++n) {
        // Preferences chosen so the published margin is 1 (odd n) or 2
        // (even n); any objection then triggers adjudication.
        std::vector<Choice> prefs;
        for (int i = 0; i < n; ++i) prefs.push_back(i < (n + 2) / 2 ? 0 : 1);
        for (int victim = 0; victim < n; ++victim) {
            for (int liars = 0; liars <= 3 && liars <= n - 1; ++liars) {
                ++scenarios;
                auto roster = roster_with(prefs);
                std::vector<AdversaryStrategy> strategies;
                AdversaryStrategy swap;
                swap.kind = StrategyKind::EAReplacement;
                swap.actor = n;
                swap.victim = victim;
                swap.demand = prefs[static_cast<std::size_t>(victim)];  // margin unchanged
                swap.p_detect = 0.0;
                strategies.push_back(swap);
                int attached = 0;
                for (int v = 0; v < n && attached < liars; ++v) {
                    if (v == victim) continue;
                    roster[static_cast<std::size_t>(v)].role = RoleKind::Malicious;
                    AdversaryStrategy liar;
                    liar.kind = StrategyKind::FalseObjection;
                    liar.actor = v;
                    strategies.push_back(liar);
                    ++attached;
                }
                ElectionConfig cfg;
                cfg.n = n;
                cfg.k = 2;
                cfg.extras = 1;
                cfg.variants.receipt_ballots = true;
                cfg.physical.p_conf = 0.0;  // soundness/completeness premise

                Rng rng(derive_seed(4, static_cast<std::uint64_t>(n * 100 + victim),
                                    static_cast<std::uint64_t>(liars)));
                validate_all(cfg, roster, strategies);
                ElectionState st = setup(cfg, strategies, rng);
                run_mark_cast(st, roster, strategies, rng);
                count_and_reveal(st, strategies, rng);
                collect_objections(st, roster, strategies, rng);
                advance_phase(st, Phase::Adjudicate);
                Rng adj_rng = rng.fork(50);
                AdjudicationResult adj = adjudicate_receipts(st, adj_rng);

                // Brute-force matcher: a receipt is valid iff no cast ballot
                // carries its (pattern, choice) pair.
                int expected_valid = 0;
                bool per_objector_ok = true;
                for (const auto& [owner, valid] : adj.per_objector) {
                    Serial receipt = st.traces[static_cast<std::size_t>(owner)].receipt_serial;
                    auto info = revealed_info(st.ballots[static_cast<std::size_t>(receipt)]);
                    bool matched = false;
                    for (Serial cast_serial : st.revealed) {
                        auto cast = revealed_info(st.ballots[static_cast<std::size_t>(cast_serial)]);
                        if (cast.pattern && info.pattern && *cast.pattern == *info.pattern &&
                            cast.choice && info.choice && *cast.choice == *info.choice) {
                            matched = true;
                            break;
                        }
                    }
                    bool brute_valid = !matched;
                    if (brute_valid) ++expected_valid;
                    if (brute_valid != valid) per_objector_ok = false;
                    // soundness/completeness at p_conf = 0
                    if (owner == victim && !valid) per_objector_ok = false;
                    if (owner != victim && valid) per_objector_ok = false;
                }
                if (!per_objector_ok || adj.validated != expected_valid || adj.validated != 1 ||
                    static_cast<int>(st.objections.size()) != 1 + attached)
                    ++bad;
            }
        }
    }
    detail = std::to_string(scenarios) + " constructed scenarios, " + std::to_string(bad) +
             " diffs";
    return bad == 0;
}

// --- 5. baseline privacy -----------------------------------------------------------

bool criterion_baseline_privacy(std::string& detail) {
    int trials = 100, bad = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<Choice> prefs;
        Rng seed_rng(derive_seed(5, 0, static_cast<std::uint64_t>(t)));
        for (int i = 0; i < 10; ++i) prefs.push_back(i % 2);  // mixed preferences
        ElectionConfig cfg;
        cfg.n = 10;
        cfg.k = 2;
        cfg.extras = 2;
        Rng rng(seed_rng.next_u64());
        ElectionState st = run_bvp1(cfg, roster_with(prefs), {}, rng);

        KnowledgeState knowledge(10, 2);
        knowledge.ingest_all(st.log);
        std::vector<int> everything(10);
        std::iota(everything.begin(), everything.end(), 0);
        for (AgentId o = 0; o <= 11; ++o) {
            for (VoterId v = 0; v < 10; ++v) {
                if (o == v) continue;
                if (anonymity_set(knowledge, o, v, st.revealed_view) != everything) ++bad;
                if (vote_disclosure(knowledge, o, v, st.revealed_view).size() < 2) ++bad;
            }
        }
    }
    detail = std::to_string(trials) + " trials, " + std::to_string(bad) + " failures";
    return bad == 0;
}

// --- 6. anonymity-set oracle ---------------------------------------------------------

bool criterion_anonymity_oracle(std::string& detail) {
    Rng rng(6);
    int diffs = 0;
    const int instances = 500;
    for (int i = 0; i < instances; ++i) {
        int n = 2 + static_cast<int>(rng.below(6));  // 2..7
        int k = 2 + static_cast<int>(rng.below(2));
        auto inst = random_constraint_instance(n, k, rng);
        bool oracle_infeasible = false;
        std::vector<std::vector<int>> expected;
        try {
            expected = oracle_anonymity_sets(inst.constraints, inst.pool);
        } catch (const SimError&) {
            oracle_infeasible = true;
        }
        for (VoterId v = 0; v < n; ++v) {
            bool matcher_infeasible = false;
            std::vector<int> got;
            try {
                got = anonymity_set_from(inst.constraints, inst.pool, v);
            } catch (const SimError&) {
                matcher_infeasible = true;
            }
            if (oracle_infeasible != matcher_infeasible) ++diffs;
            else if (!oracle_infeasible && got != expected[static_cast<std::size_t>(v)]) ++diffs;
        }
    }
    detail = std::to_string(instances) + " instances, " + std::to_string(diffs) + " diffs";
    return diffs == 0;
}

// --- 7. scale soundness ---------------------------------------------------------------

bool criterion_scale_soundness(std::string& detail) {
    const int trials = 10000;
    int detected = 0, false_flags = 0;
    std::vector<Choice> prefs = {0, 1, 0, 1, 0};
    for (int t = 0; t < trials; ++t) {
        auto roster = roster_with(prefs);
        roster[2].role = RoleKind::Malicious;
        AdversaryStrategy dc;
        dc.kind = StrategyKind::DoubleCast;
        dc.actor = 2;
        dc.demand = 0;
        ElectionConfig cfg;
        cfg.n = 5;
        cfg.k = 2;
        cfg.extras = 0;
        Rng rng(derive_seed(7, 0, static_cast<std::uint64_t>(t)));
        ElectionState st = run_bvp1(cfg, roster, {dc}, rng);
        if (st.log.count_of<MultipleCastDetected>() > 0) ++detected;
    }
    for (int t = 0; t < trials; ++t) {
        ElectionConfig cfg;
        cfg.n = 5;
        cfg.k = 2;
        cfg.extras = 0;
        Rng rng(derive_seed(7, 1, static_cast<std::uint64_t>(t)));
        ElectionState st = run_bvp1(cfg, roster_with(prefs), {}, rng);
        if (st.log.count_of<MultipleCastDetected>() > 0) ++false_flags;
    }
    detail = "double casts detected " + std::to_string(detected) + "/10000, honest flagged " +
             std::to_string(false_flags) + "/10000";
    return detected == trials && false_flags == 0;
}

// --- 8. coercion equivocation ------------------------------------------------------------

bool criterion_coercion(std::string& detail) {
    const int trials = 10000;
    int caught_with_cover = 0;
    for (int t = 0; t < trials; ++t) {
        Scenario s = scenario_with(5, 2, {0, 1, 1, 0, 0}, 1,
                                   derive_seed(8, 0, static_cast<std::uint64_t>(t)));
        s.roster[0].role = RoleKind::Coerced;
        s.roster[0].demand = 1;  // two cover ballots always exist
        s.roster[0].adversary = 3;
        s.roster[0].p_desc = 0.0;
        AdversaryStrategy demand;
        demand.kind = StrategyKind::CoercionDemand;
        demand.actor = 3;
        demand.target = 0;
        demand.demand = 1;
        s.strategies.push_back(demand);
        RunMetrics m = run_trial(s, 0, 0);
        if (m.coercion_caught) ++caught_with_cover;
    }

    int caught_lying = 0;
    for (int t = 0; t < trials; ++t) {
        // Perfect description, claimed ballot carries a different pattern.
        KnowledgeState knowledge(4, 2);
        ObservationEvent e;
        e.scope = Scope::only({3});
        e.body = DescriptionReceived{0, 100, 1.0};
        knowledge.ingest(e);
        std::vector<RevealedBallot> pool;
        for (int p = 0; p < 4; ++p) {
            RevealedBallot b;
            b.serial = p;
            b.pattern = 100 + p;
            b.choice = p % 2;
            pool.push_back(b);
        }
        Rng rng(derive_seed(8, 1, static_cast<std::uint64_t>(t)));
        if (coercion_catch(knowledge, 3, 0, 2, pool, rng)) ++caught_lying;
    }
    detail = "cover claims caught " + std::to_string(caught_with_cover) +
             "/10000 (want 0), lying claims caught " + std::to_string(caught_lying) +
             "/10000 (want 10000)";
    return caught_with_cover == 0 && caught_lying == trials;
}

// --- 9. detection calibration ----------------------------------------------------------------

bool criterion_detection_calibration(std::string& detail) {
    const int trials = 10000;
    struct Case {
        const char* label;
        double p;
        std::function<Scenario()> build;
    };
    std::vector<Case> cases;

    cases.push_back({"chain_voting 0.7", 0.7, [] {
        Scenario s = scenario_with(5, 2, {0, 1, 0, 1, 0}, 1, 0);
        s.roster[0].role = RoleKind::Malicious;
        s.roster[1].role = RoleKind::Coerced;
        s.roster[1].demand = 0;
        s.roster[1].adversary = 0;
        AdversaryStrategy chain;
        chain.kind = StrategyKind::ChainVoting;
        chain.actor = 0;
        chain.target = 1;
        chain.demand = 0;
        s.strategies.push_back(chain);
        return s;
    }});
    cases.push_back({"ea_replacement 0.5", 0.5, [] {
        Scenario s = scenario_with(5, 2, {0, 1, 0, 1, 0}, 1, 0);
        AdversaryStrategy swap;
        swap.kind = StrategyKind::EAReplacement;
        swap.actor = 5;
        swap.demand = 1;
        s.strategies.push_back(swap);
        return s;
    }});
    cases.push_back({"feint_stamp 0.6", 0.6, [] {
        Scenario s = scenario_with(5, 2, {0, 1, 0, 1, 0}, 1, 0);
        s.config.variants.receipt_ballots = true;
        s.roster[2].role = RoleKind::Malicious;
        AdversaryStrategy feint;
        feint.kind = StrategyKind::FeintStamp;
        feint.actor = 2;
        s.strategies.push_back(feint);
        return s;
    }});
    cases.push_back({"identifying_mark 0.3", 0.3, [] {
        Scenario s = scenario_with(5, 2, {0, 1, 0, 1, 0}, 1, 0);
        s.roster[3].role = RoleKind::Malicious;
        AdversaryStrategy mark;
        mark.kind = StrategyKind::IdentifyingMark;
        mark.actor = 3;
        s.strategies.push_back(mark);
        return s;
    }});

    bool all_ok = true;
    detail.clear();
    for (const auto& test_case : cases) {
        int hits = 0;
        Scenario s = test_case.build();
        for (int t = 0; t < trials; ++t) {
            s.master_seed = derive_seed(9, 0, static_cast<std::uint64_t>(t));
            RunMetrics m = run_trial(s, 0, 0);
            int total = 0;
            for (int d : m.detections) total += d;
            if (total > 0) ++hits;
        }
        double observed = static_cast<double>(hits) / trials;
        RateStat band = wilson_rate(static_cast<int>(test_case.p * trials + 0.5), trials);
        bool ok = observed >= band.lo && observed <= band.hi;
        all_ok = all_ok && ok;
        if (!detail.empty()) detail += "; ";
        detail += std::string(test_case.label) + " -> " + fmt_number(observed) + " in [" +
                  fmt_number(band.lo) + "," + fmt_number(band.hi) + "]" + (ok ? "" : " MISS");
    }
    return all_ok;
}

// --- 10. cut-and-choose audit -------------------------------------------------------------------

bool criterion_audit_grid(std::string& detail) {
    const int trials = 10000;
    double worst = 0.0;
    for (int population : {20, 30}) {
        for (int defective : {1, 3}) {
            for (int sample : {3, 5, 10}) {
                int hits = 0;
                for (int t = 0; t < trials; ++t) {
                    ElectionConfig cfg;
                    cfg.n = 10;
                    cfg.k = 2;
                    cfg.extras = population - 10;
                    AdversaryStrategy premark;
                    premark.kind = StrategyKind::CorruptEAPremark;
                    premark.actor = 10;
                    premark.count = defective;
                    Rng rng(derive_seed(10,
                                        static_cast<std::uint64_t>(population * 100 +
                                                                   defective * 10 + sample),
                                        static_cast<std::uint64_t>(t)));
                    ElectionState st = setup(cfg, {premark}, rng);
                    AuditReport report = audit_cut_and_choose(st, sample, rng);
                    if (report.detected()) ++hits;
                }
                double mc = static_cast<double>(hits) / trials;
                double exact = audit_detection_probability(population, defective, sample);
                double err = mc > exact ? mc - exact : exact - mc;
                if (err > worst) worst = err;
            }
        }
    }
    detail = "12 grid cells, worst |mc - exact| = " + fmt_number(worst) + " (tolerance 0.02)";
    return worst <= 0.02;
}

// --- 11. determinism ---------------------------------------------------------------------------

bool criterion_determinism(std::string& detail) {
    Scenario s = scenario_with(8, 2, {0, 1, 0, 1, 0, 1, 0, 1}, 400, 123456789);
    s.roster[2].p_forget = 0.25;
    s.roster[5].p_orient = 0.1;
    s.sweep.push_back({"physical.p_orientation_leak", {0.0, 0.3}});
    std::string a = emit_report(monte_carlo(s, 1), ReportFormat::StructuredObject);
    std::string b = emit_report(monte_carlo(s, 1), ReportFormat::StructuredObject);
    std::string c = emit_report(monte_carlo(s, 8), ReportFormat::StructuredObject);
    bool ok = a == b && a == c;
    detail = ok ? "same-seed reruns and 1-vs-8 workers byte-identical"
                : "outputs differ across reruns or worker counts";
    return ok;
}

// --- 12. performance -----------------------------------------------------------------------------

bool criterion_performance(std::string& detail) {
    std::vector<Choice> prefs;
    for (int i = 0; i < 40; ++i) prefs.push_back(i % 2);
    Scenario s = scenario_with(40, 2, prefs, 100000, 7);
    auto start = std::chrono::steady_clock::now();
    AggregateReport r = monte_carlo(s, 1);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool sane = r.points[0].rates.at("integrity_violated").successes == 0;
    detail = "100000 trials at n=40 in " + fmt_number(elapsed) + " s (budget 60)";
    return sane && elapsed < 60.0;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "rotation round trip", 1.0, criterion_rotation},
        {2, "honest completeness", 5.0, criterion_honest_completeness},
        {3, "decision-rule oracle", 5.0, criterion_decision_oracle},
        {4, "receipt adjudication", 10.0, criterion_receipt_adjudication},
        {5, "baseline privacy", 0.0, criterion_baseline_privacy},
        {6, "anonymity-set oracle", 30.0, criterion_anonymity_oracle},
        {7, "scale soundness", 0.0, criterion_scale_soundness},
        {8, "coercion equivocation", 0.0, criterion_coercion},
        {9, "detection calibration", 0.0, criterion_detection_calibration},
        {10, "cut-and-choose audit", 0.0, criterion_audit_grid},
        {11, "determinism", 0.0, criterion_determinism},
        {12, "performance", 60.0, criterion_performance},
    };

    int failed = 0;
    for (auto& criterion : criteria) {
        std::string detail;
        auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.budget_seconds > 0.0 && elapsed >= criterion.budget_seconds) {
            ok = false;
            detail += " [over budget " + fmt_number(criterion.budget_seconds) + " s]";
        }
        std::printf("[%2d] %s  %s (%s; %.2f s)\n", criterion.id, ok ? "PASS" : "FAIL",
                    criterion.name, detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failed;
    }
    if (failed > 0) std::printf("%d criterion(s) failed\n", failed);
    return failed;
}
