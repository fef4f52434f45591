#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bvp/agents.hpp"
#include "bvp/core.hpp"
#include "bvp/events.hpp"
#include "bvp/physical.hpp"
#include "bvp/rng.hpp"

namespace bvp {

struct Variants {
    bool voting_station = false;
    bool under_table = false;
    bool parallel_tally = false;
    bool receipt_ballots = false;

    bool parallel_design() const { return parallel_tally || receipt_ballots; }
};

struct PhysicalParams {
    double nominal_weight_g = 4.0;
    double weight_jitter_g = 0.05;
    double scale_tolerance_g = 1.0;
    int pattern_space = 1000;
    double p_desc = 0.05;
    double p_conf = 0.01;
    double p_peek = 0.0;              // neighbour sees an openly marked ballot (baseline)
    double p_orientation_leak = 0.0;  // cloth slips during a concealed rotation
    double p_label_leak = 0.0;        // hidden camera catches a full ballot view
    bool polarising_filters = false;  // defeats cameras: label leaks never fire
    int stamp_charges = 3;
    bool ballot_bag_draw = false;     // voters draw blank ballots from a bag
    int audit_sample = 0;             // cut-and-choose sample size, 0 skips the audit
};

struct ElectionConfig {
    int n = 10;
    int k = 2;
    int extras = 2;
    Variants variants;
    PhysicalParams physical;
    DetectionModel detection;
};

inline void validate_config(const ElectionConfig& c) {
    if (c.n < kMinVoters || c.n > kMaxVoters)
        throw SimError(Err::InvalidConfig, "voter count must be in [3,40]");
    if (c.k < kMinChoices || c.k > kMaxChoices)
        throw SimError(Err::InvalidConfig, "choice count must be in [2,6]");
    if (c.extras < 0) throw SimError(Err::InvalidConfig, "extras must be non-negative");
    if (c.variants.parallel_tally && c.variants.receipt_ballots)
        throw SimError(Err::InvalidConfig,
                       "parallel_tally and receipt_ballots are mutually exclusive");
    const auto& p = c.physical;
    if (p.nominal_weight_g <= 0.0 || p.weight_jitter_g < 0.0 || p.scale_tolerance_g <= 0.0)
        throw SimError(Err::InvalidConfig, "weights and tolerance must be positive");
    if (p.pattern_space < c.n + c.extras)
        throw SimError(Err::InvalidConfig, "pattern space smaller than the stamp count");
    for (double prob : {p.p_desc, p.p_conf, p.p_peek, p.p_orientation_leak, p.p_label_leak})
        if (prob < 0.0 || prob > 1.0)
            throw SimError(Err::InvalidConfig, "probability outside [0,1]");
    if (p.stamp_charges < 1) throw SimError(Err::InvalidConfig, "stamps need at least one charge");
    if (c.variants.parallel_design() && p.stamp_charges < 2)
        throw SimError(Err::InvalidConfig, "parallel ballots take two imprints per stamp");
    if (p.audit_sample < 0) throw SimError(Err::InvalidConfig, "audit sample must be >= 0");
}

// --- Tally and outcome -----------------------------------------------------

struct Tally {
    std::vector<int> counts;  // per choice
    int spoiled = 0;
    int ballot_count = 0;

    int total_counted() const { return std::accumulate(counts.begin(), counts.end(), 0); }
};

enum class OutcomeKind { Elected, Annulled };
enum class AnnulReason { None, ObjectionThreshold, Tie, AuditFailure };

inline const char* annul_reason_name(AnnulReason r) {
    switch (r) {
        case AnnulReason::None: return "none";
        case AnnulReason::ObjectionThreshold: return "objection-threshold";
        case AnnulReason::Tie: return "tie";
        case AnnulReason::AuditFailure: return "audit-failure";
    }
    return "?";
}

struct Outcome {
    OutcomeKind kind = OutcomeKind::Annulled;
    Choice winner = -1;
    int margin = 0;  // top count minus runner-up count
    AnnulReason reason = AnnulReason::None;
    int objections = 0;            // j
    std::optional<int> validated;  // j' under the receipt variant
};

// The paper's step-5 rule: elect iff twice the objection count is strictly
// below the margin of victory and the maximum is unique. Integer arithmetic
// only; ties have margin zero and always annul.
inline Outcome decide(const Tally& tally, int objections) {
    if (tally.counts.empty()) throw SimError(Err::EmptyTally, "no choices to decide over");
    int best = -1, second = -1;
    Choice winner = -1;
    bool unique = true;
    for (std::size_t c = 0; c < tally.counts.size(); ++c) {
        int v = tally.counts[c];
        if (v > best) {
            second = best;
            best = v;
            winner = static_cast<Choice>(c);
            unique = true;
        } else if (v == best) {
            unique = false;
            second = v;
        } else if (v > second) {
            second = v;
        }
    }
    Outcome out;
    out.objections = objections;
    if (!unique) {
        out.kind = OutcomeKind::Annulled;
        out.reason = AnnulReason::Tie;
        out.margin = 0;
        return out;
    }
    out.margin = best - second;
    if (2 * objections < out.margin) {
        out.kind = OutcomeKind::Elected;
        out.winner = winner;
    } else {
        out.kind = OutcomeKind::Annulled;
        out.reason = AnnulReason::ObjectionThreshold;
    }
    return out;
}

// --- Election state ----------------------------------------------------------

enum class CustodyKind { Table, BallotBag, Voter, Box, Receipt, Revealed, Removed, Cut };

struct Custody {
    CustodyKind kind = CustodyKind::Table;
    int index = -1;  // voter id or box id where applicable
};

struct Objection {
    VoterId voter = -1;
    ObjectionKind claim = ObjectionKind::PatternMissing;
};

// Ground-truth bookkeeping for one voter; the harness's vantage, never an
// agent's.
struct VoterTrace {
    Serial ballot_in_hand = -1;
    int stamp = -1;
    PatternId pattern = -1;
    Serial cast_serial = -1;     // what physically went into box 0
    Serial receipt_serial = -1;  // kept half under the receipt variant
    bool vote_stolen = false;    // chain-voting target
    bool feinted = false;
    std::optional<int> verification_match;
    std::optional<int> claim_position;   // coerced claim into the revealed pool
    bool equivocation_failed = false;
};

struct ElectionState {
    Phase phase = Phase::Setup;
    ElectionConfig config;
    bool spb = false;  // simple-paper-ballot baseline trial

    std::vector<Ballot> ballots;   // store; serial == index
    std::vector<Custody> custody;  // parallel to ballots
    std::vector<Stamp> stamps;
    Bag<int> stamp_bag;      // indices into stamps
    Bag<Serial> ballot_bag;  // only used with ballot_bag_draw
    std::vector<BallotBoxState> boxes;

    std::vector<Serial> revealed;               // box-0 pool in reveal order
    std::vector<RevealedBallot> revealed_view;  // readable projection of the pool
    std::vector<Serial> revealed_second;        // box-1 pool under parallel tallying
    std::vector<Serial> receipt_revealed;       // adjudicated receipts in reveal order

    EventLog log;
    Tally tally;
    std::vector<Objection> objections;
    Outcome outcome;
    std::vector<VoterTrace> traces;

    std::set<PatternId> patterns_used;
    int next_defect_tag = 0;
    std::vector<int> cast_motions_per_box;
    int action_steps = 0;
    bool audit_failed = false;
    int distributed = 0;       // ballots handed out so far
    int attack_removed = 0;    // cast ballots swapped out by the EA
    int attack_injected = 0;   // ballots stuffed into a box beyond one per voter

    Serial new_ballot(Ballot b, Custody c) {
        b.serial = static_cast<Serial>(ballots.size());
        ballots.push_back(std::move(b));
        custody.push_back(c);
        return ballots.back().serial;
    }

    void move_ballot(Serial s, Custody c) { custody[static_cast<std::size_t>(s)] = c; }

    PatternId fresh_pattern(Rng& rng) {
        const int space = config.physical.pattern_space;
        for (int attempt = 0; attempt < 64; ++attempt) {
            PatternId p = static_cast<PatternId>(rng.below(static_cast<std::uint64_t>(space)));
            if (patterns_used.insert(p).second) return p;
        }
        PatternId p = space;
        while (!patterns_used.insert(p).second) ++p;
        return p;
    }
};

// Every printed ballot sits in exactly one custody location at all times;
// cut parents are accounted for by their two halves. Checked at every phase
// transition. Boxes are emptied when their contents are laid out, so box
// membership and pool membership are mutually exclusive.
inline void check_conservation(const ElectionState& st) {
    for (std::size_t s = 0; s < st.ballots.size(); ++s) {
        const Custody& c = st.custody[s];
        Serial serial = static_cast<Serial>(s);
        int box_hits = 0;
        int own_box_hits = 0;
        for (std::size_t b = 0; b < st.boxes.size(); ++b) {
            const auto& v = st.boxes[b].contents;
            int hits = static_cast<int>(std::count(v.begin(), v.end(), serial));
            box_hits += hits;
            if (c.kind == CustodyKind::Box && c.index == static_cast<int>(b)) own_box_hits = hits;
        }
        int pool_hits =
            static_cast<int>(std::count(st.revealed.begin(), st.revealed.end(), serial)) +
            static_cast<int>(std::count(st.revealed_second.begin(), st.revealed_second.end(),
                                        serial)) +
            static_cast<int>(std::count(st.receipt_revealed.begin(), st.receipt_revealed.end(),
                                        serial));
        switch (c.kind) {
            case CustodyKind::Box:
                if (own_box_hits != 1 || box_hits != 1 || pool_hits != 0)
                    throw SimError(Err::InvalidConfig, "conservation: ballot not in its box");
                break;
            case CustodyKind::Revealed:
                if (box_hits != 0 || pool_hits != 1)
                    throw SimError(Err::InvalidConfig, "conservation: revealed ballot miscounted");
                break;
            case CustodyKind::Cut: {
                int halves = 0;
                for (const auto& b : st.ballots)
                    if (b.half_column >= 0) ++halves;
                if (halves < 2)
                    throw SimError(Err::InvalidConfig, "conservation: cut ballot missing halves");
                if (box_hits != 0 || pool_hits != 0)
                    throw SimError(Err::InvalidConfig, "conservation: cut parent still in play");
                break;
            }
            default:
                if (box_hits != 0 || pool_hits != 0)
                    throw SimError(Err::InvalidConfig, "conservation: ballot in two places");
                break;
        }
    }
}

inline void advance_phase(ElectionState& st, Phase next) {
    // Transitions are strictly forward along Setup -> MarkCast -> CountVerify
    // -> (Adjudicate) -> Done.
    if (static_cast<int>(next) <= static_cast<int>(st.phase))
        throw SimError(Err::WrongPhase, std::string("cannot go back to ") + phase_name(next));
    check_conservation(st);
    st.phase = next;
}

// --- Setup --------------------------------------------------------------------

inline BallotDesign design_for(const ElectionConfig& c, bool spb) {
    BallotDesign d;
    d.arity = c.k;
    d.nominal_weight = c.physical.nominal_weight_g;
    if (!spb && c.variants.parallel_design())
        d.layout = Layout::ParallelSplit;
    else
        d.layout = c.k == 2 ? Layout::BinaryTwoColumn : Layout::KGon;
    return d;
}

inline ElectionState setup(const ElectionConfig& config,
                           const std::vector<AdversaryStrategy>& strategies, Rng& rng) {
    validate_config(config);
    ElectionState st;
    st.config = config;
    st.traces.resize(static_cast<std::size_t>(config.n));

    const BallotDesign design = design_for(config, false);
    const int printed = config.n + config.extras;
    Rng print_rng = rng.fork(1);
    for (int i = 0; i < printed; ++i) {
        Ballot b;
        b.design = design;
        b.weight = config.physical.nominal_weight_g +
                   print_rng.uniform(-config.physical.weight_jitter_g,
                                     config.physical.weight_jitter_g);
        st.new_ballot(std::move(b), Custody{CustodyKind::Table, -1});
    }

    // A corrupt EA premarks the first d sheets with discreet unique defects.
    for (const auto& s : strategies) {
        if (s.kind != StrategyKind::CorruptEAPremark) continue;
        for (int i = 0; i < s.count && i < printed; ++i) {
            Ballot& b = st.ballots[static_cast<std::size_t>(i)];
            b.defects.push_back(Defect{s.defect, i % 2, s.actor, st.next_defect_tag++});
        }
    }

    Rng stamp_rng = rng.fork(2);
    const bool mitigation = config.variants.parallel_design();
    for (int i = 0; i < printed; ++i) {
        Stamp stamp;
        stamp.secret = VisualSecret{st.fresh_pattern(stamp_rng), config.physical.p_desc,
                                    config.physical.p_conf};
        stamp.common_mark = mitigation;
        stamp.charges = config.physical.stamp_charges;
        st.stamps.push_back(stamp);
        st.stamp_bag.put(i);
    }
    st.log.emit(Scope::everyone(), StampsInspected{printed});

    if (config.physical.ballot_bag_draw) {
        for (int i = 0; i < printed; ++i) {
            st.ballot_bag.put(i);
            st.move_ballot(i, Custody{CustodyKind::BallotBag, -1});
        }
    }

    const int box_count = config.variants.parallel_tally ? 2 : 1;
    for (int b = 0; b < box_count; ++b) {
        BallotBoxState box;
        box.on_scale = true;
        box.scale_tolerance = config.physical.scale_tolerance_g;
        st.boxes.push_back(box);
    }
    st.cast_motions_per_box.assign(static_cast<std::size_t>(box_count), 0);

    advance_phase(st, Phase::MarkCast);
    return st;
}

// --- Cut-and-choose audit --------------------------------------------------------

struct AuditReport {
    int sampled = 0;
    std::vector<Defect> found;

    bool detected() const { return !found.empty(); }
};

// Exact probability that sampling m of N sheets, d of them defective, shows
// at least one defect: 1 - C(N-d,m)/C(N,m).
inline double audit_detection_probability(int population, int defective, int sample) {
    if (sample > population || defective > population || sample < 0 || defective < 0)
        throw SimError(Err::BoundTooLarge, "audit grid cell out of range");
    if (defective == 0) return 0.0;
    if (sample > population - defective) return 1.0;
    double miss = 1.0;
    for (int i = 0; i < sample; ++i)
        miss *= static_cast<double>(population - defective - i) / static_cast<double>(population - i);
    return 1.0 - miss;
}

// Draw m undistributed ballots uniformly and inspect them in public. Runs
// after setup, before any ballot is handed out.
inline AuditReport audit_cut_and_choose(ElectionState& st, int m, Rng& rng) {
    if (st.phase != Phase::MarkCast || st.distributed > 0)
        throw SimError(Err::WrongPhase, "audit runs after setup, before distribution");
    std::vector<Serial> pool;
    for (std::size_t s = 0; s < st.ballots.size(); ++s) {
        if (st.custody[s].kind == CustodyKind::Table || st.custody[s].kind == CustodyKind::BallotBag)
            pool.push_back(static_cast<Serial>(s));
    }
    if (m > static_cast<int>(pool.size()))
        throw SimError(Err::InsufficientBallots, "audit sample exceeds the printed pool");
    if (static_cast<int>(pool.size()) - m < st.config.n)
        throw SimError(Err::InsufficientBallots, "audit would leave too few ballots to vote");
    AuditReport report;
    report.sampled = m;
    for (int i = 0; i < m; ++i) {
        std::size_t pick = static_cast<std::size_t>(rng.below(pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[pick], pool[pool.size() - 1 - static_cast<std::size_t>(i)]);
        Serial s = pool[pool.size() - 1 - static_cast<std::size_t>(i)];
        const Ballot& b = st.ballots[static_cast<std::size_t>(s)];
        for (const auto& d : b.defects) report.found.push_back(d);
        st.move_ballot(s, Custody{CustodyKind::Removed, -1});
    }
    st.log.emit(Scope::everyone(),
                AuditInspected{report.sampled, static_cast<int>(report.found.size())});
    if (report.detected()) st.audit_failed = true;
    return report;
}

// --- Marking and casting ------------------------------------------------------------

namespace detail {

inline std::vector<int> seat_order(const std::vector<VoterProfile>& roster) {
    std::vector<int> order(roster.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return roster[static_cast<std::size_t>(a)].seat <
                                         roster[static_cast<std::size_t>(b)].seat; });
    return order;
}

inline std::vector<VoterId> neighbours(const std::vector<VoterProfile>& roster, VoterId v) {
    // Seating is a circle; a voter's neighbours are the adjacent seats.
    const int n = static_cast<int>(roster.size());
    if (n < 3) return {};
    int seat = roster[static_cast<std::size_t>(v)].seat;
    std::vector<VoterId> out;
    for (const auto& other : roster) {
        if (other.id == v) continue;
        int gap = std::abs(other.seat - seat);
        if (gap == 1 || gap == n - 1) out.push_back(other.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline const AdversaryStrategy* find_strategy(const std::vector<AdversaryStrategy>& strategies,
                                              StrategyKind kind, VoterId actor) {
    for (const auto& s : strategies)
        if (s.kind == kind && s.actor == actor) return &s;
    return nullptr;
}

inline Serial take_ballot_from_pool(ElectionState& st, Rng& rng) {
    if (st.config.physical.ballot_bag_draw && !st.ballot_bag.empty()) return st.ballot_bag.draw(rng);
    for (std::size_t s = 0; s < st.ballots.size(); ++s)
        if (st.custody[s].kind == CustodyKind::Table) return static_cast<Serial>(s);
    throw SimError(Err::InsufficientBallots, "printed pool exhausted");
}

// Stamp both columns of a parallel ballot (or the single column otherwise)
// at `cell`. The first round lays the common disk; the second presses the
// voter's secret. A feint skips the secret round in `feint_column`.
inline void stamp_rounds(ElectionState& st, Ballot& b, Cell cell, Stamp& stamp,
                         int feint_column) {
    const int columns = b.design.columns();
    if (columns == 2) {
        Stamp common_disk;
        common_disk.secret.reset();
        common_disk.common_mark = true;
        common_disk.charges = 1 << 20;
        for (int col = 0; col < columns; ++col) b = imprint(b, cell, col, common_disk);
    }
    for (int col = 0; col < columns; ++col)
        b = imprint(b, cell, col, stamp, /*feint=*/col == feint_column);
}

}  // namespace detail

// Steps 1-7 of ballot marking and casting, with adversary hooks interleaved.
inline void run_mark_cast(ElectionState& st, const std::vector<VoterProfile>& roster,
                          const std::vector<AdversaryStrategy>& strategies, Rng& rng) {
    if (st.phase != Phase::MarkCast) throw SimError(Err::WrongPhase, "not in MarkCast");
    const ElectionConfig& cfg = st.config;
    const int n = cfg.n;
    const int k = cfg.k;
    if (static_cast<int>(roster.size()) != n)
        throw SimError(Err::InvalidConfig, "roster size must equal n");
    if (st.audit_failed) {  // election aborted before marking
        advance_phase(st, Phase::CountVerify);
        return;
    }

    const auto order = detail::seat_order(roster);
    Rng dist_rng = rng.fork(10);
    Rng turn_rng = rng.fork(11);
    Rng leak_rng = rng.fork(12);
    Rng detect_rng = rng.fork(13);

    DetectionContext ctx;
    ctx.plain_sight_custody = true;
    ctx.under_table = cfg.variants.under_table;

    const bool premark_active =
        detail::find_strategy(strategies, StrategyKind::CorruptEAPremark, static_cast<AgentId>(n)) !=
        nullptr;

    // Step 1-4: distribution, stamp draw, inspection, description demands.
    for (int idx : order) {
        const VoterProfile& voter = roster[static_cast<std::size_t>(idx)];
        VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];

        Serial handed = detail::take_ballot_from_pool(st, dist_rng);
        st.move_ballot(handed, Custody{CustodyKind::Voter, voter.id});
        trace.ballot_in_hand = handed;
        ++st.distributed;
        ++st.action_steps;

        // Without the bag mitigation the EA hands out its premarked sheets
        // deliberately and remembers who got which defect.
        if (premark_active && !cfg.physical.ballot_bag_draw) {
            for (const auto& d : st.ballots[static_cast<std::size_t>(handed)].defects)
                st.log.emit(Scope::only({static_cast<AgentId>(n)}),
                            DefectSeen{true, voter.id, d.kind, d.tag});
        }

        // The inspection is a memory commit, not an observation event: the
        // voter's own pattern lives in the verification channel. PatternSeen
        // events model someone else catching sight of the pattern.
        int stamp_idx = st.stamp_bag.draw(dist_rng);
        trace.stamp = stamp_idx;
        trace.pattern = st.stamps[static_cast<std::size_t>(stamp_idx)].secret->pattern_id;
        st.action_steps += 2;  // draw + inspect

        for (const auto& s : strategies) {
            if (s.kind == StrategyKind::CoercionDemand && s.target == voter.id) {
                st.log.emit(Scope::only({s.actor}),
                            DescriptionReceived{voter.id, trace.pattern, voter.p_desc});
            }
        }

        if (const auto* im =
                detail::find_strategy(strategies, StrategyKind::IdentifyingMark, voter.id)) {
            Ballot& b = st.ballots[static_cast<std::size_t>(handed)];
            Defect d{im->defect, 0, voter.id, st.next_defect_tag++};
            b.defects.push_back(d);
            std::vector<AgentId> watchers{voter.id};
            if (voter.adversary >= 0) watchers.push_back(voter.adversary);
            st.log.emit(Scope::only(watchers), DefectSeen{true, voter.id, d.kind, d.tag});
            if (detect_rng.bernoulli(effective_p_detect(cfg.detection, *im, ctx)))
                st.log.emit(Scope::everyone(), Detection{StrategyKind::IdentifyingMark, voter.id});
        }
    }

    // Step 5: fold, then rotate under the cloth (or table).
    std::vector<TurnPlan> plans(static_cast<std::size_t>(n));
    for (int idx : order) {
        const VoterProfile& voter = roster[static_cast<std::size_t>(idx)];
        VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
        Ballot& b = st.ballots[static_cast<std::size_t>(trace.ballot_in_hand)];
        b = fold(b);
        ++st.action_steps;

        Rng voter_rng = turn_rng.fork(static_cast<std::uint64_t>(voter.id));
        TurnPlan plan = plan_turn(k, voter.preference, voter.p_orient, voter_rng);
        auto rotated = rotate(b, plan.rotation, /*concealed=*/true);
        b = rotated.ballot;
        plans[static_cast<std::size_t>(voter.id)] = plan;
        ++st.action_steps;

        if (!cfg.variants.voting_station) {
            for (VoterId peeker : detail::neighbours(roster, voter.id)) {
                if (leak_rng.bernoulli(cfg.physical.p_orientation_leak))
                    st.log.emit(Scope::only({peeker}),
                                PeekOrientation{voter.id, b.orientation});
            }
            if (!cfg.physical.polarising_filters &&
                leak_rng.bernoulli(cfg.physical.p_label_leak)) {
                st.log.emit(Scope::everyone(), LabelLeak{voter.id, -1, b.orientation});
            }
        }
    }

    // Chain-voting swaps happen while ballots are still under the cloth: the
    // adversary pre-stamps their own ballot with an extra stamp acquired
    // outside the bag, swaps it into the target's hands, and later marks the
    // target's blank for themselves.
    for (const auto& s : strategies) {
        if (s.kind != StrategyKind::ChainVoting) continue;
        VoterTrace& adv = st.traces[static_cast<std::size_t>(s.actor)];
        VoterTrace& tgt = st.traces[static_cast<std::size_t>(s.target)];
        Ballot& pre = st.ballots[static_cast<std::size_t>(adv.ballot_in_hand)];
        Stamp extra;
        extra.secret = VisualSecret{st.fresh_pattern(detect_rng), cfg.physical.p_desc,
                                    cfg.physical.p_conf};
        extra.common_mark = cfg.variants.parallel_design();
        extra.charges = 4;
        Cell cell = cell_for_choice(pre.design, pre.orientation, s.demand);
        detail::stamp_rounds(st, pre, cell, extra, /*feint_column=*/-1);
        std::swap(adv.ballot_in_hand, tgt.ballot_in_hand);
        st.move_ballot(adv.ballot_in_hand, Custody{CustodyKind::Voter, s.actor});
        st.move_ballot(tgt.ballot_in_hand, Custody{CustodyKind::Voter, s.target});
        tgt.vote_stolen = true;
        if (detect_rng.bernoulli(effective_p_detect(cfg.detection, s, ctx)))
            st.log.emit(Scope::everyone(), Detection{StrategyKind::ChainVoting, s.actor});
    }

    // Step 6: stamping in plain sight.
    for (int idx : order) {
        const VoterProfile& voter = roster[static_cast<std::size_t>(idx)];
        VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
        Ballot& b = st.ballots[static_cast<std::size_t>(trace.ballot_in_hand)];
        Stamp& stamp = st.stamps[static_cast<std::size_t>(trace.stamp)];

        if (trace.vote_stolen) {
            // The target holds the adversary's pre-stamped ballot and only
            // feints their public stamping round.
            Cell cell = b.marks.empty() ? 0 : b.marks.front().cell;
            st.log.emit(Scope::everyone(), CellStamped{voter.id, cell});
            ++st.action_steps;
            continue;
        }

        const AdversaryStrategy* chain =
            detail::find_strategy(strategies, StrategyKind::ChainVoting, voter.id);
        Cell cell;
        if (chain) {
            // The swapped-in blank has an orientation the adversary checked
            // by peeking; they stamp it for their own preference.
            cell = cell_for_choice(b.design, b.orientation, voter.preference);
        } else {
            cell = plans[static_cast<std::size_t>(voter.id)].cell;
        }

        int feint_column = -1;
        if (const auto* feint =
                detail::find_strategy(strategies, StrategyKind::FeintStamp, voter.id)) {
            feint_column = cfg.variants.receipt_ballots ? 0 : 1;
            trace.feinted = true;
            DetectionContext feint_ctx = ctx;
            feint_ctx.common_mark_mitigation = stamp.common_mark;
            if (detect_rng.bernoulli(effective_p_detect(cfg.detection, *feint, feint_ctx)))
                st.log.emit(Scope::everyone(), Detection{StrategyKind::FeintStamp, voter.id});
        }

        detail::stamp_rounds(st, b, cell, stamp, feint_column);
        st.log.emit(Scope::everyone(), CellStamped{voter.id, cell});
        ++st.action_steps;
    }

    // Cut parallel ballots; the receipt half stays on the table in front of
    // the voter, in plain sight.
    if (cfg.variants.parallel_design()) {
        for (int idx : order) {
            const VoterProfile& voter = roster[static_cast<std::size_t>(idx)];
            VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
            Serial parent_serial = trace.ballot_in_hand;
            const Ballot parent = st.ballots[static_cast<std::size_t>(parent_serial)];
            Serial left_serial = static_cast<Serial>(st.ballots.size());
            Serial right_serial = left_serial + 1;
            auto halves = cut_parallel(parent, left_serial, right_serial);
            st.new_ballot(std::move(halves.first), Custody{CustodyKind::Voter, voter.id});
            st.new_ballot(std::move(halves.second), Custody{CustodyKind::Voter, voter.id});
            st.move_ballot(parent_serial, Custody{CustodyKind::Cut, -1});
            trace.ballot_in_hand = left_serial;
            trace.receipt_serial = right_serial;
            ++st.action_steps;
        }
    }

    // Step 7: one-by-one casting onto the scale.
    const double unit =
        cfg.variants.parallel_design() ? cfg.physical.nominal_weight_g / 2.0
                                       : cfg.physical.nominal_weight_g;
    Rng forge_rng = rng.fork(14);
    for (int idx : order) {
        const VoterProfile& voter = roster[static_cast<std::size_t>(idx)];
        VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];

        std::vector<Serial> payload_main{trace.ballot_in_hand};
        std::vector<Serial> payload_second;
        if (cfg.variants.parallel_tally) payload_second.push_back(trace.receipt_serial);

        if (const auto* dc =
                detail::find_strategy(strategies, StrategyKind::DoubleCast, voter.id)) {
            Ballot forged;
            forged.design = design_for(cfg, false);
            forged.weight = cfg.physical.nominal_weight_g +
                            forge_rng.uniform(-cfg.physical.weight_jitter_g,
                                              cfg.physical.weight_jitter_g);
            forged.folded = true;
            forged.orientation = static_cast<int>(forge_rng.below(static_cast<std::uint64_t>(k)));
            Stamp extra;
            extra.secret = VisualSecret{st.fresh_pattern(forge_rng), cfg.physical.p_desc,
                                        cfg.physical.p_conf};
            extra.common_mark = cfg.variants.parallel_design();
            extra.charges = 4;
            Cell cell = cell_for_choice(forged.design, forged.orientation, dc->demand);
            detail::stamp_rounds(st, forged, cell, extra, -1);
            if (cfg.variants.parallel_design()) {
                Serial parent = st.new_ballot(forged, Custody{CustodyKind::Cut, -1});
                Serial ls = static_cast<Serial>(st.ballots.size());
                auto halves = cut_parallel(st.ballots[static_cast<std::size_t>(parent)], ls, ls + 1);
                st.new_ballot(std::move(halves.first), Custody{CustodyKind::Voter, voter.id});
                st.new_ballot(std::move(halves.second), Custody{CustodyKind::Voter, voter.id});
                payload_main.push_back(ls);
                if (cfg.variants.parallel_tally)
                    payload_second.push_back(ls + 1);
                else
                    st.move_ballot(ls + 1, Custody{CustodyKind::Removed, -1});  // up the sleeve
            } else {
                Serial fs = st.new_ballot(std::move(forged), Custody{CustodyKind::Voter, voter.id});
                payload_main.push_back(fs);
            }
            ++st.attack_injected;
        }

        auto cast_payload = [&](int box_idx, const std::vector<Serial>& payload) {
            std::vector<const Ballot*> ptrs;
            for (Serial s : payload) ptrs.push_back(&st.ballots[static_cast<std::size_t>(s)]);
            auto detected = cast_into(st.boxes[static_cast<std::size_t>(box_idx)], ptrs,
                                      voter.id, unit);
            int position = st.cast_motions_per_box[static_cast<std::size_t>(box_idx)]++;
            for (Serial s : payload) st.move_ballot(s, Custody{CustodyKind::Box, box_idx});
            st.log.emit(Scope::everyone(), CastOrder{voter.id, position, box_idx});
            if (detected) st.log.emit(Scope::everyone(), *detected);
            ++st.action_steps;
        };
        cast_payload(0, payload_main);
        if (!payload_second.empty()) cast_payload(1, payload_second);
        trace.cast_serial = payload_main.front();

        if (cfg.variants.receipt_ballots)
            st.move_ballot(trace.receipt_serial, Custody{CustodyKind::Receipt, voter.id});
    }

    // Unused extra stamps are voided in public so every live pattern stays
    // accounted for.
    std::vector<PatternId> leftover;
    for (int idx : st.stamp_bag.items())
        leftover.push_back(st.stamps[static_cast<std::size_t>(idx)].secret->pattern_id);
    std::sort(leftover.begin(), leftover.end());
    if (!leftover.empty()) st.log.emit(Scope::everyone(), ExtrasVoided{std::move(leftover)});

    advance_phase(st, Phase::CountVerify);
}

// --- Counting and verification -------------------------------------------------------

inline Tally tally_pool(const ElectionState& st, const std::vector<Serial>& pool, bool plain) {
    Tally t;
    t.counts.assign(static_cast<std::size_t>(st.config.k), 0);
    t.ballot_count = static_cast<int>(pool.size());
    for (Serial s : pool) {
        const Ballot& b = st.ballots[static_cast<std::size_t>(s)];
        auto choice = plain ? decode_plain(b) : decode(b);
        if (choice)
            ++t.counts[static_cast<std::size_t>(*choice)];
        else
            ++t.spoiled;
    }
    return t;
}

inline void count_and_reveal(ElectionState& st, const std::vector<AdversaryStrategy>& strategies,
                             Rng& rng) {
    if (st.phase != Phase::CountVerify) throw SimError(Err::WrongPhase, "not in CountVerify");

    DetectionContext ctx;
    ctx.plain_sight_custody = !st.spb;
    ctx.under_table = st.config.variants.under_table;
    Rng swap_rng = rng.fork(20);

    // A corrupt EA swaps one cast ballot between box removal and reveal.
    for (const auto& s : strategies) {
        if (s.kind != StrategyKind::EAReplacement) continue;
        auto& contents = st.boxes[0].contents;
        if (contents.empty()) continue;
        std::size_t pos;
        if (s.victim) {
            Serial want = st.traces[static_cast<std::size_t>(*s.victim)].cast_serial;
            auto it = std::find(contents.begin(), contents.end(), want);
            if (it == contents.end()) continue;
            pos = static_cast<std::size_t>(it - contents.begin());
        } else {
            pos = static_cast<std::size_t>(swap_rng.below(contents.size()));
        }
        Serial removed = contents[pos];
        const Ballot& original = st.ballots[static_cast<std::size_t>(removed)];
        Ballot forged;
        forged.design = original.design;
        forged.weight = original.weight;
        forged.folded = true;
        forged.half_column = original.half_column;
        forged.orientation =
            static_cast<int>(swap_rng.below(static_cast<std::uint64_t>(st.config.k)));
        if (st.spb) {
            forged.marks.push_back(Mark{s.demand, 0, Ink::Visible, std::nullopt});
            forged.orientation = 0;
        } else {
            Stamp extra;
            extra.secret = VisualSecret{st.fresh_pattern(swap_rng), st.config.physical.p_desc,
                                        st.config.physical.p_conf};
            extra.common_mark = st.config.variants.parallel_design();
            extra.charges = 4;
            Cell cell = cell_for_choice(forged.design, forged.orientation, s.demand);
            int columns = original.half_column >= 0 ? 1 : forged.design.columns();
            if (original.half_column >= 0) {
                Stamp disk;
                disk.common_mark = true;
                disk.charges = 4;
                forged = imprint(forged, cell, original.half_column, disk);
                forged = imprint(forged, cell, original.half_column, extra);
            } else {
                for (int col = 0; col < columns; ++col) {
                    forged = imprint(forged, cell, col, extra);
                }
            }
        }
        Serial sub = st.new_ballot(std::move(forged), Custody{CustodyKind::Box, 0});
        contents[pos] = sub;
        st.move_ballot(removed, Custody{CustodyKind::Removed, -1});
        ++st.attack_removed;
        if (swap_rng.bernoulli(effective_p_detect(st.config.detection, s, ctx)))
            st.log.emit(Scope::everyone(), Detection{StrategyKind::EAReplacement, s.actor});
    }

    // Shake the box, lay the ballots out, spray the revealing ink.
    Rng shuffle_rng = rng.fork(21);
    std::vector<Serial> pool = st.boxes[0].contents;
    st.boxes[0].contents.clear();
    if (!st.spb) shuffle_rng.shuffle(pool);
    st.revealed = pool;
    for (Serial s : pool) {
        st.move_ballot(s, Custody{CustodyKind::Revealed, -1});
        st.ballots[static_cast<std::size_t>(s)].folded = false;  // unfolded for reading
    }
    if (!st.spb) {
        std::vector<Ballot> tmp;
        for (Serial s : pool) tmp.push_back(st.ballots[static_cast<std::size_t>(s)]);
        reveal_ink(tmp, st.phase);
        for (std::size_t i = 0; i < pool.size(); ++i)
            st.ballots[static_cast<std::size_t>(pool[i])] = tmp[i];
    }
    st.revealed_view.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Ballot& b = st.ballots[static_cast<std::size_t>(pool[i])];
        st.revealed_view.push_back(revealed_info(b, st.spb));
        for (const auto& d : b.defects)
            st.log.emit(Scope::everyone(),
                        DefectSeen{false, static_cast<int>(i), d.kind, d.tag});
    }

    st.tally = tally_pool(st, pool, st.spb);
    st.log.emit(Scope::everyone(),
                CountsPublished{st.tally.counts, st.tally.spoiled, st.tally.ballot_count});
    if (st.tally.ballot_count != st.cast_motions_per_box[0])
        st.log.emit(Scope::everyone(),
                    BallotCountMismatch{st.tally.ballot_count, st.cast_motions_per_box[0]});

    if (st.config.variants.parallel_tally && st.boxes.size() > 1) {
        std::vector<Serial> second = st.boxes[1].contents;
        st.boxes[1].contents.clear();
        shuffle_rng.shuffle(second);
        st.revealed_second = second;
        std::vector<Ballot> tmp;
        for (Serial s : second) {
            st.move_ballot(s, Custody{CustodyKind::Revealed, -1});
            st.ballots[static_cast<std::size_t>(s)].folded = false;
            tmp.push_back(st.ballots[static_cast<std::size_t>(s)]);
        }
        reveal_ink(tmp, st.phase);
        for (std::size_t i = 0; i < second.size(); ++i)
            st.ballots[static_cast<std::size_t>(second[i])] = tmp[i];
        Tally other = tally_pool(st, second, false);
        if (other.counts != st.tally.counts || other.spoiled != st.tally.spoiled)
            st.log.emit(Scope::everyone(),
                        BoxTallyMismatch{st.tally.total_counted(), other.total_counted()});
    }
}

// Step 3-4: every voter searches the pool for their visual secret.
inline void collect_objections(ElectionState& st, const std::vector<VoterProfile>& roster,
                               const std::vector<AdversaryStrategy>& strategies, Rng& rng) {
    if (st.phase != Phase::CountVerify) throw SimError(Err::WrongPhase, "not in CountVerify");
    Rng verify_rng = rng.fork(30);
    for (const auto& voter : roster) {
        VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
        ++st.action_steps;
        if (trace.vote_stolen) continue;  // the chain-voting target stays silent
        bool false_objector =
            detail::find_strategy(strategies, StrategyKind::FalseObjection, voter.id) != nullptr;
        Rng voter_rng = verify_rng.fork(static_cast<std::uint64_t>(voter.id));
        auto result = verification_behavior(voter, trace.pattern, st.revealed_view,
                                            st.config.physical.p_conf, false_objector, voter_rng);
        trace.verification_match = result.matched;
        if (result.objection) {
            st.objections.push_back(Objection{voter.id, *result.objection});
            st.log.emit(Scope::everyone(), ObjectionRaised{voter.id, *result.objection});
        }
    }
}

// --- Receipt adjudication ----------------------------------------------------

struct AdjudicationResult {
    int validated = 0;  // j'
    std::vector<std::pair<VoterId, bool>> per_objector;
};

// Objectors' receipt halves are mixed in an empty box and revealed; an
// objection is valid iff its receipt matches no cast ballot on the
// (pattern, decoded choice) key.
inline AdjudicationResult adjudicate_receipts(ElectionState& st, Rng& rng) {
    if (!st.config.variants.receipt_ballots)
        throw SimError(Err::VariantInactive, "receipt ballots are not in use");
    if (st.phase != Phase::Adjudicate) throw SimError(Err::WrongPhase, "not adjudicating");
    std::vector<Serial> receipts;
    std::vector<VoterId> owners;
    for (const auto& obj : st.objections) {
        Serial r = st.traces[static_cast<std::size_t>(obj.voter)].receipt_serial;
        if (r < 0) continue;
        receipts.push_back(r);
        owners.push_back(obj.voter);
    }
    // Mix before revealing: the room sees the receipt set, not whose is whose.
    std::vector<std::size_t> perm(receipts.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    std::vector<Ballot> tmp;
    for (std::size_t i : perm) {
        Serial s = receipts[i];
        st.ballots[static_cast<std::size_t>(s)].folded = false;
        tmp.push_back(st.ballots[static_cast<std::size_t>(s)]);
    }
    reveal_ink(tmp, st.phase);
    for (std::size_t j = 0; j < perm.size(); ++j)
        st.ballots[static_cast<std::size_t>(receipts[perm[j]])] = tmp[j];

    AdjudicationResult result;
    for (std::size_t j = 0; j < perm.size(); ++j) {
        Serial s = receipts[perm[j]];
        VoterId owner = owners[perm[j]];
        st.move_ballot(s, Custody{CustodyKind::Revealed, -1});
        st.receipt_revealed.push_back(s);
        auto info = revealed_info(st.ballots[static_cast<std::size_t>(s)]);
        bool matched = false;
        if (info.pattern && info.choice) {
            for (const auto& cast : st.revealed_view) {
                if (cast.pattern && cast.choice && *cast.pattern == *info.pattern &&
                    *cast.choice == *info.choice) {
                    matched = true;
                    break;
                }
            }
        } else {
            matched = true;  // a blank or spoiled receipt demonstrates nothing
        }
        bool valid = !matched;
        if (valid) ++result.validated;
        result.per_objector.emplace_back(owner, valid);
        st.log.emit(Scope::everyone(),
                    ReceiptRevealed{owner, info.pattern.value_or(-1), info.choice.value_or(-1)});
    }
    return result;
}

// --- Whole BVP1 trial -----------------------------------------------------------

inline void validate_all(const ElectionConfig& config, const std::vector<VoterProfile>& roster,
                         const std::vector<AdversaryStrategy>& strategies) {
    validate_config(config);
    if (static_cast<int>(roster.size()) != config.n)
        throw SimError(Err::InvalidConfig, "roster size must equal n");
    validate_roster(roster, config.k);
    for (const auto& s : strategies)
        validate_strategy(s, config.n, config.k, config.extras, roster,
                          config.variants.voting_station, config.variants.parallel_design());
}

inline ElectionState run_bvp1(const ElectionConfig& config,
                              const std::vector<VoterProfile>& roster,
                              const std::vector<AdversaryStrategy>& strategies, Rng& rng) {
    validate_all(config, roster, strategies);
    ElectionState st = setup(config, strategies, rng);

    if (config.physical.audit_sample > 0) {
        Rng audit_rng = rng.fork(40);
        audit_cut_and_choose(st, config.physical.audit_sample, audit_rng);
        if (st.audit_failed) {
            advance_phase(st, Phase::CountVerify);
            st.outcome.kind = OutcomeKind::Annulled;
            st.outcome.reason = AnnulReason::AuditFailure;
            advance_phase(st, Phase::Done);
            return st;
        }
    }

    run_mark_cast(st, roster, strategies, rng);
    count_and_reveal(st, strategies, rng);
    collect_objections(st, roster, strategies, rng);

    // Coerced voters answer the adversary's demand by pointing at a ballot.
    Rng claim_rng = rng.fork(60);
    for (const auto& s : strategies) {
        if (s.kind != StrategyKind::CoercionDemand) continue;
        VoterTrace& trace = st.traces[static_cast<std::size_t>(s.target)];
        std::optional<int> own;
        for (std::size_t i = 0; i < st.revealed_view.size(); ++i) {
            if (st.revealed_view[i].pattern && *st.revealed_view[i].pattern == trace.pattern) {
                own = static_cast<int>(i);
                break;
            }
        }
        trace.claim_position = coerced_response(st.revealed_view, own, s.demand, claim_rng);
        trace.equivocation_failed = !trace.claim_position.has_value();
    }

    int j = static_cast<int>(st.objections.size());
    Outcome outcome = decide(st.tally, j);
    if (config.variants.receipt_ballots && j > 0 && 2 * j >= outcome.margin &&
        outcome.reason != AnnulReason::Tie) {
        advance_phase(st, Phase::Adjudicate);
        Rng adj_rng = rng.fork(50);
        auto adj = adjudicate_receipts(st, adj_rng);
        outcome = decide(st.tally, adj.validated);
        outcome.objections = j;
        outcome.validated = adj.validated;
    }
    st.outcome = outcome;
    advance_phase(st, Phase::Done);
    return st;
}

// --- SPB baseline ------------------------------------------------------------------

// Simple paper ballots as commonly practised: open marking at the seat, a
// toss into the centre of the table, EA handling, a public tally. No visual
// secrets, no scale, no objection arithmetic.
inline ElectionState run_spb(const ElectionConfig& config,
                             const std::vector<VoterProfile>& roster,
                             const std::vector<AdversaryStrategy>& strategies, Rng& rng) {
    validate_config(config);
    if (static_cast<int>(roster.size()) != config.n)
        throw SimError(Err::InvalidConfig, "roster size must equal n");
    validate_roster(roster, config.k);

    ElectionState st;
    st.config = config;
    st.spb = true;
    st.traces.resize(static_cast<std::size_t>(config.n));
    const BallotDesign design = design_for(config, true);
    Rng print_rng = rng.fork(1);
    for (int i = 0; i < config.n + config.extras; ++i) {
        Ballot b;
        b.design = design;
        b.weight = config.physical.nominal_weight_g +
                   print_rng.uniform(-config.physical.weight_jitter_g,
                                     config.physical.weight_jitter_g);
        st.new_ballot(std::move(b), Custody{CustodyKind::Table, -1});
    }
    BallotBoxState pile;  // the centre of the table
    pile.on_scale = false;
    st.boxes.push_back(pile);
    st.cast_motions_per_box.assign(1, 0);
    advance_phase(st, Phase::MarkCast);

    Rng turn_rng = rng.fork(11);
    Rng leak_rng = rng.fork(12);
    const auto order = detail::seat_order(roster);
    for (int idx : order) {
        const VoterProfile& voter = roster[static_cast<std::size_t>(idx)];
        VoterTrace& trace = st.traces[static_cast<std::size_t>(voter.id)];
        Serial handed = detail::take_ballot_from_pool(st, turn_rng);
        st.move_ballot(handed, Custody{CustodyKind::Voter, voter.id});
        trace.ballot_in_hand = handed;
        ++st.distributed;
        ++st.action_steps;

        Ballot& b = st.ballots[static_cast<std::size_t>(handed)];
        Choice marked = voter.preference;
        Rng voter_rng = turn_rng.fork(static_cast<std::uint64_t>(voter.id));
        if (voter_rng.bernoulli(voter.p_orient) && config.k > 1) {
            int wrong = static_cast<int>(voter_rng.below(static_cast<std::uint64_t>(config.k - 1)));
            if (wrong >= marked) ++wrong;
            marked = wrong;
        }
        b.marks.push_back(Mark{marked, 0, Ink::Visible, std::nullopt});
        ++st.action_steps;

        // Neighbours see the mark go down; there is no fold-and-rotate cover.
        for (VoterId peeker : detail::neighbours(roster, voter.id))
            if (leak_rng.bernoulli(config.physical.p_peek))
                st.log.emit(Scope::only({peeker}), LabelLeak{voter.id, marked, 0});

        b = fold(b);
        ++st.action_steps;

        std::vector<Serial> payload{handed};
        if (detail::find_strategy(strategies, StrategyKind::DoubleCast, voter.id)) {
            Ballot forged;
            forged.design = design;
            forged.weight = config.physical.nominal_weight_g;
            forged.folded = true;
            const auto* dc = detail::find_strategy(strategies, StrategyKind::DoubleCast, voter.id);
            forged.marks.push_back(Mark{dc->demand, 0, Ink::Visible, std::nullopt});
            payload.push_back(st.new_ballot(std::move(forged), Custody{CustodyKind::Voter, voter.id}));
            ++st.attack_injected;
        }
        std::vector<const Ballot*> ptrs;
        for (Serial s : payload) ptrs.push_back(&st.ballots[static_cast<std::size_t>(s)]);
        cast_into(st.boxes[0], ptrs, voter.id, config.physical.nominal_weight_g);
        for (Serial s : payload) st.move_ballot(s, Custody{CustodyKind::Box, 0});
        st.log.emit(Scope::everyone(),
                    CastOrder{voter.id, st.cast_motions_per_box[0]++, 0});
        ++st.action_steps;
        trace.cast_serial = handed;
    }

    advance_phase(st, Phase::CountVerify);
    count_and_reveal(st, strategies, rng);
    st.action_steps += config.n;  // each voter glances over the announced tally

    Outcome outcome = decide(st.tally, 0);
    if (st.log.count_of<Detection>() > 0) {
        // Someone was caught red-handed; the room challenges the result.
        outcome.kind = OutcomeKind::Annulled;
        outcome.winner = -1;
        outcome.reason = AnnulReason::AuditFailure;
    }
    st.outcome = outcome;
    advance_phase(st, Phase::Done);
    return st;
}

}  // namespace bvp
