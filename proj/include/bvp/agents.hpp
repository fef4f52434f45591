#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bvp/core.hpp"
#include "bvp/physical.hpp"
#include "bvp/rng.hpp"

namespace bvp {

enum class RoleKind { Honest, Coerced, Bribed, Malicious };

inline const char* role_name(RoleKind r) {
    switch (r) {
        case RoleKind::Honest: return "honest";
        case RoleKind::Coerced: return "coerced";
        case RoleKind::Bribed: return "bribed";
        case RoleKind::Malicious: return "malicious";
    }
    return "?";
}

struct VoterProfile {
    VoterId id = 0;
    int seat = 0;
    Choice preference = 0;
    RoleKind role = RoleKind::Honest;
    Choice demand = -1;       // coerced/bribed: what the adversary wants voted
    AgentId adversary = -1;   // coerced/bribed: who is leaning on this voter
    double p_forget = 0.0;    // fails to find their pattern at verification
    double p_orient = 0.0;    // loses track of the rotation while marking
    double p_desc = 0.05;     // description-channel fidelity
};

// One attack behavior from the catalog, bound to its actor.
struct AdversaryStrategy {
    StrategyKind kind = StrategyKind::DoubleCast;
    AgentId actor = -1;              // voter id, or the EA id for EA strategies
    VoterId target = -1;             // chain-voting swap partner / coercion target
    Choice demand = -1;              // chain/coercion demand or EA substitute choice
    std::optional<VoterId> victim;   // EA replacement: whose cast ballot to swap
    DefectKind defect = DefectKind::Pinhole;
    int count = 1;                   // corrupt-EA premark count
    std::optional<double> p_detect;  // per-instance override of the model default
};

// In-room detection odds per strategy, conditioned on custody and variants.
// These are scenario inputs, not physics.
struct DetectionModel {
    double chain_voting = 0.7;
    double under_table_chain_factor = 0.5;  // swapping is easier under the table
    double ea_replacement_plain_sight = 0.5;
    double ea_replacement_otherwise = 0.1;
    double feint_mitigated = 0.6;  // stamp carries the visible common disk
    double feint_unmitigated = 0.1;
    double identifying_mark = 0.3;
};

struct DetectionContext {
    bool plain_sight_custody = true;  // BVP1 keeps ballots in view; SPB does not
    bool under_table = false;
    bool common_mark_mitigation = false;
};

inline double effective_p_detect(const DetectionModel& model, const AdversaryStrategy& s,
                                 const DetectionContext& ctx) {
    if (s.p_detect) return *s.p_detect;
    switch (s.kind) {
        case StrategyKind::ChainVoting:
            return model.chain_voting * (ctx.under_table ? model.under_table_chain_factor : 1.0);
        case StrategyKind::EAReplacement:
            return ctx.plain_sight_custody ? model.ea_replacement_plain_sight
                                           : model.ea_replacement_otherwise;
        case StrategyKind::FeintStamp:
            return ctx.common_mark_mitigation ? model.feint_mitigated : model.feint_unmitigated;
        case StrategyKind::IdentifyingMark:
            return model.identifying_mark;
        case StrategyKind::DoubleCast:         // the scale is the detector
        case StrategyKind::CorruptEAPremark:   // the audit is the detector
        case StrategyKind::FalseObjection:     // adjudication is the detector
        case StrategyKind::CoercionDemand:
            return 0.0;
    }
    return 0.0;
}

// --- Turn behavior ---------------------------------------------------------

struct TurnPlan {
    int rotation = 0;             // actual rotation applied under the cloth
    int believed_orientation = 0; // what the voter thinks it is
    Cell cell = 0;                // where they stamp, in the holding frame
};

// The canonical marking turn: rotate uniformly, then stamp the cell that
// should land on `preference`. With probability p_orient the voter has lost
// track and uses a uniformly wrong orientation, silently shifting the vote.
inline TurnPlan plan_turn(int k, Choice preference, double p_orient, Rng& rng) {
    TurnPlan plan;
    plan.rotation = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    plan.believed_orientation = plan.rotation;
    if (rng.bernoulli(p_orient) && k > 1) {
        int wrong = static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
        if (wrong >= plan.rotation) ++wrong;
        plan.believed_orientation = wrong;
    }
    plan.cell = mod_k(preference + plan.believed_orientation, k);
    return plan;
}

// --- Verification behavior --------------------------------------------------

struct VerificationResult {
    std::optional<int> matched;  // pool position the voter settled on
    std::optional<ObjectionKind> objection;
};

// Search the revealed pool for one's own pattern, with the recall model:
// p_forget misses the true pattern, p_conf mistakes another for it.
inline VerificationResult verification_behavior(const VoterProfile& voter, PatternId own_pattern,
                                                const std::vector<RevealedBallot>& pool,
                                                double p_conf, bool false_objector, Rng& rng) {
    VerificationResult result;
    if (false_objector) {
        result.objection = ObjectionKind::PatternMissing;
        return result;
    }
    std::optional<int> own_position;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].pattern && *pool[i].pattern == own_pattern) {
            own_position = static_cast<int>(i);
            break;
        }
    }
    if (own_position && !rng.bernoulli(voter.p_forget)) {
        result.matched = own_position;
        const auto& found = pool[static_cast<std::size_t>(*own_position)];
        if (!found.choice || *found.choice != voter.preference)
            result.objection = ObjectionKind::ChoiceMismatch;
        return result;
    }
    // Own pattern gone (or recall failed): maybe confuse another for it.
    if (rng.bernoulli(p_conf)) {
        std::vector<int> others;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (pool[i].pattern && static_cast<int>(i) != own_position.value_or(-1))
                others.push_back(static_cast<int>(i));
        }
        if (!others.empty()) {
            int pick = others[rng.below(others.size())];
            result.matched = pick;
            const auto& found = pool[static_cast<std::size_t>(pick)];
            if (!found.choice || *found.choice != voter.preference)
                result.objection = ObjectionKind::ChoiceMismatch;
            return result;
        }
    }
    result.objection = ObjectionKind::PatternMissing;
    return result;
}

// --- Coerced claims ----------------------------------------------------------

// After the reveal, a coerced voter points at a ballot and says "that one is
// mine". Their own if it already shows the demand; otherwise any revealed
// ballot that does. No cover ballot means the equivocation fails outright.
inline std::optional<int> coerced_response(const std::vector<RevealedBallot>& pool,
                                           std::optional<int> own_position, Choice demand,
                                           Rng& rng) {
    if (own_position) {
        const auto& own = pool[static_cast<std::size_t>(*own_position)];
        if (own.choice && *own.choice == demand) return own_position;
    }
    std::vector<int> cover;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].choice && *pool[i].choice == demand &&
            static_cast<int>(i) != own_position.value_or(-1))
            cover.push_back(static_cast<int>(i));
    }
    if (cover.empty()) return std::nullopt;
    return cover[rng.below(cover.size())];
}

// --- Attach-time validation ---------------------------------------------------

inline void validate_roster(const std::vector<VoterProfile>& roster, int k) {
    std::vector<bool> seat_taken(roster.size(), false);
    for (std::size_t i = 0; i < roster.size(); ++i) {
        const auto& v = roster[i];
        if (v.id != static_cast<VoterId>(i))
            throw SimError(Err::ValidationError, "roster ids must be 0..n-1 in order");
        if (v.seat < 0 || v.seat >= static_cast<int>(roster.size()) ||
            seat_taken[static_cast<std::size_t>(v.seat)])
            throw SimError(Err::ValidationError, "seats must form a permutation of 0..n-1");
        seat_taken[static_cast<std::size_t>(v.seat)] = true;
    }
    for (const auto& v : roster) {
        if (v.preference < 0 || v.preference >= k)
            throw SimError(Err::ValidationError,
                           "voter " + std::to_string(v.id) + ": preference out of range");
        for (double p : {v.p_forget, v.p_orient, v.p_desc}) {
            if (p < 0.0 || p > 1.0)
                throw SimError(Err::ValidationError,
                               "voter " + std::to_string(v.id) + ": probability outside [0,1]");
        }
        if (v.role == RoleKind::Coerced || v.role == RoleKind::Bribed) {
            if (v.demand < 0 || v.demand >= k)
                throw SimError(Err::ValidationError,
                               "voter " + std::to_string(v.id) + ": demand out of range");
            if (v.adversary < 0)
                throw SimError(Err::ValidationError,
                               "voter " + std::to_string(v.id) + ": missing adversary");
        }
    }
}

// Strategy preconditions are checked when the scenario is assembled, before
// any trial runs (the "attach time" of the strategy catalog).
inline void validate_strategy(const AdversaryStrategy& s, int n, int k, int extras,
                              const std::vector<VoterProfile>& roster, bool voting_station,
                              bool parallel_design) {
    const AgentId ea = n;
    auto require_voter_actor = [&](std::initializer_list<RoleKind> allowed) {
        if (s.actor < 0 || s.actor >= n)
            throw SimError(Err::StrategyPreconditionFailed,
                           std::string(strategy_name(s.kind)) + ": actor must be a voter");
        RoleKind role = roster[static_cast<std::size_t>(s.actor)].role;
        for (RoleKind r : allowed)
            if (role == r) return;
        throw SimError(Err::StrategyPreconditionFailed,
                       std::string(strategy_name(s.kind)) + ": actor role mismatch");
    };
    auto require_ea_actor = [&] {
        if (s.actor != ea)
            throw SimError(Err::StrategyPreconditionFailed,
                           std::string(strategy_name(s.kind)) + ": requires an EA-role agent");
    };
    switch (s.kind) {
        case StrategyKind::ChainVoting: {
            require_voter_actor({RoleKind::Malicious});
            if (voting_station)
                throw SimError(Err::StrategyPreconditionFailed,
                               "chain_voting: voting station serializes voters");
            if (s.target < 0 || s.target >= n || s.target == s.actor)
                throw SimError(Err::StrategyPreconditionFailed, "chain_voting: bad target");
            const auto& t = roster[static_cast<std::size_t>(s.target)];
            if (t.role != RoleKind::Coerced && t.role != RoleKind::Bribed)
                throw SimError(Err::StrategyPreconditionFailed,
                               "chain_voting: target must be coerced or bribed");
            int seat_gap = s.target > s.actor ? s.target - s.actor : s.actor - s.target;
            if (seat_gap != 1 && seat_gap != n - 1)
                throw SimError(Err::StrategyPreconditionFailed,
                               "chain_voting: target must sit next to the actor");
            if (s.demand < 0 || s.demand >= k)
                throw SimError(Err::StrategyPreconditionFailed, "chain_voting: bad demand");
            break;
        }
        case StrategyKind::DoubleCast:
            require_voter_actor({RoleKind::Malicious});
            if (s.demand < 0 || s.demand >= k)
                throw SimError(Err::StrategyPreconditionFailed, "double_cast: bad choice");
            break;
        case StrategyKind::EAReplacement:
            require_ea_actor();
            if (s.demand < 0 || s.demand >= k)
                throw SimError(Err::StrategyPreconditionFailed, "ea_replacement: bad substitute");
            if (s.victim && (*s.victim < 0 || *s.victim >= n))
                throw SimError(Err::StrategyPreconditionFailed, "ea_replacement: bad victim");
            break;
        case StrategyKind::IdentifyingMark:
            require_voter_actor({RoleKind::Malicious, RoleKind::Coerced, RoleKind::Bribed});
            break;
        case StrategyKind::CorruptEAPremark:
            require_ea_actor();
            if (s.count < 1 || s.count > n + extras)
                throw SimError(Err::StrategyPreconditionFailed, "corrupt_ea_premark: bad count");
            break;
        case StrategyKind::FalseObjection:
            require_voter_actor({RoleKind::Malicious});
            break;
        case StrategyKind::CoercionDemand: {
            if (s.target < 0 || s.target >= n)
                throw SimError(Err::StrategyPreconditionFailed, "coercion_demand: bad target");
            if (s.actor == s.target || s.actor < 0 || s.actor > ea)
                throw SimError(Err::StrategyPreconditionFailed, "coercion_demand: bad actor");
            const auto& t = roster[static_cast<std::size_t>(s.target)];
            if (t.role != RoleKind::Coerced)
                throw SimError(Err::StrategyPreconditionFailed,
                               "coercion_demand: target must be coerced");
            if (s.demand < 0 || s.demand >= k)
                throw SimError(Err::StrategyPreconditionFailed, "coercion_demand: bad demand");
            break;
        }
        case StrategyKind::FeintStamp:
            require_voter_actor({RoleKind::Malicious});
            if (!parallel_design)
                throw SimError(Err::StrategyPreconditionFailed,
                               "feint_stamp: needs a parallel-split ballot design");
            break;
    }
}

}  // namespace bvp
