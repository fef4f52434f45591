#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "bvp/core.hpp"
#include "bvp/events.hpp"
#include "bvp/physical.hpp"
#include "bvp/rng.hpp"

namespace bvp {

// Raw facts one observer has accumulated from events in their scope. Facts
// compile into hard constraints against the revealed pool; reasoning is
// possibilistic (can/cannot link), never probability-weighted.
struct ObserverFacts {
    std::map<VoterId, PatternId> pattern_known;
    std::map<VoterId, int> orientation_known;
    std::map<VoterId, Cell> cell_seen;
    std::map<VoterId, std::uint8_t> direct_choice_mask;
    std::map<int, VoterId> pre_cast_defects;   // defect tag -> voter holding it
    std::map<int, int> revealed_defects;       // defect tag -> pool position
    std::map<VoterId, std::pair<PatternId, double>> descriptions;
    std::vector<ReceiptRevealed> receipts;
    std::set<VoterId> objectors;

    bool empty() const {
        return pattern_known.empty() && orientation_known.empty() &&
               direct_choice_mask.empty() && pre_cast_defects.empty() && receipts.empty();
    }
};

// Epistemic state for every observer in the room: the n voters, the EA
// (id n), and a public outside view (id n+1) that sees only public events.
class KnowledgeState {
public:
    KnowledgeState(int n, int k) : n_(n), k_(k), facts_(static_cast<std::size_t>(n + 2)) {}

    int voters() const { return n_; }
    int choices() const { return k_; }
    AgentId ea() const { return n_; }
    AgentId public_observer() const { return n_ + 1; }

    void ingest(const ObservationEvent& ev) {
        for (AgentId o = 0; o <= n_ + 1; ++o) {
            bool sees = o == public_observer() ? ev.scope.is_public : ev.scope.includes(o);
            if (sees) absorb(facts_[static_cast<std::size_t>(o)], ev.body);
        }
    }

    void ingest_all(const EventLog& log) {
        for (const auto& ev : log.events()) ingest(ev);
    }

    const ObserverFacts& facts(AgentId observer) const {
        return facts_.at(static_cast<std::size_t>(observer));
    }

private:
    static void absorb(ObserverFacts& f, const EventBody& body) {
        if (const auto* e = std::get_if<PatternSeen>(&body)) {
            f.pattern_known[e->voter] = e->pattern;
        } else if (const auto* e = std::get_if<PeekOrientation>(&body)) {
            f.orientation_known[e->voter] = e->orientation;
        } else if (const auto* e = std::get_if<CellStamped>(&body)) {
            f.cell_seen[e->voter] = e->cell;
        } else if (const auto* e = std::get_if<LabelLeak>(&body)) {
            if (e->choice >= 0) {
                auto it = f.direct_choice_mask.find(e->voter);
                std::uint8_t bit = static_cast<std::uint8_t>(1u << e->choice);
                if (it == f.direct_choice_mask.end())
                    f.direct_choice_mask[e->voter] = bit;
                else
                    it->second = static_cast<std::uint8_t>(it->second & bit);
            } else {
                f.orientation_known[e->voter] = e->orientation;
            }
        } else if (const auto* e = std::get_if<DefectSeen>(&body)) {
            if (e->pre_cast)
                f.pre_cast_defects[e->tag] = e->subject;
            else
                f.revealed_defects[e->tag] = e->subject;
        } else if (const auto* e = std::get_if<DescriptionReceived>(&body)) {
            f.descriptions[e->voter] = {e->pattern, e->fidelity};
        } else if (const auto* e = std::get_if<ReceiptRevealed>(&body)) {
            f.receipts.push_back(*e);
        } else if (const auto* e = std::get_if<ObjectionRaised>(&body)) {
            f.objectors.insert(e->voter);
        }
        // CastOrder and the bookkeeping events compile to no constraint.
    }

    int n_;
    int k_;
    std::vector<ObserverFacts> facts_;
};

// Hard constraints over the voter -> revealed-ballot assignment.
struct CompiledConstraints {
    int n = 0;
    int pool = 0;
    std::vector<int> forced;                  // per voter: position or -1
    std::vector<int> forced_owner;            // per position: voter or -1
    std::vector<std::uint8_t> choice_mask;    // per voter: allowed decoded choices
    std::vector<std::uint64_t> forbidden;     // per voter: positions ruled out
    bool trivial = true;
    std::uint8_t full_mask = 0;

    bool allowed(int voter, int position, const std::vector<RevealedBallot>& view) const {
        if (forced[static_cast<std::size_t>(voter)] >= 0 &&
            forced[static_cast<std::size_t>(voter)] != position)
            return false;
        if (forced_owner[static_cast<std::size_t>(position)] >= 0 &&
            forced_owner[static_cast<std::size_t>(position)] != voter)
            return false;
        if (forbidden[static_cast<std::size_t>(voter)] & (1ULL << position)) return false;
        std::uint8_t mask = choice_mask[static_cast<std::size_t>(voter)];
        if (mask != full_mask) {
            const auto& choice = view[static_cast<std::size_t>(position)].choice;
            if (!choice) return false;  // constrained voters hold readable ballots
            if (!(mask & (1u << *choice))) return false;
        }
        return true;
    }
};

inline CompiledConstraints compile_constraints(const KnowledgeState& knowledge, AgentId observer,
                                               const std::vector<RevealedBallot>& pool) {
    const ObserverFacts& f = knowledge.facts(observer);
    const int n = knowledge.voters();
    const int k = knowledge.choices();
    const int m = static_cast<int>(pool.size());
    if (m > 63) throw SimError(Err::BoundTooLarge, "revealed pool too large for masks");

    CompiledConstraints c;
    c.n = n;
    c.pool = m;
    c.full_mask = static_cast<std::uint8_t>((1u << k) - 1);
    c.forced.assign(static_cast<std::size_t>(n), -1);
    c.forced_owner.assign(static_cast<std::size_t>(m), -1);
    c.choice_mask.assign(static_cast<std::size_t>(n), c.full_mask);
    c.forbidden.assign(static_cast<std::size_t>(n), 0);

    auto force = [&](VoterId v, int pos) {
        int& slot = c.forced[static_cast<std::size_t>(v)];
        if (slot >= 0 && slot != pos) {
            // Contradictory sightings; rule every position out so the
            // matching reports infeasibility.
            c.forbidden[static_cast<std::size_t>(v)] = ~0ULL;
        } else {
            slot = pos;
            c.forced_owner[static_cast<std::size_t>(pos)] = v;
        }
        c.trivial = false;
    };

    // A remembered pattern plus the reveal pins the voter's ballot.
    for (const auto& [v, pattern] : f.pattern_known) {
        for (int p = 0; p < m; ++p) {
            if (pool[static_cast<std::size_t>(p)].pattern &&
                *pool[static_cast<std::size_t>(p)].pattern == pattern) {
                force(v, p);
                break;
            }
        }
    }

    // A matching pre-cast and revealed defect sighting pins the ballot too.
    for (const auto& [tag, v] : f.pre_cast_defects) {
        auto it = f.revealed_defects.find(tag);
        if (it != f.revealed_defects.end() && it->second < m) force(v, it->second);
    }

    // A peeked rotation plus the publicly watched stamping cell gives the
    // choice; so does a direct view of a marked ballot.
    for (const auto& [v, r] : f.orientation_known) {
        auto cell_it = f.cell_seen.find(v);
        if (cell_it == f.cell_seen.end()) continue;
        Choice ch = mod_k(cell_it->second - r, k);
        c.choice_mask[static_cast<std::size_t>(v)] &= static_cast<std::uint8_t>(1u << ch);
        c.trivial = false;
    }
    for (const auto& [v, mask] : f.direct_choice_mask) {
        c.choice_mask[static_cast<std::size_t>(v)] &= mask;
        c.trivial = false;
    }

    // Receipt adjudication: the room saw the objector set and the mixed
    // receipt set. When every receipt matches a cast ballot, objectors'
    // ballots collectively occupy exactly those positions. An unmatched
    // receipt means a ballot left the pool, which the matching frame cannot
    // express, so no constraint is added in that case.
    if (!f.receipts.empty() && !f.objectors.empty()) {
        std::uint64_t twins = 0;
        bool all_matched = true;
        for (const auto& r : f.receipts) {
            bool matched = false;
            for (int p = 0; p < m; ++p) {
                const auto& cast = pool[static_cast<std::size_t>(p)];
                if (cast.pattern && cast.choice && r.pattern >= 0 && *cast.pattern == r.pattern &&
                    r.choice >= 0 && *cast.choice == r.choice) {
                    twins |= 1ULL << p;
                    matched = true;
                    break;
                }
            }
            if (!matched) all_matched = false;
        }
        if (all_matched) {
            std::uint64_t pool_mask = m >= 63 ? ~0ULL : ((1ULL << m) - 1);
            for (VoterId v = 0; v < n; ++v) {
                if (f.objectors.count(v))
                    c.forbidden[static_cast<std::size_t>(v)] |= pool_mask & ~twins;
                else
                    c.forbidden[static_cast<std::size_t>(v)] |= twins;
            }
            c.trivial = false;
        }
    }

    return c;
}

// --- Matching ---------------------------------------------------------------

namespace detail {

// Kuhn's augmenting-path matching over the allowed matrix. Voters must all
// be matched; extra pool ballots may stay free.
struct Matcher {
    int n = 0;
    int m = 0;
    std::vector<std::vector<int>> adj;
    std::vector<int> match_of_voter;   // voter -> position
    std::vector<int> owner_of_pos;     // position -> voter
    std::vector<int> visited;
    int stamp = 0;

    bool augment(int voter) {
        visited[static_cast<std::size_t>(voter)] = stamp;
        for (int p : adj[static_cast<std::size_t>(voter)]) {
            int owner = owner_of_pos[static_cast<std::size_t>(p)];
            if (owner == voter) continue;
            if (owner == -1 ||
                (visited[static_cast<std::size_t>(owner)] != stamp && augment(owner))) {
                match_of_voter[static_cast<std::size_t>(voter)] = p;
                owner_of_pos[static_cast<std::size_t>(p)] = voter;
                return true;
            }
        }
        return false;
    }

    bool saturate() {
        match_of_voter.assign(static_cast<std::size_t>(n), -1);
        owner_of_pos.assign(static_cast<std::size_t>(m), -1);
        visited.assign(static_cast<std::size_t>(n), 0);
        stamp = 0;
        for (int v = 0; v < n; ++v) {
            ++stamp;
            if (!augment(v)) return false;
        }
        return true;
    }
};

inline Matcher build_matcher(const CompiledConstraints& c,
                             const std::vector<RevealedBallot>& pool) {
    Matcher matcher;
    matcher.n = c.n;
    matcher.m = c.pool;
    matcher.adj.resize(static_cast<std::size_t>(c.n));
    for (int v = 0; v < c.n; ++v)
        for (int p = 0; p < c.pool; ++p)
            if (c.allowed(v, p, pool)) matcher.adj[static_cast<std::size_t>(v)].push_back(p);
    return matcher;
}

}  // namespace detail

// The set of revealed ballots that could be `voter`'s under everything the
// observer knows: position p is in the set iff a full voter-to-ballot
// assignment consistent with the constraints contains (voter, p).
inline std::vector<int> anonymity_set_from(const CompiledConstraints& c,
                                           const std::vector<RevealedBallot>& pool, VoterId voter) {
    if (c.trivial) {
        std::vector<int> all(static_cast<std::size_t>(c.pool));
        for (int p = 0; p < c.pool; ++p) all[static_cast<std::size_t>(p)] = p;
        return all;
    }
    detail::Matcher matcher = detail::build_matcher(c, pool);
    if (!matcher.saturate())
        throw SimError(Err::InfeasibleConstraints, "no voter-ballot assignment fits the facts");

    std::vector<int> result;
    const int base = matcher.match_of_voter[static_cast<std::size_t>(voter)];
    for (int p : matcher.adj[static_cast<std::size_t>(voter)]) {
        if (p == base) {
            result.push_back(p);
            continue;
        }
        // Pin (voter, p) and see whether the displaced owner can re-match
        // while this edge is held fixed.
        detail::Matcher probe = matcher;
        int displaced = probe.owner_of_pos[static_cast<std::size_t>(p)];
        int old = probe.match_of_voter[static_cast<std::size_t>(voter)];
        probe.owner_of_pos[static_cast<std::size_t>(old)] = -1;
        probe.match_of_voter[static_cast<std::size_t>(voter)] = p;
        probe.owner_of_pos[static_cast<std::size_t>(p)] = voter;
        bool ok = true;
        if (displaced != -1) {
            ++probe.stamp;
            probe.visited[static_cast<std::size_t>(voter)] = probe.stamp;  // hold the pin
            ok = probe.augment(displaced);
        }
        if (ok) result.push_back(p);
    }
    std::sort(result.begin(), result.end());
    return result;
}

inline std::vector<int> anonymity_set(const KnowledgeState& knowledge, AgentId observer,
                                      VoterId voter, const std::vector<RevealedBallot>& pool) {
    return anonymity_set_from(compile_constraints(knowledge, observer, pool), pool, voter);
}

// Projection of the anonymity set onto decoded choices. Privacy against the
// observer is breached when this collapses to one choice the pool does not
// share unanimously.
inline std::set<Choice> vote_disclosure(const KnowledgeState& knowledge, AgentId observer,
                                        VoterId voter, const std::vector<RevealedBallot>& pool) {
    std::set<Choice> choices;
    for (int p : anonymity_set(knowledge, observer, voter, pool)) {
        const auto& choice = pool[static_cast<std::size_t>(p)].choice;
        if (choice) choices.insert(*choice);
    }
    return choices;
}

// Did the adversary catch the coerced voter's claim? Two tells: a pre-reveal
// description that uniquely identified the true pattern, or a claimed ballot
// the adversary can rule out by matching.
inline bool coercion_catch(const KnowledgeState& knowledge, AgentId adversary, VoterId voter,
                           int claimed_position, const std::vector<RevealedBallot>& pool,
                           Rng& rng) {
    const ObserverFacts& f = knowledge.facts(adversary);
    auto desc = f.descriptions.find(voter);
    if (desc != f.descriptions.end() && rng.bernoulli(desc->second.second)) {
        const auto& claimed = pool[static_cast<std::size_t>(claimed_position)].pattern;
        if (!claimed || *claimed != desc->second.first) return true;
    }
    auto set = anonymity_set(knowledge, adversary, voter, pool);
    return !std::binary_search(set.begin(), set.end(), claimed_position);
}

}  // namespace bvp
