#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "bvp/core.hpp"

namespace bvp {

// Who can see an event. Scopes never widen after emission.
struct Scope {
    bool is_public = false;
    std::vector<AgentId> members;  // sorted, ignored when is_public

    static Scope everyone() { return Scope{true, {}}; }

    static Scope only(std::initializer_list<AgentId> ids) {
        Scope s;
        s.members.assign(ids);
        std::sort(s.members.begin(), s.members.end());
        return s;
    }

    static Scope only(std::vector<AgentId> ids) {
        Scope s;
        s.members = std::move(ids);
        std::sort(s.members.begin(), s.members.end());
        return s;
    }

    bool includes(AgentId id) const {
        return is_public || std::binary_search(members.begin(), members.end(), id);
    }
};

// --- Event payloads ------------------------------------------------------

// Voter cast the ballot at this position in this box's intake order.
struct CastOrder {
    VoterId voter;
    int position;
    int box;
};

// An observer saw the final rotation of a voter's folded ballot.
struct PeekOrientation {
    VoterId voter;
    int orientation;
};

// An observer learned which visual-secret pattern a voter holds.
struct PatternSeen {
    VoterId voter;
    PatternId pattern;
};

// The position a voter stamped, in the voter's holding frame. Stamping is
// done in plain sight, but the holding frame is lost once the ballot enters
// the box, so this links to a choice only when combined with the rotation.
struct CellStamped {
    VoterId voter;
    Cell cell;
};

// A uniquely identifying defect was sighted either on a voter's ballot
// before casting or on a revealed ballot. Matching tags link the two.
struct DefectSeen {
    bool pre_cast;      // true: subject is a voter; false: subject is a revealed position
    int subject;        // voter id or revealed-pool position
    DefectKind kind;
    int tag;            // trial-unique defect identity
};

// A coerced voter described their visual secret to the adversary before the
// reveal. fidelity is the chance the description uniquely identifies it.
struct DescriptionReceived {
    VoterId voter;
    PatternId pattern;
    double fidelity;
};

// An objector's receipt half was revealed during adjudication. Receipts are
// mixed before revealing, so public knowledge binds the receipt set to the
// objector set, not individual receipts to individual objectors.
struct ReceiptRevealed {
    VoterId voter;  // ground-truth owner; ingestion must treat receipts group-wise
    PatternId pattern;
    Choice choice;
};

// Full view of a voter's ballot contents (camera, unfolded flash, or open
// marking in the baseline protocol).
struct LabelLeak {
    VoterId voter;
    Choice choice;       // -1 when the ballot was not yet marked
    int orientation;
};

// An in-room observer caught an adversary strategy in the act.
struct Detection {
    StrategyKind strategy;
    AgentId actor;
};

// Scale reading jumped by more than one ballot weight on a single cast.
struct MultipleCastDetected {
    VoterId voter;
    double delta_grams;
};

// Public bookkeeping events.
struct StampsInspected {
    int count;  // stamps shown to carry no external identifiers
};

struct AuditInspected {
    int sampled;
    int defects_found;
};

struct ExtrasVoided {
    std::vector<PatternId> patterns;
};

struct CountsPublished {
    std::vector<int> counts;
    int spoiled;
    int ballot_count;
};

struct BallotCountMismatch {
    int counted;
    int cast_events;
};

struct BoxTallyMismatch {
    int box_a;
    int box_b;
};

struct ObjectionRaised {
    VoterId voter;
    ObjectionKind claim;
};

using EventBody =
    std::variant<CastOrder, PeekOrientation, PatternSeen, CellStamped, DefectSeen,
                 DescriptionReceived, ReceiptRevealed, LabelLeak, Detection,
                 MultipleCastDetected, StampsInspected, AuditInspected, ExtrasVoided,
                 CountsPublished, BallotCountMismatch, BoxTallyMismatch, ObjectionRaised>;

struct ObservationEvent {
    int time = 0;  // sequence index within the trial
    Scope scope;
    EventBody body;
};

// Append-only event log. Record order is the emission order; the text form
// below is the stable format golden-file tests pin.
class EventLog {
public:
    void emit(Scope scope, EventBody body) {
        ObservationEvent ev;
        ev.time = static_cast<int>(events_.size());
        ev.scope = std::move(scope);
        ev.body = std::move(body);
        events_.push_back(std::move(ev));
    }

    const std::vector<ObservationEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }

    template <typename T>
    int count_of() const {
        int n = 0;
        for (const auto& ev : events_)
            if (std::holds_alternative<T>(ev.body)) ++n;
        return n;
    }

    template <typename T>
    const T* first_of() const {
        for (const auto& ev : events_)
            if (const T* body = std::get_if<T>(&ev.body)) return body;
        return nullptr;
    }

private:
    std::vector<ObservationEvent> events_;
};

// --- Stable text serialization -------------------------------------------
// One line per event: "<time> <scope> <kind> k=v ...", fields in the fixed
// order written here.

namespace detail {

inline std::string scope_text(const Scope& s) {
    if (s.is_public) return "public";
    std::string out = "agents[";
    for (std::size_t i = 0; i < s.members.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(s.members[i]);
    }
    out += ']';
    return out;
}

inline std::string grams_text(double g) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", g);
    return buf;
}

struct EventText {
    std::string operator()(const CastOrder& e) const {
        return "cast_order voter=" + std::to_string(e.voter) + " position=" +
               std::to_string(e.position) + " box=" + std::to_string(e.box);
    }
    std::string operator()(const PeekOrientation& e) const {
        return "peek_orientation voter=" + std::to_string(e.voter) +
               " orientation=" + std::to_string(e.orientation);
    }
    std::string operator()(const PatternSeen& e) const {
        return "pattern_seen voter=" + std::to_string(e.voter) +
               " pattern=" + std::to_string(e.pattern);
    }
    std::string operator()(const CellStamped& e) const {
        return "cell_stamped voter=" + std::to_string(e.voter) +
               " cell=" + std::to_string(e.cell);
    }
    std::string operator()(const DefectSeen& e) const {
        return std::string("defect_seen stage=") + (e.pre_cast ? "pre_cast" : "revealed") +
               " subject=" + std::to_string(e.subject) + " kind=" + defect_name(e.kind) +
               " tag=" + std::to_string(e.tag);
    }
    std::string operator()(const DescriptionReceived& e) const {
        return "description_received voter=" + std::to_string(e.voter) +
               " pattern=" + std::to_string(e.pattern) + " fidelity=" + grams_text(e.fidelity);
    }
    std::string operator()(const ReceiptRevealed& e) const {
        return "receipt_revealed voter=" + std::to_string(e.voter) +
               " pattern=" + std::to_string(e.pattern) + " choice=" + std::to_string(e.choice);
    }
    std::string operator()(const LabelLeak& e) const {
        return "label_leak voter=" + std::to_string(e.voter) +
               " choice=" + std::to_string(e.choice) +
               " orientation=" + std::to_string(e.orientation);
    }
    std::string operator()(const Detection& e) const {
        return std::string("detection strategy=") + strategy_name(e.strategy) +
               " actor=" + std::to_string(e.actor);
    }
    std::string operator()(const MultipleCastDetected& e) const {
        return "multiple_cast_detected voter=" + std::to_string(e.voter) +
               " delta=" + grams_text(e.delta_grams);
    }
    std::string operator()(const StampsInspected& e) const {
        return "stamps_inspected count=" + std::to_string(e.count);
    }
    std::string operator()(const AuditInspected& e) const {
        return "audit_inspected sampled=" + std::to_string(e.sampled) +
               " defects_found=" + std::to_string(e.defects_found);
    }
    std::string operator()(const ExtrasVoided& e) const {
        std::string out = "extras_voided patterns=[";
        for (std::size_t i = 0; i < e.patterns.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(e.patterns[i]);
        }
        return out + "]";
    }
    std::string operator()(const CountsPublished& e) const {
        std::string out = "counts_published counts=[";
        for (std::size_t i = 0; i < e.counts.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(e.counts[i]);
        }
        out += "] spoiled=" + std::to_string(e.spoiled) +
               " ballot_count=" + std::to_string(e.ballot_count);
        return out;
    }
    std::string operator()(const BallotCountMismatch& e) const {
        return "ballot_count_mismatch counted=" + std::to_string(e.counted) +
               " cast_events=" + std::to_string(e.cast_events);
    }
    std::string operator()(const BoxTallyMismatch& e) const {
        return "box_tally_mismatch box_a=" + std::to_string(e.box_a) +
               " box_b=" + std::to_string(e.box_b);
    }
    std::string operator()(const ObjectionRaised& e) const {
        return std::string("objection_raised voter=") + std::to_string(e.voter) +
               " claim=" + objection_name(e.claim);
    }
};

}  // namespace detail

inline std::string event_line(const ObservationEvent& ev) {
    return std::to_string(ev.time) + " " + detail::scope_text(ev.scope) + " " +
           std::visit(detail::EventText{}, ev.body);
}

inline std::string log_text(const EventLog& log) {
    std::string out;
    for (const auto& ev : log.events()) {
        out += event_line(ev);
        out += '\n';
    }
    return out;
}

}  // namespace bvp
