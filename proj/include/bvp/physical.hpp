#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "bvp/core.hpp"
#include "bvp/events.hpp"
#include "bvp/rng.hpp"

namespace bvp {

enum class Layout { BinaryTwoColumn, KGon, ParallelSplit };

inline const char* layout_name(Layout l) {
    switch (l) {
        case Layout::BinaryTwoColumn: return "binary-two-column";
        case Layout::KGon: return "k-gon";
        case Layout::ParallelSplit: return "parallel-split";
    }
    return "?";
}

struct BallotDesign {
    int arity = 2;  // k, the number of choices; 2 <= k <= 6
    Layout layout = Layout::BinaryTwoColumn;
    double nominal_weight = 4.0;  // grams

    int columns() const { return layout == Layout::ParallelSplit ? 2 : 1; }
};

inline void validate_design(const BallotDesign& d) {
    if (d.arity < kMinChoices || d.arity > kMaxChoices)
        throw SimError(Err::InvalidConfig, "ballot arity must be in [2,6]");
    if (d.nominal_weight <= 0.0)
        throw SimError(Err::InvalidConfig, "nominal weight must be positive");
    if (d.layout == Layout::BinaryTwoColumn && d.arity != 2)
        throw SimError(Err::InvalidConfig, "binary layout requires arity 2");
}

enum class Ink { Visible, Invisible, Revealed };

struct Mark {
    Cell cell = 0;    // row in the voter's holding frame
    int column = 0;   // 0 except on parallel-split ballots
    Ink ink = Ink::Invisible;
    std::optional<PatternId> pattern;  // nullopt: the common black disk

    bool is_secret() const { return pattern.has_value(); }
};

struct Defect {
    DefectKind kind = DefectKind::Pinhole;
    int position = 0;  // cell or edge index
    AgentId introduced_by = -1;
    int tag = -1;  // trial-unique identity; lets sightings be matched up
};

struct VisualSecret {
    PatternId pattern_id = 0;
    double p_desc = 0.05;  // chance the holder can describe it uniquely
    double p_conf = 0.01;  // chance a verifier confuses it with another pattern
};

struct Stamp {
    std::optional<VisualSecret> secret;  // nullopt: plain common-disk stamp
    bool self_inking = true;
    bool common_mark = false;  // visible-ink disk portion (feint mitigation)
    int charges = 3;
};

// Physical ballot. `serial` and `twin` are simulation bookkeeping and never
// visible to agents; everything else is the paper object.
struct Ballot {
    Serial serial = -1;
    BallotDesign design;
    int orientation = 0;  // rotation index in Z_k
    bool folded = false;
    std::vector<Mark> marks;
    std::vector<Defect> defects;
    double weight = 4.0;
    std::optional<Serial> twin;  // other half of a cut parallel ballot
    int half_column = -1;        // which column this half carries, -1 if uncut
};

// What an agent looking at a ballot can see. Invisible marks and (outside an
// inspection) defects are excluded; choice labels exist only when unfolded.
struct BallotView {
    bool folded = false;
    bool labels_visible = false;
    std::vector<Mark> visible_marks;
    std::vector<Defect> visible_defects;
};

inline BallotView observer_view(const Ballot& b, bool inspection = false) {
    BallotView v;
    v.folded = b.folded;
    v.labels_visible = !b.folded;
    for (const auto& m : b.marks)
        if (m.ink != Ink::Invisible) v.visible_marks.push_back(m);
    if (inspection) v.visible_defects = b.defects;
    return v;
}

// --- Rotation group -------------------------------------------------------

// Holding-frame cell a voter must stamp so the mark lands on `choice`.
inline Cell cell_for_choice(const BallotDesign& d, int orientation, Choice choice) {
    if (choice < 0 || choice >= d.arity)
        throw SimError(Err::ChoiceOutOfRange, "choice " + std::to_string(choice));
    return mod_k(choice + orientation, d.arity);
}

// Inverse: the choice a mark at `cell` decodes to once labels are readable.
inline Choice choice_for_cell(const BallotDesign& d, int orientation, Cell cell) {
    if (cell < 0 || cell >= d.arity)
        throw SimError(Err::CellOutOfRange, "cell " + std::to_string(cell));
    return mod_k(cell - orientation, d.arity);
}

// --- Manipulations --------------------------------------------------------

inline Ballot fold(const Ballot& b) {
    if (b.folded) throw SimError(Err::AlreadyFolded, "ballot already folded");
    Ballot out = b;
    out.folded = true;
    return out;
}

struct RotationOutcome {
    Ballot ballot;
    bool orientation_observable = false;  // rotation done in the open
    bool label_leak = false;              // unfolded ballot flashed its labels
};

// Folds are permanent; rotating an unfolded ballot in lenient mode goes
// through but discloses the labels. Marks freeze the orientation.
inline RotationOutcome rotate(const Ballot& b, int r, bool concealed, bool strict = true) {
    if (r < 0 || r >= b.design.arity)
        throw SimError(Err::ChoiceOutOfRange, "rotation " + std::to_string(r));
    if (!b.marks.empty())
        throw SimError(Err::WrongPhase, "ballot already imprinted; marks freeze orientation");
    RotationOutcome out;
    if (!b.folded) {
        if (strict) throw SimError(Err::NotFolded, "rotate requires a folded ballot");
        out.label_leak = true;
    }
    out.ballot = b;
    out.ballot.orientation = mod_k(b.orientation + r, b.design.arity);
    out.orientation_observable = !concealed;
    return out;
}

// Stamp a cell. A stamp with a visible common-disk portion lands that first;
// a feinted imprint presses nothing through, so only honest use spends a
// charge and leaves the invisible pattern.
inline Ballot imprint(const Ballot& b, Cell cell, int column, Stamp& stamp, bool feint = false) {
    if (!b.folded) throw SimError(Err::NotFolded, "imprint requires a folded ballot");
    if (cell < 0 || cell >= b.design.arity)
        throw SimError(Err::CellOutOfRange, "cell " + std::to_string(cell));
    if (feint) return b;
    if (stamp.charges <= 0) throw SimError(Err::DryStamp, "stamp has no charges left");
    Ballot out = b;
    if (stamp.common_mark) out.marks.push_back(Mark{cell, column, Ink::Visible, std::nullopt});
    if (stamp.secret)
        out.marks.push_back(Mark{cell, column, Ink::Invisible, stamp.secret->pattern_id});
    --stamp.charges;
    return out;
}

// Rows carrying a visible mark in one column - what people in the room can
// check before the ballot is cut.
inline std::set<Cell> visible_rows(const Ballot& b, int column) {
    std::set<Cell> rows;
    for (const auto& m : b.marks)
        if (m.column == column && m.ink != Ink::Invisible) rows.insert(m.cell);
    return rows;
}

// Cut a parallel-split ballot along its column line. Halves share the
// orientation and choice row; callers supply the fresh serials.
inline std::pair<Ballot, Ballot> cut_parallel(const Ballot& b, Serial left_serial,
                                              Serial right_serial) {
    if (b.design.layout != Layout::ParallelSplit)
        throw SimError(Err::NotParallelDesign, "cut requires a parallel-split ballot");
    if (visible_rows(b, 0) != visible_rows(b, 1))
        throw SimError(Err::ColumnsMismatch, "columns carry different marked rows");
    if (visible_rows(b, 0).empty())
        throw SimError(Err::ColumnsMismatch, "both columns must carry marks before cutting");
    Ballot left = b;
    Ballot right = b;
    left.serial = left_serial;
    right.serial = right_serial;
    left.twin = right_serial;
    right.twin = left_serial;
    left.half_column = 0;
    right.half_column = 1;
    left.weight = b.weight / 2.0;
    right.weight = b.weight / 2.0;
    left.marks.clear();
    right.marks.clear();
    for (const auto& m : b.marks) (m.column == 0 ? left : right).marks.push_back(m);
    auto split_defects = [&](Ballot& half, int column) {
        half.defects.clear();
        for (const auto& d : b.defects)
            if (d.position % 2 == column) half.defects.push_back(d);
    };
    split_defects(left, 0);
    split_defects(right, 1);
    return {std::move(left), std::move(right)};
}

// --- Bag ------------------------------------------------------------------

template <typename T>
class Bag {
public:
    Bag() = default;
    explicit Bag(std::vector<T> items) : items_(std::move(items)) {}

    void put(T item) { items_.push_back(std::move(item)); }

    T draw(Rng& rng) {
        if (items_.empty()) throw SimError(Err::EmptyBag, "draw from empty bag");
        std::size_t i = static_cast<std::size_t>(rng.below(items_.size()));
        T out = std::move(items_[i]);
        items_[i] = std::move(items_.back());
        items_.pop_back();
        return out;
    }

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    const std::vector<T>& items() const { return items_; }

private:
    std::vector<T> items_;
};

// --- Ballot box on a scale ------------------------------------------------

struct BallotBoxState {
    std::vector<Serial> contents;
    bool on_scale = true;
    std::vector<double> scale_readings;  // cumulative grams after each cast
    double scale_tolerance = 1.0;

    double current_weight() const {
        return scale_readings.empty() ? 0.0 : scale_readings.back();
    }
};

// One casting motion. An adversary dropping two ballots at once is a single
// motion with two payloads; the scale sees the combined delta.
inline std::optional<MultipleCastDetected> cast_into(BallotBoxState& box,
                                                     const std::vector<const Ballot*>& payload,
                                                     VoterId by, double expected_unit_grams) {
    double delta = 0.0;
    for (const Ballot* b : payload) {
        box.contents.push_back(b->serial);
        delta += b->weight;
    }
    if (!box.on_scale) return std::nullopt;
    box.scale_readings.push_back(box.current_weight() + delta);
    if (delta - expected_unit_grams > box.scale_tolerance ||
        expected_unit_grams - delta > box.scale_tolerance) {
        return MultipleCastDetected{by, delta};
    }
    return std::nullopt;
}

inline std::optional<MultipleCastDetected> cast_into(BallotBoxState& box, const Ballot& ballot,
                                                     VoterId by, double expected_unit_grams) {
    return cast_into(box, std::vector<const Ballot*>{&ballot}, by, expected_unit_grams);
}

// --- Revealing ink --------------------------------------------------------

inline void reveal_ink(std::vector<Ballot>& ballots, Phase phase) {
    if (phase != Phase::CountVerify && phase != Phase::Adjudicate)
        throw SimError(Err::WrongPhase, "revealing ink is sprayed during counting");
    for (auto& b : ballots)
        for (auto& m : b.marks)
            if (m.ink == Ink::Invisible) m.ink = Ink::Revealed;
}

// --- Reading a revealed ballot --------------------------------------------

inline std::optional<PatternId> pattern_of(const Ballot& b) {
    for (const auto& m : b.marks)
        if (m.is_secret()) return m.pattern;
    return std::nullopt;
}

// The choice a revealed ballot encodes: exactly one distinct row among its
// revealed secret marks. Anything else is spoiled (nullopt).
inline std::optional<Choice> decode(const Ballot& b) {
    std::set<Cell> rows;
    for (const auto& m : b.marks)
        if (m.is_secret() && m.ink == Ink::Revealed) rows.insert(m.cell);
    if (rows.size() != 1) return std::nullopt;
    return choice_for_cell(b.design, b.orientation, *rows.begin());
}

// Plain-ballot variant for the baseline protocol: any single marked row
// counts, visible ink included, no rotation.
inline std::optional<Choice> decode_plain(const Ballot& b) {
    std::set<Cell> rows;
    for (const auto& m : b.marks) rows.insert(m.cell);
    if (rows.size() != 1) return std::nullopt;
    return choice_for_cell(b.design, 0, *rows.begin());
}

// What everyone can read off a ballot lying unfolded in the revealed pool.
struct RevealedBallot {
    Serial serial = -1;
    std::optional<PatternId> pattern;
    std::optional<Choice> choice;  // nullopt: spoiled
    std::optional<Serial> twin;
};

inline RevealedBallot revealed_info(const Ballot& b, bool plain = false) {
    return RevealedBallot{b.serial, pattern_of(b), plain ? decode_plain(b) : decode(b), b.twin};
}

}  // namespace bvp
