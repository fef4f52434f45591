#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bvp {

// Agent identifiers. Voters are 0..n-1, the election authority is id n.
using AgentId = int;
using VoterId = int;
// Simulation-only ballot identity: index into the trial's ballot store.
// Never visible to agents.
using Serial = int;
using PatternId = int;
using Choice = int;
using Cell = int;

inline constexpr int kMinVoters = 3;
inline constexpr int kMaxVoters = 40;
inline constexpr int kMinChoices = 2;
inline constexpr int kMaxChoices = 6;

enum class Phase { Setup, MarkCast, CountVerify, Adjudicate, Done };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Setup: return "Setup";
        case Phase::MarkCast: return "MarkCast";
        case Phase::CountVerify: return "CountVerify";
        case Phase::Adjudicate: return "Adjudicate";
        case Phase::Done: return "Done";
    }
    return "?";
}

enum class Err {
    AlreadyFolded,
    NotFolded,
    ChoiceOutOfRange,
    CellOutOfRange,
    DryStamp,
    NotParallelDesign,
    ColumnsMismatch,
    EmptyBag,
    WrongPhase,
    InvalidConfig,
    EmptyTally,
    VariantInactive,
    InsufficientBallots,
    StrategyPreconditionFailed,
    BoundTooLarge,
    MismatchedScenarios,
    UnsupportedFormat,
    ParseError,
    ValidationError,
    InfeasibleConstraints,
};

inline const char* err_name(Err e) {
    switch (e) {
        case Err::AlreadyFolded: return "AlreadyFolded";
        case Err::NotFolded: return "NotFolded";
        case Err::ChoiceOutOfRange: return "ChoiceOutOfRange";
        case Err::CellOutOfRange: return "CellOutOfRange";
        case Err::DryStamp: return "DryStamp";
        case Err::NotParallelDesign: return "NotParallelDesign";
        case Err::ColumnsMismatch: return "ColumnsMismatch";
        case Err::EmptyBag: return "EmptyBag";
        case Err::WrongPhase: return "WrongPhase";
        case Err::InvalidConfig: return "InvalidConfig";
        case Err::EmptyTally: return "EmptyTally";
        case Err::VariantInactive: return "VariantInactive";
        case Err::InsufficientBallots: return "InsufficientBallots";
        case Err::StrategyPreconditionFailed: return "StrategyPreconditionFailed";
        case Err::BoundTooLarge: return "BoundTooLarge";
        case Err::MismatchedScenarios: return "MismatchedScenarios";
        case Err::UnsupportedFormat: return "UnsupportedFormat";
        case Err::ParseError: return "ParseError";
        case Err::ValidationError: return "ValidationError";
        case Err::InfeasibleConstraints: return "InfeasibleConstraints";
    }
    return "?";
}

class SimError : public std::runtime_error {
public:
    SimError(Err code, const std::string& what)
        : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

enum class StrategyKind {
    ChainVoting,
    DoubleCast,
    EAReplacement,
    IdentifyingMark,
    CorruptEAPremark,
    FalseObjection,
    CoercionDemand,
    FeintStamp,
};

inline const char* strategy_name(StrategyKind s) {
    switch (s) {
        case StrategyKind::ChainVoting: return "chain_voting";
        case StrategyKind::DoubleCast: return "double_cast";
        case StrategyKind::EAReplacement: return "ea_replacement";
        case StrategyKind::IdentifyingMark: return "identifying_mark";
        case StrategyKind::CorruptEAPremark: return "corrupt_ea_premark";
        case StrategyKind::FalseObjection: return "false_objection";
        case StrategyKind::CoercionDemand: return "coercion_demand";
        case StrategyKind::FeintStamp: return "feint_stamp";
    }
    return "?";
}

inline constexpr int kStrategyKindCount = 8;

enum class DefectKind { Pinhole, Smudge, Crease, Tear, Premark };

inline const char* defect_name(DefectKind d) {
    switch (d) {
        case DefectKind::Pinhole: return "pinhole";
        case DefectKind::Smudge: return "smudge";
        case DefectKind::Crease: return "crease";
        case DefectKind::Tear: return "tear";
        case DefectKind::Premark: return "premark";
    }
    return "?";
}

enum class ObjectionKind { PatternMissing, ChoiceMismatch };

inline const char* objection_name(ObjectionKind o) {
    switch (o) {
        case ObjectionKind::PatternMissing: return "pattern_missing";
        case ObjectionKind::ChoiceMismatch: return "choice_mismatch";
    }
    return "?";
}

inline int mod_k(int value, int k) {
    int m = value % k;
    return m < 0 ? m + k : m;
}

}  // namespace bvp
