#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bvp/analysis.hpp"
#include "bvp/core.hpp"

#include "json.hpp"

namespace bvp {

inline constexpr const char* kScenarioSchemaId = "bvp-scenario/1";

// Field tables drive both parsing (unknown keys rejected) and the published
// schema document, so the two cannot drift apart.
struct FieldSpec {
    const char* name;
    const char* type;  // "int" | "number" | "bool" | "string" | "list" | "object"
    const char* doc;
};

inline const std::vector<FieldSpec>& election_fields() {
    static const std::vector<FieldSpec> fields = {
        {"n", "int", "voter count, 3..40"},
        {"k", "int", "choice count, 2..6"},
        {"extras", "int", "spare ballots and stamps, >= 0"},
        {"variants", "list",
         "any of: voting_station, under_table, parallel_tally, receipt_ballots"},
    };
    return fields;
}

inline const std::vector<FieldSpec>& physical_fields() {
    static const std::vector<FieldSpec> fields = {
        {"nominal_weight_g", "number", "ballot weight in grams (default 4.0)"},
        {"weight_jitter_g", "number", "uniform per-ballot jitter bound (default 0.05)"},
        {"scale_tolerance_g", "number", "scale alarm threshold (default 1.0)"},
        {"pattern_space", "int", "visual-secret pattern space size (default 1000)"},
        {"p_desc", "number", "chance a secret can be described uniquely (default 0.05)"},
        {"p_conf", "number", "chance of confusing a secret at verification (default 0.01)"},
        {"p_peek", "number", "baseline-protocol neighbour peek rate (default 0)"},
        {"p_orientation_leak", "number", "cloth-slip rate during rotation (default 0)"},
        {"p_label_leak", "number", "hidden-camera full-view rate (default 0)"},
        {"polarising_filters", "bool", "defeat cameras: label leaks never fire (default false)"},
        {"stamp_charges", "int", "imprints per stamp (default 3)"},
        {"ballot_bag_draw", "bool", "voters draw blank ballots from a bag (default false)"},
        {"audit_sample", "int", "cut-and-choose sample size, 0 skips (default 0)"},
    };
    return fields;
}

inline const std::vector<FieldSpec>& detection_fields() {
    static const std::vector<FieldSpec> fields = {
        {"chain_voting", "number", "chain-voting detection rate (default 0.7)"},
        {"under_table_chain_factor", "number", "multiplier under the table variant (default 0.5)"},
        {"ea_replacement_plain_sight", "number", "EA swap detection with plain-sight custody (default 0.5)"},
        {"ea_replacement_otherwise", "number", "EA swap detection otherwise (default 0.1)"},
        {"feint_mitigated", "number", "feint detection with the visible disk (default 0.6)"},
        {"feint_unmitigated", "number", "feint detection without it (default 0.1)"},
        {"identifying_mark", "number", "self-defacing detection rate (default 0.3)"},
    };
    return fields;
}

inline const std::vector<FieldSpec>& voter_fields() {
    static const std::vector<FieldSpec> fields = {
        {"role", "string", "honest | coerced | bribed | malicious (default honest)"},
        {"preference", "int", "the voter's true choice"},
        {"seat", "int", "seat index around the table (default: roster order)"},
        {"demand", "int", "coerced/bribed: the choice the adversary wants"},
        {"adversary", "int", "coerced/bribed: agent id applying the pressure"},
        {"p_forget", "number", "recall failure at verification (default 0)"},
        {"p_orient", "number", "orientation-tracking error while marking (default 0)"},
        {"p_desc", "number", "description-channel fidelity (default physical.p_desc)"},
    };
    return fields;
}

inline const std::vector<FieldSpec>& strategy_fields() {
    static const std::vector<FieldSpec> fields = {
        {"type", "string",
         "chain_voting | double_cast | ea_replacement | identifying_mark | corrupt_ea_premark | "
         "false_objection | coercion_demand | feint_stamp"},
        {"actor", "int", "voter id, or n for the election authority"},
        {"target", "int", "chain-voting or coercion target"},
        {"demand", "int", "demanded or substituted choice"},
        {"victim", "int", "ea_replacement: whose cast ballot to swap (default: random)"},
        {"defect", "string", "pinhole | smudge | crease | tear | premark (default pinhole)"},
        {"count", "int", "corrupt_ea_premark: how many sheets (default 1)"},
        {"p_detect", "number", "override the detection-model default"},
    };
    return fields;
}

inline const std::vector<FieldSpec>& run_fields() {
    static const std::vector<FieldSpec> fields = {
        {"protocol", "string", "bvp1 | spb (default bvp1)"},
        {"trials", "int", "Monte Carlo trial count (default 1000)"},
        {"seed", "int", "master seed (default 0)"},
        {"sweep", "list", "axes: {path, values}; points are the cartesian product"},
    };
    return fields;
}

// The published scenario-file schema, as a structured document.
inline std::string scenario_schema_text() {
    nlohmann::ordered_json doc;
    doc["schema"] = kScenarioSchemaId;
    doc["description"] =
        "Scenario file for the boardroom voting simulator. Sections: election, physical, "
        "detection, roster, strategies, run. Unknown keys are rejected; omitted fields take "
        "the documented defaults and are echoed as provenance notes.";
    auto section = [&](const char* name, const std::vector<FieldSpec>& fields) {
        nlohmann::ordered_json s;
        for (const auto& f : fields) {
            nlohmann::ordered_json entry;
            entry["type"] = f.type;
            entry["doc"] = f.doc;
            s[f.name] = entry;
        }
        doc["sections"][name] = s;
    };
    section("election", election_fields());
    section("physical", physical_fields());
    section("detection", detection_fields());
    section("run", run_fields());
    nlohmann::ordered_json roster;
    roster["type"] = "list";
    roster["doc"] = "one entry per voter; omit the section for an all-honest roster";
    for (const auto& f : voter_fields()) {
        nlohmann::ordered_json entry;
        entry["type"] = f.type;
        entry["doc"] = f.doc;
        roster["item_fields"][f.name] = entry;
    }
    doc["sections"]["roster"] = roster;
    nlohmann::ordered_json strategies;
    strategies["type"] = "list";
    strategies["doc"] = "adversary strategy catalog entries";
    for (const auto& f : strategy_fields()) {
        nlohmann::ordered_json entry;
        entry["type"] = f.type;
        entry["doc"] = f.doc;
        strategies["item_fields"][f.name] = entry;
    }
    doc["sections"]["strategies"] = strategies;
    return doc.dump(2) + "\n";
}

struct ParsedScenario {
    Scenario scenario;
    std::vector<std::string> notes;  // provenance of every applied default
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::vector<FieldSpec>& fields,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& f : fields)
            if (it.key() == f.name) known = true;
        if (!known)
            throw SimError(Err::ValidationError, where + ": unknown key '" + it.key() + "'");
    }
}

inline double require_probability(const nlohmann::json& obj, const char* key, double fallback,
                                  const std::string& where, std::vector<std::string>* notes) {
    if (!obj.contains(key)) {
        if (notes)
            notes->push_back(where + "." + key + ": default " + std::to_string(fallback));
        return fallback;
    }
    double v = obj.at(key).get<double>();
    if (v < 0.0 || v > 1.0)
        throw SimError(Err::ValidationError, where + "." + key + ": must be in [0,1]");
    return v;
}

template <typename T>
inline T value_or_note(const nlohmann::json& obj, const char* key, T fallback,
                       const std::string& where, std::vector<std::string>* notes) {
    if (!obj.contains(key)) {
        if (notes)
            notes->push_back(where + "." + key + ": default " + std::to_string(fallback));
        return fallback;
    }
    return obj.at(key).get<T>();
}

inline StrategyKind strategy_kind_from(const std::string& name) {
    for (int i = 0; i < kStrategyKindCount; ++i) {
        auto kind = static_cast<StrategyKind>(i);
        if (name == strategy_name(kind)) return kind;
    }
    throw SimError(Err::ValidationError, "unknown strategy type '" + name + "'");
}

inline DefectKind defect_kind_from(const std::string& name) {
    for (DefectKind k : {DefectKind::Pinhole, DefectKind::Smudge, DefectKind::Crease,
                         DefectKind::Tear, DefectKind::Premark})
        if (name == defect_name(k)) return k;
    throw SimError(Err::ValidationError, "unknown defect kind '" + name + "'");
}

inline RoleKind role_from(const std::string& name) {
    for (RoleKind r :
         {RoleKind::Honest, RoleKind::Coerced, RoleKind::Bribed, RoleKind::Malicious})
        if (name == role_name(r)) return r;
    throw SimError(Err::ValidationError, "unknown role '" + name + "'");
}

}  // namespace detail

inline ParsedScenario parse_scenario(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw SimError(Err::ParseError, e.what());
    }
    if (!doc.is_object()) throw SimError(Err::ParseError, "scenario must be an object");

    ParsedScenario out;
    Scenario& s = out.scenario;
    auto* notes = &out.notes;

    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            static const std::vector<std::string> sections = {
                "schema", "election", "physical", "detection", "roster", "strategies", "run"};
            if (std::find(sections.begin(), sections.end(), it.key()) == sections.end())
                throw SimError(Err::ValidationError, "unknown section '" + it.key() + "'");
        }
        if (!doc.contains("schema") || doc.at("schema").get<std::string>() != kScenarioSchemaId)
            throw SimError(Err::ValidationError,
                           std::string("schema must be '") + kScenarioSchemaId + "'");

        // election
        if (!doc.contains("election"))
            throw SimError(Err::ValidationError, "missing 'election' section");
        const auto& election = doc.at("election");
        detail::reject_unknown_keys(election, election_fields(), "election");
        s.config.n = election.at("n").get<int>();
        s.config.k = election.at("k").get<int>();
        if (s.config.k < kMinChoices || s.config.k > kMaxChoices)
            throw SimError(Err::ValidationError,
                           "election.k: the k-ary foldable ballot needs 2 <= k <= 6");
        if (s.config.n < kMinVoters || s.config.n > kMaxVoters)
            throw SimError(Err::ValidationError, "election.n: must be in [3,40]");
        s.config.extras =
            detail::value_or_note<int>(election, "extras", 2, "election", notes);
        if (election.contains("variants")) {
            for (const auto& v : election.at("variants")) {
                std::string name = v.get<std::string>();
                if (name == "voting_station") s.config.variants.voting_station = true;
                else if (name == "under_table") s.config.variants.under_table = true;
                else if (name == "parallel_tally") s.config.variants.parallel_tally = true;
                else if (name == "receipt_ballots") s.config.variants.receipt_ballots = true;
                else throw SimError(Err::ValidationError, "unknown variant '" + name + "'");
            }
        }

        // physical
        auto& p = s.config.physical;
        nlohmann::json physical = doc.contains("physical") ? doc.at("physical")
                                                           : nlohmann::json::object();
        if (!doc.contains("physical")) notes->push_back("physical: all defaults");
        detail::reject_unknown_keys(physical, physical_fields(), "physical");
        p.nominal_weight_g =
            detail::value_or_note<double>(physical, "nominal_weight_g", 4.0, "physical", notes);
        p.weight_jitter_g =
            detail::value_or_note<double>(physical, "weight_jitter_g", 0.05, "physical", notes);
        p.scale_tolerance_g =
            detail::value_or_note<double>(physical, "scale_tolerance_g", 1.0, "physical", notes);
        p.pattern_space =
            detail::value_or_note<int>(physical, "pattern_space", 1000, "physical", notes);
        p.p_desc = detail::require_probability(physical, "p_desc", 0.05, "physical", notes);
        p.p_conf = detail::require_probability(physical, "p_conf", 0.01, "physical", notes);
        p.p_peek = detail::require_probability(physical, "p_peek", 0.0, "physical", notes);
        p.p_orientation_leak =
            detail::require_probability(physical, "p_orientation_leak", 0.0, "physical", notes);
        p.p_label_leak =
            detail::require_probability(physical, "p_label_leak", 0.0, "physical", notes);
        p.polarising_filters =
            detail::value_or_note<bool>(physical, "polarising_filters", false, "physical", notes);
        p.stamp_charges =
            detail::value_or_note<int>(physical, "stamp_charges", 3, "physical", notes);
        p.ballot_bag_draw =
            detail::value_or_note<bool>(physical, "ballot_bag_draw", false, "physical", notes);
        p.audit_sample =
            detail::value_or_note<int>(physical, "audit_sample", 0, "physical", notes);

        // detection
        auto& d = s.config.detection;
        nlohmann::json detection = doc.contains("detection") ? doc.at("detection")
                                                             : nlohmann::json::object();
        if (!doc.contains("detection")) notes->push_back("detection: all defaults");
        detail::reject_unknown_keys(detection, detection_fields(), "detection");
        d.chain_voting =
            detail::require_probability(detection, "chain_voting", 0.7, "detection", notes);
        d.under_table_chain_factor = detail::require_probability(
            detection, "under_table_chain_factor", 0.5, "detection", notes);
        d.ea_replacement_plain_sight = detail::require_probability(
            detection, "ea_replacement_plain_sight", 0.5, "detection", notes);
        d.ea_replacement_otherwise = detail::require_probability(
            detection, "ea_replacement_otherwise", 0.1, "detection", notes);
        d.feint_mitigated =
            detail::require_probability(detection, "feint_mitigated", 0.6, "detection", notes);
        d.feint_unmitigated =
            detail::require_probability(detection, "feint_unmitigated", 0.1, "detection", notes);
        d.identifying_mark =
            detail::require_probability(detection, "identifying_mark", 0.3, "detection", notes);

        // roster
        if (doc.contains("roster")) {
            const auto& roster = doc.at("roster");
            if (!roster.is_array())
                throw SimError(Err::ValidationError, "roster must be a list");
            int id = 0;
            for (const auto& entry : roster) {
                detail::reject_unknown_keys(entry, voter_fields(), "roster");
                VoterProfile v;
                v.id = id;
                v.seat = detail::value_or_note<int>(entry, "seat", id, "", nullptr);
                v.role = detail::role_from(
                    entry.contains("role") ? entry.at("role").get<std::string>() : "honest");
                v.preference = entry.contains("preference")
                                   ? entry.at("preference").get<int>()
                                   : id % s.config.k;
                if (!entry.contains("preference"))
                    notes->push_back("roster[" + std::to_string(id) +
                                     "].preference: default round-robin");
                v.demand = detail::value_or_note<int>(entry, "demand", -1, "", nullptr);
                v.adversary = detail::value_or_note<int>(entry, "adversary", -1, "", nullptr);
                v.p_forget = detail::require_probability(entry, "p_forget", 0.0, "roster", nullptr);
                v.p_orient = detail::require_probability(entry, "p_orient", 0.0, "roster", nullptr);
                v.p_desc =
                    detail::require_probability(entry, "p_desc", p.p_desc, "roster", nullptr);
                s.roster.push_back(v);
                ++id;
            }
        } else {
            notes->push_back("roster: defaulted to " + std::to_string(s.config.n) +
                             " honest voters, round-robin preferences, zero error rates");
            for (int i = 0; i < s.config.n; ++i) {
                VoterProfile v;
                v.id = i;
                v.seat = i;
                v.preference = i % s.config.k;
                v.p_desc = p.p_desc;
                s.roster.push_back(v);
            }
        }

        // strategies
        if (doc.contains("strategies")) {
            for (const auto& entry : doc.at("strategies")) {
                detail::reject_unknown_keys(entry, strategy_fields(), "strategies");
                AdversaryStrategy strat;
                strat.kind = detail::strategy_kind_from(entry.at("type").get<std::string>());
                strat.actor = detail::value_or_note<int>(entry, "actor", -1, "", nullptr);
                strat.target = detail::value_or_note<int>(entry, "target", -1, "", nullptr);
                strat.demand = detail::value_or_note<int>(entry, "demand", -1, "", nullptr);
                if (entry.contains("victim")) strat.victim = entry.at("victim").get<int>();
                if (entry.contains("defect"))
                    strat.defect = detail::defect_kind_from(entry.at("defect").get<std::string>());
                strat.count = detail::value_or_note<int>(entry, "count", 1, "", nullptr);
                if (entry.contains("p_detect"))
                    strat.p_detect =
                        detail::require_probability(entry, "p_detect", 0.0, "strategies", nullptr);
                s.strategies.push_back(strat);
            }
        }

        // run
        nlohmann::json run = doc.contains("run") ? doc.at("run") : nlohmann::json::object();
        if (!doc.contains("run")) notes->push_back("run: all defaults");
        detail::reject_unknown_keys(run, run_fields(), "run");
        std::string protocol =
            run.contains("protocol") ? run.at("protocol").get<std::string>() : "bvp1";
        if (!run.contains("protocol")) notes->push_back("run.protocol: default bvp1");
        if (protocol == "bvp1") s.spb = false;
        else if (protocol == "spb") s.spb = true;
        else throw SimError(Err::ValidationError, "run.protocol must be bvp1 or spb");
        s.trials = detail::value_or_note<int>(run, "trials", 1000, "run", notes);
        if (s.trials < 1) throw SimError(Err::ValidationError, "run.trials must be >= 1");
        s.master_seed = static_cast<std::uint64_t>(
            detail::value_or_note<std::int64_t>(run, "seed", 0, "run", notes));
        if (run.contains("sweep")) {
            for (const auto& axis : run.at("sweep")) {
                SweepAxis a;
                a.path = axis.at("path").get<std::string>();
                for (const auto& v : axis.at("values")) a.values.push_back(v.get<double>());
                if (a.values.empty())
                    throw SimError(Err::ValidationError, "sweep axis with no values");
                s.sweep.push_back(std::move(a));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SimError(Err::ValidationError, e.what());
    }

    // Full cross-validation: config ranges, roster coherence, strategy
    // preconditions, and sweep paths.
    if (s.spb) {
        validate_config(s.config);
        validate_roster(s.roster, s.config.k);
    } else {
        validate_all(s.config, s.roster, s.strategies);
    }
    for (const auto& axis : s.sweep) {
        Scenario probe = s;
        apply_sweep_value(probe, axis.path, axis.values.front());
    }
    return out;
}

}  // namespace bvp
