#ifndef HYREACH_REPORT_HPP
#define HYREACH_REPORT_HPP

#include <string>

#include "common.hpp"

namespace hyreach {

enum class Verdict {
    Pass,
    Fail,
    Inconclusive,
    StructuralPass,  // holds by construction of the data classes
    SampledPass,     // holds on the drawn samples only
    SampledFail,
    Vacuous,         // nothing to check (empty sample intersection)
    Delegated,       // discharged by another checker, see notes
    NotApplicable,
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
        case Verdict::StructuralPass: return "structural-pass";
        case Verdict::SampledPass: return "sampled-pass";
        case Verdict::SampledFail: return "sampled-fail";
        case Verdict::Vacuous: return "vacuous";
        case Verdict::Delegated: return "delegated";
        case Verdict::NotApplicable: return "not-applicable";
    }
    return "?";
}

inline bool verdict_passes(Verdict v) {
    return v == Verdict::Pass || v == Verdict::StructuralPass || v == Verdict::SampledPass ||
           v == Verdict::Vacuous || v == Verdict::Delegated;
}

inline bool verdict_fails(Verdict v) { return v == Verdict::Fail || v == Verdict::SampledFail; }

struct ConditionEntry {
    std::string id;         // e.g. "A1", "B5", "V2", "C6-flow"
    Verdict verdict = Verdict::Inconclusive;
    Vec point;              // sample point the verdict refers to (may be empty)
    std::string witness;    // concrete violated inequality / margin for fails
    std::string notes;
};

struct ConditionReport {
    std::string subject;
    std::vector<ConditionEntry> entries;

    const ConditionEntry* find(const std::string& id) const {
        for (const auto& e : entries)
            if (e.id == id) return &e;
        return nullptr;
    }

    Verdict verdict_of(const std::string& id) const {
        const ConditionEntry* e = find(id);
        return e ? e->verdict : Verdict::NotApplicable;
    }

    bool all_pass() const {
        for (const auto& e : entries)
            if (!verdict_passes(e.verdict)) return false;
        return true;
    }
};

struct ProbeLevel {
    double r = 0.0;
    double delta = 0.0;
    double value = 0.0;   // the monitored gap/distance at this level
    bool vacuous = false;
    bool empty_cloud = false;
    std::string note;
};

// Outcome of a finite semicontinuity/closeness probe. Verdicts use
// "consistent with"/"not consistent with" language; no limit claims.
struct ProbeReport {
    std::string kind;
    std::vector<ProbeLevel> levels;
    bool consistent = false;
    bool hypothesis_ok = true;
    std::string hypothesis_note;
    std::string verdict;
    std::string gauge;  // gauge/schedule description used
    double tol = 0.0;
    Vec witness;

    double final_value() const {
        for (auto it = levels.rbegin(); it != levels.rend(); ++it)
            if (!it->vacuous) return it->value;
        return 0.0;
    }
};

}  // namespace hyreach

#endif
