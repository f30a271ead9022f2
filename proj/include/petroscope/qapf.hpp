#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "petroscope/error.hpp"

namespace petroscope {

enum class RockType : std::uint8_t { Granite = 0, Adamellite = 1, Tonalite = 2, Diorite = 3 };

inline const char* to_string(RockType r) {
    switch (r) {
        case RockType::Granite: return "Granite";
        case RockType::Adamellite: return "Adamellite";
        case RockType::Tonalite: return "Tonalite";
        case RockType::Diorite: return "Diorite";
    }
    return "?";
}

inline std::optional<RockType> parse_rock(const std::string& s) {
    for (RockType r : {RockType::Granite, RockType::Adamellite, RockType::Tonalite, RockType::Diorite}) {
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

// Modal percentage interval. hi is exclusive when half_open_hi is set
// (Diorite quartz: [0, 5)); otherwise both ends are inclusive.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool half_open_hi = false;

    bool contains(double v) const { return v >= lo && (half_open_hi ? v < hi : v <= hi); }
    double center() const { return (lo + hi) / 2.0; }
    double width() const { return hi - lo; }
};

// One row of the modal composition table. Feldspar columns are listed for
// reference output; matching uses only quartz and accessory, the two
// quantities the cell stage measures.
struct RockRange {
    RockType rock{};
    Interval quartz;
    Interval accessory;
    std::optional<Interval> alkali_feldspar;
    std::optional<Interval> plagioclase;
};

inline const std::array<RockRange, 4>& rock_table() {
    static const std::array<RockRange, 4> table = {{
        {RockType::Granite, {20, 60}, {5, 20}, Interval{35, 90}, Interval{10, 65}},
        {RockType::Adamellite, {5, 20}, {10, 35}, Interval{35, 65}, Interval{35, 65}},
        {RockType::Tonalite, {15, 50}, {10, 40}, Interval{10, 35}, Interval{65, 90}},
        {RockType::Diorite, {0, 5, true}, {20, 50}, std::nullopt, Interval{70, 90}},
    }};
    return table;
}

// Outcome of matching one (quartz%, accessory%) pair against the table.
// label is empty when no row contains the point (unclassified). matched
// lists every containing row in table order; nearest is the winning row, or
// the closest row when nothing matched. distance is the winner's normalized
// distance (below).
struct RockDecision {
    double quartz_pct = 0.0;
    double accessory_pct = 0.0;
    std::optional<RockType> label;
    std::vector<RockType> matched;
    std::optional<RockType> nearest;
    double distance = 0.0;
};

namespace qapf_detail {

// Distance from a point to a row's range centers, with each axis normalized
// by that row's interval width so wide and narrow ranges compete fairly.
inline double normalized_center_distance(const RockRange& row, double q, double a) {
    const double dq = (q - row.quartz.center()) / row.quartz.width();
    const double da = (a - row.accessory.center()) / row.accessory.width();
    return std::sqrt(dq * dq + da * da);
}

}  // namespace qapf_detail

// Overlapping rows are resolved by the smallest normalized center distance;
// exact distance ties keep the earlier table row. The same metric picks the
// reported nearest row when nothing matches.
inline RockDecision classify_rock(double quartz_pct, double accessory_pct) {
    if (!(quartz_pct >= 0.0 && quartz_pct <= 100.0) ||
        !(accessory_pct >= 0.0 && accessory_pct <= 100.0)) {
        throw PercentOutOfRange("classify_rock: percentages must be in [0, 100]");
    }
    RockDecision d;
    d.quartz_pct = quartz_pct;
    d.accessory_pct = accessory_pct;

    const RockRange* best_matched = nullptr;
    double best_matched_dist = 0.0;
    const RockRange* best_any = nullptr;
    double best_any_dist = 0.0;
    for (const RockRange& row : rock_table()) {
        const double dist = qapf_detail::normalized_center_distance(row, quartz_pct, accessory_pct);
        if (!best_any || dist < best_any_dist) {
            best_any = &row;
            best_any_dist = dist;
        }
        if (row.quartz.contains(quartz_pct) && row.accessory.contains(accessory_pct)) {
            d.matched.push_back(row.rock);
            if (!best_matched || dist < best_matched_dist) {
                best_matched = &row;
                best_matched_dist = dist;
            }
        }
    }
    if (best_matched) {
        d.label = best_matched->rock;
        d.nearest = best_matched->rock;
        d.distance = best_matched_dist;
    } else {
        d.nearest = best_any->rock;
        d.distance = best_any_dist;
    }
    return d;
}

// Majority vote across per-image decisions for one thin-section series.
// Unclassified votes count toward no rock; a tie between rocks, or a series
// with no classified vote at all, stays unresolved.
struct SectionDecision {
    std::string section_id;
    std::vector<RockDecision> votes;
    std::optional<RockType> label;
};

inline SectionDecision aggregate_section(std::string section_id,
                                         std::vector<RockDecision> votes) {
    if (votes.empty()) throw EmptyVotes("aggregate_section: no votes for " + section_id);
    std::array<int, 4> counts{};
    for (const RockDecision& v : votes) {
        if (v.label) ++counts[static_cast<std::size_t>(*v.label)];
    }
    SectionDecision out;
    out.section_id = std::move(section_id);
    out.votes = std::move(votes);
    int best = 0;
    bool tie = false;
    std::optional<RockType> winner;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > best) {
            best = counts[i];
            winner = static_cast<RockType>(i);
            tie = false;
        } else if (counts[i] == best && best > 0) {
            tie = true;
        }
    }
    if (best > 0 && !tie) out.label = winner;
    return out;
}

inline nlohmann::ordered_json to_json(const RockDecision& d) {
    nlohmann::ordered_json j;
    j["quartz_pct"] = d.quartz_pct;
    j["accessory_pct"] = d.accessory_pct;
    j["label"] = d.label ? nlohmann::ordered_json(to_string(*d.label)) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json m = nlohmann::ordered_json::array();
    for (RockType r : d.matched) m.push_back(to_string(r));
    j["matched"] = m;
    j["nearest"] = d.nearest ? nlohmann::ordered_json(to_string(*d.nearest)) : nlohmann::ordered_json(nullptr);
    j["distance"] = d.distance;
    return j;
}

}  // namespace petroscope
