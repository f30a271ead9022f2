#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "petroscope/error.hpp"
#include "petroscope/grid.hpp"
#include "petroscope/qapf.hpp"

namespace petroscope {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// One labelled outcome: what the classifier said (empty = unclassified)
// against the known rock.
using Outcome = std::pair<std::optional<RockType>, RockType>;

inline ConfusionCounts tally(std::span<const Outcome> outcomes, RockType target) {
    ConfusionCounts c;
    for (const auto& [pred, truth] : outcomes) {
        const bool pred_pos = pred && *pred == target;
        const bool truth_pos = truth == target;
        if (pred_pos && truth_pos) ++c.tp;
        else if (pred_pos) ++c.fp;
        else if (truth_pos) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// precision = tp / (tp + fp); undefined when the class was never predicted.
inline std::optional<double> try_precision(const ConfusionCounts& c) {
    if (c.tp + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double precision(const ConfusionCounts& c) {
    const auto p = try_precision(c);
    if (!p) throw UndefinedPrecision("precision: no positive predictions");
    return *p;
}

// Precision of one class under one parameter combination. support counts the
// images the sweep evaluated for that combination; precision stays empty
// when the class was never predicted there.
struct PrecisionRecord {
    RockType rock_class{};
    ParamSet params;
    std::optional<double> precision;
    std::int64_t support = 0;
};

template <typename Key>
struct PrecisionGroup {
    Key key;
    double mean_precision = 0.0;
    std::int64_t defined_count = 0;    // records with a defined precision
    std::int64_t undefined_count = 0;  // records skipped as undefined
};

// Averages defined precisions per group key; undefined records are counted
// but excluded from the mean. Groups whose every record is undefined report
// a zero mean with defined_count == 0. Results come back in key order.
template <typename KeyFn>
auto average_precision_by_group(const std::vector<PrecisionRecord>& records, KeyFn&& key_of) {
    using Key = std::decay_t<decltype(key_of(records.front()))>;
    if (records.empty()) throw EmptyGroup("average_precision_by_group: no records");
    std::map<Key, PrecisionGroup<Key>> groups;
    for (const PrecisionRecord& r : records) {
        const Key k = key_of(r);
        auto [it, inserted] = groups.try_emplace(k);
        if (inserted) it->second.key = k;
        if (r.precision) {
            it->second.mean_precision += *r.precision;
            ++it->second.defined_count;
        } else {
            ++it->second.undefined_count;
        }
    }
    std::vector<PrecisionGroup<Key>> out;
    out.reserve(groups.size());
    for (auto& [k, g] : groups) {
        if (g.defined_count > 0) g.mean_precision /= static_cast<double>(g.defined_count);
        out.push_back(std::move(g));
    }
    return out;
}

inline auto average_precision_by_class(const std::vector<PrecisionRecord>& records) {
    return average_precision_by_group(records,
                                      [](const PrecisionRecord& r) { return r.rock_class; });
}

}  // namespace petroscope
