#pragma once

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "latte/errors.hpp"

namespace latte {

// One evaluated mention: candidates sorted by score descending, ties by
// candidate id ascending; gold appears exactly once.
struct RankingResult {
    std::string mention_id;
    std::size_t rank_of_gold = 0;  // 1-based

    static RankingResult from_scores(
        const std::string& mention_id,
        const std::vector<std::pair<std::string, double>>& scored,
        const std::string& gold_id) {
        std::vector<std::size_t> order(scored.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scored[a].second != scored[b].second)
                return scored[a].second > scored[b].second;
            return scored[a].first < scored[b].first;
        });
        RankingResult r;
        r.mention_id = mention_id;
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            if (scored[order[pos]].first == gold_id) {
                if (r.rank_of_gold != 0)
                    throw IntegrityError("gold appears twice in candidates");
                r.rank_of_gold = pos + 1;
            }
        if (r.rank_of_gold == 0)
            throw IntegrityError("gold missing from candidate list");
        return r;
    }
};

inline double precision_at_1(const std::vector<RankingResult>& results) {
    if (results.empty()) throw ValueError("precision_at_1: no results");
    std::size_t hits = 0;
    for (const auto& r : results)
        if (r.rank_of_gold == 1) ++hits;
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

// With a single relevant candidate per mention, AP reduces to the
// reciprocal rank of the gold entity.
inline double mean_average_precision(
    const std::vector<RankingResult>& results) {
    if (results.empty()) throw ValueError("mean_average_precision: no results");
    double s = 0.0;
    for (const auto& r : results)
        s += 1.0 / static_cast<double>(r.rank_of_gold);
    return s / static_cast<double>(results.size());
}

inline std::string metrics_report(const std::string& split, double p1,
                                  double map) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "P@1 " << split << " " << p1 << "\n";
    os << "MAP " << split << " " << map << "\n";
    return os.str();
}

}  // namespace latte
