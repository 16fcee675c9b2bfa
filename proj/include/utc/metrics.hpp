#pragma once

#include <string>
#include <vector>

namespace utc {

struct MetricsReport {
    double acc = 0.0;
    double ari = 0.0;
    double f_score = 0.0;
    double nmi = 0.0;
    double purity = 0.0;

    // Flat key=value lines.
    std::string to_record() const;
};

// Maps each predicted cluster id to a class id so that the number of matched
// samples is maximal. Clusters left without a class map to -1.
std::vector<int> match_labels(const std::vector<int>& pred, const std::vector<int>& truth);

// Solves the rectangular assignment problem, maximizing total weight.
// Returns the column assigned to each row, or -1.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight);

MetricsReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth);

}  // namespace utc
