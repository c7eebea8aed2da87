#ifndef GENCO_METRICS_HPP
#define GENCO_METRICS_HPP

#include <string>
#include <vector>

#include "genco/tensor.hpp"

namespace genco {

// Population summary mirroring the evaluation tables: nearest-neighbor-ball
// density/coverage, uniqueness, and mean loss columns.
struct MetricReport {
    double density = 0.0;
    double coverage = 0.0;
    double unique_fraction = 0.0;
    double mean_group_loss = 0.0;
    double mean_individual_loss = 0.0;
    double feasibility_rate = 1.0;
    int n_fake = 0;
    int n_real = 0;
    int k = 0;
};

// Distance from row i of `reals` to its k-th nearest other row (self
// excluded, k >= 1). Throws ParameterError when k is out of range.
double nnd_k(const Mat& reals, int i, int k);

// density = 1/(kM) sum_j sum_i [ d(Y_j, X_i) <= NND_k(X_i) ]   (closed balls)
// coverage = 1/N sum_i [ exists j with d(Y_j, X_i) <= NND_k(X_i) ]
// Rows of `fakes`/`reals` are points. Requires n_real > k >= 1.
double density(const Mat& fakes, const Mat& reals, int k);
double coverage(const Mat& fakes, const Mat& reals, int k);

// Fraction of distinct sample keys: distinct/n, exact on discrete objects.
double uniqueness(const std::vector<std::string>& sample_keys);

// Renders the report as a fixed-format text table (column names follow the
// comparison tables the run reports mirror).
std::string format_report(const MetricReport& r);

} // namespace genco

#endif // GENCO_METRICS_HPP
