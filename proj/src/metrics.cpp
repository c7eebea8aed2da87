#include "genco/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace genco {

namespace {

void check_kn(int k, Eigen::Index n_real, const char* op) {
    if (k < 1) throw ParameterError(std::string(op) + ": k must be >= 1");
    if (k >= n_real)
        throw ParameterError(std::string(op) + ": NND_k undefined, need n_real > k");
}

// Radii r_i = NND_k(X_i) for all reals at once.
Vec knn_radii(const Mat& reals, int k) {
    Eigen::Index n = reals.rows();
    Vec radii(n);
    std::vector<double> dists;
    dists.reserve(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        dists.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.push_back((reals.row(i) - reals.row(j)).norm());
        }
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        radii[i] = dists[k - 1];
    }
    return radii;
}

} // namespace

double nnd_k(const Mat& reals, int i, int k) {
    if (i < 0 || i >= reals.rows()) throw ParameterError("nnd_k: index out of range");
    check_kn(k, reals.rows(), "nnd_k");
    std::vector<double> dists;
    dists.reserve(reals.rows() - 1);
    for (Eigen::Index j = 0; j < reals.rows(); ++j) {
        if (j == i) continue;
        dists.push_back((reals.row(i) - reals.row(j)).norm());
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    return dists[k - 1];
}

double density(const Mat& fakes, const Mat& reals, int k) {
    check_kn(k, reals.rows(), "density");
    if (fakes.cols() != reals.cols())
        throw DimensionError("density: fake/real dimensionality differs");
    Vec radii = knn_radii(reals, k);
    long hits = 0;
    for (Eigen::Index j = 0; j < fakes.rows(); ++j)
        for (Eigen::Index i = 0; i < reals.rows(); ++i)
            if ((fakes.row(j) - reals.row(i)).norm() <= radii[i]) ++hits;
    return static_cast<double>(hits) /
           (static_cast<double>(k) * static_cast<double>(fakes.rows()));
}

double coverage(const Mat& fakes, const Mat& reals, int k) {
    check_kn(k, reals.rows(), "coverage");
    if (fakes.cols() != reals.cols())
        throw DimensionError("coverage: fake/real dimensionality differs");
    Vec radii = knn_radii(reals, k);
    long covered = 0;
    for (Eigen::Index i = 0; i < reals.rows(); ++i) {
        for (Eigen::Index j = 0; j < fakes.rows(); ++j) {
            if ((fakes.row(j) - reals.row(i)).norm() <= radii[i]) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(reals.rows());
}

double uniqueness(const std::vector<std::string>& sample_keys) {
    if (sample_keys.empty()) throw ParameterError("uniqueness: empty sample set");
    std::unordered_set<std::string> distinct(sample_keys.begin(), sample_keys.end());
    return static_cast<double>(distinct.size()) / static_cast<double>(sample_keys.size());
}

std::string format_report(const MetricReport& r) {
    std::ostringstream out;
    out << "n_fake " << r.n_fake << "  n_real " << r.n_real << "  k " << r.k << '\n';
    out << "% Unique   " << r.unique_fraction << '\n';
    out << "Density    " << r.density << '\n';
    out << "Coverage   " << r.coverage << '\n';
    out << "Group loss " << r.mean_group_loss << '\n';
    out << "Ind. loss  " << r.mean_individual_loss << '\n';
    out << "Feasible   " << r.feasibility_rate << '\n';
    return out.str();
}

} // namespace genco
