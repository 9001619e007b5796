#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ticknet/ingest.hpp"

namespace ticknet {

/// Sample Pearson correlation. Throws on length mismatch, length < 2, or a
/// constant series (zero variance is an error, never a silent 0).
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// k x k correlation matrix of the columns of `returns` (observations in
/// rows). Symmetric with unit diagonal; positive semidefinite up to
/// floating-point tolerance.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& returns);

/// Shannon entropy in nats of a probability vector (0 ln 0 == 0). Entries
/// must be nonnegative and sum to 1 within 1e-9.
double entropy_discrete(std::span<const double> pmf);

/// Entropy of a joint probability grid, i.e. entropy_discrete of the
/// flattened matrix.
double joint_entropy_discrete(const Eigen::MatrixXd& joint);

/// Rank-based equiprobable partition of a sample pair. Marginal bin counts
/// differ by at most one; ties are broken by original index so the grid is
/// deterministic.
struct AdaptivePartition {
    int bins_per_axis = 0;
    std::vector<double> x_edges, y_edges;  // bins_per_axis+1 boundary values per axis
    std::vector<uint32_t> cell_counts;     // row-major bins x bins
    uint32_t samples = 0;
};

/// Adaptive-partition mutual information estimate. All entropies in nats.
struct MiEstimate {
    double mi = 0;         // bias-corrected, clamped into [0, min(hx, hy)]
    double mi_plugin = 0;  // raw plug-in value, before bias correction
    double hx = 0, hy = 0; // marginal entropies of the partition
    double hxy = 0;        // joint entropy (>= max(hx, hy) by construction)
    AdaptivePartition partition;
};

/// Estimate I(X,Y) and H(X,Y) on rank-based equiprobable marginal bins with
/// E = max(2, floor(sqrt(N/5))) bins per axis (expected cell occupancy >= 5
/// under independence). The plug-in estimate carries an O(E^2/N) upward
/// bias, removed here by a grouped leave-one-out jackknife; the corrected
/// value is what `mi` reports. Requires N >= 50.
MiEstimate mutual_information_adaptive(std::span<const double> x, std::span<const double> y);

struct PermutationResult {
    double p_value = 1.0;
    double observed_mi = 0.0;
    double accepted_mi = 0.0;  // observed_mi if p_value <= alpha, else 0
};

/// Permutation significance test for the MI estimate: y is shuffled
/// `trials` times with the seeded generator and the estimate recomputed;
/// p = (1 + #{shuffled >= observed}) / (1 + trials). Requires trials >= 99.
PermutationResult permutation_test_mi(std::span<const double> x, std::span<const double> y,
                                      int trials, double alpha, uint64_t seed);

/// Normalized mutual information U = 2 I / (H(X) + H(Y)), clamped into
/// [0, 1]. Marginal entropies must be positive.
double normalized_mi(double mi, double hx, double hy);

/// MI distance d = 1 - I / H(X,Y) in [0, 1].
double mi_distance(double mi, double joint_entropy);

/// Correlation distance d = sqrt(2 (1 - rho)) in [0, 2].
double corr_distance(double rho);

/// Per-pair statistics, one row of the sweep.
struct PairStats {
    int i = 0, j = 0;
    double rho = 0;
    double mi = 0;       // accepted (zeroed when the test cannot reject independence)
    double mi_raw = 0;   // pre-test estimate, kept for the rho-vs-NMI scatter
    double joint_entropy = 0;
    double nmi = 0;      // from mi_raw
    double p_value = 1;
    double d_corr = 0;
    double d_mi = 1;     // exactly 1 for zeroed pairs
};

struct PairSweepConfig {
    int permutation_trials = 199;
    double alpha = 0.05;
    uint64_t seed = 0;
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Symmetric per-pair matrices over a panel. `mi` stores accepted values;
/// `nmi` is computed from the raw estimate.
struct PairMatrix {
    std::vector<std::string> symbols;
    Eigen::MatrixXd rho, mi, nmi, d_corr, d_mi, p_value;
    std::vector<PairStats> pairs;  // upper triangle, ordered (i, j), i < j
};

/// All k(k-1)/2 pairwise statistics. Each pair draws its permutation stream
/// from derive_seed(seed, "pairs", i, j), so parallel and serial runs agree
/// exactly.
PairMatrix pair_sweep(const ReturnsPanel& panel, const PairSweepConfig& config);

}  // namespace ticknet
