#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "ticknet/ingest.hpp"

namespace ticknet {

/// Marchenko-Pastur support for a correlation matrix of k variables over m
/// observations, Q = m/k.
struct MPParams {
    double q_ratio = 0;
    double lambda_min = 0;
    double lambda_max = 0;

    static MPParams from_ratio(double q);            // requires q > 1
    static MPParams from_counts(int64_t m, int64_t k);  // requires m > k >= 2
};

/// mp_bounds(m, k): the closed-form support edges (1 +- sqrt(1/Q))^2.
MPParams mp_bounds(int64_t m, int64_t k);

/// Marchenko-Pastur density at lambda; 0 outside [lambda_min, lambda_max].
double mp_pdf(double lambda, const MPParams& mp);

struct EigenSystem {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // columns aligned with values, orthonormal
};

/// Dense symmetric eigendecomposition, eigenvalues descending. Input must be
/// symmetric within 1e-12.
EigenSystem eigen_decompose(const Eigen::MatrixXd& matrix);

struct SpectrumFractions {
    double within = 0, above = 0, below = 0;  // sums to 1
};

/// Fractions of eigenvalues below, inside (closed interval), and above the
/// MP support.
SpectrumFractions classify_spectrum(const Eigen::VectorXd& eigenvalues, const MPParams& mp);

/// Eigen-analysis of one period's correlation matrix against the MP law.
struct SpectrumReport {
    std::string period;
    int64_t observations = 0;  // m
    int64_t variables = 0;     // k
    MPParams mp;
    Eigen::VectorXd eigenvalues;  // descending; tiny negatives clamped to 0
    Eigen::MatrixXd eigenvectors;
    SpectrumFractions fractions;
    double empirical_lambda_max = 0;
};

SpectrumReport analyze_spectrum(const ReturnsPanel& panel);

/// Independently permute every column, preserving each marginal exactly and
/// destroying cross-dependence. Column c uses the sub-stream
/// derive_seed(seed, "shuffle", c), so the result does not depend on the
/// thread count.
ReturnsPanel surrogate_shuffle(const ReturnsPanel& panel, uint64_t seed, unsigned threads = 0);

struct HistogramData {
    std::vector<double> edges;    // nbins+1
    std::vector<double> density;  // nbins, normalized to integrate to 1
};

HistogramData make_histogram(const std::vector<double>& values, int nbins, double hi);

/// Shuffle-ensemble validation: `trials` independent column shuffles, each
/// re-analyzed against the MP law; eigenvalues pooled into one histogram.
struct SurrogateEnsemble {
    int trials = 0;
    MPParams mp;
    std::vector<double> pooled_eigenvalues;
    HistogramData pooled_histogram;
    std::vector<double> per_trial_frac_within;
    double pooled_frac_within = 0;
};

SurrogateEnsemble surrogate_ensemble(const ReturnsPanel& panel, int trials, uint64_t seed,
                                     int histogram_bins = 50);

/// Signed eigenvector components for the n_top largest eigenvalues, one row
/// per symbol, rows grouped by sector. Sign convention: each vector is
/// flipped so its largest-magnitude component is positive.
struct ComponentRow {
    std::string symbol;
    std::string sector;
    std::vector<double> components;  // n_top values
};

std::vector<ComponentRow> top_eigenvector_components(const SpectrumReport& report, int n_top,
                                                     const std::vector<std::string>& symbols,
                                                     const std::vector<std::string>& sectors);

}  // namespace ticknet
