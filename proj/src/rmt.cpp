#include "ticknet/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ticknet/infostats.hpp"
#include "ticknet/parallel.hpp"
#include "ticknet/rng.hpp"

namespace ticknet {

MPParams MPParams::from_ratio(double q) {
    if (q <= 1.0) throw std::invalid_argument("MP law requires Q = m/k > 1");
    const double root = std::sqrt(1.0 / q);
    return MPParams{q, (1.0 - root) * (1.0 - root), (1.0 + root) * (1.0 + root)};
}

MPParams MPParams::from_counts(int64_t m, int64_t k) {
    if (k < 2) throw std::invalid_argument("MP law requires k >= 2");
    if (m <= k) throw std::invalid_argument("MP law requires m > k");
    return from_ratio(static_cast<double>(m) / static_cast<double>(k));
}

MPParams mp_bounds(int64_t m, int64_t k) { return MPParams::from_counts(m, k); }

double mp_pdf(double lambda, const MPParams& mp) {
    if (lambda <= mp.lambda_min || lambda >= mp.lambda_max) return 0.0;
    return mp.q_ratio / (2.0 * M_PI) *
           std::sqrt((mp.lambda_max - lambda) * (lambda - mp.lambda_min)) / lambda;
}

EigenSystem eigen_decompose(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols())
        throw std::invalid_argument("eigen_decompose: matrix is not square");
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
        throw std::invalid_argument("eigen_decompose: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen_decompose: solver did not converge");

    // Eigen returns ascending order; flip to descending.
    const Eigen::Index k = matrix.rows();
    EigenSystem out;
    out.values.resize(k);
    out.vectors.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        out.values(i) = solver.eigenvalues()(k - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(k - 1 - i);
    }
    return out;
}

SpectrumFractions classify_spectrum(const Eigen::VectorXd& eigenvalues, const MPParams& mp) {
    const auto k = static_cast<double>(eigenvalues.size());
    if (k == 0) throw std::invalid_argument("classify_spectrum: empty spectrum");
    int below = 0, above = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues(i) < mp.lambda_min)
            ++below;
        else if (eigenvalues(i) > mp.lambda_max)
            ++above;
    }
    SpectrumFractions f;
    f.below = below / k;
    f.above = above / k;
    f.within = (eigenvalues.size() - below - above) / k;
    return f;
}

SpectrumReport analyze_spectrum(const ReturnsPanel& panel) {
    SpectrumReport report;
    report.period = panel.period;
    report.observations = panel.rows();
    report.variables = panel.cols();
    report.mp = MPParams::from_counts(report.observations, report.variables);

    EigenSystem sys = eigen_decompose(correlation_matrix(panel.returns));
    for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
        if (sys.values(i) < 0.0 && sys.values(i) >= -1e-10) sys.values(i) = 0.0;
    }
    report.eigenvalues = std::move(sys.values);
    report.eigenvectors = std::move(sys.vectors);
    report.fractions = classify_spectrum(report.eigenvalues, report.mp);
    report.empirical_lambda_max = report.eigenvalues(0);
    return report;
}

ReturnsPanel surrogate_shuffle(const ReturnsPanel& panel, uint64_t seed, unsigned threads) {
    ReturnsPanel out = panel;
    const auto m = static_cast<size_t>(panel.rows());
    parallel_for(
        static_cast<size_t>(panel.cols()),
        [&](size_t c) {
            std::vector<double> col(m);
            Eigen::VectorXd::Map(col.data(), static_cast<Eigen::Index>(m)) =
                panel.returns.col(static_cast<Eigen::Index>(c));
            Rng rng(derive_seed(seed, "shuffle", static_cast<uint64_t>(c)));
            rng.shuffle(col);
            out.returns.col(static_cast<Eigen::Index>(c)) =
                Eigen::VectorXd::Map(col.data(), static_cast<Eigen::Index>(m));
        },
        threads);
    return out;
}

HistogramData make_histogram(const std::vector<double>& values, int nbins, double hi) {
    if (nbins < 1) throw std::invalid_argument("make_histogram: need at least one bin");
    if (hi <= 0.0) throw std::invalid_argument("make_histogram: upper bound must be positive");
    HistogramData h;
    h.edges.resize(static_cast<size_t>(nbins) + 1);
    for (int b = 0; b <= nbins; ++b)
        h.edges[static_cast<size_t>(b)] = hi * static_cast<double>(b) / nbins;
    std::vector<int64_t> counts(static_cast<size_t>(nbins), 0);
    for (double v : values) {
        auto b = static_cast<int64_t>(std::floor(v / hi * nbins));
        if (b < 0) b = 0;
        if (b >= nbins) b = nbins - 1;  // top edge inclusive
        ++counts[static_cast<size_t>(b)];
    }
    const double width = hi / nbins;
    const double total = static_cast<double>(values.size());
    h.density.resize(static_cast<size_t>(nbins));
    for (int b = 0; b < nbins; ++b)
        h.density[static_cast<size_t>(b)] =
            total > 0 ? counts[static_cast<size_t>(b)] / (total * width) : 0.0;
    return h;
}

SurrogateEnsemble surrogate_ensemble(const ReturnsPanel& panel, int trials, uint64_t seed,
                                     int histogram_bins) {
    if (trials < 1) throw std::invalid_argument("surrogate_ensemble: need at least one trial");
    SurrogateEnsemble ens;
    ens.trials = trials;
    ens.mp = MPParams::from_counts(panel.rows(), panel.cols());

    const auto k = static_cast<size_t>(panel.cols());
    ens.pooled_eigenvalues.assign(static_cast<size_t>(trials) * k, 0.0);
    ens.per_trial_frac_within.assign(static_cast<size_t>(trials), 0.0);

    parallel_for(static_cast<size_t>(trials), [&](size_t t) {
        const ReturnsPanel shuffled = surrogate_shuffle(
            panel, derive_seed(seed, "surrogate", static_cast<uint64_t>(t)), /*threads=*/1);
        const EigenSystem sys = eigen_decompose(correlation_matrix(shuffled.returns));
        for (size_t i = 0; i < k; ++i)
            ens.pooled_eigenvalues[t * k + i] = sys.values(static_cast<Eigen::Index>(i));
        ens.per_trial_frac_within[t] = classify_spectrum(sys.values, ens.mp).within;
    });

    int64_t within = 0;
    double emp_max = 0;
    for (double v : ens.pooled_eigenvalues) {
        emp_max = std::max(emp_max, v);
        if (v >= ens.mp.lambda_min && v <= ens.mp.lambda_max) ++within;
    }
    ens.pooled_frac_within = static_cast<double>(within) /
                             static_cast<double>(ens.pooled_eigenvalues.size());
    ens.pooled_histogram = make_histogram(
        ens.pooled_eigenvalues, histogram_bins, std::max(emp_max, ens.mp.lambda_max) * 1.05);
    return ens;
}

std::vector<ComponentRow> top_eigenvector_components(const SpectrumReport& report, int n_top,
                                                     const std::vector<std::string>& symbols,
                                                     const std::vector<std::string>& sectors) {
    const Eigen::Index k = report.eigenvalues.size();
    if (n_top < 1 || n_top > k)
        throw std::invalid_argument("top_eigenvector_components: n_top out of range");
    if (symbols.size() != static_cast<size_t>(k) || sectors.size() != static_cast<size_t>(k))
        throw std::invalid_argument("top_eigenvector_components: label size mismatch");

    // Sign-fix each vector: largest-magnitude component positive.
    Eigen::MatrixXd vecs = report.eigenvectors.leftCols(n_top);
    for (int c = 0; c < n_top; ++c) {
        Eigen::Index argmax = 0;
        vecs.col(c).cwiseAbs().maxCoeff(&argmax);
        if (vecs(argmax, c) < 0.0) vecs.col(c) = -vecs.col(c);
    }

    std::vector<size_t> order(static_cast<size_t>(k));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (sectors[a] != sectors[b]) return sectors[a] < sectors[b];
        return symbols[a] < symbols[b];
    });

    std::vector<ComponentRow> rows;
    rows.reserve(order.size());
    for (size_t idx : order) {
        ComponentRow row;
        row.symbol = symbols[idx];
        row.sector = sectors[idx];
        for (int c = 0; c < n_top; ++c)
            row.components.push_back(vecs(static_cast<Eigen::Index>(idx), c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ticknet
