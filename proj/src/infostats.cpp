#include "ticknet/infostats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ticknet/parallel.hpp"
#include "ticknet/rng.hpp"

namespace ticknet {

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least 2 observations");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson: constant series has undefined correlation");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& returns) {
    const Eigen::Index m = returns.rows(), k = returns.cols();
    if (k < 2) throw std::invalid_argument("correlation_matrix: need at least 2 columns");
    if (m < 2) throw std::invalid_argument("correlation_matrix: need at least 2 rows");
    Eigen::MatrixXd z = returns;
    for (Eigen::Index c = 0; c < k; ++c) {
        z.col(c).array() -= z.col(c).mean();
        const double norm = z.col(c).norm();
        if (norm == 0.0)
            throw std::invalid_argument("correlation_matrix: column " + std::to_string(c) +
                                        " is constant");
        z.col(c) /= norm;
    }
    Eigen::MatrixXd corr = z.transpose() * z;
    // Force exact symmetry and a unit diagonal (GEMM rounding may differ
    // between the two triangles).
    for (Eigen::Index i = 0; i < k; ++i) {
        corr(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double v = std::clamp(corr(i, j), -1.0, 1.0);
            corr(i, j) = v;
            corr(j, i) = v;
        }
    }
    return corr;
}

double entropy_discrete(std::span<const double> pmf) {
    double sum = 0, h = 0;
    for (double f : pmf) {
        if (f < 0) throw std::invalid_argument("entropy: negative probability mass");
        sum += f;
        if (f > 0) h -= f * std::log(f);
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("entropy: probabilities sum to " + std::to_string(sum));
    return h;
}

double joint_entropy_discrete(const Eigen::MatrixXd& joint) {
    return entropy_discrete(std::span<const double>(joint.data(), joint.size()));
}

namespace {

int bins_for(size_t n) {
    return std::max(2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n) / 5.0))));
}

/// Rank-based bin index per sample; ties broken by original index.
std::vector<int32_t> rank_bins(std::span<const double> x, int bins) {
    const size_t n = x.size();
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return x[a] < x[b]; });
    std::vector<int32_t> out(n);
    for (size_t r = 0; r < n; ++r)
        out[order[r]] = static_cast<int32_t>(static_cast<uint64_t>(r) * bins / n);
    return out;
}

std::vector<double> bin_edges(std::span<const double> x, int bins) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    std::vector<double> edges(static_cast<size_t>(bins) + 1);
    edges.front() = sorted.front();
    edges.back() = sorted.back();
    for (int b = 1; b < bins; ++b)
        edges[static_cast<size_t>(b)] = sorted[static_cast<uint64_t>(b) * n / bins];
    return edges;
}

/// c -> c ln c lookup for integer cell counts.
struct XlnxTable {
    std::vector<double> t;
    explicit XlnxTable(size_t max_count) : t(max_count + 1) {
        t[0] = 0.0;
        for (size_t c = 1; c < t.size(); ++c)
            t[c] = static_cast<double>(c) * std::log(static_cast<double>(c));
    }
    double operator()(uint32_t c) const { return t[c]; }
};

struct GridEstimate {
    double mi, mi_plugin, hx, hy, hxy;
};

/// Plug-in estimates over the count grid plus the grouped leave-one-out
/// jackknife that removes the O(E^2/N) partition bias. Clamps keep the
/// information inequalities (0 <= I <= min(Hx, Hy) <= Hxy) exact.
GridEstimate estimate_from_grid(const std::vector<uint32_t>& grid,
                                const std::vector<uint32_t>& ax,
                                const std::vector<uint32_t>& ay, size_t n, int bins,
                                const XlnxTable& xlnx) {
    const double lnN = std::log(static_cast<double>(n));
    const double lnN1 = std::log(static_cast<double>(n - 1));
    double sa = 0, sb = 0, sc = 0;
    for (int i = 0; i < bins; ++i) {
        sa += xlnx(ax[static_cast<size_t>(i)]);
        sb += xlnx(ay[static_cast<size_t>(i)]);
    }
    for (uint32_t c : grid) sc += xlnx(c);

    const double nd = static_cast<double>(n);
    const double plug_mi = (sc - sa - sb) / nd + lnN;
    const double plug_hxy = lnN - sc / nd;
    const double plug_hx = lnN - sa / nd;
    const double plug_hy = lnN - sb / nd;

    // Leave-one-out values grouped by cell (all samples sharing a cell give
    // the same value), so the jackknife costs O(E^2), not O(N).
    double loo_mi = 0, loo_hxy = 0;
    for (int i = 0; i < bins; ++i) {
        const double da = xlnx(ax[static_cast<size_t>(i)]) - xlnx(ax[static_cast<size_t>(i)] - 1);
        for (int j = 0; j < bins; ++j) {
            const uint32_t c = grid[static_cast<size_t>(i) * bins + static_cast<size_t>(j)];
            if (c == 0) continue;
            const double db =
                xlnx(ay[static_cast<size_t>(j)]) - xlnx(ay[static_cast<size_t>(j)] - 1);
            const double sc2 = sc - xlnx(c) + xlnx(c - 1);
            const double v_hxy = lnN1 - sc2 / (nd - 1);
            loo_hxy += c * v_hxy;
            loo_mi += c * ((sc2 - (sa - da) - (sb - db)) / (nd - 1) + lnN1);
        }
    }
    double loo_ha = 0, loo_hb = 0;
    for (int i = 0; i < bins; ++i) {
        const uint32_t a = ax[static_cast<size_t>(i)], b = ay[static_cast<size_t>(i)];
        loo_ha += a * (lnN1 - (sa - xlnx(a) + xlnx(a - 1)) / (nd - 1));
        loo_hb += b * (lnN1 - (sb - xlnx(b) + xlnx(b - 1)) / (nd - 1));
    }

    GridEstimate e{};
    e.mi_plugin = plug_mi;
    const double jk_mi = nd * plug_mi - (nd - 1) * (loo_mi / nd);
    const double jk_hxy = nd * plug_hxy - (nd - 1) * (loo_hxy / nd);
    const double jk_hx = nd * plug_hx - (nd - 1) * (loo_ha / nd);
    const double jk_hy = nd * plug_hy - (nd - 1) * (loo_hb / nd);
    e.hx = std::max(0.0, jk_hx);
    e.hy = std::max(0.0, jk_hy);
    e.hxy = std::max({jk_hxy, e.hx, e.hy});
    e.mi = std::clamp(jk_mi, 0.0, std::min(e.hx, e.hy));
    return e;
}

void count_grid(const std::vector<int32_t>& bx, const std::vector<int32_t>& by, int bins,
                std::vector<uint32_t>& grid) {
    std::fill(grid.begin(), grid.end(), 0u);
    for (size_t s = 0; s < bx.size(); ++s)
        ++grid[static_cast<size_t>(bx[s]) * bins + static_cast<size_t>(by[s])];
}

std::vector<uint32_t> margin_counts(size_t n, int bins) {
    std::vector<uint32_t> m(static_cast<size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        const uint64_t lo = static_cast<uint64_t>(b) * n / bins;
        const uint64_t hi = static_cast<uint64_t>(b + 1) * n / bins;
        m[static_cast<size_t>(b)] = static_cast<uint32_t>(hi - lo);
    }
    return m;
}

}  // namespace

MiEstimate mutual_information_adaptive(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("mi: length mismatch");
    const size_t n = x.size();
    if (n < 50) throw std::invalid_argument("mi: need at least 50 samples");
    const int bins = bins_for(n);
    const auto bx = rank_bins(x, bins), by = rank_bins(y, bins);
    const auto ax = margin_counts(n, bins), ay = margin_counts(n, bins);
    std::vector<uint32_t> grid(static_cast<size_t>(bins) * bins);
    count_grid(bx, by, bins, grid);
    XlnxTable xlnx(n);
    const GridEstimate g = estimate_from_grid(grid, ax, ay, n, bins, xlnx);

    MiEstimate out;
    out.mi = g.mi;
    out.mi_plugin = g.mi_plugin;
    out.hx = g.hx;
    out.hy = g.hy;
    out.hxy = g.hxy;
    out.partition.bins_per_axis = bins;
    out.partition.samples = static_cast<uint32_t>(n);
    out.partition.x_edges = bin_edges(x, bins);
    out.partition.y_edges = bin_edges(y, bins);
    out.partition.cell_counts = std::move(grid);
    return out;
}

PermutationResult permutation_test_mi(std::span<const double> x, std::span<const double> y,
                                      int trials, double alpha, uint64_t seed) {
    if (trials < 99) throw std::invalid_argument("permutation test: need at least 99 trials");
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("permutation test: alpha must be in (0, 1]");
    const size_t n = x.size();
    if (n != y.size()) throw std::invalid_argument("permutation test: length mismatch");
    if (n < 50) throw std::invalid_argument("permutation test: need at least 50 samples");

    const int bins = bins_for(n);
    const auto bx = rank_bins(x, bins);
    auto by = rank_bins(y, bins);
    const auto margins = margin_counts(n, bins);
    XlnxTable xlnx(n);
    std::vector<uint32_t> grid(static_cast<size_t>(bins) * bins);

    count_grid(bx, by, bins, grid);
    const double observed = estimate_from_grid(grid, margins, margins, n, bins, xlnx).mi;

    // Shuffling the y bin labels is a uniform permutation of the y sample;
    // the rank partition itself is permutation-invariant.
    Rng rng(seed);
    int exceed = 0;
    for (int t = 0; t < trials; ++t) {
        rng.shuffle(by);
        count_grid(bx, by, bins, grid);
        const double shuffled = estimate_from_grid(grid, margins, margins, n, bins, xlnx).mi;
        if (shuffled >= observed) ++exceed;
    }
    PermutationResult r;
    r.p_value = (1.0 + exceed) / (1.0 + trials);
    r.observed_mi = observed;
    r.accepted_mi = r.p_value <= alpha ? observed : 0.0;
    return r;
}

double normalized_mi(double mi, double hx, double hy) {
    if (hx <= 0.0 || hy <= 0.0)
        throw std::invalid_argument("normalized_mi: marginal entropies must be positive");
    if (mi < 0.0) throw std::invalid_argument("normalized_mi: negative mutual information");
    return std::clamp(2.0 * mi / (hx + hy), 0.0, 1.0);
}

double mi_distance(double mi, double joint_entropy) {
    if (joint_entropy <= 0.0)
        throw std::invalid_argument("mi_distance: joint entropy must be positive");
    if (mi < 0.0 || mi > joint_entropy + 1e-12)
        throw std::invalid_argument("mi_distance: mi must lie in [0, joint_entropy]");
    return std::clamp(1.0 - mi / joint_entropy, 0.0, 1.0);
}

double corr_distance(double rho) {
    if (rho < -1.0 - 1e-12 || rho > 1.0 + 1e-12)
        throw std::invalid_argument("corr_distance: correlation outside [-1, 1]");
    return std::sqrt(std::max(0.0, 2.0 * (1.0 - rho)));
}

PairMatrix pair_sweep(const ReturnsPanel& panel, const PairSweepConfig& config) {
    const auto k = panel.cols();
    const auto n = static_cast<size_t>(panel.rows());
    if (k < 2) throw std::invalid_argument("pair_sweep: need at least 2 symbols");

    PairMatrix out;
    out.symbols = panel.symbols;
    out.rho = correlation_matrix(panel.returns);
    out.mi = Eigen::MatrixXd::Zero(k, k);
    out.nmi = Eigen::MatrixXd::Zero(k, k);
    out.d_corr = Eigen::MatrixXd::Zero(k, k);
    out.d_mi = Eigen::MatrixXd::Zero(k, k);
    out.p_value = Eigen::MatrixXd::Zero(k, k);

    const int bins = bins_for(n);
    const auto margins = margin_counts(n, bins);
    const XlnxTable xlnx(n);

    std::vector<std::vector<int32_t>> col_bins(static_cast<size_t>(k));
    parallel_for(static_cast<size_t>(k), [&](size_t c) {
        const double* col = panel.returns.col(static_cast<Eigen::Index>(c)).data();
        col_bins[c] = rank_bins(std::span<const double>(col, n), bins);
    }, config.threads);

    const size_t n_pairs = static_cast<size_t>(k) * (k - 1) / 2;
    std::vector<PairStats> pairs(n_pairs);

    parallel_for(n_pairs, [&](size_t p) {
        // Unrank p -> (i, j), i < j, ordered by i then j.
        size_t i = 0, remaining = p;
        while (remaining >= static_cast<size_t>(k) - 1 - i) {
            remaining -= static_cast<size_t>(k) - 1 - i;
            ++i;
        }
        const size_t j = i + 1 + remaining;

        std::vector<uint32_t> grid(static_cast<size_t>(bins) * bins);
        count_grid(col_bins[i], col_bins[j], bins, grid);
        const GridEstimate est = estimate_from_grid(grid, margins, margins, n, bins, xlnx);

        auto by = col_bins[j];
        Rng rng(derive_seed(config.seed, "pairs", static_cast<uint64_t>(i),
                            static_cast<uint64_t>(j)));
        int exceed = 0;
        for (int t = 0; t < config.permutation_trials; ++t) {
            rng.shuffle(by);
            count_grid(col_bins[i], by, bins, grid);
            if (estimate_from_grid(grid, margins, margins, n, bins, xlnx).mi >= est.mi) ++exceed;
        }

        PairStats& s = pairs[p];
        s.i = static_cast<int>(i);
        s.j = static_cast<int>(j);
        s.rho = out.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        s.mi_raw = est.mi;
        s.joint_entropy = est.hxy;
        s.p_value = (1.0 + exceed) / (1.0 + config.permutation_trials);
        s.mi = s.p_value <= config.alpha ? est.mi : 0.0;
        s.nmi = normalized_mi(est.mi, est.hx, est.hy);
        s.d_corr = corr_distance(s.rho);
        s.d_mi = s.p_value <= config.alpha ? mi_distance(s.mi, est.hxy) : 1.0;
    }, config.threads);

    for (const PairStats& s : pairs) {
        const Eigen::Index i = s.i, j = s.j;
        out.mi(i, j) = out.mi(j, i) = s.mi;
        out.nmi(i, j) = out.nmi(j, i) = s.nmi;
        out.d_corr(i, j) = out.d_corr(j, i) = s.d_corr;
        out.d_mi(i, j) = out.d_mi(j, i) = s.d_mi;
        out.p_value(i, j) = out.p_value(j, i) = s.p_value;
    }
    // Diagonal conventions: rho is already 1; distances stay 0. For MI use
    // I(X,X) = H(X), identical across columns because the bins are
    // equiprobable by construction.
    std::vector<uint32_t> diag_grid(static_cast<size_t>(bins) * bins, 0u);
    for (int b = 0; b < bins; ++b)
        diag_grid[static_cast<size_t>(b) * bins + static_cast<size_t>(b)] =
            margins[static_cast<size_t>(b)];
    const double self_info = estimate_from_grid(diag_grid, margins, margins, n, bins, xlnx).mi;
    for (Eigen::Index c = 0; c < k; ++c) {
        out.mi(c, c) = self_info;
        out.nmi(c, c) = 1.0;
        out.p_value(c, c) = 0.0;
    }
    out.pairs = std::move(pairs);
    return out;
}

}  // namespace ticknet
