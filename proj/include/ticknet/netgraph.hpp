#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ticknet {

struct GraphNode {
    std::string symbol;
    std::string sector;
};

/// Undirected edge in canonical form i < j.
struct GraphEdge {
    int i = 0;
    int j = 0;
    double weight = 0;
};

struct WeightedGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
};

/// Complete graph over the symbols with the distance matrix entries as edge
/// weights. The matrix must be symmetric with a zero diagonal and
/// nonnegative entries.
WeightedGraph graph_from_distances(const Eigen::MatrixXd& distances,
                                   const std::vector<std::string>& symbols,
                                   const std::vector<std::string>& sectors);

/// k-node, (k-1)-edge tree of minimal total weight.
struct SpanningTree {
    WeightedGraph graph;  // edges are the tree edges, canonical form
    double total_weight = 0;
};

/// Prim's algorithm. Ties are broken by the lexicographic (weight, i, j)
/// order of the canonical edge, so the tree is deterministic across runs and
/// platforms. Throws on a disconnected input.
SpanningTree mst_prim(const WeightedGraph& graph);

/// Continuous power-law MLE for a degree sequence with lower cutoff x_min.
/// `alpha` uses the discrete correction x_min - 1/2 (degrees are integers
/// massed at 1); `alpha_uncorrected` is the plain continuous form, reported
/// for sensitivity. Requires every degree >= x_min and at least one > x_min.
struct PowerLawFit {
    double alpha = 0;
    double alpha_uncorrected = 0;
    int x_min = 1;
};

PowerLawFit powerlaw_mle(const std::vector<int>& degrees, int x_min = 1);

struct DegreeDistribution {
    std::vector<int> degree;          // per node
    std::map<int, int> histogram;     // degree -> count
    std::optional<PowerLawFit> fit;   // absent when every degree equals x_min
    std::vector<int> hubs;            // nodes with degree > hub_threshold
    int hub_threshold = 4;
};

DegreeDistribution degree_distribution(const SpanningTree& tree, int hub_threshold = 4);

/// 0/1 adjacency matrix of an undirected graph; zero diagonal.
Eigen::MatrixXd adjacency_matrix(const WeightedGraph& graph);

/// Graph Laplacian L = D - A.
Eigen::MatrixXd laplacian_matrix(const Eigen::MatrixXd& adjacency);

/// Entrywise-positive eigenvector of the largest adjacency eigenvalue,
/// L1-normalized so the scores sum to 1. Power iteration on A + I from the
/// uniform vector (the shift keeps bipartite graphs, i.e. every tree, from
/// oscillating); converges when successive iterates differ by < 1e-10 in
/// max norm. Throws on a disconnected graph.
Eigen::VectorXd perron_scores(const Eigen::MatrixXd& adjacency);

struct FiedlerSplit {
    Eigen::VectorXd vector;          // unit norm, orthogonal to the ones vector
    std::vector<int> community;      // 0 = nonnegative side, 1 = negative side
    double algebraic_connectivity = 0;
};

/// Eigenvector of the second-smallest Laplacian eigenvalue; nodes are split
/// by sign, entries within 1e-10 of zero joining the nonnegative side. The
/// vector sign is fixed so its first entry above that threshold is positive.
/// Throws when the graph is disconnected (algebraic connectivity ~ 0).
FiedlerSplit fiedler_communities(const Eigen::MatrixXd& laplacian);

struct HubNeighborhood {
    int node = 0;
    int degree = 0;
    std::vector<int> neighbors;
    double same_sector_fraction = 0;
};

/// For every node with degree > threshold: its tree neighbors and the
/// fraction of them sharing the hub's sector.
std::vector<HubNeighborhood> hub_neighborhood_report(const SpanningTree& tree,
                                                     int degree_threshold = 4);

/// Everything the reports need about one tree.
struct TreeAnalysis {
    SpanningTree tree;
    DegreeDistribution degrees;
    Eigen::VectorXd perron;  // sums to 1
    FiedlerSplit fiedler;
    std::vector<HubNeighborhood> hubs;
};

TreeAnalysis analyze_tree(SpanningTree tree, int hub_threshold = 4);

enum class GraphFormat { graphml, gexf };

/// Parse "graphml" / "gexf"; throws on anything else.
GraphFormat graph_format_from_name(const std::string& name);

/// Serialize the analyzed tree with node attributes (sector, degree,
/// perron_pct, community) and the edge weight attribute.
std::string export_graph(const TreeAnalysis& analysis, GraphFormat format);

}  // namespace ticknet
