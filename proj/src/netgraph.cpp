#include "ticknet/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ticknet/csv.hpp"
#include "ticknet/rmt.hpp"

namespace ticknet {

WeightedGraph graph_from_distances(const Eigen::MatrixXd& distances,
                                   const std::vector<std::string>& symbols,
                                   const std::vector<std::string>& sectors) {
    const Eigen::Index k = distances.rows();
    if (distances.cols() != k) throw std::invalid_argument("distance matrix is not square");
    if (symbols.size() != static_cast<size_t>(k) || sectors.size() != static_cast<size_t>(k))
        throw std::invalid_argument("distance matrix and labels disagree on size");

    WeightedGraph g;
    g.nodes.reserve(static_cast<size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        g.nodes.push_back({symbols[static_cast<size_t>(i)], sectors[static_cast<size_t>(i)]});
    for (Eigen::Index i = 0; i < k; ++i) {
        if (distances(i, i) != 0.0)
            throw std::invalid_argument("distance matrix has a nonzero diagonal");
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double w = distances(i, j);
            if (w < 0.0) throw std::invalid_argument("negative distance entry");
            if (w != distances(j, i)) throw std::invalid_argument("asymmetric distance matrix");
            g.edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
        }
    }
    return g;
}

SpanningTree mst_prim(const WeightedGraph& graph) {
    const int k = graph.size();
    if (k < 2) throw std::invalid_argument("mst_prim: need at least 2 nodes");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Dense weight lookup; absent edges stay infinite.
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(k, k, kInf);
    for (const GraphEdge& e : graph.edges) {
        if (e.i == e.j) throw std::invalid_argument("mst_prim: self-loop");
        if (e.weight < 0.0) throw std::invalid_argument("mst_prim: negative weight");
        w(e.i, e.j) = w(e.j, e.i) = std::min(w(e.i, e.j), e.weight);
    }

    struct Candidate {
        double weight = kInf;
        int i = -1, j = -1;  // canonical edge into the tree
    };
    auto before = [](const Candidate& a, const Candidate& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    };

    std::vector<Candidate> best(static_cast<size_t>(k));
    std::vector<bool> in_tree(static_cast<size_t>(k), false);
    in_tree[0] = true;
    for (int v = 1; v < k; ++v)
        if (w(0, v) < kInf) best[static_cast<size_t>(v)] = {w(0, v), 0, v};

    SpanningTree tree;
    tree.graph.nodes = graph.nodes;
    for (int step = 1; step < k; ++step) {
        int pick = -1;
        for (int v = 0; v < k; ++v) {
            if (in_tree[static_cast<size_t>(v)] || best[static_cast<size_t>(v)].i < 0) continue;
            if (pick < 0 || before(best[static_cast<size_t>(v)], best[static_cast<size_t>(pick)]))
                pick = v;
        }
        if (pick < 0) throw std::invalid_argument("mst_prim: graph is disconnected");
        const Candidate& c = best[static_cast<size_t>(pick)];
        tree.graph.edges.push_back({c.i, c.j, c.weight});
        tree.total_weight += c.weight;
        in_tree[static_cast<size_t>(pick)] = true;
        for (int v = 0; v < k; ++v) {
            if (in_tree[static_cast<size_t>(v)] || w(pick, v) >= kInf) continue;
            Candidate cand{w(pick, v), std::min(pick, v), std::max(pick, v)};
            if (best[static_cast<size_t>(v)].i < 0 || before(cand, best[static_cast<size_t>(v)]))
                best[static_cast<size_t>(v)] = cand;
        }
    }
    std::sort(tree.graph.edges.begin(), tree.graph.edges.end(),
              [](const GraphEdge& a, const GraphEdge& b) {
                  return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    return tree;
}

PowerLawFit powerlaw_mle(const std::vector<int>& degrees, int x_min) {
    if (degrees.empty()) throw std::invalid_argument("powerlaw_mle: empty degree sequence");
    if (x_min < 1) throw std::invalid_argument("powerlaw_mle: x_min must be >= 1");
    double log_corr = 0, log_plain = 0;
    bool any_above = false;
    for (int d : degrees) {
        if (d < x_min) throw std::invalid_argument("powerlaw_mle: degree below x_min");
        if (d > x_min) any_above = true;
        log_corr += std::log(static_cast<double>(d) / (x_min - 0.5));
        log_plain += std::log(static_cast<double>(d) / x_min);
    }
    if (!any_above)
        throw std::invalid_argument("powerlaw_mle: all degrees equal x_min, exponent undefined");
    const auto n = static_cast<double>(degrees.size());
    return PowerLawFit{1.0 + n / log_corr, 1.0 + n / log_plain, x_min};
}

DegreeDistribution degree_distribution(const SpanningTree& tree, int hub_threshold) {
    const int k = tree.graph.size();
    if (static_cast<int>(tree.graph.edges.size()) != k - 1)
        throw std::invalid_argument("degree_distribution: not a tree");

    DegreeDistribution dist;
    dist.hub_threshold = hub_threshold;
    dist.degree.assign(static_cast<size_t>(k), 0);
    for (const GraphEdge& e : tree.graph.edges) {
        ++dist.degree[static_cast<size_t>(e.i)];
        ++dist.degree[static_cast<size_t>(e.j)];
    }
    for (int v = 0; v < k; ++v) {
        ++dist.histogram[dist.degree[static_cast<size_t>(v)]];
        if (dist.degree[static_cast<size_t>(v)] > hub_threshold) dist.hubs.push_back(v);
    }
    // Degenerate on a 2-node tree (every degree 1): no exponent to estimate.
    if (dist.histogram.rbegin()->first > 1) dist.fit = powerlaw_mle(dist.degree, 1);
    return dist;
}

Eigen::MatrixXd adjacency_matrix(const WeightedGraph& graph) {
    const int k = graph.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
    for (const GraphEdge& e : graph.edges) {
        if (e.i == e.j) throw std::invalid_argument("adjacency_matrix: self-loop");
        a(e.i, e.j) = a(e.j, e.i) = 1.0;
    }
    return a;
}

Eigen::MatrixXd laplacian_matrix(const Eigen::MatrixXd& adjacency) {
    Eigen::MatrixXd lap = -adjacency;
    lap.diagonal() = adjacency.rowwise().sum();
    return lap;
}

namespace {

bool is_connected(const Eigen::MatrixXd& adjacency) {
    const Eigen::Index k = adjacency.rows();
    if (k == 0) return false;
    std::vector<bool> seen(static_cast<size_t>(k), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    Eigen::Index reached = 1;
    while (!stack.empty()) {
        const Eigen::Index v = stack.back();
        stack.pop_back();
        for (Eigen::Index u = 0; u < k; ++u) {
            if (adjacency(v, u) != 0.0 && !seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = true;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    return reached == k;
}

}  // namespace

Eigen::VectorXd perron_scores(const Eigen::MatrixXd& adjacency) {
    const Eigen::Index k = adjacency.rows();
    if (adjacency.cols() != k || k < 1)
        throw std::invalid_argument("perron_scores: bad adjacency matrix");
    if (!is_connected(adjacency))
        throw std::invalid_argument("perron_scores: graph is disconnected");

    // Power iteration on A + I: same eigenvectors, and the spectral shift
    // gives a strictly dominant eigenvalue even on bipartite graphs.
    Eigen::VectorXd x = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    constexpr int kMaxIter = 100000;
    for (int it = 0; it < kMaxIter; ++it) {
        Eigen::VectorXd next = adjacency * x + x;
        const double sum = next.sum();
        if (sum <= 0.0) throw std::invalid_argument("perron_scores: degenerate adjacency");
        next /= sum;
        const double diff = (next - x).cwiseAbs().maxCoeff();
        x = std::move(next);
        if (diff < 1e-10) {
            if (x.minCoeff() <= 0.0)
                throw std::invalid_argument("perron_scores: graph appears disconnected");
            return x;
        }
    }
    throw std::runtime_error("perron_scores: power iteration did not converge");
}

FiedlerSplit fiedler_communities(const Eigen::MatrixXd& laplacian) {
    const Eigen::Index k = laplacian.rows();
    if (k < 2) throw std::invalid_argument("fiedler_communities: need at least 2 nodes");
    EigenSystem sys = eigen_decompose(laplacian);  // descending order

    FiedlerSplit split;
    split.algebraic_connectivity = sys.values(k - 2);
    if (split.algebraic_connectivity < 1e-9)
        throw std::invalid_argument("fiedler_communities: graph is disconnected");
    Eigen::VectorXd v = sys.vectors.col(k - 2);

    constexpr double kZero = 1e-10;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(v(i)) > kZero) {
            if (v(i) < 0.0) v = -v;
            break;
        }
    }
    split.community.resize(static_cast<size_t>(k));
    int negative = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const bool neg = v(i) < -kZero;
        split.community[static_cast<size_t>(i)] = neg ? 1 : 0;
        negative += neg ? 1 : 0;
    }
    if (negative == 0 || negative == k)
        throw std::runtime_error("fiedler_communities: sign split is degenerate");
    split.vector = std::move(v);
    return split;
}

std::vector<HubNeighborhood> hub_neighborhood_report(const SpanningTree& tree,
                                                     int degree_threshold) {
    const int k = tree.graph.size();
    std::vector<std::vector<int>> adj(static_cast<size_t>(k));
    for (const GraphEdge& e : tree.graph.edges) {
        adj[static_cast<size_t>(e.i)].push_back(e.j);
        adj[static_cast<size_t>(e.j)].push_back(e.i);
    }
    std::vector<HubNeighborhood> report;
    for (int v = 0; v < k; ++v) {
        auto& neighbors = adj[static_cast<size_t>(v)];
        if (static_cast<int>(neighbors.size()) <= degree_threshold) continue;
        std::sort(neighbors.begin(), neighbors.end());
        HubNeighborhood hub;
        hub.node = v;
        hub.degree = static_cast<int>(neighbors.size());
        hub.neighbors = neighbors;
        int same = 0;
        for (int u : neighbors)
            if (tree.graph.nodes[static_cast<size_t>(u)].sector ==
                tree.graph.nodes[static_cast<size_t>(v)].sector)
                ++same;
        hub.same_sector_fraction = static_cast<double>(same) / hub.degree;
        report.push_back(std::move(hub));
    }
    return report;
}

TreeAnalysis analyze_tree(SpanningTree tree, int hub_threshold) {
    TreeAnalysis a;
    a.degrees = degree_distribution(tree, hub_threshold);
    const Eigen::MatrixXd adj = adjacency_matrix(tree.graph);
    a.perron = perron_scores(adj);
    a.fiedler = fiedler_communities(laplacian_matrix(adj));
    a.hubs = hub_neighborhood_report(tree, hub_threshold);
    a.tree = std::move(tree);
    return a;
}

GraphFormat graph_format_from_name(const std::string& name) {
    if (name == "graphml") return GraphFormat::graphml;
    if (name == "gexf") return GraphFormat::gexf;
    throw std::invalid_argument("unsupported graph format '" + name + "'");
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string export_graphml(const TreeAnalysis& a) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
       << "  <key id=\"d_sector\" for=\"node\" attr.name=\"sector\" attr.type=\"string\"/>\n"
       << "  <key id=\"d_degree\" for=\"node\" attr.name=\"degree\" attr.type=\"int\"/>\n"
       << "  <key id=\"d_perron\" for=\"node\" attr.name=\"perron_pct\" attr.type=\"double\"/>\n"
       << "  <key id=\"d_comm\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n"
       << "  <key id=\"d_weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
       << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    const auto& nodes = a.tree.graph.nodes;
    for (size_t v = 0; v < nodes.size(); ++v) {
        os << "    <node id=\"" << xml_escape(nodes[v].symbol) << "\">\n"
           << "      <data key=\"d_sector\">" << xml_escape(nodes[v].sector) << "</data>\n"
           << "      <data key=\"d_degree\">" << a.degrees.degree[v] << "</data>\n"
           << "      <data key=\"d_perron\">"
           << fmt_fixed(100.0 * a.perron(static_cast<Eigen::Index>(v)), 2) << "</data>\n"
           << "      <data key=\"d_comm\">" << a.fiedler.community[v] << "</data>\n"
           << "    </node>\n";
    }
    for (const GraphEdge& e : a.tree.graph.edges) {
        os << "    <edge source=\"" << xml_escape(nodes[static_cast<size_t>(e.i)].symbol)
           << "\" target=\"" << xml_escape(nodes[static_cast<size_t>(e.j)].symbol) << "\">"
           << "<data key=\"d_weight\">" << fmt_double(e.weight) << "</data></edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
    return os.str();
}

std::string export_gexf(const TreeAnalysis& a) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n"
       << "  <graph defaultedgetype=\"undirected\">\n"
       << "    <attributes class=\"node\">\n"
       << "      <attribute id=\"0\" title=\"sector\" type=\"string\"/>\n"
       << "      <attribute id=\"1\" title=\"degree\" type=\"integer\"/>\n"
       << "      <attribute id=\"2\" title=\"perron_pct\" type=\"double\"/>\n"
       << "      <attribute id=\"3\" title=\"community\" type=\"integer\"/>\n"
       << "    </attributes>\n    <nodes>\n";
    const auto& nodes = a.tree.graph.nodes;
    for (size_t v = 0; v < nodes.size(); ++v) {
        os << "      <node id=\"" << v << "\" label=\"" << xml_escape(nodes[v].symbol) << "\">\n"
           << "        <attvalues>\n"
           << "          <attvalue for=\"0\" value=\"" << xml_escape(nodes[v].sector) << "\"/>\n"
           << "          <attvalue for=\"1\" value=\"" << a.degrees.degree[v] << "\"/>\n"
           << "          <attvalue for=\"2\" value=\""
           << fmt_fixed(100.0 * a.perron(static_cast<Eigen::Index>(v)), 2) << "\"/>\n"
           << "          <attvalue for=\"3\" value=\"" << a.fiedler.community[v] << "\"/>\n"
           << "        </attvalues>\n      </node>\n";
    }
    os << "    </nodes>\n    <edges>\n";
    for (size_t e = 0; e < a.tree.graph.edges.size(); ++e) {
        const GraphEdge& edge = a.tree.graph.edges[e];
        os << "      <edge id=\"" << e << "\" source=\"" << edge.i << "\" target=\"" << edge.j
           << "\" weight=\"" << fmt_double(edge.weight) << "\"/>\n";
    }
    os << "    </edges>\n  </graph>\n</gexf>\n";
    return os.str();
}

}  // namespace

std::string export_graph(const TreeAnalysis& analysis, GraphFormat format) {
    return format == GraphFormat::graphml ? export_graphml(analysis) : export_gexf(analysis);
}

}  // namespace ticknet
