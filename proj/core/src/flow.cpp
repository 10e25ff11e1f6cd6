#include "tvmap/flow.hpp"

#include "tvmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tvmap::detail {
namespace {

// Dinic's algorithm on doubles. Arc i and i^1 are residual partners; an
// undirected edge of capacity c is stored as the pair (c, c), so the signed
// net flow along the edge is (cap[i^1] - cap[i]) / 2.
class Dinic {
public:
    void reset(int n_nodes) {
        n_ = n_nodes;
        arcs_to_.clear();
        arcs_cap_.clear();
        head_.assign(n_, std::vector<int>());
    }

    int add_arc(int a, int b, double cap_ab, double cap_ba) {
        const int id = static_cast<int>(arcs_to_.size());
        arcs_to_.push_back(b);
        arcs_cap_.push_back(cap_ab);
        arcs_to_.push_back(a);
        arcs_cap_.push_back(cap_ba);
        head_[a].push_back(id);
        head_[b].push_back(id + 1);
        return id;
    }

    void set_cap(int arc, double cap_ab, double cap_ba) {
        arcs_cap_[arc] = cap_ab;
        arcs_cap_[arc ^ 1] = cap_ba;
    }

    double cap(int arc) const { return arcs_cap_[arc]; }

    double maxflow(int s, int t, double eps) {
        eps_ = eps;
        double total = 0.0;
        while (bfs(s, t)) {
            iter_.assign(n_, 0);
            for (;;) {
                const double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
                if (pushed <= 0.0) break;
                total += pushed;
            }
        }
        return total;
    }

    // Source side of the min cut after the last maxflow call.
    std::vector<char> reachable(int s) const {
        std::vector<char> seen(n_, 0);
        std::vector<int> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int id : head_[v]) {
                if (arcs_cap_[id] <= eps_) continue;
                const int w = arcs_to_[id];
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return seen;
    }

private:
    bool bfs(int s, int t) {
        level_.assign(n_, -1);
        queue_.clear();
        queue_.push_back(s);
        level_[s] = 0;
        for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
            const int v = queue_[qi];
            for (int id : head_[v]) {
                if (arcs_cap_[id] <= eps_) continue;
                const int w = arcs_to_[id];
                if (level_[w] < 0) {
                    level_[w] = level_[v] + 1;
                    queue_.push_back(w);
                }
            }
        }
        return level_[t] >= 0;
    }

    double dfs(int v, int t, double limit) {
        if (v == t) return limit;
        for (int& i = iter_[v]; i < static_cast<int>(head_[v].size()); ++i) {
            const int id = head_[v][i];
            const int w = arcs_to_[id];
            if (arcs_cap_[id] <= eps_ || level_[w] != level_[v] + 1) continue;
            const double pushed = dfs(w, t, std::min(limit, arcs_cap_[id]));
            if (pushed > 0.0) {
                arcs_cap_[id] -= pushed;
                arcs_cap_[id ^ 1] += pushed;
                return pushed;
            }
        }
        return 0.0;
    }

    int n_ = 0;
    double eps_ = 0.0;
    std::vector<int> arcs_to_;
    std::vector<double> arcs_cap_;
    std::vector<std::vector<int>> head_;
    std::vector<int> level_;
    std::vector<int> iter_;
    std::vector<int> queue_;
};

struct Network {
    Dinic dinic;
    int n_nodes = 0;
    int source = 0;
    int sink = 0;
    std::vector<int> edge_arc;   // grid edge index -> arc id
    std::vector<int> supply_arc; // node -> arc id (-1 where no supply arc)
    double supply_pos = 0.0;     // sum of positive supplies
    double eps = 0.0;

    void build(int n, const std::vector<std::pair<int, int>>& edges,
               const Eigen::VectorXd& supply) {
        n_nodes = n;
        source = n;
        sink = n + 1;
        dinic.reset(n + 2);
        edge_arc.resize(edges.size());
        for (std::size_t r = 0; r < edges.size(); ++r)
            edge_arc[r] = dinic.add_arc(edges[r].first, edges[r].second, 0.0, 0.0);
        supply_arc.assign(n, -1);
        supply_pos = 0.0;
        double scale = 0.0;
        for (int l = 0; l < n; ++l) {
            const double u = supply[l];
            scale = std::max(scale, std::abs(u));
            if (u > 0.0) {
                supply_arc[l] = dinic.add_arc(l, sink, u, 0.0);
                supply_pos += u;
            } else if (u < 0.0) {
                supply_arc[l] = dinic.add_arc(source, l, -u, 0.0);
            }
        }
        eps = 1e-15 * std::max(scale, 1.0);
    }

    double run(const std::vector<std::pair<int, int>>& edges,
               const Eigen::VectorXd& supply, double cap) {
        for (std::size_t r = 0; r < edges.size(); ++r)
            dinic.set_cap(edge_arc[r], cap, cap);
        for (int l = 0; l < n_nodes; ++l) {
            if (supply_arc[l] < 0) continue;
            const double u = supply[l];
            if (u > 0.0)
                dinic.set_cap(supply_arc[l], u, 0.0);
            else
                dinic.set_cap(supply_arc[l], -u, 0.0);
        }
        return dinic.maxflow(source, sink, std::max(eps, 1e-15 * std::max(cap, 1.0)));
    }

    Eigen::VectorXd extract_flow(const std::vector<std::pair<int, int>>& edges,
                                 double cap) const {
        Eigen::VectorXd flow(static_cast<Eigen::Index>(edges.size()));
        for (std::size_t r = 0; r < edges.size(); ++r) {
            const int id = edge_arc[r];
            flow[static_cast<Eigen::Index>(r)] = 0.5 * (dinic.cap(id ^ 1) - dinic.cap(id));
        }
        (void)cap;
        return flow;
    }
};

Eigen::VectorXd node_residuals(int n, const std::vector<std::pair<int, int>>& edges,
                               const Eigen::VectorXd& supply,
                               const Eigen::VectorXd& flow) {
    Eigen::VectorXd net = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < edges.size(); ++r) {
        net[edges[r].second] += flow[static_cast<Eigen::Index>(r)];
        net[edges[r].first] -= flow[static_cast<Eigen::Index>(r)];
    }
    return supply - net;
}

} // namespace

RouteResult route_with_capacity(int n_nodes,
                                const std::vector<std::pair<int, int>>& edges,
                                const Eigen::VectorXd& supply, double cap) {
    Network net;
    net.build(n_nodes, edges, supply);
    const double routed = net.run(edges, supply, cap);

    RouteResult result;
    result.edge_flow = net.extract_flow(edges, cap);
    result.node_residual = node_residuals(n_nodes, edges, supply, result.edge_flow);
    result.max_residual = result.node_residual.size()
                              ? result.node_residual.cwiseAbs().maxCoeff()
                              : 0.0;
    const double tol = 1e-9 * std::max(1.0, net.supply_pos);
    result.feasible = (net.supply_pos - routed) <= tol;
    auto seen = net.dinic.reachable(net.source);
    result.cut_side.assign(seen.begin(), seen.begin() + n_nodes);
    return result;
}

CongestionResult min_congestion_flow(int n_nodes,
                                     const std::vector<std::pair<int, int>>& edges,
                                     const Eigen::VectorXd& supply) {
    CongestionResult result;
    result.edge_flow = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges.size()));

    double pos = 0.0, neg = 0.0, amax = 0.0;
    for (Eigen::Index l = 0; l < supply.size(); ++l) {
        if (supply[l] > 0.0) pos += supply[l];
        else neg -= supply[l];
        amax = std::max(amax, std::abs(supply[l]));
    }
    const double total = std::max(pos, neg);
    if (total <= 0.0) {
        result.feasible = true;
        return result;
    }
    const double imbalance = std::abs(pos - neg);
    // Additive slack absorbs both the supply imbalance (score-equation dust)
    // and rounding of the routed-flow accumulation.
    const double feas_tol = imbalance + 1e-11 * std::max(total, 1.0);

    if (edges.empty()) {
        result.feasible = amax <= 1e-12 * std::max(1.0, total);
        result.max_residual = amax;
        if (!result.feasible)
            throw numeric_error("min_congestion_flow: nonzero supply on a lattice with no "
                                "neighbor pairs");
        return result;
    }

    std::vector<int> degree(n_nodes, 0);
    for (const auto& [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
    double lambda = 0.0;
    for (int l = 0; l < n_nodes; ++l)
        if (degree[l] > 0)
            lambda = std::max(lambda, std::abs(supply[l]) / degree[l]);

    Network net;
    net.build(n_nodes, edges, supply);

    const double upper = 0.5 * (pos + neg) * (1.0 + 1e-9) + 1e-300;
    bool solved = false;
    for (int iter = 0; iter < 200; ++iter) {
        const double routed = net.run(edges, supply, lambda);
        ++result.maxflow_calls;
        if (pos - routed <= feas_tol) {
            solved = true;
            break;
        }
        // Bottleneck-cut candidate: the source-side cut A gives the ratio
        // lambda' = supply(outside A) / crossing-edge count, a strict increase.
        const auto side = net.dinic.reachable(net.source);
        double needed = 0.0;
        for (int l = 0; l < n_nodes; ++l)
            if (!side[l]) needed += supply[l];
        long crossing = 0;
        for (const auto& [a, b] : edges)
            crossing += (side[a] != side[b]);
        if (crossing == 0) {
            // No capacity increase can help. Unmet supply at the noise floor
            // just means the emitters are drained; anything larger is a
            // structurally unbalanced component.
            if (needed <= 4.0 * feas_tol) {
                solved = true;
                break;
            }
            throw numeric_error("min_congestion_flow: supply cannot be balanced "
                                "(disconnected component with nonzero net supply)");
        }
        double candidate = needed / static_cast<double>(crossing);
        if (!(candidate > lambda))
            candidate = std::min(upper, std::max(lambda * (1.0 + 1e-12), lambda + 1e-300));
        lambda = std::min(candidate, upper);
    }
    if (!solved)
        throw numeric_error("min_congestion_flow: ratio iteration failed to converge");

    result.edge_flow = net.extract_flow(edges, lambda);
    Eigen::VectorXd resid = node_residuals(n_nodes, edges, supply, result.edge_flow);
    result.max_residual = resid.cwiseAbs().maxCoeff();
    result.lambda0 = result.edge_flow.size() ? result.edge_flow.cwiseAbs().maxCoeff() : 0.0;
    result.feasible = true;
    return result;
}

} // namespace tvmap::detail
