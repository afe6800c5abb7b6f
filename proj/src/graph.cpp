#include "graphflow/graph.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace graphflow {

namespace {

std::unordered_map<std::string, int> buildIndex(const std::vector<std::string>& ids) {
    std::unordered_map<std::string, int> index;
    index.reserve(ids.size());
    for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
        if (!index.emplace(ids[i], i).second)
            throw std::invalid_argument("graph: duplicate vertex id '" + ids[i] + "'");
    }
    return index;
}

}  // namespace

WeightedGraph::WeightedGraph(std::vector<std::string> ids, Eigen::VectorXd mu,
                             const std::vector<std::tuple<std::string, std::string, double>>& edges)
    : ids_(std::move(ids)), mu_(std::move(mu)) {
    const int n = static_cast<int>(ids_.size());
    if (n < 1) throw std::invalid_argument("graph: vertex set is empty");
    if (mu_.size() != n)
        throw std::invalid_argument("graph: measure vector size does not match vertex count");
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(mu_[i]) || mu_[i] <= 0.0)
            throw std::invalid_argument("graph: mu('" + ids_[i] + "') must be positive and finite");
    }
    volume_ = mu_.sum();

    auto index = buildIndex(ids_);
    adj_.resize(n);
    std::set<std::pair<int, int>> seen;
    for (const auto& [ida, idb, w] : edges) {
        auto ia = index.find(ida);
        auto ib = index.find(idb);
        if (ia == index.end())
            throw std::invalid_argument("graph: edge endpoint '" + ida + "' is not a vertex");
        if (ib == index.end())
            throw std::invalid_argument("graph: edge endpoint '" + idb + "' is not a vertex");
        int a = ia->second, b = ib->second;
        if (a == b)
            throw std::invalid_argument("graph: self-loop at vertex '" + ida + "' rejected");
        if (!std::isfinite(w) || w <= 0.0)
            throw std::invalid_argument("graph: weight of edge (" + ida + "," + idb +
                                        ") must be positive and finite");
        auto key = std::minmax(a, b);
        if (!seen.insert(key).second)
            throw std::invalid_argument("graph: duplicate edge (" + ida + "," + idb + ")");
        edges_.push_back({key.first, key.second, w});
        adj_[a].emplace_back(b, w);
        adj_[b].emplace_back(a, w);
    }

    // connectivity by breadth-first traversal
    std::vector<char> reached(n, 0);
    std::deque<int> queue{0};
    reached[0] = 1;
    int count = 1;
    while (!queue.empty()) {
        int x = queue.front();
        queue.pop_front();
        for (const auto& [y, w] : adj_[x]) {
            if (!reached[y]) {
                reached[y] = 1;
                ++count;
                queue.push_back(y);
            }
        }
    }
    if (count != n) throw std::invalid_argument("graph: not connected");
}

int WeightedGraph::indexOf(const std::string& id) const {
    for (int i = 0; i < size(); ++i)
        if (ids_[i] == id) return i;
    return -1;
}

void checkDomain(const WeightedGraph& g, const VertexFunction& u, const char* what) {
    if (u.size() != g.size())
        throw std::invalid_argument(std::string(what) + ": function has " +
                                    std::to_string(u.size()) + " values but the graph has " +
                                    std::to_string(g.size()) + " vertices");
}

VertexFunction laplacian(const WeightedGraph& g, const VertexFunction& u) {
    checkDomain(g, u, "laplacian");
    VertexFunction out = VertexFunction::Zero(g.size());
    for (int x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (const auto& [y, w] : g.neighbors(x)) acc += w * (u[y] - u[x]);
        out[x] = acc / g.mu()[x];
    }
    return out;
}

VertexFunction gradientForm(const WeightedGraph& g, const VertexFunction& u,
                            const VertexFunction& v) {
    checkDomain(g, u, "gradientForm");
    checkDomain(g, v, "gradientForm");
    VertexFunction out = VertexFunction::Zero(g.size());
    for (int x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        // grouping the difference product keeps Gamma(u,v) == Gamma(v,u) exact
        for (const auto& [y, w] : g.neighbors(x)) acc += w * ((u[y] - u[x]) * (v[y] - v[x]));
        out[x] = acc / (2.0 * g.mu()[x]);
    }
    return out;
}

VertexFunction gradientNormSq(const WeightedGraph& g, const VertexFunction& u) {
    return gradientForm(g, u, u);
}

double integral(const WeightedGraph& g, const VertexFunction& f) {
    checkDomain(g, f, "integral");
    return g.mu().dot(f);
}

double dirichletEnergy(const WeightedGraph& g, const VertexFunction& u) {
    checkDomain(g, u, "dirichletEnergy");
    double acc = 0.0;
    for (const Edge& e : g.edges()) {
        double d = u[e.b] - u[e.a];
        acc += e.w * d * d;
    }
    return acc;
}

double sobolevNorm(const WeightedGraph& g, const VertexFunction& u) {
    return std::sqrt(dirichletEnergy(g, u) + g.mu().dot(u.cwiseProduct(u)));
}

double meanValue(const WeightedGraph& g, const VertexFunction& u) {
    return integral(g, u) / g.volume();
}

std::pair<double, VertexFunction> firstEigenpair(const WeightedGraph& g) {
    const int n = g.size();
    if (n < 2)
        throw std::invalid_argument("firstEigenpair: graph must have at least 2 vertices");

    // A = D^{-1/2} L0 D^{-1/2} with L0 the combinatorial weighted Laplacian;
    // this is the similarity transform of -Delta = D^{-1} L0.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd sqrtMu = g.mu().cwiseSqrt();
    for (const Edge& e : g.edges()) {
        double s = e.w / (sqrtMu[e.a] * sqrtMu[e.b]);
        a(e.a, e.b) -= s;
        a(e.b, e.a) -= s;
        a(e.a, e.a) += e.w / g.mu()[e.a];
        a(e.b, e.b) += e.w / g.mu()[e.b];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("firstEigenpair: eigensolve failed");
    double lambda1 = solver.eigenvalues()[1];
    VertexFunction v = solver.eigenvectors().col(1).cwiseQuotient(sqrtMu);
    return {lambda1, v};
}

double firstEigenvalue(const WeightedGraph& g) { return firstEigenpair(g).first; }

}  // namespace graphflow
