#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace graphflow {

/// A function on the vertex set, indexed by the graph's vertex order.
using VertexFunction = Eigen::VectorXd;

struct Edge {
    int a;
    int b;
    double w;
};

/// Connected finite graph with positive vertex measure mu and symmetric
/// positive edge weights. Vertex order is fixed at construction and all
/// VertexFunction vectors index by it.
class WeightedGraph {
  public:
    WeightedGraph(std::vector<std::string> ids, Eigen::VectorXd mu,
                  const std::vector<std::tuple<std::string, std::string, double>>& edges);

    int size() const { return static_cast<int>(ids_.size()); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id(int i) const { return ids_[i]; }
    int indexOf(const std::string& id) const;  // -1 if absent
    const Eigen::VectorXd& mu() const { return mu_; }
    const std::vector<Edge>& edges() const { return edges_; }
    /// Neighbors of vertex i as (j, w_ij) pairs.
    const std::vector<std::pair<int, double>>& neighbors(int i) const { return adj_[i]; }
    /// |V| = sum_x mu(x), the volume of the graph.
    double volume() const { return volume_; }

  private:
    std::vector<std::string> ids_;
    Eigen::VectorXd mu_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    double volume_ = 0.0;
};

/// Throws std::invalid_argument if u is not defined on exactly g's vertex set.
void checkDomain(const WeightedGraph& g, const VertexFunction& u, const char* what);

/// Delta u(x) = (1/mu(x)) sum_{y~x} w_xy (u(y) - u(x)).
VertexFunction laplacian(const WeightedGraph& g, const VertexFunction& u);

/// Gradient form Gamma(u,v)(x) = (1/2mu(x)) sum_{y~x} w_xy (u(y)-u(x))(v(y)-v(x)).
VertexFunction gradientForm(const WeightedGraph& g, const VertexFunction& u,
                            const VertexFunction& v);

/// |grad u|^2(x) = Gamma(u,u)(x), pointwise nonnegative.
VertexFunction gradientNormSq(const WeightedGraph& g, const VertexFunction& u);

/// int_V f dmu = sum_x mu(x) f(x).
double integral(const WeightedGraph& g, const VertexFunction& f);

/// Dirichlet energy int_V |grad u|^2 dmu, accumulated edgewise.
double dirichletEnergy(const WeightedGraph& g, const VertexFunction& u);

/// W^{1,2} norm ( int (|grad u|^2 + u^2) dmu )^{1/2}.
double sobolevNorm(const WeightedGraph& g, const VertexFunction& u);

/// Mean value (1/|V|) int_V u dmu.
double meanValue(const WeightedGraph& g, const VertexFunction& u);

/// Smallest nonzero eigenvalue of the negative mu-weighted Laplacian together
/// with its eigenfunction, from a dense symmetric eigensolve of
/// D^{1/2} (-Delta) D^{-1/2} where D = diag(mu). Requires at least 2 vertices.
std::pair<double, VertexFunction> firstEigenpair(const WeightedGraph& g);

double firstEigenvalue(const WeightedGraph& g);

}  // namespace graphflow
