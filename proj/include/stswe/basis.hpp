#pragma once

// Lagrange bases on the reference triangle (0,0),(1,0),(0,1) for the lattice
// node layout: 3 vertex nodes, then (k-1) interior nodes per edge in local
// edge order (v0->v1, v1->v2, v2->v0), then interior lattice nodes.
// Coefficients against the monomial basis are obtained once per degree by
// inverting the node Vandermonde matrix.

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stswe {

class LagrangeBasis {
public:
  int degree = 1;
  std::vector<std::pair<double, double>> nodes; // reference (xi, eta)

  int n_nodes() const { return static_cast<int>(nodes.size()); }

  // values(j) = phi_j(xi, eta)
  void eval(double xi, double eta, Eigen::VectorXd& values) const {
    Eigen::VectorXd mono(n_nodes());
    monomials(xi, eta, mono);
    values.noalias() = coeff_.transpose() * mono;
  }

  // dxi(j), deta(j) = reference-coordinate gradients of phi_j
  void eval_grad(double xi, double eta, Eigen::VectorXd& dxi, Eigen::VectorXd& deta) const {
    Eigen::VectorXd mx(n_nodes()), me(n_nodes());
    monomial_grads(xi, eta, mx, me);
    dxi.noalias() = coeff_.transpose() * mx;
    deta.noalias() = coeff_.transpose() * me;
  }

  static const LagrangeBasis& get(int degree) {
    if (degree < 1 || degree > 6)
      throw std::invalid_argument("LagrangeBasis: degree must be in [1,6]");
    static const std::vector<LagrangeBasis> cache = [] {
      std::vector<LagrangeBasis> all;
      for (int d = 1; d <= 6; ++d) all.push_back(LagrangeBasis(d));
      return all;
    }();
    return cache[degree - 1];
  }

private:
  Eigen::MatrixXd coeff_;            // (n_nodes x n_nodes): column j = phi_j monomial coeffs
  std::vector<std::pair<int, int>> powers_;

  explicit LagrangeBasis(int k) : degree(k) {
    auto node = [k](int i, int j) {
      return std::make_pair(static_cast<double>(i) / k, static_cast<double>(j) / k);
    };
    nodes.push_back(node(0, 0));
    nodes.push_back(node(k, 0));
    nodes.push_back(node(0, k));
    for (int i = 1; i < k; ++i) nodes.push_back(node(i, 0));          // v0 -> v1
    for (int i = 1; i < k; ++i) nodes.push_back(node(k - i, i));      // v1 -> v2
    for (int i = 1; i < k; ++i) nodes.push_back(node(0, k - i));      // v2 -> v0
    for (int j = 1; j < k; ++j)
      for (int i = 1; i + j < k; ++i) nodes.push_back(node(i, j));
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b) powers_.emplace_back(a, b);

    const int n = n_nodes();
    Eigen::MatrixXd vand(n, n);
    Eigen::VectorXd mono(n);
    for (int r = 0; r < n; ++r) {
      monomials(nodes[r].first, nodes[r].second, mono);
      vand.row(r) = mono.transpose();
    }
    coeff_ = vand.fullPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  }

  void monomials(double xi, double eta, Eigen::VectorXd& out) const {
    for (int m = 0; m < n_nodes(); ++m)
      out(m) = std::pow(xi, powers_[m].first) * std::pow(eta, powers_[m].second);
  }

  void monomial_grads(double xi, double eta, Eigen::VectorXd& dxi, Eigen::VectorXd& deta) const {
    for (int m = 0; m < n_nodes(); ++m) {
      const int a = powers_[m].first, b = powers_[m].second;
      dxi(m) = a == 0 ? 0.0 : a * std::pow(xi, a - 1) * std::pow(eta, b);
      deta(m) = b == 0 ? 0.0 : b * std::pow(xi, a) * std::pow(eta, b - 1);
    }
  }
};

} // namespace stswe
