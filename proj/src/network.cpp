#include "neuroforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace neuroforge {

namespace {
inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

std::vector<int> topological_order(const Genome& g) {
  std::map<int, std::vector<int>> out_edges;
  std::map<int, int> in_degree;
  for (const auto& n : g.nodes) in_degree[n.id] = 0;
  for (const auto& c : g.connections) {
    if (!c.enabled) continue;
    out_edges[c.in_node].push_back(c.out_node);
    ++in_degree[c.out_node];
  }
  std::set<int> ready;
  for (const auto& [id, deg] : in_degree)
    if (deg == 0) ready.insert(id);
  std::vector<int> order;
  order.reserve(g.nodes.size());
  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    auto it = out_edges.find(id);
    if (it == out_edges.end()) continue;
    for (int succ : it->second)
      if (--in_degree[succ] == 0) ready.insert(succ);
  }
  if (order.size() != g.nodes.size())
    throw CycleError("enabled subgraph has a cycle");
  return order;
}

Network decode(const Genome& g) {
  Network net;
  std::vector<int> order = topological_order(g);

  std::map<int, int> internal;  // genome node id -> internal index
  // Inputs first (in id order), then bias, then the rest in topological
  // order, so feature vectors map onto internal indices 0..n_inputs-1.
  for (const auto& n : g.nodes)
    if (n.role == NodeRole::Input) {
      internal[n.id] = static_cast<int>(net.roles_.size());
      net.roles_.push_back(NodeRole::Input);
    }
  net.n_inputs_ = static_cast<int>(net.roles_.size());
  for (const auto& n : g.nodes)
    if (n.role == NodeRole::Bias) {
      if (net.bias_ >= 0)
        throw std::invalid_argument("genome has more than one bias node");
      net.bias_ = static_cast<int>(net.roles_.size());
      internal[n.id] = net.bias_;
      net.roles_.push_back(NodeRole::Bias);
    }
  int outputs = 0;
  for (int id : order) {
    const NodeGene* n = g.find_node(id);
    if (n->role == NodeRole::Input || n->role == NodeRole::Bias) continue;
    int idx = static_cast<int>(net.roles_.size());
    internal[id] = idx;
    net.roles_.push_back(n->role);
    net.eval_order_.push_back(idx);
    if (n->role == NodeRole::Output) {
      net.output_ = idx;
      ++outputs;
    } else {
      ++net.n_hidden_;
    }
  }
  if (outputs != 1)
    throw std::invalid_argument("phenotype requires exactly one output node");

  net.incoming_.resize(net.roles_.size());
  int weight_index = 0;
  std::vector<double> w;
  for (const auto& c : g.connections) {
    if (!c.enabled) continue;
    net.incoming_[internal[c.out_node]].push_back(
        {internal[c.in_node], weight_index});
    w.push_back(c.weight);
    ++weight_index;
  }
  net.weights_.resize(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) net.weights_[i] = w[i];
  return net;
}

void Network::forward_values(const Eigen::VectorXd& x,
                             std::vector<double>& v) const {
  if (x.size() != n_inputs_)
    throw DimensionError("feature vector size " + std::to_string(x.size()) +
                         " != input arity " + std::to_string(n_inputs_));
  v.assign(roles_.size(), 0.0);
  for (int i = 0; i < n_inputs_; ++i) v[i] = x[i];
  if (bias_ >= 0) v[bias_] = 1.0;
  for (int idx : eval_order_) {
    double z = 0.0;
    for (const auto& in : incoming_[idx]) z += weights_[in.weight_index] * v[in.source];
    v[idx] = roles_[idx] == NodeRole::Hidden ? logistic(z) : z;
  }
}

double Network::forward(const Eigen::VectorXd& x) const {
  std::vector<double> v;
  forward_values(x, v);
  return v[output_];
}

Eigen::VectorXd Network::gradient(const Eigen::VectorXd& x) const {
  std::vector<double> v;
  forward_values(x, v);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(weights_.size());
  std::vector<double> dv(roles_.size(), 0.0);
  dv[output_] = 1.0;
  for (auto it = eval_order_.rbegin(); it != eval_order_.rend(); ++it) {
    const int idx = *it;
    double d = dv[idx];
    if (d == 0.0) continue;
    if (roles_[idx] == NodeRole::Hidden) d *= v[idx] * (1.0 - v[idx]);
    for (const auto& in : incoming_[idx]) {
      grad[in.weight_index] += d * v[in.source];
      dv[in.source] += d * weights_[in.weight_index];
    }
  }
  return grad;
}

std::vector<double> node_values(const Network& net, const Eigen::VectorXd& x) {
  std::vector<double> v;
  net.forward_values(x, v);
  return v;
}

void write_back_weights(Genome& g, const Network& net) {
  int k = 0;
  for (auto& c : g.connections)
    if (c.enabled) c.weight = net.weights()[k++];
}

Eigen::VectorXd enabled_weights(const Genome& g) {
  Eigen::VectorXd w(g.enabled_count());
  int k = 0;
  for (const auto& c : g.connections)
    if (c.enabled) w[k++] = c.weight;
  return w;
}

void set_enabled_weights(Genome& g, const Eigen::VectorXd& w) {
  if (w.size() != g.enabled_count())
    throw std::invalid_argument("weight vector size mismatch");
  int k = 0;
  for (auto& c : g.connections)
    if (c.enabled) c.weight = w[k++];
}

}  // namespace neuroforge
