#include "adbn/bp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "adbn/error.hpp"

namespace adbn::bp {

void normalize(Vector& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(Errc::ZeroBelief, "vector has no probability mass");
  }
  for (double& x : v) x /= sum;
}

Vector pi_value(const model::Cpt& cpt, std::span<const Vector> parent_pi,
                std::optional<std::size_t> evidence) {
  const std::size_t card = cpt.child_card();
  if (evidence) {
    if (*evidence >= card) throw Error(Errc::DomainMismatch, "evidence index out of range");
    Vector out(card, 0.0);
    out[*evidence] = 1.0;
    return out;
  }
  const auto& cards = cpt.parent_cards();
  if (parent_pi.size() != cards.size()) {
    throw Error(Errc::DomainMismatch, "need one pi message per parent");
  }
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (parent_pi[i].size() != cards[i]) throw Error(Errc::DomainMismatch, "pi message size");
  }
  Vector out(card, 0.0);
  std::vector<std::size_t> values(cards.size(), 0);
  for (std::size_t r = 0; r < cpt.num_rows(); ++r) {
    double w = 1.0;
    for (std::size_t i = 0; i < cards.size() && w != 0.0; ++i) w *= parent_pi[i][values[i]];
    if (w != 0.0) {
      const auto row = cpt.row(r);
      for (std::size_t x = 0; x < card; ++x) out[x] += w * row[x];
    }
    // Advance the mixed-radix counter (last parent fastest).
    for (std::size_t i = cards.size(); i-- > 0;) {
      if (++values[i] < cards[i]) break;
      values[i] = 0;
    }
  }
  return out;
}

Vector lambda_value(std::size_t card, std::span<const Vector> child_lambdas,
                    std::optional<std::size_t> evidence) {
  Vector out(card, 1.0);
  if (evidence) {
    if (*evidence >= card) throw Error(Errc::DomainMismatch, "evidence index out of range");
    std::fill(out.begin(), out.end(), 0.0);
    out[*evidence] = 1.0;
    return out;
  }
  for (const auto& m : child_lambdas) {
    if (m.size() != card) throw Error(Errc::DomainMismatch, "lambda message size");
    for (std::size_t x = 0; x < card; ++x) out[x] *= m[x];
  }
  return out;
}

Vector pi_message(std::span<const double> pi_of_u, std::span<const Vector> other_child_lambdas) {
  Vector out(pi_of_u.begin(), pi_of_u.end());
  for (const auto& m : other_child_lambdas) {
    if (m.size() != out.size()) throw Error(Errc::DomainMismatch, "lambda message size");
    for (std::size_t u = 0; u < out.size(); ++u) out[u] *= m[u];
  }
  return out;
}

Vector lambda_message(std::span<const double> lambda_of_y, const model::Cpt& cpt,
                      std::size_t target, std::span<const Vector> parent_pi) {
  const std::size_t card = cpt.child_card();
  const auto& cards = cpt.parent_cards();
  if (target >= cards.size()) throw Error(Errc::DomainMismatch, "target parent out of range");
  if (lambda_of_y.size() != card) throw Error(Errc::DomainMismatch, "lambda size");
  if (parent_pi.size() != cards.size()) {
    throw Error(Errc::DomainMismatch, "need one pi slot per parent");
  }
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (i != target && parent_pi[i].size() != cards[i]) {
      throw Error(Errc::DomainMismatch, "pi message size");
    }
  }
  Vector out(cards[target], 0.0);
  std::vector<std::size_t> values(cards.size(), 0);
  for (std::size_t r = 0; r < cpt.num_rows(); ++r) {
    double w = 1.0;
    for (std::size_t i = 0; i < cards.size() && w != 0.0; ++i) {
      if (i != target) w *= parent_pi[i][values[i]];
    }
    if (w != 0.0) {
      const auto row = cpt.row(r);
      double s = 0.0;
      for (std::size_t y = 0; y < card; ++y) s += lambda_of_y[y] * row[y];
      out[values[target]] += w * s;
    }
    for (std::size_t i = cards.size(); i-- > 0;) {
      if (++values[i] < cards[i]) break;
      values[i] = 0;
    }
  }
  return out;
}

Vector belief(std::span<const double> pi, std::span<const double> lambda) {
  if (pi.size() != lambda.size()) throw Error(Errc::DomainMismatch, "pi/lambda size");
  Vector out(pi.size());
  for (std::size_t x = 0; x < pi.size(); ++x) out[x] = pi[x] * lambda[x];
  normalize(out);
  return out;
}

std::size_t Network::add_node(std::string name, std::vector<std::size_t> parents, model::Cpt cpt) {
  const std::size_t id = nodes_.size();
  if (parents.size() != cpt.num_parents()) {
    throw Error(Errc::DomainMismatch, name + ": CPT parent count mismatch");
  }
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (parents[i] >= id) throw Error(Errc::DomainMismatch, name + ": parents must precede node");
    if (nodes_[parents[i]].cardinality() != cpt.parent_cards()[i]) {
      throw Error(Errc::DomainMismatch, name + ": parent cardinality mismatch");
    }
  }
  for (std::size_t p : parents) children_[p].push_back(id);
  edges_ += parents.size();
  nodes_.push_back({std::move(name), std::move(parents), std::move(cpt)});
  children_.emplace_back();
  return id;
}

namespace {

std::vector<std::vector<std::size_t>> skeleton(const Network& net) {
  std::vector<std::vector<std::size_t>> adj(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) {
    for (std::size_t p : net.node(v).parents) {
      adj[v].push_back(p);
      adj[p].push_back(v);
    }
  }
  return adj;
}

}  // namespace

std::size_t Network::diameter() const {
  const auto adj = skeleton(*this);
  std::size_t best = 0;
  for (std::size_t s = 0; s < size(); ++s) {
    std::vector<std::size_t> dist(size(), SIZE_MAX);
    std::deque<std::size_t> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      best = std::max(best, dist[v]);
      for (std::size_t n : adj[v]) {
        if (dist[n] == SIZE_MAX) {
          dist[n] = dist[v] + 1;
          queue.push_back(n);
        }
      }
    }
  }
  return best;
}

bool Network::is_polytree() const {
  // A forest has exactly (nodes - components) edges, and parallel edges
  // between the same pair count as a cycle.
  const auto adj = skeleton(*this);
  std::vector<bool> seen(size(), false);
  std::size_t components = 0;
  for (std::size_t s = 0; s < size(); ++s) {
    if (seen[s]) continue;
    ++components;
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t n : adj[v]) {
        if (!seen[n]) {
          seen[n] = true;
          stack.push_back(n);
        }
      }
    }
  }
  return edges_ + components == size();
}

LbpResult lbp_run(const Network& net, const Evidence& evidence, const LbpOptions& options) {
  if (options.iterations < 1) throw Error(Errc::DomainMismatch, "lbp_run needs iterations >= 1");
  const std::size_t n = net.size();
  std::vector<std::optional<std::size_t>> ev(n);
  for (const auto& [node, value] : evidence) {
    if (node >= n || value >= net.node(node).cardinality()) {
      throw Error(Errc::DomainMismatch, "evidence out of range");
    }
    ev[node] = value;
  }
  std::vector<std::size_t> order = options.order;
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
  }

  // Edge e = (parent slot i of child c). pi[e] travels parent -> child,
  // lambda[e] child -> parent; both live over the parent's domain.
  struct Edge {
    std::size_t parent, child, slot;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> in_edges(n), out_edges(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& parents = net.node(c).parents;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      in_edges[c].push_back(edges.size());
      out_edges[parents[i]].push_back(edges.size());
      edges.push_back({parents[i], c, i});
    }
  }
  std::vector<Vector> pi_msg(edges.size()), lambda_msg(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t card = net.node(edges[e].parent).cardinality();
    pi_msg[e].assign(card, 1.0);
    lambda_msg[e].assign(card, 1.0);
  }

  LbpResult result;
  auto node_pi = [&](std::size_t v, const std::vector<Vector>& pis) {
    std::vector<Vector> incoming;
    incoming.reserve(in_edges[v].size());
    for (std::size_t e : in_edges[v]) incoming.push_back(pis[e]);
    return pi_value(net.node(v).cpt, incoming, ev[v]);
  };
  auto node_lambda = [&](std::size_t v, const std::vector<Vector>& lambdas) {
    std::vector<Vector> incoming;
    incoming.reserve(out_edges[v].size());
    for (std::size_t e : out_edges[v]) incoming.push_back(lambdas[e]);
    return lambda_value(net.node(v).cardinality(), incoming, ev[v]);
  };

  for (std::size_t it = 0; it < options.iterations; ++it) {
    auto next_pi = pi_msg;
    auto next_lambda = lambda_msg;
    for (std::size_t v : order) {
      const Vector pi = node_pi(v, pi_msg);
      const Vector lambda = node_lambda(v, lambda_msg);
      for (std::size_t e : out_edges[v]) {
        std::vector<Vector> others;
        if (!ev[v]) {
          for (std::size_t o : out_edges[v]) {
            if (o != e) others.push_back(lambda_msg[o]);
          }
        }
        next_pi[e] = pi_message(pi, others);
        if (options.normalize_messages) normalize(next_pi[e]);
        ++result.messages;
      }
      std::vector<Vector> incoming;
      for (std::size_t e : in_edges[v]) incoming.push_back(pi_msg[e]);
      for (std::size_t e : in_edges[v]) {
        next_lambda[e] = lambda_message(lambda, net.node(v).cpt, edges[e].slot, incoming);
        if (options.normalize_messages) normalize(next_lambda[e]);
        ++result.messages;
      }
    }
    pi_msg = std::move(next_pi);
    lambda_msg = std::move(next_lambda);
  }

  result.beliefs.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    result.beliefs[v] = belief(node_pi(v, pi_msg), node_lambda(v, lambda_msg));
  }
  return result;
}

std::vector<Vector> exact_enumerate(const Network& net, const Evidence& evidence,
                                    std::size_t max_states) {
  const std::size_t n = net.size();
  std::vector<std::size_t> cards(n);
  double total = 1.0;
  for (std::size_t v = 0; v < n; ++v) {
    cards[v] = net.node(v).cardinality();
    total *= static_cast<double>(cards[v]);
  }
  if (total > static_cast<double>(max_states)) {
    throw Error(Errc::TooLarge, "joint state space exceeds enumeration limit");
  }
  std::vector<Vector> marginals(n);
  for (std::size_t v = 0; v < n; ++v) marginals[v].assign(cards[v], 0.0);

  std::vector<std::size_t> x(n, 0);
  std::vector<std::size_t> pv;
  const auto states = static_cast<std::size_t>(total);
  for (std::size_t s = 0; s < states; ++s) {
    bool consistent = true;
    for (const auto& [node, value] : evidence) consistent = consistent && x.at(node) == value;
    if (consistent) {
      double w = 1.0;
      for (std::size_t v = 0; v < n && w != 0.0; ++v) {
        const auto& node = net.node(v);
        pv.clear();
        for (std::size_t p : node.parents) pv.push_back(x[p]);
        w *= node.cpt(x[v], node.cpt.row_index(pv));
      }
      if (w != 0.0) {
        for (std::size_t v = 0; v < n; ++v) marginals[v][x[v]] += w;
      }
    }
    for (std::size_t v = n; v-- > 0;) {
      if (++x[v] < cards[v]) break;
      x[v] = 0;
    }
  }
  for (auto& m : marginals) normalize(m);
  return marginals;
}

}  // namespace adbn::bp
