#pragma once

// Pearl belief propagation on directed networks: the per-node pi/lambda
// equations, a synchronous loopy-BP runner, and brute-force enumeration used
// as a reference in tests.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adbn/model/cpt.hpp"

namespace adbn::bp {

using Vector = std::vector<double>;

enum class MessageKind : std::uint8_t { Pi = 0, Lambda = 1 };

// Node id -> observed state index.
using Evidence = std::map<std::size_t, std::size_t>;

struct Belief {
  std::size_t node = 0;
  Vector p;
};

// Scales v to sum to one. Throws ZeroBelief when v has no mass.
void normalize(Vector& v);

// pi(x): indicator under evidence, otherwise
// sum_u P(x | u_1..u_j) prod_i pi_X(u_i). parent_pi holds one vector per
// parent of the CPT, in CPT parent order.
Vector pi_value(const model::Cpt& cpt, std::span<const Vector> parent_pi,
                std::optional<std::size_t> evidence = std::nullopt);

// lambda(x): indicator under evidence, otherwise the elementwise product of
// the children's lambda messages (all ones for a leaf).
Vector lambda_value(std::size_t card, std::span<const Vector> child_lambdas,
                    std::optional<std::size_t> evidence = std::nullopt);

// pi_X(u) = pi(u) * prod over the other children V of lambda_V(u).
Vector pi_message(std::span<const double> pi_of_u, std::span<const Vector> other_child_lambdas);

// lambda_Y(x) = sum_y lambda(y) sum_w P(y | x, w) prod pi_Y(w_i) for the
// parent in slot `target` of Y's CPT. parent_pi holds one vector per parent;
// the entry at `target` is ignored.
Vector lambda_message(std::span<const double> lambda_of_y, const model::Cpt& cpt,
                      std::size_t target, std::span<const Vector> parent_pi);

// Bel(x) = alpha pi(x) lambda(x). Throws ZeroBelief on contradictory input.
Vector belief(std::span<const double> pi, std::span<const double> lambda);

struct Node {
  std::string name;
  std::vector<std::size_t> parents;
  model::Cpt cpt;  // parent order matches `parents`

  std::size_t cardinality() const noexcept { return cpt.child_card(); }
};

class Network {
 public:
  std::size_t add_node(std::string name, std::vector<std::size_t> parents, model::Cpt cpt);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
  std::size_t edge_count() const noexcept { return edges_; }

  // Longest shortest path in the undirected skeleton (0 for a single node).
  std::size_t diameter() const;
  // True when the undirected skeleton has no cycle.
  bool is_polytree() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t edges_ = 0;
};

struct LbpOptions {
  std::size_t iterations = 1;
  bool normalize_messages = true;
  // Node visit order within a sweep; empty means index order.
  std::vector<std::size_t> order;
};

struct LbpResult {
  std::vector<Vector> beliefs;
  // One per directed pi or lambda computation between distinct nodes.
  std::uint64_t messages = 0;
};

// Synchronous (Jacobi) sweeps: every message is recomputed from the previous
// sweep's values, starting from all-ones messages. Throws ZeroBelief.
LbpResult lbp_run(const Network& net, const Evidence& evidence, const LbpOptions& options);

// Exact posterior marginals by summing the full joint. Throws TooLarge when
// the joint has more than max_states configurations.
std::vector<Vector> exact_enumerate(const Network& net, const Evidence& evidence,
                                    std::size_t max_states = 1'000'000);

}  // namespace adbn::bp
