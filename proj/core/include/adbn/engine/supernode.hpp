#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "adbn/engine/layout.hpp"
#include "adbn/engine/messages.hpp"
#include "adbn/engine/plan.hpp"

namespace adbn::engine {

struct EngineConfig {
  // Subnodes kept per variable (K); 0 keeps the whole history.
  std::size_t history = 2;
  // Reporting subnode counted back from the newest; 1 is the second newest.
  std::size_t report_offset = 1;
  Approach approach = Approach::One;
  // Local LBP sweeps in supernodes with more than one variable.
  std::size_t local_sweeps = 5;
  // Time of the implicit subnode carrying each variable's initial distribution.
  double origin_time = 0.0;
};

struct Report {
  std::size_t var = 0;
  double time = 0.0;  // timestamp of the reporting subnode
  bp::Vector belief;
};

struct UpdateResult {
  // One per neighbouring supernode, ascending by recipient.
  std::vector<Communication> outgoing;
  // One per member variable.
  std::vector<Report> reports;
  std::uint64_t messages = 0;
};

struct SubnodeInfo {
  SubnodeId id;
  bool intermediate = false;
  std::vector<SubnodeId> parents;
  model::Cpt cpt;
  bp::Vector belief;
};

// One supernode: a bounded chain of subnodes per member variable, the sensor
// subnodes attached to them, and the messages received from neighbours.
class Supernode {
 public:
  Supernode(std::shared_ptr<const Layout> layout, std::uint32_t id, EngineConfig config = {});

  std::uint32_t id() const noexcept { return id_; }
  const EngineConfig& config() const noexcept { return config_; }
  const Layout& layout() const noexcept { return *layout_; }
  const std::vector<std::size_t>& variables() const { return layout_->members(id_); }

  // Creates subnodes at `now`, runs local inference and returns the outgoing
  // communications. readings[s] is the current value of sensor s (only the
  // sensors owned here are read). Throws ClockNotMonotone or ZeroBelief.
  UpdateResult update(double now, std::span<const std::optional<std::size_t>> readings,
                      std::span<const Communication> inbox);

  // Throws EmptyHistory before the first update.
  Report report(std::size_t var) const;
  std::optional<bp::Vector> belief_at(std::size_t var, double time) const;
  // Live subnodes of a state variable in time order, intermediates included.
  std::vector<SubnodeInfo> history(std::size_t var) const;
  // Live non-intermediate subnodes of var.
  std::size_t history_size(std::size_t var) const;
  // Frozen pi message into the oldest live subnode of var from its phased-out
  // predecessor; null while the predecessor is the initial distribution.
  const bp::Vector* tail_message(std::size_t var) const;

  const MessageStore& inbox() const noexcept { return store_; }
  std::uint64_t message_count() const noexcept { return messages_; }
  double last_update() const noexcept { return last_now_; }

 private:
  struct Sub {
    SubnodeId id;
    bool sensor = false;
    bool intermediate = false;
    std::optional<std::size_t> evidence;
    model::Cpt cpt;
    std::vector<SubnodeId> parents;
    bp::Vector pi;
    bp::Vector lambda;
    bp::Vector belief;
  };
  using Entries = std::vector<std::pair<SubnodeId, bp::Vector>>;

  bool local(std::uint32_t node) const { return in_group_[node]; }
  bool live(const SubnodeId& id) const { return index_.count(id) != 0; }
  bool newest(const Sub& s) const;

  void absorb(std::span<const Communication> inbox);
  void phase_out();
  void create(double now, std::span<const std::optional<std::size_t>> readings);
  void reindex();
  void forward(std::uint64_t& count);
  void backward(std::uint64_t& count);
  std::vector<Communication> emit(double now, std::uint64_t& count);
  void prune();

  bp::Vector incoming_pi(const Sub& s, std::size_t slot) const;
  std::vector<bp::Vector> incoming_pis(const Sub& s) const;
  Entries lambda_entries(const Sub& s) const;
  bp::Vector lambda_of(const Sub& s, const Entries& entries) const;

  std::shared_ptr<const Layout> layout_;
  std::uint32_t id_;
  EngineConfig config_;
  std::vector<bool> in_group_;
  std::vector<Sub> subs_;
  std::map<SubnodeId, std::size_t> index_;
  // (child index, parent slot) per live subnode, for children held locally.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> local_children_;
  // Known update times per state variable, ascending.
  std::map<std::uint32_t, std::vector<double>> known_;
  std::map<std::size_t, double> last_time_;
  MessageStore store_;  // received from other supernodes
  MessageStore local_;  // between this supernode's own subnodes
  std::uint64_t messages_ = 0;
  double last_now_;
};

std::vector<Supernode> make_supernodes(const std::shared_ptr<const Layout>& layout,
                                       const EngineConfig& config);

}  // namespace adbn::engine
