#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "adbn/bp.hpp"

namespace adbn::engine {

// Recipient time used for a pi message addressed to whichever subnode of the
// recipient variable binds the sender next.
inline constexpr double kFuture = std::numeric_limits<double>::infinity();

// Node variables are numbered state variables first, then sensors.
struct SubnodeId {
  std::uint32_t var = 0;
  double time = 0.0;

  bool is_future() const noexcept { return time == kFuture; }
  friend auto operator<=>(const SubnodeId&, const SubnodeId&) = default;
};

struct Message {
  bp::MessageKind kind = bp::MessageKind::Pi;
  SubnodeId sender;
  SubnodeId recipient;
  bp::Vector values;

  friend bool operator==(const Message&, const Message&) = default;
};

// Batch of messages from one supernode to another, produced by one update.
struct Communication {
  std::uint32_t sender = 0;
  std::uint32_t recipient = 0;
  double send_time = 0.0;
  std::vector<Message> messages;

  friend bool operator==(const Communication&, const Communication&) = default;
};

// Latest message per (sender, recipient, kind). Ordered by recipient first so
// everything addressed to one subnode is a contiguous range.
class MessageStore {
 public:
  void put(bp::MessageKind kind, const SubnodeId& sender, const SubnodeId& recipient,
           bp::Vector values);
  void put(const Message& m) { put(m.kind, m.sender, m.recipient, m.values); }

  const bp::Vector* find(bp::MessageKind kind, const SubnodeId& sender,
                         const SubnodeId& recipient) const;

  template <class F>
  void for_each_to(const SubnodeId& recipient, bp::MessageKind kind, F&& f) const {
    const Key lo{recipient, kind, SubnodeId{0, -kFuture}};
    for (auto it = entries_.lower_bound(lo); it != entries_.end(); ++it) {
      const auto& [r, k, s] = it->first;
      if (r != recipient || k != kind) break;
      f(s, it->second);
    }
  }

  template <class Pred>
  void erase_if(Pred&& pred) {
    for (auto it = entries_.begin(); it != entries_.end();) {
      const auto& [r, k, s] = it->first;
      it = pred(k, s, r) ? entries_.erase(it) : std::next(it);
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }

 private:
  using Key = std::tuple<SubnodeId, bp::MessageKind, SubnodeId>;  // recipient, kind, sender
  std::map<Key, bp::Vector> entries_;
};

}  // namespace adbn::engine
