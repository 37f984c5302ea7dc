#include "adbn/engine/supernode.hpp"

#include <algorithm>
#include <tuple>

#include "adbn/error.hpp"

namespace adbn::engine {

using bp::MessageKind;
using bp::Vector;

namespace {

Vector pi_except(const Vector& pi, const std::vector<std::pair<SubnodeId, Vector>>& entries,
                 const SubnodeId* exclude) {
  Vector out = pi;
  for (const auto& [sender, m] : entries) {
    if (exclude && sender == *exclude) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= m[i];
  }
  bp::normalize(out);
  return out;
}

}  // namespace

Supernode::Supernode(std::shared_ptr<const Layout> layout, std::uint32_t id, EngineConfig config)
    : layout_(std::move(layout)), id_(id), config_(config), last_now_(config.origin_time) {
  if (!layout_ || id_ >= layout_->size()) throw Error(Errc::DomainMismatch, "unknown supernode id");
  in_group_.assign(layout_->num_nodes(), false);
  for (std::size_t v : layout_->members(id_)) {
    in_group_[v] = true;
    last_time_[v] = config_.origin_time;
  }
  for (std::size_t s : layout_->sensors(id_)) in_group_[layout_->num_state_vars() + s] = true;
}

bool Supernode::newest(const Sub& s) const {
  return !s.sensor && !s.intermediate && s.id.time == last_now_;
}

UpdateResult Supernode::update(double now, std::span<const std::optional<std::size_t>> readings,
                               std::span<const Communication> inbox) {
  if (!(now > last_now_)) {
    throw Error(Errc::ClockNotMonotone, "update time must exceed the previous update");
  }
  absorb(inbox);
  phase_out();
  create(now, readings);
  last_now_ = now;
  reindex();

  UpdateResult result;
  const std::size_t sweeps = variables().size() > 1 ? std::max<std::size_t>(1, config_.local_sweeps) : 1;
  for (std::size_t i = 0; i < sweeps; ++i) {
    forward(result.messages);
    backward(result.messages);
  }
  result.outgoing = emit(now, result.messages);
  prune();
  messages_ += result.messages;
  for (std::size_t v : variables()) result.reports.push_back(report(v));
  return result;
}

void Supernode::absorb(std::span<const Communication> inbox) {
  for (const auto& c : inbox) {
    if (c.recipient != id_) throw Error(Errc::DomainMismatch, "communication for another supernode");
    for (const auto& m : c.messages) {
      if (m.recipient.var >= in_group_.size() || !local(m.recipient.var)) {
        throw Error(Errc::DomainMismatch, "message addressed to a foreign variable");
      }
      if (m.kind == MessageKind::Pi) {
        auto& times = known_[m.sender.var];
        auto it = std::lower_bound(times.begin(), times.end(), m.sender.time);
        if (it == times.end() || *it != m.sender.time) times.insert(it, m.sender.time);
        if (m.recipient.is_future() || live(m.recipient)) store_.put(m);
      } else if (live(m.recipient)) {
        store_.put(m);
      }
    }
  }
}

void Supernode::phase_out() {
  if (config_.history == 0) return;
  std::vector<SubnodeId> doomed;
  for (std::size_t v : variables()) {
    std::vector<double> times;
    for (const auto& s : subs_) {
      if (!s.sensor && !s.intermediate && s.id.var == v) times.push_back(s.id.time);
    }
    if (times.size() < config_.history) continue;
    // Keep history-1 so the new subnode brings the count back to K.
    const std::size_t drop = times.size() - config_.history + 1;
    const double keep_from = drop < times.size() ? times[drop] : kFuture;
    for (const auto& s : subs_) {
      const bool mine = s.sensor ? s.parents.front().var == v : s.id.var == v;
      if (mine && s.id.time < keep_from) doomed.push_back(s.id);
    }
  }
  std::erase_if(subs_, [&](const Sub& s) {
    return std::find(doomed.begin(), doomed.end(), s.id) != doomed.end();
  });
}

void Supernode::create(double now, std::span<const std::optional<std::size_t>> readings) {
  const Layout& L = *layout_;
  const auto& spec = L.spec();
  for (std::size_t v : variables()) {
    std::vector<std::vector<double>> parent_updates;
    for (std::size_t p : spec.parents[v]) {
      auto it = known_.find(static_cast<std::uint32_t>(p));
      parent_updates.push_back(it == known_.end() ? std::vector<double>{} : it->second);
    }
    for (auto& plan : plan_update(config_.approach, spec, v, last_time_[v], now, parent_updates,
                                  config_.origin_time)) {
      Sub s;
      s.id = {static_cast<std::uint32_t>(v), plan.time};
      s.intermediate = plan.intermediate;
      s.cpt = std::move(plan.cpt);
      s.parents = std::move(plan.bindings);
      subs_.push_back(std::move(s));
    }
  }
  for (std::size_t v : variables()) {
    last_time_[v] = now;
    known_[static_cast<std::uint32_t>(v)].push_back(now);
  }
  const auto V = static_cast<std::uint32_t>(L.num_state_vars());
  for (std::size_t si : L.sensors(id_)) {
    const auto& sensor = L.domain().observations.sensors[si];
    Sub s;
    s.id = {V + static_cast<std::uint32_t>(si), now};
    s.sensor = true;
    s.cpt = sensor.cpt;
    for (std::size_t p : sensor.parents) {
      const auto pv = static_cast<std::uint32_t>(p);
      if (local(pv)) {
        s.parents.push_back({pv, now});
      } else {
        auto it = known_.find(pv);
        const std::vector<double> none;
        s.parents.push_back(bind_latest(pv, it == known_.end() ? none : it->second, now,
                                        config_.origin_time));
      }
    }
    if (si < readings.size() && readings[si]) {
      if (*readings[si] >= sensor.cardinality()) {
        throw Error(Errc::DomainMismatch, sensor.name + ": reading out of range");
      }
      s.evidence = readings[si];
    }
    subs_.push_back(std::move(s));
  }
  std::stable_sort(subs_.begin(), subs_.end(), [](const Sub& a, const Sub& b) {
    return std::tie(a.id.time, a.sensor, a.id.var) < std::tie(b.id.time, b.sensor, b.id.var);
  });
}

void Supernode::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < subs_.size(); ++i) index_[subs_[i].id] = i;
  local_children_.assign(subs_.size(), {});
  for (std::size_t c = 0; c < subs_.size(); ++c) {
    const auto& parents = subs_[c].parents;
    for (std::size_t slot = 0; slot < parents.size(); ++slot) {
      auto it = index_.find(parents[slot]);
      if (it != index_.end()) local_children_[it->second].push_back({c, slot});
    }
  }
}

Vector Supernode::incoming_pi(const Sub& s, std::size_t slot) const {
  const SubnodeId& p = s.parents[slot];
  const MessageStore& from = local(p.var) ? local_ : store_;
  if (const Vector* m = from.find(MessageKind::Pi, p, s.id)) return *m;
  if (const Vector* m = from.find(MessageKind::Pi, p, {s.id.var, kFuture})) return *m;
  return layout_->spec().variables.at(p.var).initial;
}

std::vector<Vector> Supernode::incoming_pis(const Sub& s) const {
  std::vector<Vector> out;
  out.reserve(s.parents.size());
  for (std::size_t i = 0; i < s.parents.size(); ++i) out.push_back(incoming_pi(s, i));
  return out;
}

Supernode::Entries Supernode::lambda_entries(const Sub& s) const {
  Entries out;
  auto collect = [&](const SubnodeId& sender, const Vector& m) { out.emplace_back(sender, m); };
  local_.for_each_to(s.id, MessageKind::Lambda, collect);
  store_.for_each_to(s.id, MessageKind::Lambda, collect);
  return out;
}

Vector Supernode::lambda_of(const Sub& s, const Entries& entries) const {
  const std::size_t card = s.cpt.child_card();
  if (s.evidence) return bp::lambda_value(card, {}, s.evidence);
  Vector out(card, 1.0);
  for (const auto& [sender, m] : entries) {
    for (std::size_t i = 0; i < card; ++i) out[i] *= m[i];
  }
  return out;
}

void Supernode::forward(std::uint64_t& count) {
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    Sub& v = subs_[i];
    if (v.sensor) continue;
    for (auto [c, slot] : local_children_[i]) {
      const Sub& child = subs_[c];
      if (!child.sensor) continue;
      Vector m = bp::lambda_message(lambda_of(child, {}), child.cpt, slot, incoming_pis(child));
      bp::normalize(m);
      local_.put(MessageKind::Lambda, child.id, v.id, std::move(m));
      ++count;
    }
    v.pi = bp::pi_value(v.cpt, incoming_pis(v));
    const Entries entries = lambda_entries(v);
    for (auto [c, slot] : local_children_[i]) {
      const Sub& child = subs_[c];
      if (child.sensor) continue;
      local_.put(MessageKind::Pi, v.id, child.id, pi_except(v.pi, entries, &child.id));
      ++count;
    }
    if (newest(v)) {
      // Feeds the next subnode of this variable; becomes the tail message if
      // v is phased out before that subnode exists.
      const Vector m = pi_except(v.pi, entries, nullptr);
      local_.put(MessageKind::Pi, v.id, {v.id.var, kFuture}, m);
      ++count;
      if (config_.history == 1) {
        for (std::uint32_t w : layout_->children(v.id.var)) {
          if (local(w) && !layout_->is_sensor(w)) {
            local_.put(MessageKind::Pi, v.id, {w, kFuture}, m);
            ++count;
          }
        }
      }
    }
  }
}

void Supernode::backward(std::uint64_t& count) {
  for (std::size_t i = subs_.size(); i-- > 0;) {
    Sub& v = subs_[i];
    if (v.sensor) continue;
    const Entries entries = lambda_entries(v);
    v.lambda = lambda_of(v, entries);
    const auto pis = incoming_pis(v);
    for (std::size_t slot = 0; slot < v.parents.size(); ++slot) {
      const SubnodeId& p = v.parents[slot];
      if (!local(p.var)) continue;
      Vector m = bp::lambda_message(v.lambda, v.cpt, slot, pis);
      bp::normalize(m);
      ++count;
      if (live(p)) local_.put(MessageKind::Lambda, v.id, p, std::move(m));
    }
    v.belief = bp::belief(v.pi, v.lambda);
    for (auto [c, slot] : local_children_[i]) {
      const Sub& child = subs_[c];
      if (!child.sensor) continue;
      local_.put(MessageKind::Pi, v.id, child.id, pi_except(v.pi, entries, &child.id));
      ++count;
    }
  }
}

std::vector<Communication> Supernode::emit(double now, std::uint64_t& count) {
  const Layout& L = *layout_;
  std::map<std::uint32_t, Communication> out;
  for (std::uint32_t n : L.neighbors(id_)) out[n] = Communication{id_, n, now, {}};
  auto send = [&](MessageKind kind, const SubnodeId& from, const SubnodeId& to, Vector values) {
    out.at(L.owner(to.var)).messages.push_back({kind, from, to, std::move(values)});
    ++count;
  };

  for (const Sub& v : subs_) {
    if (v.intermediate) continue;
    const Entries entries = v.sensor ? Entries{} : lambda_entries(v);
    const Vector lambda = v.sensor ? lambda_of(v, entries) : v.lambda;
    const auto pis = incoming_pis(v);
    for (std::size_t slot = 0; slot < v.parents.size(); ++slot) {
      const SubnodeId& p = v.parents[slot];
      if (local(p.var)) continue;
      Vector m = bp::lambda_message(lambda, v.cpt, slot, pis);
      bp::normalize(m);
      send(MessageKind::Lambda, v.id, p, std::move(m));
    }
    if (v.sensor) continue;
    for (const auto& [child, m] : entries) {
      if (local(child.var)) continue;
      send(MessageKind::Pi, v.id, child, pi_except(v.pi, entries, &child));
    }
    if (newest(v)) {
      const Vector m = pi_except(v.pi, entries, nullptr);
      for (std::uint32_t w : L.children(v.id.var)) {
        if (!local(w)) send(MessageKind::Pi, v.id, {w, kFuture}, m);
      }
    }
  }
  std::vector<Communication> result;
  for (auto& [n, c] : out) result.push_back(std::move(c));
  return result;
}

void Supernode::prune() {
  // Earliest update of each variable that a live subnode is still bound to;
  // later subnodes only ever bind to the same or newer updates.
  std::map<std::uint32_t, double> needed;
  for (const auto& s : subs_) {
    for (const auto& p : s.parents) {
      auto [it, inserted] = needed.emplace(p.var, p.time);
      if (!inserted) it->second = std::min(it->second, p.time);
    }
  }
  for (auto& [var, times] : known_) {
    if (times.empty()) continue;
    auto it = needed.find(var);
    const double keep_from = it == needed.end() ? times.back() : std::min(it->second, times.back());
    std::erase_if(times, [&](double t) { return t < keep_from; });
  }
  auto stale_sender = [&](const SubnodeId& sender) {
    auto it = known_.find(sender.var);
    return it != known_.end() && !it->second.empty() && sender.time < it->second.front();
  };
  store_.erase_if([&](MessageKind, const SubnodeId& sender, const SubnodeId& recipient) {
    if (recipient.is_future()) return stale_sender(sender);
    return !live(recipient);
  });
  local_.erase_if([&](MessageKind, const SubnodeId& sender, const SubnodeId& recipient) {
    if (recipient.is_future()) {
      auto it = last_time_.find(sender.var);
      return it == last_time_.end() || sender.time != it->second;
    }
    return !live(recipient);
  });
}

Report Supernode::report(std::size_t var) const {
  std::vector<const Sub*> chain;
  for (const auto& s : subs_) {
    if (!s.sensor && !s.intermediate && s.id.var == var) chain.push_back(&s);
  }
  if (chain.empty()) throw Error(Errc::EmptyHistory, "no subnode to report from");
  const std::size_t back = std::min(config_.report_offset, chain.size() - 1);
  const Sub& s = *chain[chain.size() - 1 - back];
  return {var, s.id.time, s.belief};
}

std::optional<Vector> Supernode::belief_at(std::size_t var, double time) const {
  auto it = index_.find(SubnodeId{static_cast<std::uint32_t>(var), time});
  if (it == index_.end()) return std::nullopt;
  return subs_[it->second].belief;
}

std::vector<SubnodeInfo> Supernode::history(std::size_t var) const {
  std::vector<SubnodeInfo> out;
  for (const auto& s : subs_) {
    if (!s.sensor && s.id.var == var) out.push_back({s.id, s.intermediate, s.parents, s.cpt, s.belief});
  }
  return out;
}

std::size_t Supernode::history_size(std::size_t var) const {
  return static_cast<std::size_t>(std::count_if(subs_.begin(), subs_.end(), [&](const Sub& s) {
    return !s.sensor && !s.intermediate && s.id.var == var;
  }));
}

const Vector* Supernode::tail_message(std::size_t var) const {
  for (const auto& s : subs_) {
    if (s.sensor || s.id.var != var) continue;
    const SubnodeId& p = s.parents.front();
    if (live(p)) return nullptr;
    if (const Vector* m = local_.find(MessageKind::Pi, p, s.id)) return m;
    return local_.find(MessageKind::Pi, p, {s.id.var, kFuture});
  }
  return nullptr;
}

std::vector<Supernode> make_supernodes(const std::shared_ptr<const Layout>& layout,
                                       const EngineConfig& config) {
  std::vector<Supernode> out;
  out.reserve(layout->size());
  for (std::size_t i = 0; i < layout->size(); ++i) {
    out.emplace_back(layout, static_cast<std::uint32_t>(i), config);
  }
  return out;
}

}  // namespace adbn::engine
