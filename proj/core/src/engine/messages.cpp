#include "adbn/engine/messages.hpp"

namespace adbn::engine {

void MessageStore::put(bp::MessageKind kind, const SubnodeId& sender, const SubnodeId& recipient,
                       bp::Vector values) {
  entries_.insert_or_assign(Key{recipient, kind, sender}, std::move(values));
}

const bp::Vector* MessageStore::find(bp::MessageKind kind, const SubnodeId& sender,
                                     const SubnodeId& recipient) const {
  auto it = entries_.find(Key{recipient, kind, sender});
  return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace adbn::engine
