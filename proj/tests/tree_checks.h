#pragma once

#include <map>
#include <set>
#include <string>

#include "packdb/btree.h"
#include "packdb/database.h"

namespace packdb::testing {

// Returns an empty string when the pages dirtied by the last operation are
// confined to the leaf, the nodes taking part in splits and merges, and their
// parents; otherwise a description of the offending page.
inline std::string check_local_balancing(const OpTrace& t) {
  std::set<PageId> allowed;
  if (!t.path.empty()) allowed.insert(t.path.back());
  for (const TraceEvent& e : t.events) {
    allowed.insert(e.node);
    if (e.sibling != 0) allowed.insert(e.sibling);
    if (e.parent != 0) allowed.insert(e.parent);
    if (e.neighbor != 0) allowed.insert(e.neighbor);
    if (e.kind == TraceEvent::Kind::kSplit && !e.parent_had_room) {
      return "split below a parent without room";
    }
  }
  for (PageId id : t.dirtied) {
    if (!allowed.count(id)) return "page " + std::to_string(id) + " dirtied";
  }
  return {};
}

// Compares every visible aspect of the database with the oracle.
inline std::string compare_with_oracle(Database& db,
                                       const std::map<Key, uint64_t>& oracle) {
  if (db.size() != oracle.size()) return "size differs";
  auto it = oracle.begin();
  uint64_t sum = 0;
  for (Cursor c = db.cursor_first(); c.valid(); c.next(), ++it) {
    if (it == oracle.end()) return "cursor yields extra keys";
    if (c.key() != it->first) return "cursor key " + std::to_string(c.key());
    if (c.record() != it->second) return "cursor record differs";
    sum += c.key();
  }
  if (it != oracle.end()) return "cursor ends early";
  if (db.sum_keys() != sum) return "sum differs";
  const auto mx = db.max_key();
  if (oracle.empty() != !mx.has_value()) return "max_key presence differs";
  if (mx && *mx != oracle.rbegin()->first) return "max_key differs";
  return {};
}

}  // namespace packdb::testing
