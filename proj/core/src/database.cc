#include "packdb/database.h"

#include "packdb/error.h"

namespace packdb {

Database::Database(std::unique_ptr<Pager> pager)
    : pager_(std::move(pager)), tree_(std::make_unique<BTree>(*pager_)) {}

Database::Database(Database&&) noexcept = default;
Database& Database::operator=(Database&&) noexcept = default;

Database::~Database() {
  // The pager flushes on destruction; release the tree first.
  tree_.reset();
}

Database Database::create(const std::filesystem::path& path,
                          const StoreConfig& config) {
  Database db(Pager::create(path, config));
  db.pager_->flush();
  return db;
}

Database Database::open(const std::filesystem::path& path) {
  return Database(Pager::open(path));
}

Database Database::in_memory(const StoreConfig& config) {
  return Database(Pager::in_memory(config));
}

BTree& Database::live() {
  if (!pager_ || !pager_->is_open()) contract_violation("database is closed");
  return *tree_;
}

OpStatus Database::insert(Key key, uint64_t record) {
  return live().insert(key, record);
}

std::optional<uint64_t> Database::find(Key key) { return live().find(key); }

OpStatus Database::erase(Key key) { return live().erase(key); }

Cursor Database::cursor_first() { return live().cursor_first(); }

Cursor Database::cursor_lower_bound(Key key) {
  return live().cursor_lower_bound(key);
}

uint64_t Database::sum_keys() { return live().sum_keys(); }

AverageResult Database::average_where_gt(Key threshold) {
  return live().average_where_gt(threshold);
}

std::optional<Key> Database::max_key() { return live().max_key(); }

uint64_t Database::size() const { return pager_->header().key_count; }

const StoreConfig& Database::config() const { return pager_->config(); }

DbStats Database::stats() {
  DbStats s;
  s.tree = live().stats();
  s.page_count = pager_->header().page_count;
  s.free_pages = pager_->header().free_count;
  s.file_bytes = s.page_count * pager_->page_size();
  return s;
}

void Database::check_invariants() { live().check_invariants(); }

void Database::flush() {
  live();
  pager_->flush();
}

void Database::close() {
  if (pager_) pager_->close();
}

bool Database::is_open() const { return pager_ && pager_->is_open(); }

BTree& Database::tree() { return live(); }

Pager& Database::pager() {
  live();
  return *pager_;
}

}  // namespace packdb
