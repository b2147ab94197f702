#ifndef CSEL_ORACLE_HPP
#define CSEL_ORACLE_HPP

#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <sys/types.h>
#include <unordered_map>
#include <vector>

#include "csel/core.hpp"

namespace csel {

/// Source of raw loss values. Backends are not responsible for budgeting.
class LossBackend {
 public:
  virtual ~LossBackend() = default;
  virtual double fetch(Index i) = 0;
  /// Called once the caller is done querying; reports deferred failures.
  virtual void finish() {}
};

class TableBackend final : public LossBackend {
 public:
  explicit TableBackend(LossTable table) : table_(std::move(table)) {}
  double fetch(Index i) override { return table_[i]; }

 private:
  LossTable table_;
};

/**
 * Spawns `/bin/sh -c command` and speaks the line protocol: one decimal row
 * index per line on the child's stdin, one decimal real per line back on its
 * stdout, in query order.
 */
class ProcessBackend final : public LossBackend {
 public:
  explicit ProcessBackend(const std::string& command);
  ~ProcessBackend() override;
  ProcessBackend(const ProcessBackend&) = delete;
  ProcessBackend& operator=(const ProcessBackend&) = delete;

  double fetch(Index i) override;
  void finish() override;

 private:
  int wait_child();

  pid_t pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  std::string command_;
};

/**
 * Query-counted, cached access to ℓ. A repeated query of an index is served
 * from the cache and does not count. Once `budget` distinct indices have been
 * answered, any new index throws BudgetExhausted.
 */
class LossOracle {
 public:
  LossOracle(std::unique_ptr<LossBackend> backend, Index n, Index budget);
  LossOracle(LossOracle&& other) noexcept;
  LossOracle& operator=(LossOracle&&) = delete;

  static LossOracle from_table(LossTable table, Index budget);
  static LossOracle from_command(const std::string& command, Index n, Index budget);

  double query(Index i);

  Index queries_used() const;
  Index budget() const { return budget_; }
  Index n() const { return n_; }
  std::optional<double> cached(Index i) const;
  void finish();

 private:
  std::unique_ptr<LossBackend> backend_;
  Index n_;
  Index budget_;
  mutable std::mutex mutex_;
  std::unordered_map<Index, double> cache_;
};

}  // namespace csel

#endif  // CSEL_ORACLE_HPP
