#include "csel/core.hpp"

#include <algorithm>
#include <thread>

namespace csel {

Dataset::Dataset(MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw DataError("dataset must have at least one row and one column");
  }
  if (!rows_.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
}

LossTable::LossTable(VectorXd losses) : losses_(std::move(losses)) {
  for (Index i = 0; i < losses_.size(); ++i) {
    if (!std::isfinite(losses_[i]) || losses_[i] < 0.0) {
      throw DataError("loss " + std::to_string(i) + " is negative or non-finite");
    }
  }
}

double stable_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double stable_sum(const VectorXd& values) {
  return stable_sum(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

void parallel_for(Index n, int threads, const std::function<void(Index, Index)>& fn) {
  if (n <= 0) return;
  const Index workers = std::min<Index>(std::max(threads, 1), n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& t : pool) t.join();
}

}  // namespace csel
