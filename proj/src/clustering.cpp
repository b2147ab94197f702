#include "csel/clustering.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace csel {
namespace {

void check_z(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DataError("clustering power z must be positive");
}

void check_k(const Dataset& data, Index k) {
  if (k < 1 || k > data.n()) {
    throw DataError("k = " + std::to_string(k) + " outside [1, " + std::to_string(data.n()) + "]");
  }
}

// Exact medoid of `members` under distance^z. Members are ascending, so the
// strict comparison keeps the lowest index on ties.
std::pair<Index, double> medoid_of(const Dataset& data, const std::vector<Index>& members, double z) {
  Index best = kNoRow;
  double best_cost = std::numeric_limits<double>::infinity();
  for (Index candidate : members) {
    CompensatedSum acc;
    for (Index other : members) acc.add(pow_dist(data.row(candidate), data.row(other), z));
    const double c = acc.value();
    if (c < best_cost) {
      best_cost = c;
      best = candidate;
    }
  }
  return {best, best_cost};
}

}  // namespace

bool CenterList::snapped() const {
  return !rows.empty() && std::none_of(rows.begin(), rows.end(), [](Index r) { return r == kNoRow; });
}

CenterList CenterList::prefix(Index j) const {
  if (j < 1 || j > size()) throw DataError("prefix length out of range");
  CenterList out;
  out.positions = positions.topRows(j);
  out.rows.assign(rows.begin(), rows.begin() + j);
  return out;
}

CenterList CenterList::from_rows(const Dataset& data, const std::vector<Index>& rows) {
  CenterList out;
  out.positions.resize(static_cast<Index>(rows.size()), data.d());
  out.rows = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= data.n()) throw DataError("center row out of range");
    out.positions.row(static_cast<Index>(i)) = data.row(rows[i]);
  }
  return out;
}

double Clustering::total_cost() const { return stable_sum(cluster_cost); }

std::vector<std::vector<Index>> Clustering::members() const {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(k()));
  for (Index e = 0; e < static_cast<Index>(assignment.size()); ++e) {
    out[static_cast<std::size_t>(assignment[static_cast<std::size_t>(e)])].push_back(e);
  }
  return out;
}

std::pair<Index, double> nearest_center(const Dataset& data, Index point, const MatrixXd& centers,
                                        double z) {
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c) {
    const double dist = pow_dist(data.row(point), centers.row(c), z);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return {best, best_d};
}

Clustering assign(const Dataset& data, CenterList centers, double z, int threads) {
  check_z(z);
  if (centers.size() < 1) throw DataError("empty center list");
  if (centers.positions.cols() != data.d()) throw DataError("center dimension mismatch");
  if (centers.rows.size() != static_cast<std::size_t>(centers.size())) {
    centers.rows.assign(static_cast<std::size_t>(centers.size()), kNoRow);
  }

  const Index n = data.n();
  const Index k = centers.size();
  std::vector<Index> assignment(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](Index begin, Index end) {
    for (Index e = begin; e < end; ++e) {
      auto [c, d] = nearest_center(data, e, centers.positions, z);
      assignment[static_cast<std::size_t>(e)] = c;
      dist[static_cast<std::size_t>(e)] = d;
    }
  });

  std::vector<CompensatedSum> acc(static_cast<std::size_t>(k));
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index e = 0; e < n; ++e) {
    const auto c = static_cast<std::size_t>(assignment[static_cast<std::size_t>(e)]);
    acc[c].add(dist[static_cast<std::size_t>(e)]);
    ++sizes[c];
  }

  Clustering out;
  out.centers = std::move(centers);
  out.assignment = std::move(assignment);
  out.cluster_cost.resize(k);
  for (Index c = 0; c < k; ++c) out.cluster_cost[c] = acc[static_cast<std::size_t>(c)].value();
  out.cluster_size = std::move(sizes);
  out.z = z;
  return out;
}

CenterList dz_seed(const Dataset& data, Index k, double z, RngStream& rng) {
  check_k(data, k);
  check_z(z);
  const Index n = data.n();
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<double> mindist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  auto take = [&](Index idx) {
    chosen.push_back(idx);
    taken[static_cast<std::size_t>(idx)] = 1;
    for (Index e = 0; e < n; ++e) {
      const double d = pow_dist(data.row(e), data.row(idx), z);
      auto& m = mindist[static_cast<std::size_t>(e)];
      if (d < m) m = d;
    }
  };

  take(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  while (static_cast<Index>(chosen.size()) < k) {
    const double total = stable_sum(mindist);
    Index pick = kNoRow;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      Index last_positive = kNoRow;
      for (Index e = 0; e < n; ++e) {
        const double m = mindist[static_cast<std::size_t>(e)];
        if (m <= 0.0) continue;
        last_positive = e;
        running += m;
        if (running > target) {
          pick = e;
          break;
        }
      }
      if (pick == kNoRow) pick = last_positive;
    } else {
      // Only duplicates of chosen centers remain; fill uniformly from unused rows.
      const Index remaining = n - static_cast<Index>(chosen.size());
      auto r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(remaining)));
      for (Index e = 0; e < n; ++e) {
        if (taken[static_cast<std::size_t>(e)]) continue;
        if (r-- == 0) {
          pick = e;
          break;
        }
      }
    }
    take(pick);
  }
  return CenterList::from_rows(data, chosen);
}

Clustering refine(const Dataset& data, CenterList centers, double z, const ClusteringOptions& options) {
  check_z(z);
  if (centers.size() < 1) throw DataError("refine needs at least one center");
  Clustering current = assign(data, std::move(centers), z, options.threads);
  const Index k = current.k();
  double prev = current.total_cost();

  for (int iter = 1; iter <= std::max(options.max_iters, 1); ++iter) {
    CenterList next = current.centers;
    auto groups = current.members();

    // Reseed empty clusters at the point farthest from its current center.
    std::vector<char> reseeded(static_cast<std::size_t>(data.n()), 0);
    for (Index c = 0; c < k; ++c) {
      if (!groups[static_cast<std::size_t>(c)].empty()) continue;
      Index far = kNoRow;
      double far_d = -1.0;
      for (Index e = 0; e < data.n(); ++e) {
        if (reseeded[static_cast<std::size_t>(e)]) continue;
        const Index owner = current.assignment[static_cast<std::size_t>(e)];
        const double d = pow_dist(data.row(e), current.centers.positions.row(owner), z);
        if (d > far_d) {
          far_d = d;
          far = e;
        }
      }
      if (far == kNoRow) continue;
      reseeded[static_cast<std::size_t>(far)] = 1;
      auto& old_group = groups[static_cast<std::size_t>(current.assignment[static_cast<std::size_t>(far)])];
      old_group.erase(std::find(old_group.begin(), old_group.end(), far));
      groups[static_cast<std::size_t>(c)] = {far};
      current.assignment[static_cast<std::size_t>(far)] = c;
      next.positions.row(c) = data.row(far);
      next.rows[static_cast<std::size_t>(c)] = far;
    }

    for (Index c = 0; c < k; ++c) {
      const auto& group = groups[static_cast<std::size_t>(c)];
      if (group.empty()) continue;
      if (z == 2.0) {
        VectorXd mean = VectorXd::Zero(data.d());
        for (Index e : group) mean += data.row(e).transpose();
        mean /= static_cast<double>(group.size());
        next.positions.row(c) = mean.transpose();
        next.rows[static_cast<std::size_t>(c)] = kNoRow;
        if (group.size() == 1) next.rows[static_cast<std::size_t>(c)] = group.front();
      } else {
        auto [medoid, medoid_cost] = medoid_of(data, group, z);
        CompensatedSum here;
        for (Index e : group) here.add(pow_dist(data.row(e), next.positions.row(c), z));
        if (medoid_cost <= here.value()) {
          next.positions.row(c) = data.row(medoid);
          next.rows[static_cast<std::size_t>(c)] = medoid;
        }
      }
    }

    current = assign(data, std::move(next), z, options.threads);
    const double now = current.total_cost();
    current.iterations = iter;
    current.cost_trace.push_back(now);
    if (now <= 0.0 || prev - now <= options.rel_tol * prev) break;
    prev = now;
  }
  return current;
}

Clustering snap_centers(const Dataset& data, const Clustering& clustering, int threads) {
  const Index k = clustering.k();
  if (k > data.n()) throw DataError("more centers than dataset rows");
  std::vector<char> used(static_cast<std::size_t>(data.n()), 0);
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(k));
  for (Index c = 0; c < k; ++c) {
    Index best = kNoRow;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index e = 0; e < data.n(); ++e) {
      if (used[static_cast<std::size_t>(e)]) continue;
      const double d = (data.row(e) - clustering.centers.positions.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = e;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    rows.push_back(best);
  }
  Clustering out = assign(data, CenterList::from_rows(data, rows), clustering.z, threads);
  out.iterations = clustering.iterations;
  out.cost_trace = clustering.cost_trace;
  return out;
}

double cost(const Dataset& data, const CenterList& centers, double z) {
  check_z(z);
  if (centers.size() < 1) throw DataError("cost of an empty center list");
  if (centers.positions.cols() != data.d()) throw DataError("center dimension mismatch");
  CompensatedSum acc;
  for (Index e = 0; e < data.n(); ++e) acc.add(nearest_center(data, e, centers.positions, z).second);
  return acc.value();
}

double weighted_cost(const Clustering& clustering, const VectorXd& lambda) {
  if (lambda.size() != clustering.k()) throw DataError("Λ length does not match cluster count");
  CompensatedSum acc;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] >= 0.0) || !std::isfinite(lambda[i])) {
      throw DataError("Λ entries must be finite and non-negative");
    }
    acc.add(lambda[i] * clustering.cluster_cost[i]);
  }
  return acc.value();
}

Clustering kmedoids(const Dataset& data, Index k, RngStream& rng, const ClusteringOptions& options) {
  check_k(data, k);
  CenterList seeds = dz_seed(data, k, 1.0, rng);
  return refine(data, std::move(seeds), 1.0, options);
}

}  // namespace csel
