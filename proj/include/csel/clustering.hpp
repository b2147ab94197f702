#ifndef CSEL_CLUSTERING_HPP
#define CSEL_CLUSTERING_HPP

#include <vector>

#include "csel/core.hpp"
#include "csel/rng.hpp"

namespace csel {

inline constexpr Index kNoRow = -1;

/**
 * Ordered centers. `rows[i]` is the dataset row that center i sits on, or
 * kNoRow for a continuous center. Order is selection order, so every prefix
 * is itself a candidate center set.
 */
struct CenterList {
  MatrixXd positions;
  std::vector<Index> rows;

  Index size() const { return positions.rows(); }
  bool snapped() const;
  CenterList prefix(Index j) const;

  static CenterList from_rows(const Dataset& data, const std::vector<Index>& rows);
};

/// A k-partition induced by nearest-center assignment.
struct Clustering {
  CenterList centers;
  std::vector<Index> assignment;  // per point, in [0, k)
  VectorXd cluster_cost;          // Σ_{e ∈ C_i} ‖e − c_i‖^z
  std::vector<Index> cluster_size;
  double z = 2.0;
  int iterations = 0;
  std::vector<double> cost_trace;  // total cost after each refine iteration

  Index k() const { return centers.size(); }
  double total_cost() const;
  std::vector<std::vector<Index>> members() const;
};

struct ClusteringOptions {
  int max_iters = 100;
  double rel_tol = 1e-9;
  int threads = 1;
};

/// Index of the nearest center (ties → lowest center id) and its distance^z.
std::pair<Index, double> nearest_center(const Dataset& data, Index point,
                                        const MatrixXd& centers, double z);

/// Nearest-center partition for fixed centers.
Clustering assign(const Dataset& data, CenterList centers, double z, int threads = 1);

/// D^z seeding: first center uniform, each next ∝ current min-distance^z.
CenterList dz_seed(const Dataset& data, Index k, double z, RngStream& rng);

/**
 * Alternating assignment / center update. z = 2 moves centers to cluster
 * means; any other z moves them to the in-cluster medoid under distance^z
 * when that does not raise the cluster cost. Empty clusters are reseeded at
 * the point farthest from its current center.
 */
Clustering refine(const Dataset& data, CenterList centers, double z,
                  const ClusteringOptions& options = {});

/// Replaces every center with its nearest unused dataset row (ties → lowest index).
Clustering snap_centers(const Dataset& data, const Clustering& clustering, int threads = 1);

/// Φ_z(𝒟, C) = Σ_x min_c ‖x − c‖^z
double cost(const Dataset& data, const CenterList& centers, double z);

/// Φ^Λ = Σ_i Λ_i · cluster_cost[i]
double weighted_cost(const Clustering& clustering, const VectorXd& lambda);

/// z = 1 clustering with medoid centers: D^1 seeding then alternating medoid updates.
Clustering kmedoids(const Dataset& data, Index k, RngStream& rng,
                    const ClusteringOptions& options = {});

}  // namespace csel

#endif  // CSEL_CLUSTERING_HPP
