#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace emclt {

/// Nested partition of [0, 1]: `n` coarse steps, each split into `refinement`
/// fine steps. Fine node j sits at t = j / (n * refinement).
class TimeGrid {
 public:
  TimeGrid(std::size_t n, std::size_t refinement);

  std::size_t n() const { return n_; }
  std::size_t refinement() const { return m_; }
  std::size_t fine_steps() const { return n_ * m_; }
  std::size_t fine_nodes() const { return n_ * m_ + 1; }
  double fine_step() const { return 1.0 / static_cast<double>(n_ * m_); }
  double coarse_step() const { return 1.0 / static_cast<double>(n_); }
  double fine_time(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(n_ * m_);
  }

  /// Fine index of the coarse node kappa_n(t_j) = floor(n t_j) / n.
  std::size_t kappa_node(std::size_t fine_j) const { return (fine_j / m_) * m_; }
  /// kappa_n(t) = floor(n t) / n.
  double kappa(double t) const;
  /// Index of the fine node at time t; throws if t is not (within 1e-12) a node.
  std::size_t fine_index_of(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::size_t n_;
  std::size_t m_;
};

/// Identifies one random stream: the master seed of an experiment, the path
/// index inside a bank, and a stream tag separating banks/drivers.
struct SeedLineage {
  std::uint64_t master = 0;
  std::uint64_t index = 0;
  std::uint64_t stream = 0;
};

/// Engine for one lineage. Streams for distinct lineages are independent and
/// do not depend on the order in which they are created.
std::mt19937_64 make_engine(const SeedLineage& lineage);

/// Brownian increments on the fine nodes of a grid, stored coordinate-fastest.
class BrownianPath {
 public:
  BrownianPath(TimeGrid grid, std::size_t dim, std::vector<double> increments,
               SeedLineage lineage = {});

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t steps() const { return grid_.fine_steps(); }
  const SeedLineage& lineage() const { return lineage_; }
  std::span<const double> increments() const { return increments_; }
  std::span<const double> increment(std::size_t j) const {
    return {increments_.data() + j * dim_, dim_};
  }
  /// B at every fine node, B_0 = 0; (steps + 1) * dim values.
  std::vector<double> values() const;
  /// B_1.
  std::vector<double> terminal() const;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> increments_;
  SeedLineage lineage_;
};

BrownianPath sample_brownian(const TimeGrid& grid, std::size_t dim,
                             const SeedLineage& lineage);

/// Sums `factor` consecutive increments. The coarsened grid keeps n when
/// factor divides the refinement; otherwise it is a flat grid with
/// refinement 1.
BrownianPath coarsen(const BrownianPath& path, std::size_t factor);

}  // namespace emclt
