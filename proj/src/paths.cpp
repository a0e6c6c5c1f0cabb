#include "emclt/paths.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace emclt {

TimeGrid::TimeGrid(std::size_t n, std::size_t refinement) : n_(n), m_(refinement) {
  if (n == 0 || refinement == 0) {
    throw std::invalid_argument("TimeGrid: n and refinement must be >= 1");
  }
  // Keep n*M + 1 representable and exactly convertible to double.
  constexpr std::size_t kMaxSteps = std::size_t{1} << 40;
  if (n > kMaxSteps / refinement) {
    throw std::overflow_error("TimeGrid: n * refinement overflows the index range");
  }
}

double TimeGrid::kappa(double t) const {
  return std::floor(static_cast<double>(n_) * t) / static_cast<double>(n_);
}

std::size_t TimeGrid::fine_index_of(double t) const {
  const double scaled = t * static_cast<double>(fine_steps());
  const double rounded = std::round(scaled);
  if (t < 0.0 || t > 1.0 || std::abs(scaled - rounded) > 1e-12 * fine_steps() + 1e-12) {
    throw std::invalid_argument("TimeGrid: t=" + std::to_string(t) + " is not a fine node");
  }
  return static_cast<std::size_t>(rounded);
}

std::mt19937_64 make_engine(const SeedLineage& lineage) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(lineage.master), hi(lineage.master), lo(lineage.index),
                    hi(lineage.index),  lo(lineage.stream), hi(lineage.stream)};
  return std::mt19937_64(seq);
}

BrownianPath::BrownianPath(TimeGrid grid, std::size_t dim, std::vector<double> increments,
                           SeedLineage lineage)
    : grid_(grid), dim_(dim), increments_(std::move(increments)), lineage_(lineage) {
  if (dim_ == 0) throw std::invalid_argument("BrownianPath: dimension must be >= 1");
  if (increments_.size() != grid_.fine_steps() * dim_) {
    throw std::invalid_argument("BrownianPath: increment count does not match grid");
  }
}

std::vector<double> BrownianPath::values() const {
  std::vector<double> out((steps() + 1) * dim_, 0.0);
  for (std::size_t j = 0; j < steps(); ++j) {
    for (std::size_t k = 0; k < dim_; ++k) {
      out[(j + 1) * dim_ + k] = out[j * dim_ + k] + increments_[j * dim_ + k];
    }
  }
  return out;
}

std::vector<double> BrownianPath::terminal() const {
  std::vector<double> b(dim_, 0.0);
  for (std::size_t j = 0; j < steps(); ++j) {
    for (std::size_t k = 0; k < dim_; ++k) b[k] += increments_[j * dim_ + k];
  }
  return b;
}

BrownianPath sample_brownian(const TimeGrid& grid, std::size_t dim, const SeedLineage& lineage) {
  if (dim == 0) throw std::invalid_argument("sample_brownian: dimension must be >= 1");
  auto engine = make_engine(lineage);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(grid.fine_step());
  std::vector<double> inc(grid.fine_steps() * dim);
  for (double& x : inc) x = scale * normal(engine);
  return BrownianPath(grid, dim, std::move(inc), lineage);
}

BrownianPath coarsen(const BrownianPath& path, std::size_t factor) {
  const std::size_t steps = path.steps();
  if (factor == 0 || steps % factor != 0) {
    throw std::invalid_argument("coarsen: factor " + std::to_string(factor) +
                                " does not divide the increment count " +
                                std::to_string(steps));
  }
  if (factor == 1) return path;
  const std::size_t d = path.dim();
  const TimeGrid& g = path.grid();
  const TimeGrid out_grid = (g.refinement() % factor == 0)
                                ? TimeGrid(g.n(), g.refinement() / factor)
                                : TimeGrid(steps / factor, 1);
  std::vector<double> inc(out_grid.fine_steps() * d, 0.0);
  const auto src = path.increments();
  for (std::size_t j = 0; j < out_grid.fine_steps(); ++j) {
    for (std::size_t r = 0; r < factor; ++r) {
      for (std::size_t k = 0; k < d; ++k) inc[j * d + k] += src[(j * factor + r) * d + k];
    }
  }
  return BrownianPath(out_grid, d, std::move(inc), path.lineage());
}

}  // namespace emclt
