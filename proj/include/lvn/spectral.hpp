#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lvn/augment.hpp"
#include "lvn/centrality.hpp"
#include "lvn/graph.hpp"
#include "lvn/tensor.hpp"

namespace lvn {

/// Eigendecomposition of L = D - A for an undirected graph.
struct LaplacianSpectrum {
  std::size_t n = 0;
  std::vector<double> eigenvalues;   // ascending
  std::vector<double> eigenvectors;  // column-major n x n, column i pairs with eigenvalues[i]
  double zero_tol = 0.0;
  std::vector<int> components;  // component id per node

  double vec(std::size_t row, std::size_t col) const { return eigenvectors[col * n + row]; }
  std::size_t num_zero_eigenvalues() const;
  std::size_t num_components() const;
};

struct JacobiOptions {
  std::size_t max_sweeps = 100;
  double tol = 1e-14;  // relative off-diagonal Frobenius norm
};

/// Cyclic Jacobi eigensolver on the dense Laplacian. Throws NumericalError
/// when the sweep budget runs out or the null space disagrees with the
/// component count.
LaplacianSpectrum laplacian_eigendecomposition(const Graph& g, JacobiOptions opts = {});

/// Effective resistance between u and v; nullopt when they lie in different
/// components. Throws ConfigError for u == v or out-of-range ids.
std::optional<double> effective_resistance(const LaplacianSpectrum& spec, NodeId u, NodeId v);

/// N * sum of 1/lambda over the non-zero spectrum.
double spectral_total_resistance(const LaplacianSpectrum& spec);

struct ResistanceReport {
  NodeSubset subset;
  double total = 0.0;
  std::size_t pairs = 0;                  // same-component unordered pairs summed
  std::size_t cross_component_pairs = 0;  // excluded from total
  std::optional<Tensor2> pair_values;     // |S| x |S|, NaN for cross-component pairs
};

ResistanceReport total_resistance_subset(const Graph& g, const NodeSubset& subset, bool keep_pairs = false);
ResistanceReport total_resistance_subset(const LaplacianSpectrum& spec, const NodeSubset& subset,
                                         bool keep_pairs = false);

struct SweepPoint {
  std::size_t n_s = 0;
  std::optional<double> total;
  std::string error;  // set when this point failed
};

struct ResistanceSweep {
  NodeSubset subset;  // ids of the raw graph
  double baseline = 0.0;
  std::vector<SweepPoint> points;
};

/// Total resistance over S = V \ C_max after augmenting with each prefix of
/// one centrality ranking. Directed augmentations are symmetrized first. An
/// explicit `subset` replaces S; points that remove one of its members record
/// an error instead of a total.
ResistanceSweep resistance_sweep(const Graph& g, const CentralityScores& scores, const std::vector<std::size_t>& ns_values,
                                 std::size_t n_c, EdgeMode mode, const std::optional<NodeSubset>& subset = std::nullopt);

struct PathDeltaCurve {
  std::vector<std::size_t> r_values;
  std::vector<double> deltas;
  std::vector<double> raw_counts;
  std::vector<double> aug_counts;
  bool precision_warning = false;  // some count exceeded 2^53
};

/// 1_S^T A^r 1_S for r = 1..r_max, as floating-point counts of walks
/// (ordered pairs, i = j included). Follows arc direction.
std::vector<double> subset_walk_counts(const Graph& g, const std::vector<NodeId>& subset, std::size_t r_max,
                                       bool* precision_warning = nullptr);

/// Walk-count change between the raw graph and its augmentation over the
/// raw subset S, which must avoid every removed central node.
PathDeltaCurve path_count_delta(const Graph& raw, const AugmentedGraph& aug, const NodeSubset& subset,
                                std::size_t r_max);

void write_sweep_csv(std::ostream& os, const ResistanceSweep& sweep);
void write_path_csv(std::ostream& os, const PathDeltaCurve& curve);

}  // namespace lvn
