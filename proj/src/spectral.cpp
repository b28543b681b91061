#include "lvn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lvn/error.hpp"
#include "lvn/format.hpp"

namespace lvn {

std::size_t LaplacianSpectrum::num_zero_eigenvalues() const {
  return static_cast<std::size_t>(
      std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double l) { return l < zero_tol; }));
}

std::size_t LaplacianSpectrum::num_components() const { return count_components(components); }

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
  }
  return std::sqrt(s);
}

}  // namespace

LaplacianSpectrum laplacian_eigendecomposition(const Graph& g, JacobiOptions opts) {
  if (g.directed()) throw ConfigError("laplacian_eigendecomposition: graph must be undirected");
  const std::size_t n = g.num_nodes();
  LaplacianSpectrum spec;
  spec.n = n;
  spec.components = connected_components(g);
  if (n == 0) return spec;

  std::vector<double> a(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    a[u * n + u] = static_cast<double>(g.degree(static_cast<NodeId>(u)));
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) a[u * n + static_cast<std::size_t>(v)] = -1.0;
  }
  std::vector<double> v(n * n, 0.0);  // column-major
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);
  const double target = opts.tol * std::max(frob, 1.0);

  bool converged = off_diagonal_norm(a, n) <= target;
  for (std::size_t sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k * n + p], akq = a[k * n + q];
          const double np = c * akp - s * akq, nq = s * akp + c * akq;
          a[k * n + p] = a[p * n + k] = np;
          a[k * n + q] = a[q * n + k] = nq;
        }
        double* vp = v.data() + p * n;
        double* vq = v.data() + q * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k], y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
    converged = off_diagonal_norm(a, n) <= target;
  }
  if (!converged) {
    throw NumericalError("laplacian_eigendecomposition: no convergence, off-diagonal residual " +
                         format_real(off_diagonal_norm(a, n)));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });
  spec.eigenvalues.resize(n);
  spec.eigenvectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    spec.eigenvalues[k] = a[order[k] * n + order[k]];
    std::copy_n(v.data() + order[k] * n, n, spec.eigenvectors.data() + k * n);
  }
  spec.zero_tol = 1e-9 * std::max(1.0, spec.eigenvalues.back());
  for (double& l : spec.eigenvalues) {
    if (l < -spec.zero_tol) throw NumericalError("laplacian_eigendecomposition: eigenvalue " + format_real(l) + " below zero");
    if (l < 0.0) l = 0.0;
  }
  if (spec.num_zero_eigenvalues() != spec.num_components()) {
    throw NumericalError("laplacian_eigendecomposition: " + std::to_string(spec.num_zero_eigenvalues()) +
                         " null eigenvalues for " + std::to_string(spec.num_components()) + " components");
  }
  return spec;
}

std::optional<double> effective_resistance(const LaplacianSpectrum& spec, NodeId u, NodeId v) {
  const auto n = static_cast<NodeId>(spec.n);
  if (u < 0 || v < 0 || u >= n || v >= n) throw ConfigError("effective_resistance: node id out of range");
  if (u == v) throw ConfigError("effective_resistance: u and v must differ");
  const auto su = static_cast<std::size_t>(u), sv = static_cast<std::size_t>(v);
  if (spec.components[su] != spec.components[sv]) return std::nullopt;
  double r = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double l = spec.eigenvalues[i];
    if (l <= spec.zero_tol) continue;
    const double d = spec.vec(su, i) - spec.vec(sv, i);
    r += d * d / l;
  }
  return r;
}

double spectral_total_resistance(const LaplacianSpectrum& spec) {
  double s = 0.0;
  for (double l : spec.eigenvalues) {
    if (l > spec.zero_tol) s += 1.0 / l;
  }
  return static_cast<double>(spec.n) * s;
}

ResistanceReport total_resistance_subset(const LaplacianSpectrum& spec, const NodeSubset& subset, bool keep_pairs) {
  ResistanceReport rep;
  rep.subset = subset;
  const auto& m = subset.members;
  const std::size_t k = m.size();
  if (keep_pairs) rep.pair_values = Tensor2(k, k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto r = effective_resistance(spec, m[a], m[b]);
      if (!r) {
        ++rep.cross_component_pairs;
        if (keep_pairs) (*rep.pair_values)(a, b) = (*rep.pair_values)(b, a) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      rep.total += *r;
      ++rep.pairs;
      if (keep_pairs) (*rep.pair_values)(a, b) = (*rep.pair_values)(b, a) = *r;
    }
  }
  return rep;
}

ResistanceReport total_resistance_subset(const Graph& g, const NodeSubset& subset, bool keep_pairs) {
  if (subset.size() < 2) {
    ResistanceReport rep;
    rep.subset = subset;
    if (keep_pairs) rep.pair_values = Tensor2(subset.size(), subset.size(), 0.0);
    return rep;
  }
  return total_resistance_subset(laplacian_eigendecomposition(symmetrize(g)), subset, keep_pairs);
}

ResistanceSweep resistance_sweep(const Graph& g, const CentralityScores& scores, const std::vector<std::size_t>& ns_values,
                                 std::size_t n_c, EdgeMode mode, const std::optional<NodeSubset>& subset) {
  if (ns_values.empty()) throw ConfigError("resistance_sweep: ns_values is empty");
  const std::size_t ns_max = *std::max_element(ns_values.begin(), ns_values.end());
  if (ns_max > g.num_nodes()) {
    throw ConfigError("resistance_sweep: n_s=" + std::to_string(ns_max) + " exceeds node count " +
                      std::to_string(g.num_nodes()));
  }
  const CentralSelection c_max = select_central(scores, g, ns_max);

  ResistanceSweep out;
  out.subset = subset ? *subset : NodeSubset::complement(g.num_nodes(), c_max.members, "C_" + std::to_string(ns_max));
  out.baseline = total_resistance_subset(g, out.subset).total;

  for (std::size_t ns : ns_values) {
    SweepPoint pt;
    pt.n_s = ns;
    try {
      const CentralSelection sel = select_central(scores, g, ns);
      const AugmentedGraph aug = lvn_augment(g, sel, n_c, mode);
      std::vector<NodeId> image;
      image.reserve(out.subset.size());
      for (NodeId v : out.subset.members) {
        const NodeId w = aug.old_to_new[static_cast<std::size_t>(v)];
        if (w == kNoNode) throw ConfigError("subset member " + std::to_string(v) + " is a central node at n_s=" + std::to_string(ns));
        image.push_back(w);
      }
      const auto s = NodeSubset::make(std::move(image), aug.graph.num_nodes());
      pt.total = total_resistance_subset(aug.graph, s).total;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    out.points.push_back(std::move(pt));
  }
  return out;
}

std::vector<double> subset_walk_counts(const Graph& g, const std::vector<NodeId>& subset, std::size_t r_max,
                                       bool* precision_warning) {
  const std::size_t n = g.num_nodes();
  std::vector<double> x(n, 0.0), y(n);
  for (NodeId v : subset) x[static_cast<std::size_t>(v)] = 1.0;
  constexpr double kExact = 9007199254740992.0;  // 2^53
  std::vector<double> counts;
  counts.reserve(r_max);
  for (std::size_t r = 1; r <= r_max; ++r) {
    // y_i = sum over arcs i -> j of x_j, so y = A x counts walks ending in S
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (NodeId j : g.neighbors(static_cast<NodeId>(i))) s += x[static_cast<std::size_t>(j)];
      y[i] = s;
    }
    x.swap(y);
    double total = 0.0;
    for (NodeId v : subset) total += x[static_cast<std::size_t>(v)];
    if (precision_warning && total > kExact) *precision_warning = true;
    counts.push_back(total);
  }
  return counts;
}

PathDeltaCurve path_count_delta(const Graph& raw, const AugmentedGraph& aug, const NodeSubset& subset,
                                std::size_t r_max) {
  if (r_max < 1) throw ConfigError("path_count_delta: r_max must be at least 1");
  if (aug.old_to_new.size() != raw.num_nodes()) throw ConfigError("path_count_delta: augmentation does not match raw graph");
  std::vector<NodeId> image;
  image.reserve(subset.size());
  for (NodeId v : subset.members) {
    if (v < 0 || static_cast<std::size_t>(v) >= raw.num_nodes()) throw ConfigError("path_count_delta: subset id out of range");
    const NodeId w = aug.old_to_new[static_cast<std::size_t>(v)];
    if (w == kNoNode) throw ConfigError("path_count_delta: subset contains central node " + std::to_string(v));
    image.push_back(w);
  }
  PathDeltaCurve curve;
  curve.raw_counts = subset_walk_counts(raw, subset.members, r_max, &curve.precision_warning);
  curve.aug_counts = subset_walk_counts(aug.graph, image, r_max, &curve.precision_warning);
  for (std::size_t r = 1; r <= r_max; ++r) {
    curve.r_values.push_back(r);
    curve.deltas.push_back(curve.aug_counts[r - 1] - curve.raw_counts[r - 1]);
  }
  return curve;
}

void write_sweep_csv(std::ostream& os, const ResistanceSweep& sweep) {
  os << "n_s,total_resistance,baseline\n";
  for (const auto& pt : sweep.points) {
    os << pt.n_s << ',' << (pt.total ? format_metric(*pt.total) : std::string()) << ',' << format_metric(sweep.baseline)
       << '\n';
  }
}

void write_path_csv(std::ostream& os, const PathDeltaCurve& curve) {
  os << "r,delta\n";
  for (std::size_t i = 0; i < curve.r_values.size(); ++i) os << curve.r_values[i] << ',' << format_real(curve.deltas[i]) << '\n';
}

}  // namespace lvn
