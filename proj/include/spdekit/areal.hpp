#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spdekit/gmrf.hpp"

namespace spdekit {

/// Undirected region neighbourhood structure; neighbour lists are sorted.
struct AdjacencyGraph {
  Index n = 0;
  std::vector<std::vector<Index>> nb;

  /// Throws AsymmetricGraph / IndexOutOfRange / InvalidArgument (self-loop).
  void validate() const;
  std::size_t n_edges() const;
};

/// ASCII graph: first line n, then one line per region "index count nb...".
/// Indices are 1-based unless zero_based is set.
AdjacencyGraph parse_graph(std::string_view text, bool zero_based = false);
AdjacencyGraph read_graph_file(const std::string& path, bool zero_based = false);
std::string format_graph(const AdjacencyGraph& g);

/// Connected components, each sorted, ordered by smallest member.
std::vector<std::vector<Index>> connected_components(const AdjacencyGraph& g);

/// Symmetric edge weights keyed by (min(i,j), max(i,j)); missing edges weigh 1.
using EdgeWeights = std::map<std::pair<Index, Index>, double>;

/// Q_ii = sum of incident weights (degree when unweighted), Q_ij = -w_ij.
/// Intrinsic with one sum-to-zero constraint per connected component.
PrecisionModel besag_precision(const AdjacencyGraph& g, const EdgeWeights* weights = nullptr);

/// Scales each connected component so that the geometric mean of its
/// constrained marginal variances is 1. Singleton components become iid with
/// unit variance and are listed in the notes.
PrecisionModel scale_besag(const PrecisionModel& besag);

/// Joint precision of (b, u*) with b = (sqrt(1-w) v + sqrt(w) u*) / sqrt(tau),
/// v iid standard normal, u* the scaled Besag field.
PrecisionModel bym2_precision(const AdjacencyGraph& g, double tau, double w);

/// Same from an already scaled Besag model (avoids re-scaling per call).
PrecisionModel bym2_from_scaled(const PrecisionModel& scaled_besag, double tau, double w);

/// Largest weight accepted before w = 1 is clamped (the joint precision has a
/// 1/(1-w) factor).
inline constexpr double kBym2MaxWeight = 1.0 - 1e-9;

enum class TemporalKind { iid, ar1, rw1, rw2 };

struct TemporalModel {
  TemporalKind kind = TemporalKind::iid;
  Index length = 2;
  double rho = 0.0;

  void validate() const;
};

TemporalKind parse_temporal_kind(std::string_view name);

/// iid: identity; ar1: unit marginal variance; rw1: path Besag with sum-to-zero;
/// rw2: D^T D (second differences) with sum and linear-trend constraints.
PrecisionModel temporal_precision(const TemporalModel& t);

/// Q_t (x) Q_s over the index t * n_s + s. Constraints (A_t (x) I) and
/// (I (x) A_s) are stacked and reduced to a full-rank subset of rows.
PrecisionModel kronecker_precision(const PrecisionModel& qt, const PrecisionModel& qs);

}  // namespace spdekit
