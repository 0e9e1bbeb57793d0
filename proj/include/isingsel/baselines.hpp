#pragma once

#include "isingsel/common.hpp"
#include "isingsel/graphs.hpp"
#include "isingsel/sampling.hpp"

namespace isingsel {

/// Plug-in mutual information (nats) of the 2x2 empirical joint of columns
/// s and t. 0 log 0 terms vanish; tiny negative rounding is clamped to 0.
double empirical_mutual_information(const SampleMatrix& data, int s, int t);

/// Symmetric p x p matrix of pairwise empirical mutual information
/// (zero diagonal).
Matrix<double> mutual_information_weights(const SampleMatrix& data, unsigned jobs = 1);

/// Greedy maximum-weight forest with at most k edges: pairs sorted by
/// mutual information descending (ties in lexicographic pair order), each
/// added unless it closes a cycle. Edge signs follow the empirical
/// correlation, with +1 for an exactly zero correlation.
SignedEdgeSet chow_liu_forest(const SampleMatrix& data, int k, unsigned jobs = 1);

}  // namespace isingsel
