#pragma once

#include <span>
#include <vector>

namespace docconf {

double mean(std::span<const double> v);

/// Nearest-rank percentile: the ceil(q * n)-th smallest value (q in [0, 1]).
/// Always one of the inputs. Throws InvalidArgument on empty input.
double percentile_nearest_rank(std::vector<double> v, double q);

/// 1-based ranks, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> v);

double pearson(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of average ranks. 0 when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace docconf
