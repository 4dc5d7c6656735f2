#pragma once

#include <string>
#include <vector>

#include "lrvec/model.hpp"

namespace lrvec::cli {

/// Reads one population: header `x1,...,xd`, then one observation per row.
/// Every observation is checked against the model's sample space.
Sample read_population(const std::string& path, const Model& model);

/// Writes a population in the same format, values at full precision.
void write_population(const std::string& path, const Sample& data);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [0, upper) plus one overflow bin [upper, inf).
std::vector<HistogramBin> histogram(const std::vector<double>& values, double upper,
                                    std::size_t bins);

void write_histogram(const std::string& path, const std::vector<HistogramBin>& bins);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

}  // namespace lrvec::cli
