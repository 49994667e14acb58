#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

#include "padbench/image.hpp"

namespace padbench {

// Bank of square zero-mean filters; responses are binarized per filter and
// packed into per-pixel codes.
struct FilterBank {
  std::vector<Eigen::MatrixXd> filters;  // f kernels, each s x s
  std::string scale_tag;

  int filter_count() const { return static_cast<int>(filters.size()); }
  int kernel_size() const {
    return filters.empty() ? 0 : static_cast<int>(filters.front().rows());
  }
  void validate() const;  // f in [1,16], square, uniform size
};

// Text format: first line "f s", then f blocks of s rows of s reals.
FilterBank load_filter_bank(const std::filesystem::path& path);
void save_filter_bank(const std::filesystem::path& path, const FilterBank& bank);

// Fallback bank: seeded random kernels, mean-removed and orthonormalized.
FilterBank random_filter_bank(int filter_count, int kernel_size, std::uint64_t seed,
                              const std::string& scale_tag = "");

// Normalized 2^f-bin histogram of binary codes. Convolution wraps around the
// image borders, so circular shifts of the input leave the histogram intact.
// Bit k is set iff the response of filter k is strictly positive.
Eigen::VectorXd extract_features(const Image& image, const FilterBank& bank);

}  // namespace padbench
