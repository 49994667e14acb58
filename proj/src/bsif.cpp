#include "padbench/bsif.hpp"

#include <fstream>

#include "padbench/rng.hpp"
#include "padbench/types.hpp"

namespace padbench {

void FilterBank::validate() const {
  if (filters.empty() || filters.size() > 16) {
    throw ValidationError("filter bank needs between 1 and 16 filters");
  }
  const auto size = filters.front().rows();
  for (const auto& kernel : filters) {
    if (kernel.rows() != kernel.cols() || kernel.rows() != size) {
      throw ValidationError("filter bank kernels must be square and equally sized");
    }
  }
}

FilterBank load_filter_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open filter bank: " + path.string());
  int filter_count = 0, kernel_size = 0;
  if (!(in >> filter_count >> kernel_size) || filter_count <= 0 || kernel_size <= 0) {
    throw ParseError("malformed filter bank header: " + path.string());
  }
  FilterBank bank;
  bank.scale_tag = path.stem().string();
  for (int f = 0; f < filter_count; ++f) {
    Eigen::MatrixXd kernel(kernel_size, kernel_size);
    for (int y = 0; y < kernel_size; ++y) {
      for (int x = 0; x < kernel_size; ++x) {
        if (!(in >> kernel(y, x))) {
          throw ParseError("truncated filter bank: " + path.string());
        }
      }
    }
    bank.filters.push_back(std::move(kernel));
  }
  bank.validate();
  return bank;
}

void save_filter_bank(const std::filesystem::path& path, const FilterBank& bank) {
  bank.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write filter bank: " + path.string());
  const int s = bank.kernel_size();
  out << bank.filter_count() << " " << s << "\n";
  out.precision(17);
  for (const auto& kernel : bank.filters) {
    for (int y = 0; y < s; ++y) {
      for (int x = 0; x < s; ++x) {
        out << kernel(y, x) << (x + 1 == s ? "" : " ");
      }
      out << "\n";
    }
  }
}

FilterBank random_filter_bank(int filter_count, int kernel_size, std::uint64_t seed,
                              const std::string& scale_tag) {
  if (filter_count < 1 || filter_count > 16) {
    throw ValidationError("filter count must be in [1, 16]");
  }
  if (filter_count >= kernel_size * kernel_size) {
    // zero-mean vectors of dimension s^2 span only s^2 - 1 directions
    throw ValidationError("cannot orthonormalize that many zero-mean kernels");
  }
  Rng rng(mix_seed(seed, 0x62736966ULL));
  const int dim = kernel_size * kernel_size;

  // Gram-Schmidt over mean-removed random vectors
  std::vector<Eigen::VectorXd> basis;
  while (static_cast<int>(basis.size()) < filter_count) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    v.array() -= v.mean();
    for (const auto& u : basis) v -= u.dot(v) * u;
    const double norm = v.norm();
    if (norm < 1e-8) continue;  // degenerate draw, resample
    basis.push_back(v / norm);
  }

  FilterBank bank;
  bank.scale_tag = scale_tag.empty()
                       ? "random_s" + std::to_string(kernel_size)
                       : scale_tag;
  for (const auto& v : basis) {
    Eigen::MatrixXd kernel(kernel_size, kernel_size);
    for (int y = 0; y < kernel_size; ++y) {
      for (int x = 0; x < kernel_size; ++x) kernel(y, x) = v[y * kernel_size + x];
    }
    bank.filters.push_back(std::move(kernel));
  }
  bank.validate();
  return bank;
}

Eigen::VectorXd extract_features(const Image& image, const FilterBank& bank) {
  bank.validate();
  if (image.channels != 1) throw ValidationError("feature extraction needs gray images");
  const int f = bank.filter_count();
  const int s = bank.kernel_size();
  const int half = s / 2;
  const int w = image.width;
  const int h = image.height;
  if (w < s || h < s) throw ValidationError("image smaller than the filter kernel");

  Eigen::VectorXd histogram = Eigen::VectorXd::Zero(1 << f);
  std::vector<double> responses(static_cast<std::size_t>(f));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < f; ++k) responses[static_cast<std::size_t>(k)] = 0.0;
      for (int ky = 0; ky < s; ++ky) {
        const int iy = (y + ky - half + 2 * h) % h;
        for (int kx = 0; kx < s; ++kx) {
          const int ix = (x + kx - half + 2 * w) % w;
          const double pixel = image.at(ix, iy);
          for (int k = 0; k < f; ++k) {
            responses[static_cast<std::size_t>(k)] += bank.filters[k](ky, kx) * pixel;
          }
        }
      }
      unsigned code = 0;
      for (int k = 0; k < f; ++k) {
        if (responses[static_cast<std::size_t>(k)] > 0.0) code |= 1u << k;
      }
      histogram[code] += 1.0;
    }
  }
  histogram /= static_cast<double>(w) * static_cast<double>(h);
  return histogram;
}

}  // namespace padbench
