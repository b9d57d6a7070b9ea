#pragma once

// 64-bit FNV-1a over raw bytes, used to fingerprint generated instances.

#include <kronsr/types.hpp>

#include <cstdint>
#include <cstddef>

namespace kronsr::detail {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  }
  template <typename Derived>
  void matrix(const Eigen::MatrixBase<Derived>& m) {
    const Index dims[2] = {m.rows(), m.cols()};
    bytes(dims, sizeof dims);
    const auto dense = m.eval();
    bytes(dense.data(), sizeof(typename Derived::Scalar) * static_cast<std::size_t>(dense.size()));
  }
};

}  // namespace kronsr::detail
