#ifndef PDCRYS_TEST_UTIL_HPP
#define PDCRYS_TEST_UTIL_HPP

#include <random>
#include <vector>

#include "pdcrys/ring.hpp"

namespace pdcrys::testing {

constexpr uint64_t kSeed = 20240611;

inline RingElem random_elem(std::mt19937_64& rng, const CoeffRing& R) {
  Coords c{};
  std::uniform_int_distribution<int64_t> d(0, R.modulus - 1);
  for (int i = 0; i < R.s; ++i) c[i] = d(rng);
  return R.from_coords(c);
}

inline RingMatrix random_matrix(std::mt19937_64& rng, const CoeffRing& R, int m, int k) {
  RingMatrix M(R, m, k);
  for (auto& x : M.a) x = random_elem(rng, R);
  return M;
}

inline std::vector<RingElem> random_vec(std::mt19937_64& rng, const CoeffRing& R, int m) {
  std::vector<RingElem> v;
  for (int i = 0; i < m; ++i) v.push_back(random_elem(rng, R));
  return v;
}

// every element of a finite ring, in coordinate order
inline std::vector<RingElem> all_elements(const CoeffRing& R) {
  std::vector<RingElem> out;
  int64_t total = R.element_count();
  for (int64_t code = 0; code < total; ++code) {
    Coords c{};
    int64_t x = code;
    for (int i = 0; i < R.s; ++i) {
      c[i] = x % R.modulus;
      x /= R.modulus;
    }
    out.push_back(R.from_coords(c));
  }
  return out;
}

}  // namespace pdcrys::testing

#endif
