#pragma once

#include "coreset/rng.hpp"
#include "coreset/types.hpp"

namespace testutil {

inline coreset::Matrix gaussian(coreset::Index n, coreset::Index d, coreset::SeededRng& rng) {
  coreset::Matrix m(n, d);
  for (coreset::Index i = 0; i < n; ++i)
    for (coreset::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

inline coreset::Vector gaussian_vec(coreset::Index d, coreset::SeededRng& rng) {
  coreset::Vector v(d);
  for (coreset::Index j = 0; j < d; ++j) v[j] = rng.normal();
  return v;
}

}  // namespace testutil
