#pragma once

#include <map>

#include "callosim/phantom.hpp"

namespace oracle {

/// Small (96^3, 1 mm) phantom, generated once per seed.
inline const callosim::LabelVolume& small_phantom(std::uint64_t seed = 1) {
  static std::map<std::uint64_t, callosim::LabelVolume> cache;
  auto it = cache.find(seed);
  if (it == cache.end()) {
    it = cache.emplace(seed, callosim::phantom::generate_phantom(callosim::phantom::PhantomSpec::small(seed))).first;
  }
  return it->second;
}

}  // namespace oracle
