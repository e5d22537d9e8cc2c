#pragma once

#include <span>

#include "semiclassic/gridcore.hpp"

namespace semiclassic::fft {

// Unnormalised in-place transform of a row-major array with the given
// extents. sign = -1 forward (e^{-2 pi i jk/N}), +1 backward. Safe to call
// from several threads; plans are cached.
void transform(Complex* data, std::span<const int> extents, int sign);

inline void forward(ComplexField& a, std::span<const int> extents) {
  transform(a.data(), extents, -1);
}
inline void backward(ComplexField& a, std::span<const int> extents) {
  transform(a.data(), extents, +1);
}

// transform along a single axis only, for every other index
void transform_axis(Complex* data, std::span<const int> extents, int axis, int sign);

}  // namespace semiclassic::fft
