#ifndef LFSAL_SYNTHETIC_HPP
#define LFSAL_SYNTHETIC_HPP

#include "lfsal/augment.hpp"

namespace lfsal {

// Seeded synthetic scenes: a foreground region at disparity `disparity`
// (pixels per view step) over a background at disparity 0. Views shift as
// (x - d (u - c), y - d (v - c)) with c the central view, so the foreground
// also occludes the background differently in each view.

/// Coloured rectangle on a differently coloured, lightly textured background.
template <typename T>
LightField4D<T> rect_scene(Index ny, Index nx, Index angular_res, Index disparity, RngStream& rng,
                           Image<T>* mask = nullptr);

/// Foreground and background cut from the same random texture, so the
/// central view carries no cue: only inter-view parallax separates them.
template <typename T>
LightField4D<T> parallax_scene(Index ny, Index nx, Index angular_res, Index disparity, RngStream& rng,
                               Image<T>* mask = nullptr);

template <typename T>
Sample<T> to_sample(const LightField4D<T>& lf, Image<T> mask) {
  return {assemble_microlens_array(lf), std::move(mask)};
}

}  // namespace lfsal

#endif  // LFSAL_SYNTHETIC_HPP
