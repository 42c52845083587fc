#pragma once

#include "evac/geo.hpp"
#include "evac/sweep.hpp"

#include <string>
#include <vector>

namespace evac {

/// Synthetic stand-in for a rural coastal village: a jittered street grid
/// with 570 houses, one meandering river, four barangay shelters and one
/// out-of-town overflow shelter. Generated from a fixed seed, so the
/// result is the same on every call.
WorldData make_demo_world_data();
World make_demo_world();

/// Sweep over the full default grid, pointing at the files emit_demo_assets writes.
SweepSpec demo_sweep_spec();

inline constexpr const char* kDemoWorldFile = "demo.world";
inline constexpr const char* kDemoPopulationSpecFile = "population.cfg";
inline constexpr const char* kDemoSweepSpecFile = "sweep.cfg";
inline constexpr std::uint64_t kDemoPopulationSeed = 1;

/// Writes demo.world, population.cfg and sweep.cfg into `dir` (created if
/// missing) and returns their paths.
std::vector<std::string> emit_demo_assets(const std::string& dir);

} // namespace evac
