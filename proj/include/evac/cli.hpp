#pragma once

#include <iosfwd>

namespace evac {

/// Entry point of the `evacsim` tool. Data goes to `out`, diagnostics to
/// `err`. Returns 0 on success, 1 on bad input or usage, 2 when an internal
/// invariant fails.
///
/// Relative default paths resolve against $EVAC_ASSET_DIR (or the working
/// directory when unset).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace evac
