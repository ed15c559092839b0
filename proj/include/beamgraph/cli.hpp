// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace beamgraph {

/// Entry point of the `beamgraph` command line tool. Returns 0 on success,
/// 2 on invalid arguments, 1 on runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace beamgraph
