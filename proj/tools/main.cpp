// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/cli.hpp"

int main(int argc, char** argv) { return beamgraph::run_cli(argc, argv); }
