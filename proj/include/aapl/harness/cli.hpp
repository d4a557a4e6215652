#pragma once

namespace aapl::harness {

// Subcommands: train, eval, profile, export-embeddings, sweep.
// Returns 0 on success, 1 on usage or config errors, 2 on numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace aapl::harness
