#pragma once

namespace wordrec {

// Full command-line driver (synth / featurize / crossval / report).
// Returns the process exit code: 0 success, 1 runtime or data failure,
// 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace wordrec
