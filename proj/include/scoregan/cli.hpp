#pragma once

namespace scoregan {

/// Entry point behind the scoregan binary. Exit status: 0 on success, 1 on
/// runtime failure (message on stderr), 2 on usage errors.
int run_cli(int argc, const char* const* argv);

}  // namespace scoregan
