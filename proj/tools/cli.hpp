#ifndef STEREOBENCH_TOOLS_CLI_HPP
#define STEREOBENCH_TOOLS_CLI_HPP

// stereobench <synth|match|eval|resize|calib|cloud> [--config FILE] [--out DIR] [flags...]
//
// Settings resolve as built-in defaults < config file < command-line flags.
// Every run writes the resolved settings to DIR/config.yaml; running the same
// subcommand with --config DIR/config.yaml reproduces the outputs.

namespace stereobench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitValidationError = 2;

int run(int argc, const char* const* argv);

}  // namespace stereobench::cli

#endif  // STEREOBENCH_TOOLS_CLI_HPP
