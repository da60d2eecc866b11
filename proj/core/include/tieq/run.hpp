#pragma once

#include "tieq/config.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace tieq {

struct RunOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides any seed in the config
    int threads = 1;
    std::string solver;                 // "", "marching" or "fixed-point"
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitVerification = 4;

// Parse, validate, dispatch, write artifacts and the run manifest.
// Returns one of the exit codes above; nothing is written on config errors.
int run(const RunOptions& opts);

}  // namespace tieq
