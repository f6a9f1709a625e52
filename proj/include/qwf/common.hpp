#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwf {

#ifdef QWF_FLOAT32
using Scalar = float;
#else
using Scalar = double;
#endif

// Bad shapes, dimension mismatches, out-of-range indices.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or usage (maps to exit code 2 in the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string to_lower(std::string s);

// Splits on runs of whitespace; never returns empty tokens.
std::vector<std::string> whitespace_tokens(const std::string& text);

std::string trim(const std::string& s);

// 64-bit seed mixer for deriving independent RNG streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

// FNV-1a over bytes; stable across platforms.
std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 1469598103934665603ull);

}  // namespace qwf
