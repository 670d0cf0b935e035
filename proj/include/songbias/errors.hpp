#pragma once

#include <stdexcept>
#include <string>

namespace songbias {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration value or malformed config/lexicon/word-set file.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A required upstream artifact (stage output, input file) is missing.
struct MissingArtifactError : Error {
    explicit MissingArtifactError(const std::string& msg) : Error(msg) {}
};

// Bad data encountered while running a stage (oov word, unbalanced sets,
// diverged training, id mismatches, ...).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace songbias
