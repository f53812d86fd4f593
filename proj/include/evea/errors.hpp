#pragma once

#include <stdexcept>

namespace evea {

// Malformed or missing input data: edge lists, cost files, embeddings,
// front CSVs, config files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally valid configuration that is semantically unusable
// (e.g. a variant that needs embeddings run without them).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evea
