#pragma once

#include <string>

#include "qsd/qsd_sim.hpp"

namespace qsd {

// JSON text of a pair. The Toeplitz form (first rows only) is used when
// the pair carries first rows and prefer_toeplitz is set.
std::string pair_to_json(const DefinitePair& pair, bool prefer_toeplitz = true);

// Throws ParseError (malformed JSON, with byte offset, or a missing or
// mistyped field) and ValidationError (inconsistent content).
DefinitePair pair_from_json(const std::string& text);

void cache_pair(const DefinitePair& pair, const std::string& path, bool prefer_toeplitz = true);
DefinitePair load_pair(const std::string& path);

}  // namespace qsd
