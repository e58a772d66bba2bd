#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "vortexflow/potential.hpp"

namespace vflow {

// 64-bit FNV-1a; pass the previous result as `h` to hash in pieces.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull);
std::string hex64(std::uint64_t v);

inline constexpr std::uint32_t solver_cache_version = 1;

// Binary layout: magic "VFLOWSLV", version, domain hash, N, LU rows and
// columns, LU entries (column major), row permutation, 1/rcond, FNV-1a of
// everything before it. Written to a temporary file and renamed into place.
void save_solver(const std::string& path, const PotentialSolver& S);

// Returns null when the file is missing or keyed to another domain or N.
// Throws IoError for truncated or corrupted files.
SolverPtr load_solver(const std::string& path, const Domain& d, int n);

// True when `path` holds a cache for (d, n) with a valid checksum.
bool solver_cache_matches(const std::string& path, const Domain& d, int n);

}  // namespace vflow
