// SPDX-License-Identifier: MIT
#ifndef SOILRF_UTIL_HPP
#define SOILRF_UTIL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace soilrf {

// --- deterministic hashing / seed derivation -------------------------------

// FNV-1a, 64 bit. Used for config hashes and spectrum identity strings.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a64(const std::string& s);

// splitmix64 finalizer; full-period scrambler used for sub-seed derivation.
uint64_t splitmix64(uint64_t x);

// Order-sensitive combination of two 64-bit values (hash-combine style),
// scrambled through splitmix64. mix64(a,b) != mix64(b,a) in general.
uint64_t mix64(uint64_t a, uint64_t b);

std::string to_hex(uint64_t v);

// --- file helpers -----------------------------------------------------------

// Writes `content` to `path` atomically: temp file in the same directory,
// fsync'd, then renamed over the target.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path); // throws Error{load}
bool file_exists(const std::string& path);

// Shortest text that round-trips a double exactly through strtod.
std::string format_double(double v);

// "# key=value" comment block used as the reproducibility header of CSV
// artifacts; keys are emitted in sorted order so output is byte-stable.
std::string kv_header(const std::map<std::string, std::string>& kv);

// Splits one CSV line on commas (no quoting; our formats never need it).
std::vector<std::string> split_csv_line(const std::string& line);

double parse_double(const std::string& s, const std::string& what);

} // namespace soilrf

#endif
