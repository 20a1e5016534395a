// SPDX-License-Identifier: MIT
#include "soilrf/util.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#ifndef _WIN32
#include <fcntl.h>
#include <unistd.h>
#endif

#include "soilrf/error.hpp"

namespace soilrf {

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t mix64(uint64_t a, uint64_t b) {
    // Order-sensitive combine, then a full scramble so low-entropy inputs
    // (small indices) still produce well-spread sub-seeds.
    uint64_t h = a;
    h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return splitmix64(h);
}

std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty())
        dir = ".";
    std::error_code ec;
    fs::create_directories(dir, ec); // best effort; open failure reports below

    fs::path tmp = dir / (target.filename().string() + ".tmp." +
                          to_hex(splitmix64(reinterpret_cast<uintptr_t>(&content))));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorKind::load, "cannot open temp file for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            fail(ErrorKind::load, "short write to temp file: " + tmp.string());
    }
#ifndef _WIN32
    int fd = ::open(tmp.c_str(), O_RDONLY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
#endif
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorKind::load, "cannot move temp file onto " + path);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::load, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        fail(ErrorKind::load, "read error on file: " + path);
    return ss.str();
}

bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec);
}

std::string format_double(double v) {
    // Shortest representation that parses back to the same bits.
    char buf[64];
    auto [end, rc] = std::to_chars(buf, buf + sizeof(buf), v);
    if (rc != std::errc())
        fail(ErrorKind::numeric, "cannot format double");
    return std::string(buf, end);
}

std::string kv_header(const std::map<std::string, std::string>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) { // std::map iterates in sorted key order
        out += "# ";
        out += k;
        out += "=";
        out += v;
        out += "\n";
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || (end && *end != '\0') || errno == ERANGE)
        fail(ErrorKind::load, "cannot parse number '" + s + "' for " + what);
    return v;
}

} // namespace soilrf
