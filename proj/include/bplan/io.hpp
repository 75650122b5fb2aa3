#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bplan/error.hpp"

namespace bplan::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts are unsupported");

/// Formats a real with `sig` significant digits (%g); text writers use this so
/// reruns produce byte-identical files.
inline std::string fmt_real(double v, int sig = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return buf;
}

/// Round-trip exact formatting for doubles (17 significant digits).
inline std::string fmt_exact(double v) { return fmt_real(v, 17); }

class BinaryWriter {
public:
    template <typename T>
    void write(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const char* p = reinterpret_cast<const char*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    template <typename T>
    void write_array(const T* data, size_t n) {
        static_assert(std::is_trivially_copyable_v<T>);
        const char* p = reinterpret_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n * sizeof(T));
    }
    void write_bytes(const void* data, size_t n) {
        const char* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    const std::string& str() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::string data) : data_(std::move(data)) {}

    template <typename T>
    T read() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos_ + sizeof(T) > data_.size()) throw CorruptFileError("truncated binary data");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    template <typename T>
    void read_array(T* out, size_t n) {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos_ + n * sizeof(T) > data_.size()) throw CorruptFileError("truncated binary data");
        std::memcpy(out, data_.data() + pos_, n * sizeof(T));
        pos_ += n * sizeof(T);
    }
    void expect_magic(const char (&magic)[5]) {
        char m[4];
        read_array(m, 4);
        if (std::memcmp(m, magic, 4) != 0) throw CorruptFileError("bad magic");
    }
    bool at_end() const { return pos_ == data_.size(); }
    size_t remaining() const { return data_.size() - pos_; }

private:
    std::string data_;
    size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw Error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace bplan::io
