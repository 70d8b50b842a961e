#ifndef OODKIT_SRC_BINARY_IO_HPP
#define OODKIT_SRC_BINARY_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/errors.hpp"

namespace oodkit::detail {

static_assert(std::endian::native == std::endian::little, "containers are little-endian on disk");

class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot open " + path.string() + " for writing");
    }

    void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }

    template <typename T>
    void put(T value) {
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    template <typename T>
    void put_span(std::span<const T> values) {
        out_.write(reinterpret_cast<const char*>(values.data()),
                   static_cast<std::streamsize>(values.size_bytes()));
    }

    void put_strings(const std::vector<std::string>& values) {
        put<std::uint32_t>(static_cast<std::uint32_t>(values.size()));
        for (const auto& v : values) {
            put<std::uint32_t>(static_cast<std::uint32_t>(v.size()));
            out_.write(v.data(), static_cast<std::streamsize>(v.size()));
        }
    }

    void finish() {
        out_.flush();
        if (!out_) throw Error("write failed: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw Error("cannot open " + path.string());
    }

    void expect_magic(std::string_view m) {
        std::string got(m.size(), '\0');
        in_.read(got.data(), static_cast<std::streamsize>(m.size()));
        if (!in_ || got != m) throw FormatError(path_.string() + ": bad magic, expected \"" + std::string(m) + "\"");
    }

    template <typename T>
    T get() {
        T value{};
        in_.read(reinterpret_cast<char*>(&value), sizeof(T));
        if (!in_) throw FormatError(path_.string() + ": truncated file");
        return value;
    }

    template <typename T>
    std::vector<T> get_vector(std::size_t count) {
        std::vector<T> values(count);
        in_.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(T)));
        if (!in_) throw FormatError(path_.string() + ": truncated file");
        return values;
    }

    std::vector<std::string> get_strings() {
        auto count = get<std::uint32_t>();
        std::vector<std::string> values;
        values.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            auto len = get<std::uint32_t>();
            std::string s(len, '\0');
            in_.read(s.data(), len);
            if (!in_) throw FormatError(path_.string() + ": truncated file");
            values.push_back(std::move(s));
        }
        return values;
    }

    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) throw FormatError(path_.string() + ": trailing bytes");
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

/// First four bytes of a file, or an empty string if shorter.
inline std::string peek_magic(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string m(4, '\0');
    in.read(m.data(), 4);
    return in ? m : std::string{};
}

}  // namespace oodkit::detail

#endif  // OODKIT_SRC_BINARY_IO_HPP
