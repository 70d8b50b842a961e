#ifndef OODKIT_TESTS_TEST_PATHS_HPP
#define OODKIT_TESTS_TEST_PATHS_HPP

#include <atomic>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("oodkit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path fixture_dir() { return OODKIT_FIXTURE_DIR; }

#endif  // OODKIT_TESTS_TEST_PATHS_HPP
