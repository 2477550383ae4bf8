#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace cqns::test {

// Scratch directory removed on destruction. Each instance gets a unique
// path so tests can run concurrently.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("cqns-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

    std::string write(const std::string& name, const std::string& content) const {
        auto p = path_ / name;
        std::ofstream out(p);
        out << content;
        out.close();
        return p.string();
    }

private:
    std::filesystem::path path_;
};

}  // namespace cqns::test
