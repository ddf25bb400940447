#include "support/test_paths.hpp"

#include <atomic>
#include <random>

namespace uiprobe::testing {

std::filesystem::path test_data_dir() { return UIPROBE_TEST_DATA; }

std::filesystem::path fixture_path(const std::string& name) { return test_data_dir() / "fixtures" / name; }

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (;;) {
    auto candidate = std::filesystem::temp_directory_path() /
                     (prefix + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directories(candidate)) {
      path_ = candidate;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace uiprobe::testing
