#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace adhominem::util {

// 64-bit FNV-1a. Used for content hashes in manifests and file headers.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  void update(std::span<const double> values);
  void update_u64(std::uint64_t value);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_hex(std::string_view bytes);
std::string to_hex(std::uint64_t value);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace adhominem::util
