#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cavitypress {

inline constexpr int kCacheVersion = 1;

/// One stored partition value. `spec` is the model-spec text the value was computed from;
/// `region` lists the points in model-spec notation, separated by ';'.
struct CacheEntry {
  std::string key;
  std::string spec;
  std::string region;
  int collar = 0;
  double value = 0.0;
  std::int64_t created = 0;  // unix seconds
};

struct CacheStats {
  std::size_t entries = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t bytes = 0;
  double hit_rate() const { return hits + misses == 0 ? 0.0 : static_cast<double>(hits) / (hits + misses); }
};

struct CacheProblem {
  std::string key;  // "line N" when the key itself is unreadable
  std::string reason;
};

struct VerifyReport {
  std::size_t entries = 0;
  std::size_t recomputed = 0;
  std::size_t mismatches = 0;
  std::vector<CacheProblem> problems;
};

/// Partition values keyed by a content hash of (subshift, potential, region, collar), stored
/// as versioned JSON lines with a per-line checksum. All access holds an exclusive lock file.
class ResultCache {
 public:
  /// Creates the directory when `create` is set; otherwise it must exist.
  explicit ResultCache(std::filesystem::path dir, bool create = true);
  /// Directory named by CAVITYPRESS_CACHE, if set and nonempty.
  static std::optional<std::filesystem::path> from_environment();

  static std::string make_key(const std::string& sft, const std::string& phi, const std::string& region, int collar);

  const std::filesystem::path& dir() const { return dir_; }

  /// Returns the stored value for entry.key, or stores compute() and returns it.
  double get_or_compute(const CacheEntry& entry, const std::function<double()>& compute);
  std::vector<CacheEntry> entries() const;

  /// Checks every checksum, then recomputes a random `fraction` of entries (at least one)
  /// and compares bit-exactly.
  VerifyReport verify(double fraction, std::uint64_t seed, const std::function<double(const CacheEntry&)>& recompute);
  /// Drops entries created before now - max_age_seconds; returns how many.
  std::size_t gc(std::int64_t max_age_seconds, std::int64_t now);
  CacheStats stats() const;

 private:
  std::filesystem::path dir_;
};

/// Serialized form of an entry, checksum included.
std::string cache_line(const CacheEntry& e);

}  // namespace cavitypress
