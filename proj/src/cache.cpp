#include "cavitypress/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "cavitypress/errors.hpp"
#include "cavitypress/pressure.hpp"
#include "json.hpp"

namespace cavitypress {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEntries = "entries.jsonl";
constexpr const char* kCounters = "counters.json";

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    fd_ = ::open((dir / "lock").c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw PreconditionError("cannot open cache lock in " + dir.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw PreconditionError("cannot lock cache " + dir.string());
    }
  }
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

json entry_body(const CacheEntry& e) {
  return json{{"v", kCacheVersion},
              {"key", e.key},
              {"spec", e.spec},
              {"region", e.region},
              {"collar", e.collar},
              {"value", e.value},
              {"bits", hex64(std::bit_cast<std::uint64_t>(e.value))},
              {"created", e.created}};
}

struct ParsedLine {
  std::optional<CacheEntry> entry;
  std::string key;
  std::string problem;
};

ParsedLine parse_line(const std::string& line, std::size_t lineno) {
  ParsedLine out;
  out.key = "line " + std::to_string(lineno);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    out.problem = "unparsable line";
    return out;
  }
  try {
    if (j.contains("key") && j["key"].is_string()) out.key = j["key"].get<std::string>();
    if (j.at("v").get<int>() != kCacheVersion) {
      out.problem = "unsupported format version";
      return out;
    }
    const std::string sum = j.at("checksum").get<std::string>();
    j.erase("checksum");
    if (hex64(fnv1a(j.dump())) != sum) {
      out.problem = "checksum mismatch";
      return out;
    }
    CacheEntry e;
    e.key = j.at("key").get<std::string>();
    e.spec = j.at("spec").get<std::string>();
    e.region = j.at("region").get<std::string>();
    e.collar = j.at("collar").get<int>();
    e.value = std::bit_cast<double>(std::stoull(j.at("bits").get<std::string>(), nullptr, 16));
    e.created = j.at("created").get<std::int64_t>();
    out.entry = e;
  } catch (const std::exception&) {
    out.problem = "missing or malformed field";
  }
  return out;
}

std::vector<ParsedLine> read_all(const fs::path& dir) {
  std::vector<ParsedLine> out;
  std::ifstream in(dir / kEntries);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    out.push_back(parse_line(line, lineno));
  }
  return out;
}

std::pair<std::size_t, std::size_t> read_counters(const fs::path& dir) {
  std::ifstream in(dir / kCounters);
  if (!in) return {0, 0};
  try {
    const json j = json::parse(in);
    return {j.at("hits").get<std::size_t>(), j.at("misses").get<std::size_t>()};
  } catch (const std::exception&) {
    return {0, 0};
  }
}

void write_counters(const fs::path& dir, std::size_t hits, std::size_t misses) {
  std::ofstream out(dir / kCounters, std::ios::trunc);
  out << json{{"hits", hits}, {"misses", misses}}.dump() << "\n";
}

}  // namespace

std::string cache_line(const CacheEntry& e) {
  json j = entry_body(e);
  j["checksum"] = hex64(fnv1a(j.dump()));
  return j.dump();
}

ResultCache::ResultCache(fs::path dir, bool create) : dir_(std::move(dir)) {
  if (create) fs::create_directories(dir_);
  if (!fs::is_directory(dir_)) throw PreconditionError("cache directory " + dir_.string() + " does not exist");
}

std::optional<fs::path> ResultCache::from_environment() {
  const char* v = std::getenv("CAVITYPRESS_CACHE");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return fs::path(v);
}

std::string ResultCache::make_key(const std::string& sft, const std::string& phi, const std::string& region,
                                  int collar) {
  const std::string text = sft + "\n" + phi + "\n" + region + "\n" + std::to_string(collar);
  return hex64(fnv1a(text)) + hex64(fnv1a(text, 0x9e3779b97f4a7c15ull));
}

double ResultCache::get_or_compute(const CacheEntry& entry, const std::function<double()>& compute) {
  {
    DirLock lock(dir_);
    auto [hits, misses] = read_counters(dir_);
    for (const auto& p : read_all(dir_)) {
      if (p.entry && p.entry->key == entry.key) {
        write_counters(dir_, hits + 1, misses);
        return p.entry->value;
      }
    }
    write_counters(dir_, hits, misses + 1);
  }
  CacheEntry e = entry;
  e.value = compute();
  DirLock lock(dir_);
  std::ofstream out(dir_ / kEntries, std::ios::app);
  out << cache_line(e) << "\n";
  return e.value;
}

std::vector<CacheEntry> ResultCache::entries() const {
  DirLock lock(dir_);
  std::vector<CacheEntry> out;
  for (const auto& p : read_all(dir_)) {
    if (p.entry) out.push_back(*p.entry);
  }
  return out;
}

VerifyReport ResultCache::verify(double fraction, std::uint64_t seed,
                                 const std::function<double(const CacheEntry&)>& recompute) {
  DirLock lock(dir_);
  VerifyReport report;
  std::vector<CacheEntry> good;
  for (const auto& p : read_all(dir_)) {
    ++report.entries;
    if (p.entry) {
      good.push_back(*p.entry);
    } else {
      report.problems.push_back({p.key, p.problem});
    }
  }
  if (!good.empty()) {
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * good.size())));
    std::vector<std::size_t> order(good.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(want, order.size()));
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) {
      ++report.recomputed;
      double v = 0.0;
      try {
        v = recompute(good[i]);
      } catch (const std::exception& e) {
        report.problems.push_back({good[i].key, std::string("recompute failed: ") + e.what()});
        continue;
      }
      if (std::bit_cast<std::uint64_t>(v) != std::bit_cast<std::uint64_t>(good[i].value)) {
        ++report.mismatches;
        report.problems.push_back({good[i].key, "value differs on recomputation"});
      }
    }
  }
  return report;
}

std::size_t ResultCache::gc(std::int64_t max_age_seconds, std::int64_t now) {
  DirLock lock(dir_);
  std::vector<std::string> keep;
  std::size_t dropped = 0;
  std::ifstream in(dir_ / kEntries);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto p = parse_line(line, lineno);
    if (p.entry && p.entry->created < now - max_age_seconds) {
      ++dropped;
    } else {
      keep.push_back(line);
    }
  }
  in.close();
  const fs::path tmp = dir_ / "entries.jsonl.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& l : keep) out << l << "\n";
  }
  fs::rename(tmp, dir_ / kEntries);
  return dropped;
}

CacheStats ResultCache::stats() const {
  DirLock lock(dir_);
  CacheStats s;
  for (const auto& p : read_all(dir_)) {
    if (p.entry) ++s.entries;
  }
  std::tie(s.hits, s.misses) = read_counters(dir_);
  std::error_code ec;
  const auto size = fs::file_size(dir_ / kEntries, ec);
  s.bytes = ec ? 0 : static_cast<std::size_t>(size);
  return s;
}

}  // namespace cavitypress
