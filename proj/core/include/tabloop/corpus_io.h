#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tabloop/token.h"

namespace tabloop {

/// All `.tokens.txt` files under `dir` (recursive), sorted by path so
/// corpus-level results are deterministic.
std::vector<std::filesystem::path> listTokenFiles(const std::filesystem::path& dir);

/// Throws Error{kUnreadableFile}.
std::string readTextFile(const std::filesystem::path& path);

TokenStream readTokenFile(const std::filesystem::path& path,
                          std::vector<std::string>* warnings = nullptr);

/// Throws Error{kIoFailure}.
void writeTextFile(const std::filesystem::path& path, const std::string& content);

void writeTokenFile(const std::filesystem::path& path, const TokenStream& stream);

/// "song.tokens.txt" -> "song".
std::string songStem(const std::filesystem::path& path);

/// Output stems for a batch of songs in input order; colliding stems get
/// "_2", "_3", ... suffixes so every song writes to its own files.
std::vector<std::string> uniqueStems(const std::vector<std::filesystem::path>& songs);

int defaultJobCount();

/// Runs fn(0..count) across up to `jobs` threads (0 means hardware
/// concurrency). Blocks until done; the first exception thrown by fn, if
/// any, is rethrown after all workers finish.
void parallelFor(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

std::uint64_t fnv1a64(std::string_view text);

}  // namespace tabloop
