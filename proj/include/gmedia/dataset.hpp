#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmedia/action.hpp"
#include "gmedia/grid.hpp"

namespace gmedia {

/// One executed scoop & dump: what the tray looked like before, after the scoop stroke,
/// and after the dump, plus the goal the policy was chasing.
struct EpisodeRecord {
    HeightMap before;
    ScoopDumpParams params;
    std::optional<HeightMap> after_scoop;
    HeightMap after;
    HeightMap goal;

    bool operator==(const EpisodeRecord&) const = default;
};

/// Change in distance-to-goal caused by the action: l1(goal, after) - l1(goal, before).
/// Negative means the action moved the tray closer to the goal.
double value_label(const EpisodeRecord& record);

/// "GMD1" dataset: magic, u32 rows, u32 cols, f32 cell_size, u32 record count, then per record
/// the before/after_scoop/after heights interleaved cell by cell (3 f32 per cell, row-major),
/// 9 f32 parameters, and rows*cols f32 goal heights. Every record needs after_scoop.
void write_dataset(std::ostream& out, std::span<const EpisodeRecord> records);
void write_dataset(const std::string& path, std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_dataset(std::istream& in, const GridSpec& defaults = {});
std::vector<EpisodeRecord> read_dataset(const std::string& path, const GridSpec& defaults = {});

/// Records i..i+len-1 form a chain when each after equals the next before.
bool is_chained(std::span<const EpisodeRecord> records, std::size_t first, std::size_t length);

}  // namespace gmedia
