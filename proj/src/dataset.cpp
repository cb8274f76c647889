#include "gmedia/dataset.hpp"

#include <fstream>

#include "gmedia/binary_io.hpp"
#include "gmedia/errors.hpp"

namespace gmedia {

double value_label(const EpisodeRecord& record) {
    return l1_distance(record.goal, record.after) - l1_distance(record.goal, record.before);
}

void write_dataset(std::ostream& out, std::span<const EpisodeRecord> records) {
    GridSpec spec;
    if (!records.empty()) {
        spec = records.front().before.spec();
    }
    binary::write_magic(out, "GMD1");
    binary::write_u32(out, static_cast<std::uint32_t>(spec.rows));
    binary::write_u32(out, static_cast<std::uint32_t>(spec.cols));
    binary::write_f32(out, static_cast<float>(spec.cell_size));
    binary::write_u32(out, static_cast<std::uint32_t>(records.size()));
    for (const EpisodeRecord& rec : records) {
        if (!rec.after_scoop) {
            throw DataError("record without an intermediate scoop state cannot be written");
        }
        const HeightMap& scoop = *rec.after_scoop;
        if (rec.before.spec() != spec || scoop.spec() != spec || rec.after.spec() != spec ||
            rec.goal.spec() != spec) {
            throw DimensionError("dataset records must share one grid spec");
        }
        for (int i = 0; i < spec.cell_count(); ++i) {
            binary::write_f32(out, static_cast<float>(rec.before[i]));
            binary::write_f32(out, static_cast<float>(scoop[i]));
            binary::write_f32(out, static_cast<float>(rec.after[i]));
        }
        write_params(out, rec.params);
        for (double v : rec.goal.data()) {
            binary::write_f32(out, static_cast<float>(v));
        }
    }
    if (!out) {
        throw IoError("failed writing dataset");
    }
}

void write_dataset(const std::string& path, std::span<const EpisodeRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_dataset(out, records);
}

std::vector<EpisodeRecord> read_dataset(std::istream& in, const GridSpec& defaults) {
    binary::expect_magic(in, "GMD1");
    GridSpec spec = defaults;
    spec.rows = static_cast<int>(binary::read_u32(in));
    spec.cols = static_cast<int>(binary::read_u32(in));
    spec.cell_size = binary::read_f32(in);
    if (spec.cols != defaults.cols) {
        spec.divider_col = spec.cols / 2;
    }
    spec.validate();
    const std::uint32_t count = binary::read_u32(in);
    const auto cells = static_cast<std::size_t>(spec.cell_count());
    std::vector<EpisodeRecord> records;
    records.reserve(count);
    try {
        for (std::uint32_t k = 0; k < count; ++k) {
            std::vector<double> before(cells), scoop(cells), after(cells), goal(cells);
            for (std::size_t i = 0; i < cells; ++i) {
                before[i] = binary::read_f32(in);
                scoop[i] = binary::read_f32(in);
                after[i] = binary::read_f32(in);
            }
            const ScoopDumpParams params = read_params(in);
            for (double& v : goal) {
                v = binary::read_f32(in);
            }
            records.push_back({HeightMap(spec, std::move(before)), params, HeightMap(spec, std::move(scoop)),
                               HeightMap(spec, std::move(after)), HeightMap(spec, std::move(goal))});
        }
    } catch (const ArgumentError& e) {
        throw IoError(std::string("invalid dataset: ") + e.what());
    }
    return records;
}

std::vector<EpisodeRecord> read_dataset(const std::string& path, const GridSpec& defaults) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_dataset(in, defaults);
}

bool is_chained(std::span<const EpisodeRecord> records, std::size_t first, std::size_t length) {
    if (length == 0 || first + length > records.size()) {
        return false;
    }
    for (std::size_t i = first; i + 1 < first + length; ++i) {
        if (records[i].after != records[i + 1].before) {
            return false;
        }
    }
    return true;
}

}  // namespace gmedia
