#pragma once

#include "tcr/service.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tcr::bench {

struct bench_config {
    std::vector<unsigned> heights{10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    std::uint64_t ops = 500;
    unsigned repeats = 25;
    std::size_t payload = 12 * 1024;
    std::filesystem::path work_dir;
    bool keep_db = false;
    std::uint64_t seed = 1;
    service_options service{};
    std::function<void(const std::string &)> log;
};

struct timing_row {
    unsigned h = 0;
    std::string operation;
    std::string step;
    double median_us = 0;
    double stderr_us = 0;

    friend bool operator==(const timing_row &, const timing_row &) = default;
};

/// Operation labels in the order they run within one repeat.
const std::vector<std::string> &operations();

/// "10..20", "12,16,20" or a single height.
std::vector<unsigned> parse_heights(const std::string &text);

/// Appends rows for each finished height to `rows` as it goes, so a failure part-way
/// leaves the completed heights in place.
void run_bench(const bench_config &cfg, std::vector<timing_row> &rows);

/// Sorts by (h, operation, step).
void sort_rows(std::vector<timing_row> &rows);
void emit_csv(const std::vector<timing_row> &rows, std::ostream &out);
std::vector<timing_row> parse_csv(std::istream &in);

struct summary {
    double median = 0;
    double stderr_ = 0;
};
summary summarize(std::vector<double> samples);

} // namespace tcr::bench
