#include "test_support.hpp"

#include "tcr/bench_runner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace tcr;
using namespace tcr::bench;

TEST(Bench, ParseHeights) {
    EXPECT_EQ(parse_heights("10..13"), (std::vector<unsigned>{10, 11, 12, 13}));
    EXPECT_EQ(parse_heights("12,16,20"), (std::vector<unsigned>{12, 16, 20}));
    EXPECT_EQ(parse_heights("9"), (std::vector<unsigned>{9}));
    EXPECT_THROW(parse_heights("13..10"), std::invalid_argument);
    EXPECT_THROW(parse_heights("x"), std::invalid_argument);
}

TEST(Bench, SummaryStatistics) {
    const auto s = summarize({4, 1, 3, 2});
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    // Sample sd of {1,2,3,4} is sqrt(5/3); stderr divides by sqrt(4).
    EXPECT_NEAR(s.stderr_, std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(summarize({7}).median, 7);
    EXPECT_DOUBLE_EQ(summarize({7}).stderr_, 0);
}

TEST(Bench, CsvRoundTripAndOrder) {
    std::vector<timing_row> rows{{12, "info", "total", 5.5, 0.25},
                                 {10, "fetch", "verify", 1, 0},
                                 {10, "create", "total", 100.125, 2},
                                 {10, "create", "eq_cert", 20, 1}};
    sort_rows(rows);
    EXPECT_EQ(rows.front().step, "eq_cert");
    EXPECT_EQ(rows.back().h, 12u);
    std::stringstream ss;
    emit_csv(rows, ss);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "h,operation,step,median_us,stderr_us");
    ss << "# aborted: test\n";
    const auto back = parse_csv(ss);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].operation, rows[i].operation);
        EXPECT_NEAR(back[i].median_us, rows[i].median_us, 1e-3);
    }
}

TEST(Bench, SmokeRun) {
    tcr::testing::temp_dir dir;
    bench_config cfg;
    cfg.heights = {10};
    cfg.ops = 2;
    cfg.repeats = 2;
    cfg.payload = 1024;
    cfg.work_dir = dir.path();
    std::vector<timing_row> rows;
    run_bench(cfg, rows);
    std::set<std::string> ops;
    for (const auto &r : rows) {
        EXPECT_EQ(r.h, 10u);
        EXPECT_GE(r.median_us, 0);
        ops.insert(r.operation);
    }
    EXPECT_EQ(ops, std::set<std::string>(operations().begin(), operations().end()));
    const auto has = [&](const char *op, const char *step) {
        return std::any_of(rows.begin(), rows.end(),
                           [&](const timing_row &r) { return r.operation == op && r.step == step; });
    };
    EXPECT_TRUE(has("create", "total"));
    EXPECT_TRUE(has("create", "placeholder_insert"));
    EXPECT_TRUE(has("fetch_encrypted", "secret_retrieval"));
    EXPECT_TRUE(has("fetch", "verify_2"));
    EXPECT_TRUE(has("modify", "lambda"));
}
