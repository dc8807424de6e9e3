#include "tcr/bench_runner.hpp"

#include "tcr/client.hpp"
#include "tcr/storage.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace tcr::bench {

namespace {

namespace fs = std::filesystem;

constexpr record_index owner = 1;

// Sum of each step over all ops of one category in one repeat.
struct category_totals {
    std::map<std::string, double> steps;
    std::uint64_t ops = 0;

    void add(const step_recorder &rec, double total) {
        for (const auto &[name, us] : rec.steps()) {
            steps[name] += us;
        }
        steps["total"] += total;
        ++ops;
    }
};

void expect(bool ok, const std::string &what) {
    if (!ok) {
        throw std::runtime_error{"benchmark operation failed: " + what};
    }
}

class repeat_driver {
public:
    repeat_driver(service &svc, const credential &cred, std::uint64_t prepopulated, const blob_set &payload,
                  std::mt19937_64 &rng)
        : svc_{svc}, cred_{cred}, prepopulated_{prepopulated}, payload_{payload}, rng_{rng} {}

    std::map<std::string, category_totals> run(std::uint64_t n, std::uint64_t capacity) {
        std::map<std::string, category_totals> out;
        for (const auto idx : fresh_indices(n, capacity)) {
            timed(out["create"], [&](step_recorder *rec) { create(idx, rec); });
        }
        if (prepopulated_ == 0) {
            return out;
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto idx = pick();
            timed(out["modify"], [&](step_recorder *rec) { modify(idx, false, rec); });
        }
        std::vector<std::pair<record_index, std::uint64_t>> encrypted;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto idx = pick();
            timed(out["modify_encrypted"], [&](step_recorder *rec) { encrypted.emplace_back(idx, modify(idx, true, rec)); });
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto idx = pick();
            timed(out["info"], [&](step_recorder *rec) { info(idx, rec); });
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto idx = pick();
            timed(out["fetch"], [&](step_recorder *rec) { fetch(idx, 1, rec); });
        }
        for (const auto &[idx, ver] : encrypted) {
            timed(out["fetch_encrypted"], [&](step_recorder *rec) { fetch(idx, ver, rec); });
        }
        return out;
    }

private:
    template <class F>
    void timed(category_totals &totals, F &&op) {
        step_recorder rec;
        const double start = thread_cpu_us();
        op(&rec);
        const double total = thread_cpu_us() - start;
        // Client-side verification runs after `op` returns its service results and is excluded.
        totals.add(rec, total - client_us_);
        client_us_ = 0;
    }

    // Client work inside an op is measured and subtracted from the op total.
    template <class F>
    auto client_side(F &&f) {
        const double start = thread_cpu_us();
        auto result = f();
        client_us_ += thread_cpu_us() - start;
        return result;
    }

    std::vector<record_index> fresh_indices(std::uint64_t n, std::uint64_t capacity) {
        // Prepopulated containers sit on even indices, so odd ones are always fresh.
        std::unordered_set<record_index> chosen;
        std::vector<record_index> out;
        const std::uint64_t want = std::min(n, capacity);
        std::uniform_int_distribution<std::uint64_t> dist{0, std::max<std::uint64_t>(4 * capacity, 1) - 1};
        while (out.size() < want) {
            const record_index idx = 2 * dist(rng_) + 1;
            if (chosen.insert(idx).second) {
                out.push_back(idx);
            }
        }
        return out;
    }

    record_index pick() {
        std::uniform_int_distribution<std::uint64_t> dist{0, prepopulated_ - 1};
        return 2 * dist(rng_);
    }

    std::uint64_t counter_of(record_index idx) {
        auto [it, fresh] = ctr_.try_emplace(idx, 2);
        return it->second;
    }

    void create(record_index idx, step_recorder *rec) {
        const auto env = client_side([&] {
            const digest v = leaf_digest(initial_acl(cred_.user).front().second);
            return request_envelope{request_type::acl, idx, 0, v, cred_.user,
                                    sign_request(cred_, request_type::acl, idx, 0, v)};
        });
        const auto r = svc_.create(env, rec);
        expect(r.st == status::ok && client_side([&] { return verify_ack(cred_, env.type, idx, 0, env.v, r.mu_ack); }),
               "create");
    }

    std::uint64_t modify(record_index idx, bool encrypt, step_recorder *rec) {
        const std::uint64_t c_ctr = counter_of(idx);
        const auto req = client_side([&] {
            modify_request m;
            m.blobs = payload_;
            if (encrypt) {
                const digest sigma = random_digest();
                m.blobs.image = apply_keystream(sigma, payload_.image);
                const auto w = wrap_secret(cred_, sigma, idx, c_ctr);
                m.mu_cs = w.mu_cs;
                m.sigma_prime = w.sigma_prime;
            }
            const digest lambda = compute_lambda(m.blobs, m.mu_cs);
            m.env = request_envelope{request_type::container, idx, c_ctr, lambda, cred_.user,
                                     sign_request(cred_, request_type::container, idx, c_ctr, lambda)};
            return m;
        });
        const auto r = svc_.modify(req, rec);
        expect(r.st == status::ok, "modify");
        ctr_[idx] = c_ctr + 1;
        ver_[idx] = ver_.try_emplace(idx, 1).first->second + 1;
        return ver_[idx];
    }

    void info(record_index idx, step_recorder *rec) {
        const digest delta = client_side([] { return random_digest(); });
        const auto r = svc_.info(idx, 0, delta, cred_.user, rec);
        expect(r.st == status::ok && r.response && client_side([&] {
                   return verify_info(cred_, *r.response, delta, idx, 0) == verdict::verified;
               }),
               "info");
    }

    void fetch(record_index idx, std::uint64_t ver, step_recorder *rec) {
        const auto content = svc_.fetch(idx, ver, cred_.user, rec);
        expect(content.st == status::ok, "fetch");
        const digest delta = client_side([] { return random_digest(); });
        const auto r = svc_.info(idx, content.ver, delta, cred_.user, rec, true);
        expect(r.st == status::ok && r.response, "fetch verification");
        const bool ok = client_side([&] {
            if (verify_info(cred_, *r.response, delta, idx, content.ver) != verdict::verified) {
                return false;
            }
            const auto &i = std::get<info_response>(*r.response);
            if (compute_lambda(content.blobs, content.mu_cs) != i.lambda) {
                return false;
            }
            if (content.mu_cs.is_zero()) {
                return true;
            }
            return content.sigma_u && unwrap_secret(cred_, *content.sigma_u, content.mu_cs, idx).has_value();
        });
        expect(ok, "fetch content");
    }

    service &svc_;
    credential cred_;
    std::uint64_t prepopulated_;
    const blob_set &payload_;
    std::mt19937_64 &rng_;
    std::map<record_index, std::uint64_t> ctr_;
    std::map<record_index, std::uint64_t> ver_;
    double client_us_ = 0;
};

void log_line(const bench_config &cfg, const std::string &msg) {
    if (cfg.log) {
        cfg.log(msg);
    }
}

} // namespace

const std::vector<std::string> &operations() {
    static const std::vector<std::string> ops{"create", "modify", "modify_encrypted", "info", "fetch", "fetch_encrypted"};
    return ops;
}

std::vector<unsigned> parse_heights(const std::string &text) {
    std::vector<unsigned> out;
    auto range = text.find("..");
    try {
        if (range != std::string::npos) {
            const auto lo = std::stoul(text.substr(0, range));
            const auto hi = std::stoul(text.substr(range + 2));
            if (lo > hi) {
                throw std::invalid_argument{"empty height range"};
            }
            for (auto h = lo; h <= hi; ++h) {
                out.push_back(static_cast<unsigned>(h));
            }
        } else {
            std::stringstream ss{text};
            std::string item;
            while (std::getline(ss, item, ',')) {
                out.push_back(static_cast<unsigned>(std::stoul(item)));
            }
        }
    } catch (const std::logic_error &) {
        throw std::invalid_argument{"bad height list: " + text};
    }
    if (out.empty()) {
        throw std::invalid_argument{"no heights given"};
    }
    for (auto h : out) {
        if (h == 0 || h > tree_geometry::max_height) {
            throw std::invalid_argument{"height out of range: " + std::to_string(h)};
        }
    }
    return out;
}

summary summarize(std::vector<double> samples) {
    summary s;
    if (samples.empty()) {
        return s;
    }
    std::sort(samples.begin(), samples.end());
    const auto n = samples.size();
    s.median = n % 2 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2;
    if (n > 1) {
        double mean = 0;
        for (auto v : samples) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        double var = 0;
        for (auto v : samples) {
            var += (v - mean) * (v - mean);
        }
        var /= static_cast<double>(n - 1);
        s.stderr_ = std::sqrt(var / static_cast<double>(n));
    }
    return s;
}

void run_bench(const bench_config &cfg, std::vector<timing_row> &rows) {
    if (cfg.ops == 0 || cfg.repeats == 0 || cfg.heights.empty()) {
        throw std::invalid_argument{"ops, repeats and heights must be non-empty"};
    }
    const fs::path root = cfg.work_dir.empty() ? fs::temp_directory_path() / "tcr-bench" : cfg.work_dir;
    std::mt19937_64 rng{cfg.seed};

    for (const unsigned h : cfg.heights) {
        const fs::path dir = root / ("h" + std::to_string(h));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const fs::path data = dir / "blobs";
        const tree_geometry g{h};
        const std::uint64_t prepopulated = g.leaf_count() > cfg.ops ? g.leaf_count() - cfg.ops : 0;
        const credential cred{owner, random_digest()};

        blob_set payload;
        {
            log_line(cfg, "h=" + std::to_string(h) + ": prepopulating " + std::to_string(prepopulated));
            database db{dir / "base.db", data, h};
            auto module = trusted_module::initialize({{owner, cred.key}}, dir / "base.module");
            payload = bulk_prepopulate(db, module, prepopulated, {owner, cfg.payload}).payload;
        }

        std::map<std::string, std::map<std::string, std::vector<double>>> samples;
        for (unsigned r = 0; r < cfg.repeats; ++r) {
            // Each repeat starts from the same prepopulated state.
            fs::copy_file(dir / "base.db", dir / "run.db", fs::copy_options::overwrite_existing);
            fs::copy_file(dir / "base.module", dir / "run.module", fs::copy_options::overwrite_existing);
            {
                database db{dir / "run.db", data, h};
                auto module = trusted_module::load(dir / "run.module");
                service svc{db, module, cfg.service};
                repeat_driver driver{svc, cred, prepopulated, payload, rng};
                for (const auto &[op, totals] : driver.run(cfg.ops, g.leaf_count() - prepopulated)) {
                    for (const auto &[step, sum] : totals.steps) {
                        samples[op][step].push_back(sum / static_cast<double>(totals.ops));
                    }
                }
            }
            fs::remove(dir / "run.db");
            fs::remove(dir / "run.db-wal");
            fs::remove(dir / "run.db-shm");
            fs::remove(dir / "run.module");
            log_line(cfg, "h=" + std::to_string(h) + ": repeat " + std::to_string(r + 1) + "/" +
                              std::to_string(cfg.repeats));
        }

        std::vector<timing_row> height_rows;
        for (const auto &[op, steps] : samples) {
            for (const auto &[step, values] : steps) {
                const auto s = summarize(values);
                height_rows.push_back({h, op, step, s.median, s.stderr_});
            }
        }
        sort_rows(height_rows);
        rows.insert(rows.end(), height_rows.begin(), height_rows.end());
        if (!cfg.keep_db) {
            fs::remove_all(dir);
        }
    }
}

void sort_rows(std::vector<timing_row> &rows) {
    std::sort(rows.begin(), rows.end(), [](const timing_row &a, const timing_row &b) {
        return std::tie(a.h, a.operation, a.step) < std::tie(b.h, b.operation, b.step);
    });
}

void emit_csv(const std::vector<timing_row> &rows, std::ostream &out) {
    out << "h,operation,step,median_us,stderr_us\n";
    out << std::fixed << std::setprecision(3);
    for (const auto &r : rows) {
        out << r.h << ',' << r.operation << ',' << r.step << ',' << r.median_us << ',' << r.stderr_us << '\n';
    }
}

std::vector<timing_row> parse_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != "h,operation,step,median_us,stderr_us") {
        throw std::invalid_argument{"missing CSV header"};
    }
    std::vector<timing_row> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::stringstream ss{line};
        std::string h, op, step, med, se;
        if (!std::getline(ss, h, ',') || !std::getline(ss, op, ',') || !std::getline(ss, step, ',') ||
            !std::getline(ss, med, ',') || !std::getline(ss, se)) {
            throw std::invalid_argument{"malformed CSV row: " + line};
        }
        rows.push_back({static_cast<unsigned>(std::stoul(h)), op, step, std::stod(med), std::stod(se)});
    }
    return rows;
}

} // namespace tcr::bench
