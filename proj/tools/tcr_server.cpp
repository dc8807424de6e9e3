// Repository service: TCP server over a SQLite store and a persisted trusted module.
#include "tcr/server.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::map<tcr::record_index, tcr::digest> read_user_keys(const std::string &path) {
    std::ifstream in{path};
    if (!in) {
        throw std::runtime_error{"cannot read user key list " + path};
    }
    std::map<tcr::record_index, tcr::digest> keys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ss{line};
        tcr::record_index user = 0;
        std::string hex;
        if (!(ss >> user >> hex)) {
            throw std::runtime_error{"bad key line: " + line};
        }
        keys[user] = tcr::digest::from_hex(hex);
    }
    return keys;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Trustworthy container repository server"};
    std::string listen = "127.0.0.1:7400";
    std::string db_path = "tcr.db";
    std::string module_path = "tcr.module";
    std::string data_dir = "tcr-data";
    std::string init_keys;
    std::string ready_file;
    unsigned height = 20;
    app.add_option("--listen", listen, "addr:port to listen on");
    app.add_option("--db", db_path, "SQLite database file");
    app.add_option("--module-state", module_path, "trusted module state file");
    app.add_option("--height", height, "container tree height")->check(CLI::Range(1u, tcr::tree_geometry::max_height));
    app.add_option("--data-dir", data_dir, "blob directory");
    app.add_option("--init-keys", init_keys, "user key list (\"idx hexkey\" per line) for a new module");
    app.add_option("--ready-file", ready_file, "write the bound port here once listening");
    CLI11_PARSE(app, argc, argv);

    try {
        tcr::database db{db_path, data_dir, height};
        std::optional<tcr::trusted_module> module;
        if (std::filesystem::exists(module_path)) {
            module.emplace(tcr::trusted_module::load(module_path));
        } else {
            if (init_keys.empty()) {
                std::cerr << "no module state at " << module_path << "; pass --init-keys to create one\n";
                return 1;
            }
            if (!db.empty()) {
                std::cerr << "refusing to pair a new module with a non-empty database\n";
                return 1;
            }
            module.emplace(tcr::trusted_module::initialize(read_user_keys(init_keys), module_path));
        }
        tcr::service svc{db, *module};
        tcr::request_handler handler{db, *module, svc};
        tcr::tcp_listener listener{tcr::parse_endpoint(listen)};
        std::cout << "listening on port " << listener.port() << std::endl;
        if (!ready_file.empty()) {
            std::ofstream{ready_file} << listener.port() << '\n';
        }
        std::atomic<bool> stop{false};
        tcr::serve(listener, handler, stop);
    } catch (const std::exception &e) {
        std::cerr << "tcr-server: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
