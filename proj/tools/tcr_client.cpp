// Verifying client. Exit codes: 0 verified, 2 denial, 3 invalid proof, 4 protocol error,
// 5 rejected without certification.
#include "tcr/client.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

tcr::bytes read_file(const std::string &path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw std::runtime_error{"cannot read " + path};
    }
    return tcr::bytes{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

void write_file(const std::filesystem::path &path, const tcr::bytes &content) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    out.write(reinterpret_cast<const char *>(content.data()), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw std::runtime_error{"cannot write " + path.string()};
    }
}

void print_info(const tcr::info_response &i) {
    std::cout << "idx " << i.idx << "\nc_ctr " << i.c_ctr << "\nc_ver " << i.c_ver << "\nversion " << i.requested_ver
              << "\nacl_root " << i.alpha.hex() << "\nlambda " << i.lambda.hex() << '\n';
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Trustworthy container repository client"};
    app.require_subcommand(1);
    std::string server = "127.0.0.1:7400";
    tcr::record_index user = 0;
    std::string key_file;
    app.add_option("--server", server, "addr:port of the repository");
    app.add_option("--user", user, "user index");
    app.add_option("--key-file", key_file, "file holding the 32-byte user key as hex");

    tcr::record_index idx = 0;
    std::uint64_t ver = 0;

    auto *keygen = app.add_subcommand("keygen", "write a fresh random user key");
    std::string key_out;
    keygen->add_option("--out", key_out, "key file to create")->required();

    auto *create = app.add_subcommand("create", "create a container");
    create->add_option("--index", idx)->required();

    auto *modify = app.add_subcommand("modify", "upload a new container version");
    std::string image, build, compose;
    bool encrypt = false;
    modify->add_option("--index", idx)->required();
    modify->add_option("--image", image)->required();
    modify->add_option("--build", build)->required();
    modify->add_option("--compose", compose)->required();
    modify->add_flag("--encrypt", encrypt, "encrypt the image under a fresh secret");

    auto *acl = app.add_subcommand("acl-set", "set a user's access level");
    tcr::record_index target = 0;
    std::uint64_t level = 0;
    acl->add_option("--index", idx)->required();
    acl->add_option("--target-user", target)->required();
    acl->add_option("--level", level)->required()->check(CLI::Range(0, 3));

    auto *info = app.add_subcommand("info", "query verified container metadata");
    info->add_option("--index", idx)->required();
    info->add_option("--version", ver, "0 means latest");

    auto *fetch = app.add_subcommand("fetch", "download and verify a version");
    std::string out_dir;
    fetch->add_option("--index", idx)->required();
    fetch->add_option("--version", ver, "0 means latest");
    fetch->add_option("--out", out_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (keygen->parsed()) {
            tcr::write_key_file(key_out, tcr::random_digest());
            return 0;
        }
        if (key_file.empty()) {
            std::cerr << "--key-file is required\n";
            return static_cast<int>(tcr::exit_code::protocol);
        }
        tcr::tcp_transport transport{tcr::parse_endpoint(server)};
        tcr::client c{transport, {user, tcr::read_key_file(key_file)}};
        tcr::exit_code code = tcr::exit_code::protocol;

        if (create->parsed()) {
            code = c.create(idx);
        } else if (modify->parsed()) {
            code = c.modify(idx, {read_file(image), read_file(build), read_file(compose)}, encrypt);
        } else if (acl->parsed()) {
            code = c.acl_set(idx, target, level);
        } else if (info->parsed()) {
            const auto r = c.info(idx, ver);
            code = r.code;
            if (r.info) {
                print_info(*r.info);
            }
        } else if (fetch->parsed()) {
            auto r = c.fetch(idx, ver);
            code = r.code;
            if (code == tcr::exit_code::verified && r.info) {
                print_info(*r.info);
                if (r.info->requested_ver > 0) {
                    std::filesystem::create_directories(out_dir);
                    write_file(std::filesystem::path{out_dir} / "image", r.blobs.image);
                    write_file(std::filesystem::path{out_dir} / "build", r.blobs.build);
                    write_file(std::filesystem::path{out_dir} / "compose", r.blobs.compose);
                }
            }
        }
        if (code != tcr::exit_code::verified) {
            std::cerr << "tcr: " << c.last_error() << '\n';
        }
        return static_cast<int>(code);
    } catch (const std::exception &e) {
        std::cerr << "tcr: " << e.what() << '\n';
        return static_cast<int>(tcr::exit_code::protocol);
    }
}
