#include "tcr/server.hpp"

#include <thread>

namespace tcr {

using wire::json;

namespace {

json with_status(status st, json payload = json::object()) {
    payload["status"] = to_string(st);
    return payload;
}

} // namespace

json request_handler::dispatch(const std::string &op, const json &p, bool loopback) {
    if (op == "BENCH_PREPOPULATE") {
        if (!loopback) {
            return with_status(status::protocol_error, {{"error", "admin operation is loopback-only"}});
        }
        std::unique_lock lock{admin_};
        prepopulate_options opts;
        opts.owner = p.contains("owner") ? wire::get_u64(p, "owner") : opts.owner;
        opts.payload_size = p.contains("payload_size") ? wire::get_u64(p, "payload_size") : opts.payload_size;
        const auto r = bulk_prepopulate(*db_, *module_, wire::get_u64(p, "count"), opts);
        svc_->attach_module(*module_);
        return with_status(status::ok, {{"root", r.root.hex()}, {"containers", r.containers}});
    }

    std::shared_lock lock{admin_};
    if (op == "CREATE") {
        const auto r = svc_->create(wire::envelope_from(p, request_type::acl));
        return with_status(r.st, {{"mu_ack", r.mu_ack.hex()}});
    }
    if (op == "MODIFY") {
        modify_request req;
        req.env = wire::envelope_from(p, request_type::container);
        req.blobs = wire::blobs_from(p);
        if (p.contains("mu_cs")) {
            req.mu_cs = wire::get_digest(p, "mu_cs");
            req.sigma_prime = wire::get_digest(p, "sigma_prime");
        }
        const auto r = svc_->modify(req);
        return with_status(r.st, {{"mu_ack", r.mu_ack.hex()}});
    }
    if (op == "ACL_SET") {
        const auto phase = p.value("phase", std::string{"commit"});
        if (phase == "prepare") {
            const auto snap = svc_->acl_prepare(wire::get_u64(p, "idx"));
            if (!snap) {
                return with_status(status::rejected);
            }
            return with_status(status::ok, {{"height", acl_height},
                                            {"leaves", wire::to_json(snap->leaves)},
                                            {"c_ctr", snap->c_ctr_hint}});
        }
        if (phase != "commit") {
            return with_status(status::protocol_error, {{"error", "unknown ACL_SET phase"}});
        }
        acl_set_request req{wire::envelope_from(p, request_type::acl), wire::get_u64(p, "target"),
                            wire::get_u64(p, "level")};
        const auto r = svc_->acl_set(req);
        return with_status(r.st, {{"mu_ack", r.mu_ack.hex()}});
    }
    if (op == "INFO") {
        const auto r = svc_->info(wire::get_u64(p, "idx"), wire::get_u64(p, "ver"), wire::get_digest(p, "delta"),
                                  wire::get_u64(p, "user"), nullptr, p.value("phase", 1) == 2);
        json out{{"c_ctr", r.c_ctr_hint}};
        if (r.response) {
            out["response"] = wire::to_json(*r.response);
        }
        return with_status(r.st, std::move(out));
    }
    if (op == "FETCH") {
        const auto r = svc_->fetch(wire::get_u64(p, "idx"), wire::get_u64(p, "ver"), wire::get_u64(p, "user"));
        json out = wire::to_json(r.blobs);
        out["ver"] = r.ver;
        out["mu_cs"] = r.mu_cs.hex();
        if (r.sigma_u) {
            out["sigma_u"] = r.sigma_u->hex();
        }
        return with_status(r.st, std::move(out));
    }
    return with_status(status::protocol_error, {{"error", "unknown op: " + op}});
}

json request_handler::handle(const json &msg, bool loopback) {
    std::string op;
    std::string request_id;
    try {
        if (!msg.is_object()) {
            throw wire::wire_error{"message is not an object"};
        }
        op = msg.value("op", std::string{});
        request_id = msg.value("request_id", std::string{});
        if (op.empty() || !msg.contains("payload")) {
            throw wire::wire_error{"message needs op and payload"};
        }
        return wire::message(op, request_id, dispatch(op, msg.at("payload"), loopback));
    } catch (const std::exception &e) {
        return wire::message(op, request_id, with_status(status::protocol_error, {{"error", e.what()}}));
    }
}

std::string request_handler::handle_line(const std::string &line, bool loopback) {
    json msg = json::parse(line, nullptr, false);
    if (msg.is_discarded()) {
        return wire::message("", "", with_status(status::protocol_error, {{"error", "malformed JSON"}})).dump();
    }
    return handle(msg, loopback).dump();
}

void serve(tcp_listener &listener, request_handler &handler, const std::atomic<bool> &stop) {
    while (!stop.load()) {
        auto conn = listener.accept();
        if (stop.load()) {
            break;
        }
        std::thread{[&handler, c = std::move(conn)]() mutable {
            try {
                const bool loopback = c.peer_is_loopback();
                while (auto line = c.read_line()) {
                    c.write_line(handler.handle_line(*line, loopback));
                }
            } catch (const std::exception &) {
                // Connection dropped; nothing to report back.
            }
        }}.detach();
    }
}

} // namespace tcr
