#pragma once

#include "tcr/line_socket.hpp"
#include "tcr/service.hpp"
#include "tcr/wire.hpp"

#include <atomic>
#include <shared_mutex>
#include <string>

namespace tcr {

/// Maps wire messages onto the service. Malformed input becomes a protocol_error reply.
class request_handler {
public:
    request_handler(database &db, trusted_module &module, service &svc) : db_{&db}, module_{&module}, svc_{&svc} {}

    wire::json handle(const wire::json &msg, bool loopback);
    std::string handle_line(const std::string &line, bool loopback);

private:
    wire::json dispatch(const std::string &op, const wire::json &payload, bool loopback);

    database *db_;
    trusted_module *module_;
    service *svc_;
    // Bulk prepopulation excludes every other request.
    std::shared_mutex admin_;
};

/// Accepts connections until `stop` is set, one thread per connection.
void serve(tcp_listener &listener, request_handler &handler, const std::atomic<bool> &stop);

} // namespace tcr
