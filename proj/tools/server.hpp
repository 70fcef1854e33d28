#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace swcrt {

// Registers the /v1 endpoints on an existing server.
void install_routes(httplib::Server& server);

// Blocks until the server stops. Returns false if the port cannot be bound.
bool serve(const std::string& host, int port);

}  // namespace swcrt
