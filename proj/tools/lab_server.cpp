// lab_server: live session service over length-prefixed JSON on TCP.
//
// Settings come from defaults, then --config FILE, then LAB_SERVER_HOST /
// LAB_SERVER_PORT, then --host / --port.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "lab/service.hpp"
#include "lab/transport.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Live experiment sessions over TCP (4-byte big-endian length + JSON per message).", "lab_server"};
  std::string config_path, host;
  int port = -1;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--host", host, "Listen address");
  app.add_option("--port", port, "Listen port (0: ephemeral)")->check(CLI::Range(0, 65535));
  CLI11_PARSE(app, argc, argv);

  try {
    lab::live::ServerConfig config = config_path.empty() ? lab::live::ServerConfig{} : lab::live::ServerConfig::load(config_path);
    config.apply_env();
    if (!host.empty()) config.host = host;
    if (port >= 0) config.port = port;

    lab::live::Service service(config);
    lab::live::TcpServer server(service, config.host, config.port);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.start();
    std::cout << "listening on " << config.host << ':' << server.port() << std::endl;
    while (!g_stop) ::pause();
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "lab_server: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
