#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "evseq/http_service.hpp"

namespace {
evseq::Service* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evseq-server: HTTP session API"};
  std::string host = "127.0.0.1", data_dir = ".", log_dir;
  int port = 8080;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port (0 picks a free one)");
  app.add_option("--data-dir", data_dir, "Root for relative data paths");
  app.add_option("--log-dir", log_dir, "Append action logs here");
  CLI11_PARSE(app, argc, argv);

  evseq::ServiceOptions options;
  options.data_dir = data_dir;
  if (!log_dir.empty()) options.log_dir = log_dir;
  evseq::Service service(options);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    const int bound = service.bind(host, port);
    if (bound < 0) {
      std::cerr << "cannot bind " << host << ":" << port << "\n";
      return 2;
    }
    std::cerr << "listening on " << host << ":" << bound << "\n";
    service.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
