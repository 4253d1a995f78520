#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include <mlforge/gateway/http_server.hpp>
#include <mlforge/platform/platform.hpp>

using namespace mlforge;

int main(int argc, char** argv) {
    std::string addr = "127.0.0.1:8080";
    int nodes = 3;
    sched::Resources per_node{8, 32, 65536};
    int tick_ms = 200;

    CLI::App app{"mlforge-server: gateway over a simulated cluster", "mlforge-server"};
    app.add_option("--addr", addr, "Listen address host:port")->envname("MLFORGE_ADDR");
    app.add_option("--nodes", nodes, "Simulated nodes")->check(CLI::PositiveNumber);
    app.add_option("--gpus", per_node.gpus, "GPUs per node")->check(CLI::NonNegativeNumber);
    app.add_option("--cpus", per_node.cpus, "CPUs per node")->check(CLI::NonNegativeNumber);
    app.add_option("--mem-mb", per_node.mem_mb, "Memory per node in MiB")->check(CLI::NonNegativeNumber);
    app.add_option("--tick-ms", tick_ms, "Wall time per simulated step")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        std::cerr << "error: --addr must be host:port\n";
        return 1;
    }
    gateway::ServerOptions options;
    options.host = addr.substr(0, colon);
    try {
        options.port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        std::cerr << "error: bad port in " << addr << "\n";
        return 1;
    }

    // Block termination signals in every thread; the main thread waits for them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    platform::PlatformConfig config;
    config.nodes = platform::uniform_nodes(nodes, per_node);
    config.start_time = from_millis(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
    platform::Platform platform(config);
    gateway::Router router(platform);
    gateway::HttpServer server(router, options);
    try {
        server.start();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "listening on " << options.host << ":" << server.port() << "\n" << std::flush;

    std::atomic<bool> running{true};
    std::thread ticker([&] {
        while (running) {
            std::this_thread::sleep_for(std::chrono::milliseconds(tick_ms));
            std::lock_guard lock(platform.mutex());
            platform.tick();
        }
    });
    int sig = 0;
    sigwait(&signals, &sig);
    running = false;
    ticker.join();
    server.stop();
    return 0;
}
