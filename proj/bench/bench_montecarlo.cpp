// Serial reference vs OpenMP estimate on the example-6-1 mixed zone.
#include <chrono>
#include <cstdlib>
#include <iostream>

#include <fmt/format.h>

#include "allee/maps.hpp"
#include "allee/montecarlo.hpp"
#include "allee/noise.hpp"
#include "allee/thresholds.hpp"

int main(int argc, char** argv) {
    using clock = std::chrono::steady_clock;
    const std::int64_t trials = argc > 1 ? std::atoll(argv[1]) : 20000;

    const auto map = allee::MapSpec::builtin("example-6-1");
    const auto noise = allee::NoiseSpec::uniform();
    const auto regime = allee::analyze(map, 1.8, 6.5, 0.2);

    allee::McConfig cfg;
    cfg.x0 = 1.5;
    cfg.trials = trials;
    cfg.base_seed = 7;
    cfg.check_absorption = true;

    auto t0 = clock::now();
    const auto serial = allee::estimate_serial(map, noise, regime, cfg);
    auto t1 = clock::now();
    const auto parallel = allee::estimate(map, noise, regime, cfg);
    auto t2 = clock::now();

    const double ts = std::chrono::duration<double>(t1 - t0).count();
    const double tp = std::chrono::duration<double>(t2 - t1).count();
    std::cout << fmt::format("trials={} threads={}\n", trials, allee::resolve_threads());
    std::cout << fmt::format("serial   {:.3f} s  persistent={} low={}\n", ts, serial.n_persistent, serial.n_low);
    std::cout << fmt::format("parallel {:.3f} s  persistent={} low={}\n", tp, parallel.n_persistent, parallel.n_low);
    std::cout << fmt::format("speedup  {:.2f}x\n", tp > 0 ? ts / tp : 0.0);
    if (!(serial == parallel)) {
        std::cerr << "serial and parallel estimates differ\n";
        return 1;
    }
    return 0;
}
