// Compares the serial reference kernels against the OpenMP variants on the
#include <functional>
// shapes the training loop actually runs (batch x width x width GEMMs), and
// checks the results agree bit for bit.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "opev/kernels.hpp"
#include "opev/rng.hpp"

using opev::Rng;
using opev::Tensor2;
namespace kernels = opev::kernels;

namespace {

Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng) {
    Tensor2 t(r, c);
    for (double& x : t.vec()) x = rng.uniform(-1.0, 1.0);
    return t;
}

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm the caches
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%8s %10s %10s %9s %8s  %s\n", "shape", "serial", "openmp", "speedup", "GFLOP/s",
                "bit-identical");

    Rng rng(7);
    struct Shape {
        std::size_t m, k, n;
        int reps;
    };
    // Actor/critic layer shapes at desk (128) and full (256) widths, plus a
    // larger square for headroom.
    const Shape shapes[] = {{128, 67, 128, 400}, {128, 128, 128, 400}, {256, 256, 256, 100},
                            {512, 512, 512, 20}};

    for (const Shape& s : shapes) {
        Tensor2 a = random_tensor(s.m, s.k, rng);
        Tensor2 b = random_tensor(s.k, s.n, rng);
        Tensor2 c_serial(s.m, s.n), c_par(s.m, s.n);

        const double t_serial = time_of([&] { kernels::matmul_serial(a, b, c_serial); }, s.reps);
        const double t_par = time_of([&] { kernels::matmul(a, b, c_par); }, s.reps);
        const bool identical = c_serial.vec() == c_par.vec();

        const double flops = 2.0 * s.m * s.k * s.n;
        char shape[32];
        std::snprintf(shape, sizeof shape, "%zux%zux%zu", s.m, s.k, s.n);
        std::printf("%12s %8.3fms %8.3fms %8.2fx %8.2f  %s\n", shape, 1e3 * t_serial, 1e3 * t_par,
                    t_serial / t_par, flops / t_par / 1e9, identical ? "yes" : "NO");
        if (!identical) return 1;
    }
    return 0;
}
