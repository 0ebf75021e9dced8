// Benchmark comparing the serial reference kernels against the OpenMP
// variants, plus the two batch-parallel hot loops (training gradients and
// noise trials) at 1 thread vs all threads.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "nsreg/harness.hpp"
#include "nsreg/kernels.hpp"
#include "nsreg/rng.hpp"
#include "nsreg/training.hpp"

using namespace nsreg;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

void bench_matvec(int n, int reps) {
    const Matrix a = random_matrix(n, n, 1);
    Rng rng(2);
    const Vector x = gaussian_vector(rng, n);
    Vector y(n);

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) kernels::serial::matvec(a, x.data(), y.data());
    const double ts = seconds_since(t0);

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) kernels::parallel::matvec(a, x.data(), y.data());
    const double tp = seconds_since(t0);

    const double flops = 2.0 * n * n * reps;
    std::printf("matvec %4dx%-4d        serial %8.3f ms (%6.2f GFLOP/s)   omp %8.3f ms (%6.2f GFLOP/s)   speedup %.2fx\n",
                n, n, 1e3 * ts, flops / ts * 1e-9, 1e3 * tp, flops / tp * 1e-9, ts / tp);
}

void bench_gradient(int threads_max) {
    const ProblemSpec spec;  // 64x96, rank 48
    const DenseOperator op = make_problem(spec);
    op.factorization();
    const TrainingSet set = make_piecewise_phantoms(op.cols(), 32, 9);
    const FeedForwardNet net = make_default_network(op.cols(), 9);
    TrainConfig config;

    for (int threads : {1, threads_max}) {
        omp_set_num_threads(threads);
        auto t0 = Clock::now();
        const int reps = 20;
        for (int r = 0; r < reps; ++r) (void)grad(net, op, set, config);
        const double t = seconds_since(t0) / reps;
        std::printf("batch gradient (N=32)   threads %d: %8.3f ms/call\n", threads, 1e3 * t);
    }
}

void bench_trials(int threads_max) {
    RateExperimentConfig config;
    config.problem = ProblemSpec{};
    config.filter = FilterSpec::truncated_svd();
    config.delta_grid = default_delta_grid();
    config.trials_per_delta = 40;
    const DenseOperator op = make_problem(config.problem);
    const NullSpaceNetwork phi(make_default_network(op.cols(), 3),
                               std::make_shared<const DenseOperator>(op));

    for (int threads : {1, threads_max}) {
        omp_set_num_threads(threads);
        auto t0 = Clock::now();
        (void)run_rate_experiment(config, op, phi);
        std::printf("rate experiment (7x40)  threads %d: %8.3f ms\n", threads,
                    1e3 * seconds_since(t0));
    }
}

}  // namespace

int main(int argc, char** argv) {
    int reps = 200;
    if (argc > 1) reps = std::atoi(argv[1]);
    const int threads_max = omp_get_max_threads();
    std::printf("threads available: %d\n", threads_max);

    for (int n : {64, 128, 256, 512}) bench_matvec(n, reps);
    bench_gradient(threads_max);
    bench_trials(threads_max);
    return 0;
}
