// Compares the serial reference dispatch against the OpenMP path on the
// two hot kernels (grid search and replicate studies) and checks that
// both produce identical results.

#include <chrono>
#include <cstdio>
#include <string>

#include "medpath/selection.hpp"
#include "medpath/simgen.hpp"
#include "medpath/study.hpp"

using namespace medpath;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_tables(const GridSearchResult& a, const GridSearchResult& b) {
    if (a.best != b.best || a.table.size() != b.table.size()) return false;
    for (std::size_t i = 0; i < a.table.size(); ++i) {
        if (a.table[i].result.bic != b.table[i].result.bic) return false;
        if (a.table[i].result.objective != b.table[i].result.objective) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    int jobs = 2;
    if (argc > 1) jobs = std::max(1, std::atoi(argv[1]));

    Scenario sc;
    sc.p = 100;
    sc.seed = 7;
    const auto [data, truth] = generate(sc);

    GridSpec grid;
    grid.strategy = GammaStrategy::SMD;
    grid.gamma_floor = 0.3;
    PenaltyConfig base;
    base.variant = PenaltyVariant::lasso;
    SolverConfig cfg;

    std::printf("grid search: %zu points on n=%d, p=%d\n", grid.size(),
                static_cast<int>(data.n()), static_cast<int>(data.p()));

    auto t0 = std::chrono::steady_clock::now();
    const GridSearchResult serial = grid_search(data, grid, base, cfg, 1);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const GridSearchResult parallel = grid_search(data, grid, base, cfg, jobs);
    const double t_parallel = seconds_since(t0);

    std::printf("  serial    %8.3f s\n", t_serial);
    std::printf("  omp x%-3d %8.3f s  (speedup %.2fx)\n", jobs, t_parallel,
                t_serial / t_parallel);
    std::printf("  results identical: %s\n", same_tables(serial, parallel) ? "yes" : "NO");

    StudyConfig study;
    study.scenario = sc;
    study.replicates = 4;
    study.grid = grid;
    MethodSpec method;
    method.name = "SMD_L";
    method.strategy = GammaStrategy::SMD;
    method.gamma_floor = 0.3;
    study.methods = {method};

    std::printf("replicate study: %d replicates\n", study.replicates);
    t0 = std::chrono::steady_clock::now();
    const StudyResult s1 = run_study(study, 1);
    const double t_s1 = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const StudyResult s2 = run_study(study, jobs);
    const double t_s2 = seconds_since(t0);
    std::printf("  serial    %8.3f s\n", t_s1);
    std::printf("  omp x%-3d %8.3f s  (speedup %.2fx)\n", jobs, t_s2, t_s1 / t_s2);
    std::printf("  results identical: %s\n",
                long_csv(s1) == long_csv(s2) ? "yes" : "NO");
    return same_tables(serial, parallel) && long_csv(s1) == long_csv(s2) ? 0 : 1;
}
