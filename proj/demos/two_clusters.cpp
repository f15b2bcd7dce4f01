// Quantizes a small two-cluster signal and cross-checks the result against
// the exhaustive oracle. Run from the repository root, or pass a space
// file: ./two_clusters [space.json]

#include <cstdio>

#include "lpquant/lpquant.hpp"

int main(int argc, char** argv) {
    using namespace lpquant;

    const std::string path =
        argc > 1 ? argv[1] : "demos/data/two_clusters.json";
    const MeasureSpace sp = load_space(path);
    const NormDescriptor n = NormDescriptor::euclidean(sp.dim());

    QuantizerConfig cfg;
    cfg.k = 2;
    cfg.p = 2.0;
    cfg.restarts = 4;
    cfg.seed = 7;

    const QuantizeReport rep = lloyd(sp, n, cfg);
    std::printf("best %d-valued approximation, p = %g:\n", cfg.k, cfg.p);
    for (std::size_t i = 0; i < rep.best.centers.size(); ++i) {
        std::printf("  center %zu = [", i);
        for (std::size_t j = 0; j < rep.best.centers[i].size(); ++j)
            std::printf("%s%.6g", j ? ", " : "", rep.best.centers[i][j]);
        std::printf("]\n");
    }
    std::printf("cost      = %.12g\n", rep.cost);
    std::printf("residual  = %.3g, boundary mass = %.3g, degree = %d\n",
                rep.certificate.voronoi_residual,
                rep.certificate.boundary_mass, rep.certificate.degree);

    const OracleResult oracle = brute_force(sp, n, cfg.p, cfg.k);
    std::printf("oracle    = %.12g (gap %.3g over %llu assignments)\n",
                oracle.cost, rep.cost - oracle.cost,
                static_cast<unsigned long long>(oracle.enumerated));
    return 0;
}
