#pragma once

#include <cstdint>
#include <vector>

#include "memhots/errors.hpp"

namespace memhots {

// Soft-margin kernel SVC with the polynomial kernel
// K(u, v) = (gamma * <u, v> + coef0)^degree, trained one-vs-one by
// sequential minimal optimization (maximal-violating-pair working set).
struct SvcConfig {
    double C = 1.0;
    int degree = 3;
    double gamma = 0.0; // 0 resolves to 1/(dim * feature variance) at training
    double coef0 = 0.0;
    double tol = 1e-3;
    std::uint64_t max_steps = 50'000'000; // total pair updates across machines
};

struct SvcModel {
    struct PairMachine {
        int label_pos = 0; // y = +1 class
        int label_neg = 0; // y = -1 class
        std::vector<std::vector<double>> support_vectors;
        std::vector<double> coef; // alpha_i * y_i per support vector
        double bias = 0.0;
    };

    SvcConfig config;
    std::size_t dim = 0;
    std::vector<int> labels; // sorted distinct class labels
    std::vector<PairMachine> machines;

    bool trained() const { return !machines.empty(); }
};

SvcModel train_svc(const std::vector<std::vector<double>>& features,
                   const std::vector<int>& labels, const SvcConfig& cfg);

// Majority vote over the pairwise machines; vote ties resolve to the lowest
// label, and a zero pairwise decision votes for the pair's lower label.
int predict_svc(const SvcModel& model, const std::vector<double>& feature);

double svc_kernel(const SvcConfig& cfg, std::size_t dim, const double* u, const double* v);

} // namespace memhots
