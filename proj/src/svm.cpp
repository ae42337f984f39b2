#include "memhots/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace memhots {

double svc_kernel(const SvcConfig& cfg, std::size_t dim, const double* u, const double* v) {
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += u[i] * v[i];
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(dim);
    double base = gamma * dot + cfg.coef0;
    double acc = 1.0;
    for (int d = 0; d < cfg.degree; ++d) acc *= base;
    return acc;
}

namespace {

// Dual problem: minimize 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij,
// 0 <= a <= C, y^T a = 0. Working pair selection and the two-variable
// update follow the standard maximal-violating-pair scheme.
struct SmoSolver {
    const std::vector<const double*>& x;
    const std::vector<double>& y;
    std::size_t dim;
    const SvcConfig& cfg;
    std::uint64_t* steps_left;

    std::vector<double> alpha, grad;
    std::vector<double> kmat; // n x n kernel matrix
    std::size_t n;
    double rho = 0.0;

    SmoSolver(const std::vector<const double*>& x_, const std::vector<double>& y_,
              std::size_t dim_, const SvcConfig& cfg_, std::uint64_t* steps)
        : x(x_), y(y_), dim(dim_), cfg(cfg_), steps_left(steps), n(x_.size()) {
        kmat.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                kmat[i * n + j] = kmat[j * n + i] = svc_kernel(cfg, dim, x[i], x[j]);
        alpha.assign(n, 0.0);
        grad.assign(n, -1.0);
    }

    double q(std::size_t i, std::size_t j) const { return y[i] * y[j] * kmat[i * n + j]; }

    bool select_pair(std::size_t* out_i, std::size_t* out_j) const {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t imax = n, imin = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool upper_ok = (y[t] > 0 && alpha[t] < cfg.C) || (y[t] < 0 && alpha[t] > 0);
            const bool lower_ok = (y[t] < 0 && alpha[t] < cfg.C) || (y[t] > 0 && alpha[t] > 0);
            const double v = -y[t] * grad[t];
            if (upper_ok && v > gmax) {
                gmax = v;
                imax = t;
            }
            if (lower_ok && v < gmin) {
                gmin = v;
                imin = t;
            }
        }
        if (imax == n || imin == n || gmax - gmin < cfg.tol) return false;
        *out_i = imax;
        *out_j = imin;
        return true;
    }

    void solve() {
        std::size_t i, j;
        while (select_pair(&i, &j)) {
            if (*steps_left == 0)
                throw convergence_error("train_svc: SMO step budget exhausted");
            --*steps_left;

            const double old_ai = alpha[i], old_aj = alpha[j];
            if (y[i] != y[j]) {
                double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
                if (quad <= 0.0) quad = 1e-12;
                const double delta = (-grad[i] - grad[j]) / quad;
                const double diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if (diff > 0) {
                    if (alpha[j] < 0) {
                        alpha[j] = 0;
                        alpha[i] = diff;
                    }
                } else if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
                if (diff > 0) {
                    if (alpha[i] > cfg.C) {
                        alpha[i] = cfg.C;
                        alpha[j] = cfg.C - diff;
                    }
                } else if (alpha[j] > cfg.C) {
                    alpha[j] = cfg.C;
                    alpha[i] = cfg.C + diff;
                }
            } else {
                double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
                if (quad <= 0.0) quad = 1e-12;
                const double delta = (grad[i] - grad[j]) / quad;
                const double sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if (sum > cfg.C) {
                    if (alpha[i] > cfg.C) {
                        alpha[i] = cfg.C;
                        alpha[j] = sum - cfg.C;
                    }
                } else if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = sum;
                }
                if (sum > cfg.C) {
                    if (alpha[j] > cfg.C) {
                        alpha[j] = cfg.C;
                        alpha[i] = sum - cfg.C;
                    }
                } else if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = sum;
                }
            }
            const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
            if (dai == 0.0 && daj == 0.0) break; // numerically stuck
            for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
        }
        compute_rho();
    }

    void compute_rho() {
        double upper = std::numeric_limits<double>::infinity();
        double lower = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double yg = y[t] * grad[t];
            if (alpha[t] >= cfg.C) {
                if (y[t] < 0) upper = std::min(upper, yg);
                else lower = std::max(lower, yg);
            } else if (alpha[t] <= 0) {
                if (y[t] > 0) upper = std::min(upper, yg);
                else lower = std::max(lower, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (upper + lower) / 2.0;
    }
};

} // namespace

SvcModel train_svc(const std::vector<std::vector<double>>& features,
                   const std::vector<int>& labels, const SvcConfig& cfg) {
    if (features.size() != labels.size()) throw data_error("train_svc: feature/label mismatch");
    if (features.empty()) throw data_error("train_svc: empty training set");
    const std::size_t dim = features.front().size();
    for (const auto& f : features)
        if (f.size() != dim) throw data_error("train_svc: ragged feature matrix");

    SvcModel model;
    model.config = cfg;
    model.dim = dim;
    if (cfg.gamma <= 0.0) {
        // Variance-scaled gamma. Plain 1/dim collapses the polynomial kernel
        // to ~0 on sum-normalized histogram features.
        double mean = 0.0, sq = 0.0;
        const double count = static_cast<double>(features.size() * dim);
        for (const auto& f : features)
            for (double v : f) {
                mean += v;
                sq += v * v;
            }
        mean /= count;
        const double var = sq / count - mean * mean;
        model.config.gamma = var > 1e-30 ? 1.0 / (static_cast<double>(dim) * var)
                                         : 1.0 / static_cast<double>(dim);
    }
    std::set<int> classes(labels.begin(), labels.end());
    model.labels.assign(classes.begin(), classes.end());
    if (model.labels.size() < 2)
        throw data_error("train_svc: need at least two classes, got " +
                         std::to_string(model.labels.size()));

    std::uint64_t steps_left = cfg.max_steps;
    for (std::size_t a = 0; a < model.labels.size(); ++a) {
        for (std::size_t b = a + 1; b < model.labels.size(); ++b) {
            std::vector<const double*> x;
            std::vector<double> y;
            std::vector<std::size_t> src;
            for (std::size_t i = 0; i < features.size(); ++i) {
                if (labels[i] == model.labels[a]) {
                    x.push_back(features[i].data());
                    y.push_back(1.0);
                    src.push_back(i);
                } else if (labels[i] == model.labels[b]) {
                    x.push_back(features[i].data());
                    y.push_back(-1.0);
                    src.push_back(i);
                }
            }
            SmoSolver solver(x, y, dim, model.config, &steps_left);
            solver.solve();

            SvcModel::PairMachine machine;
            machine.label_pos = model.labels[a];
            machine.label_neg = model.labels[b];
            machine.bias = -solver.rho;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (solver.alpha[i] > 0.0) {
                    machine.support_vectors.push_back(features[src[i]]);
                    machine.coef.push_back(solver.alpha[i] * y[i]);
                }
            }
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

int predict_svc(const SvcModel& model, const std::vector<double>& feature) {
    if (!model.trained()) throw data_error("predict_svc: untrained model");
    if (feature.size() != model.dim) throw data_error("predict_svc: dimension mismatch");
    std::vector<int> votes(model.labels.size(), 0);
    for (const auto& m : model.machines) {
        double decision = m.bias;
        for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
            decision += m.coef[i] * svc_kernel(model.config, model.dim,
                                               m.support_vectors[i].data(), feature.data());
        const int winner = decision >= 0.0 ? m.label_pos : m.label_neg;
        const int lower = std::min(m.label_pos, m.label_neg);
        const int chosen = decision == 0.0 ? lower : winner;
        for (std::size_t c = 0; c < model.labels.size(); ++c)
            if (model.labels[c] == chosen) ++votes[c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = c;
    return model.labels[best];
}

} // namespace memhots
