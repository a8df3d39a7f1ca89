#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mapgen/qd/archive.hpp"
#include "mapgen/rng.hpp"

namespace mapgen::qd {

struct EmitterConfig {
    int batch_size = 30;
    double sigma0 = 0.2;
    int restart_patience = 50;  // batches in a row with no positive improvement
};

/// CMA-ES emitter ranked by archive improvement (CMA-MAE). One owner; ask() and tell() alternate.
class CmaEmitter {
public:
    CmaEmitter(int dim, EmitterConfig config, std::uint64_t seed);
    CmaEmitter(Eigen::VectorXd initial_mean, EmitterConfig config, std::uint64_t seed);

    /// batch_size samples from N(mean, sigma^2 C); deterministic given the seed and call count.
    std::vector<std::vector<double>> ask();

    /// Updates the distribution from the improvements of the last ask(), ranked descending with
    /// ties broken by sample index. After restart_patience batches without any positive
    /// improvement the mean restarts at a uniformly chosen elite of `archive` with sigma = sigma0.
    void tell(const std::vector<double>& improvements, const Archive& archive);

    int dim() const { return dim_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    double sigma() const { return sigma_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    int restarts() const { return restarts_; }
    std::int64_t generation() const { return generation_; }

    /// Full state, including the random stream, in a binary format.
    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    void reset_distribution(Eigen::VectorXd mean);
    void update_eigensystem();

    int dim_;
    EmitterConfig config_;
    int mu_;
    Eigen::VectorXd weights_;
    double mueff_, cc_, cs_, c1_, cmu_, damps_, chi_n_;

    Eigen::VectorXd mean_;
    double sigma_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd basis_;  // eigenvectors of cov_ (B)
    Eigen::VectorXd scale_;  // square roots of the eigenvalues (D)
    bool decomposed_ = false;
    Eigen::VectorXd pc_, ps_;
    std::int64_t generation_ = 0;
    std::int64_t eigen_generation_ = 0;
    std::int64_t local_generation_ = 0;  // since the last restart
    int stale_batches_ = 0;
    int restarts_ = 0;

    std::mt19937_64 rng_;
    NormalSampler normal_;
    Eigen::MatrixXd last_z_, last_y_;
};

}  // namespace mapgen::qd
