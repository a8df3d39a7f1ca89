#include "mapgen/qd/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mapgen::qd {

CmaEmitter::CmaEmitter(int dim, EmitterConfig config, std::uint64_t seed)
    : CmaEmitter(Eigen::VectorXd::Zero(dim), config, seed) {}

CmaEmitter::CmaEmitter(Eigen::VectorXd initial_mean, EmitterConfig config, std::uint64_t seed)
    : dim_(static_cast<int>(initial_mean.size())), config_(config), rng_(seed) {
    if (dim_ < 1) throw std::invalid_argument("emitter dimension must be positive");
    if (config_.batch_size < 2) throw std::invalid_argument("batch size must be at least 2");
    if (!(config_.sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");

    const double n = dim_;
    const int lambda = config_.batch_size;
    mu_ = lambda / 2;
    weights_.resize(mu_);
    for (int i = 0; i < mu_; ++i) weights_[i] = std::log(lambda / 2.0 + 0.5) - std::log(i + 1.0);
    weights_ /= weights_.sum();
    mueff_ = 1.0 / weights_.squaredNorm();
    cc_ = (4.0 + mueff_ / n) / (n + 4.0 + 2.0 * mueff_ / n);
    cs_ = (mueff_ + 2.0) / (n + mueff_ + 5.0);
    c1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mueff_);
    cmu_ = std::min(1.0 - c1_, 2.0 * (mueff_ - 2.0 + 1.0 / mueff_) / ((n + 2.0) * (n + 2.0) + mueff_));
    damps_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff_ - 1.0) / (n + 1.0)) - 1.0) + cs_;
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    reset_distribution(std::move(initial_mean));
}

void CmaEmitter::reset_distribution(Eigen::VectorXd mean) {
    mean_ = std::move(mean);
    sigma_ = config_.sigma0;
    cov_ = Eigen::MatrixXd::Identity(dim_, dim_);
    basis_.resize(0, 0);
    scale_ = Eigen::VectorXd::Ones(dim_);
    decomposed_ = false;
    pc_ = Eigen::VectorXd::Zero(dim_);
    ps_ = Eigen::VectorXd::Zero(dim_);
    local_generation_ = 0;
    eigen_generation_ = 0;
    stale_batches_ = 0;
}

void CmaEmitter::update_eigensystem() {
    const double gap = config_.batch_size / (c1_ + cmu_) / dim_ / 10.0;
    if (static_cast<double>(local_generation_ - eigen_generation_) <= gap) return;
    eigen_generation_ = local_generation_;
    cov_ = (cov_ + cov_.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
    basis_ = es.eigenvectors();
    scale_ = es.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
    decomposed_ = true;
}

std::vector<std::vector<double>> CmaEmitter::ask() {
    update_eigensystem();
    const int lambda = config_.batch_size;
    last_z_.resize(dim_, lambda);
    for (int j = 0; j < lambda; ++j) {
        for (int i = 0; i < dim_; ++i) last_z_(i, j) = normal_(rng_);
    }
    if (decomposed_) {
        last_y_.noalias() = basis_ * (scale_.asDiagonal() * last_z_);
    } else {
        last_y_ = last_z_;
    }
    std::vector<std::vector<double>> out(static_cast<std::size_t>(lambda));
    for (int j = 0; j < lambda; ++j) {
        Eigen::VectorXd x = mean_ + sigma_ * last_y_.col(j);
        out[static_cast<std::size_t>(j)].assign(x.data(), x.data() + dim_);
    }
    return out;
}

void CmaEmitter::tell(const std::vector<double>& improvements, const Archive& archive) {
    const int lambda = config_.batch_size;
    if (static_cast<int>(improvements.size()) != lambda || last_z_.cols() != lambda) {
        throw std::invalid_argument("tell() needs one improvement per sample of the last ask()");
    }
    ++generation_;
    ++local_generation_;

    std::vector<int> order(static_cast<std::size_t>(lambda));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return improvements[static_cast<std::size_t>(a)] > improvements[static_cast<std::size_t>(b)];
    });

    Eigen::MatrixXd y_sel(dim_, mu_);
    Eigen::VectorXd z_w = Eigen::VectorXd::Zero(dim_);
    for (int i = 0; i < mu_; ++i) {
        const int k = order[static_cast<std::size_t>(i)];
        y_sel.col(i) = last_y_.col(k);
        z_w += weights_[i] * last_z_.col(k);
    }
    const Eigen::VectorXd y_w = y_sel * weights_;
    mean_ += sigma_ * y_w;

    const Eigen::VectorXd inv_sqrt_c_yw = decomposed_ ? Eigen::VectorXd(basis_ * z_w) : z_w;
    ps_ = (1.0 - cs_) * ps_ + std::sqrt(cs_ * (2.0 - cs_) * mueff_) * inv_sqrt_c_yw;
    const double ps_norm = ps_.norm();
    const double decay = 1.0 - std::pow(1.0 - cs_, 2.0 * static_cast<double>(local_generation_));
    const bool hsig = ps_norm / std::sqrt(decay) / chi_n_ < 1.4 + 2.0 / (dim_ + 1.0);
    pc_ = (1.0 - cc_) * pc_;
    if (hsig) pc_ += std::sqrt(cc_ * (2.0 - cc_) * mueff_) * y_w;

    const double keep = 1.0 - c1_ - cmu_ + (hsig ? 0.0 : c1_ * cc_ * (2.0 - cc_));
    cov_ *= keep;
    cov_.noalias() += c1_ * pc_ * pc_.transpose();
    cov_.noalias() += cmu_ * (y_sel * weights_.asDiagonal() * y_sel.transpose());
    sigma_ *= std::exp((cs_ / damps_) * (ps_norm / chi_n_ - 1.0));

    const bool improved = std::any_of(improvements.begin(), improvements.end(), [](double d) { return d > 0.0; });
    stale_batches_ = improved ? 0 : stale_batches_ + 1;
    if (stale_batches_ >= config_.restart_patience && !archive.empty()) {
        const Elite& e = archive.sample_elite(rng_);
        if (static_cast<int>(e.solution.size()) != dim_) throw std::logic_error("elite dimension mismatch");
        reset_distribution(Eigen::Map<const Eigen::VectorXd>(e.solution.data(), dim_));
        ++restarts_;
    }
}

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated emitter state");
    return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    put<std::int64_t>(out, m.rows());
    put<std::int64_t>(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Eigen::MatrixXd get_matrix(std::istream& in) {
    const auto rows = get<std::int64_t>(in);
    const auto cols = get<std::int64_t>(in);
    Eigen::MatrixXd m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated emitter state");
    return m;
}

constexpr std::uint32_t kStateMagic = 0x434D4145;  // "CMAE"

}  // namespace

void CmaEmitter::save(std::ostream& out) const {
    put(out, kStateMagic);
    put<std::int32_t>(out, dim_);
    put<std::int32_t>(out, config_.batch_size);
    put(out, sigma_);
    put(out, generation_);
    put(out, eigen_generation_);
    put(out, local_generation_);
    put<std::int32_t>(out, stale_batches_);
    put<std::int32_t>(out, restarts_);
    put<std::uint8_t>(out, decomposed_ ? 1 : 0);
    put_matrix(out, mean_);
    put_matrix(out, pc_);
    put_matrix(out, ps_);
    put_matrix(out, cov_);
    if (decomposed_) {
        put_matrix(out, basis_);
        put_matrix(out, scale_);
    }
    std::ostringstream rng_text;
    rng_text << rng_;
    const std::string s = rng_text.str();
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    put<std::uint8_t>(out, normal_.has_spare() ? 1 : 0);
    put(out, normal_.spare());
}

void CmaEmitter::load(std::istream& in) {
    if (get<std::uint32_t>(in) != kStateMagic) throw std::runtime_error("not an emitter state file");
    if (get<std::int32_t>(in) != dim_ || get<std::int32_t>(in) != config_.batch_size) {
        throw std::runtime_error("emitter state does not match the configuration");
    }
    sigma_ = get<double>(in);
    generation_ = get<std::int64_t>(in);
    eigen_generation_ = get<std::int64_t>(in);
    local_generation_ = get<std::int64_t>(in);
    stale_batches_ = get<std::int32_t>(in);
    restarts_ = get<std::int32_t>(in);
    decomposed_ = get<std::uint8_t>(in) != 0;
    mean_ = get_matrix(in);
    pc_ = get_matrix(in);
    ps_ = get_matrix(in);
    cov_ = get_matrix(in);
    if (decomposed_) {
        basis_ = get_matrix(in);
        scale_ = get_matrix(in);
    } else {
        basis_.resize(0, 0);
        scale_ = Eigen::VectorXd::Ones(dim_);
    }
    const auto len = get<std::uint64_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    std::istringstream rng_text(s);
    rng_text >> rng_;
    const bool has_spare = get<std::uint8_t>(in) != 0;
    normal_.restore(has_spare, get<double>(in));
    if (!in) throw std::runtime_error("truncated emitter state");
}

}  // namespace mapgen::qd
