#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deq/rng.hpp"
#include "deq/types.hpp"

namespace deq {

enum class DataKind { UniformUnit, GaussianIso, EmpiricalSamples };

/// Input-distribution descriptor. Sampling is deterministic given the seed;
/// EmpiricalSamples is a fixed list treated as its own population.
struct DataModel {
    DataKind kind = DataKind::UniformUnit;
    int dimension = 1;
    std::uint64_t seed = 0;
    double scale = 1.0;  // GaussianIso standard deviation
    std::vector<Vector> stored;  // EmpiricalSamples only

    static DataModel uniform_unit(int d, std::uint64_t seed) {
        DataModel m;
        m.kind = DataKind::UniformUnit;
        m.dimension = d;
        m.seed = seed;
        return m;
    }

    static DataModel gaussian_iso(int d, double s, std::uint64_t seed) {
        DataModel m;
        m.kind = DataKind::GaussianIso;
        m.dimension = d;
        m.seed = seed;
        m.scale = s;
        return m;
    }

    static DataModel empirical(std::vector<Vector> samples) {
        if (samples.empty()) throw InputError("empirical data needs at least one sample");
        DataModel m;
        m.kind = DataKind::EmpiricalSamples;
        m.dimension = static_cast<int>(samples.front().size());
        m.stored = std::move(samples);
        return m;
    }

    /// Draw n vectors. Empirical data returns the stored list (all of it
    /// when n exceeds the list, the first n otherwise).
    std::vector<Vector> sample(std::int64_t n) const {
        std::vector<Vector> out;
        if (kind == DataKind::EmpiricalSamples) {
            const std::int64_t take = std::min<std::int64_t>(n, stored.size());
            out.assign(stored.begin(), stored.begin() + take);
            return out;
        }
        Rng rng = Rng::for_stream(seed, kStreamData);
        out.reserve(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            if (kind == DataKind::UniformUnit)
                out.push_back(rng.uniform_vec(dimension));
            else
                out.push_back(rng.normal_vec(dimension, 0.0, scale));
        }
        return out;
    }

    std::string name() const {
        switch (kind) {
            case DataKind::UniformUnit:
                return "uniform-unit";
            case DataKind::GaussianIso:
                return "gaussian-iso";
            case DataKind::EmpiricalSamples:
                return "empirical";
        }
        return "?";
    }
};

/// Second-moment summary of an input distribution: Sigma = E[X X^T], its
/// eigenvalue range, and the truncated second moment E[||X||^2 1{||X||<=a}]
/// evaluated from a stored sample set (or a closed form where one exists).
class MomentSummary {
  public:
    MomentSummary(Matrix sigma, std::vector<double> norms2_sorted, bool analytic_trunc_1d)
        : sigma_(std::move(sigma)),
          norms2_(std::move(norms2_sorted)),
          analytic_trunc_1d_(analytic_trunc_1d) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_);
        lambda_min_ = es.eigenvalues().minCoeff();
        lambda_max_ = es.eigenvalues().maxCoeff();
    }

    static MomentSummary from_matrix(Matrix sigma) {
        return MomentSummary(std::move(sigma), {}, false);
    }

    const Matrix& sigma_matrix() const { return sigma_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }
    double trace() const { return sigma_.trace(); }

    double truncated_second_moment(double alpha) const {
        if (alpha < 0.0) throw InputError("truncation radius must be >= 0");
        if (analytic_trunc_1d_) {
            const double a = std::min(alpha, 1.0);
            return a * a * a / 3.0;
        }
        if (norms2_.empty()) throw InputError("moment summary has no sample support");
        const double a2 = alpha * alpha;
        double acc = 0.0;
        for (double n2 : norms2_) {
            if (n2 > a2) break;  // sorted ascending
            acc += n2;
        }
        return acc / static_cast<double>(norms2_.size());
    }

  private:
    Matrix sigma_;
    std::vector<double> norms2_;
    bool analytic_trunc_1d_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
};

/// Second-moment summary of a data model. UniformUnit uses the closed form
/// Sigma_ii = 1/3, Sigma_ij = 1/4; EmpiricalSamples averages the stored
/// list exactly; GaussianIso estimates Sigma by seeded Monte Carlo (its
/// analytic target s^2 I serves as the oracle in tests).
inline MomentSummary second_moment(const DataModel& data, std::int64_t n_mc) {
    const int d = data.dimension;
    auto collect_norms = [](const std::vector<Vector>& xs) {
        std::vector<double> norms2;
        norms2.reserve(xs.size());
        for (const auto& x : xs) norms2.push_back(x.squaredNorm());
        std::sort(norms2.begin(), norms2.end());
        return norms2;
    };

    switch (data.kind) {
        case DataKind::UniformUnit: {
            Matrix sigma = Matrix::Constant(d, d, 0.25);
            sigma.diagonal().setConstant(1.0 / 3.0);
            if (d == 1) return MomentSummary(std::move(sigma), {}, true);
            if (n_mc < 1) throw InputError("second_moment: n_mc must be >= 1");
            return MomentSummary(std::move(sigma), collect_norms(data.sample(n_mc)), false);
        }
        case DataKind::GaussianIso: {
            if (n_mc < 1) throw InputError("second_moment: n_mc must be >= 1");
            const auto xs = data.sample(n_mc);
            Matrix sigma = Matrix::Zero(d, d);
            for (const auto& x : xs) sigma += x * x.transpose();
            sigma /= static_cast<double>(xs.size());
            return MomentSummary(std::move(sigma), collect_norms(xs), false);
        }
        case DataKind::EmpiricalSamples: {
            Matrix sigma = Matrix::Zero(d, d);
            for (const auto& x : data.stored) sigma += x * x.transpose();
            sigma /= static_cast<double>(data.stored.size());
            return MomentSummary(std::move(sigma), collect_norms(data.stored), false);
        }
    }
    throw InputError("second_moment: unknown data kind");
}

}  // namespace deq
