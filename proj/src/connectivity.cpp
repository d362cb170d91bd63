#include "glassmem/connectivity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "glassmem/errors.hpp"

namespace glassmem::connectivity {

std::string_view to_string(CouplingKind kind)
{
    switch (kind) {
    case CouplingKind::Confocal: return "confocal";
    case CouplingKind::ConfocalConvolved: return "confocal-convolved";
    case CouplingKind::Hebbian: return "hebbian";
    case CouplingKind::Pseudoinverse: return "pseudoinverse";
    case CouplingKind::SK: return "sk";
    }
    return "unknown";
}

CouplingKind coupling_kind_from_string(std::string_view name)
{
    for (auto k : {CouplingKind::Confocal, CouplingKind::ConfocalConvolved, CouplingKind::Hebbian,
                   CouplingKind::Pseudoinverse, CouplingKind::SK}) {
        if (to_string(k) == name) return k;
    }
    throw ParameterError("unknown coupling kind '" + std::string(name) + "'");
}

void CouplingMatrix::validate() const
{
    if (values.rows() != values.cols()) throw ShapeError("coupling matrix is not square");
    if (!values.allFinite()) throw NumericError("coupling matrix has non-finite entries");
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if ((values - values.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NumericError("coupling matrix is not symmetric");
}

Eigen::MatrixXd CouplingMatrix::off_diagonal() const
{
    Eigen::MatrixXd out = values;
    out.diagonal().setZero();
    return out;
}

PatternSet::PatternSet(Eigen::MatrixXd patterns) : patterns_(std::move(patterns))
{
    if (patterns_.rows() < 1 || patterns_.cols() < 1)
        throw ParameterError("pattern set needs at least one pattern of nonzero length");
    for (Eigen::Index i = 0; i < patterns_.size(); ++i) {
        const double v = patterns_.data()[i];
        if (v != 1.0 && v != -1.0) throw ParameterError("pattern entries must be exactly +1 or -1");
    }
}

PatternSet PatternSet::random(Eigen::Index count, Eigen::Index n, Rng& rng)
{
    std::bernoulli_distribution coin(0.5);
    Eigen::MatrixXd m(count, n);
    for (Eigen::Index r = 0; r < count; ++r)
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = coin(rng) ? 1.0 : -1.0;
    return PatternSet(std::move(m));
}

EnsembleLayout sample_layout(Eigen::Index n, double width, std::uint64_t seed)
{
    if (n < 1) throw ParameterError("layout needs at least one ensemble");
    if (!std::isfinite(width)) throw ParameterError("layout width must be finite");
    if (width < 0) throw ParameterError("layout width must be nonnegative");

    EnsembleLayout layout;
    layout.width = width;
    layout.seed = seed;
    layout.positions = Eigen::MatrixX2d::Zero(n, 2);
    if (width == 0.0) return layout;

    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, width);
    for (Eigen::Index i = 0; i < n; ++i) {
        layout.positions(i, 0) = gauss(rng);
        layout.positions(i, 1) = gauss(rng);
        // Half-plane x >= 0; cos(2 r_i.r_j) is unchanged by negating a row.
        if (layout.positions(i, 0) < 0) layout.positions.row(i) *= -1.0;
    }
    return layout;
}

CouplingMatrix confocal_matrix(const EnsembleLayout& layout, const ConfocalParams& params, bool normalized)
{
    if (!layout.positions.allFinite()) throw ParameterError("layout has non-finite coordinates");
    const Eigen::Index n = layout.size();
    const Eigen::MatrixXd gram = layout.positions * layout.positions.transpose();

    CouplingMatrix out;
    out.kind = CouplingKind::Confocal;
    out.normalized = normalized;
    out.diag_beta = params.beta;
    out.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = std::cos(2.0 * gram(i, j));
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
        out.values(j, j) += params.beta;
    }
    if (!normalized) out.values *= params.prefactor;
    return out;
}

CouplingMatrix confocal_matrix_convolved(const EnsembleLayout& layout, const ConfocalParams& params)
{
    if (params.sigma_a < 0) throw ParameterError("sigma_a must be nonnegative");
    if (!layout.positions.allFinite()) throw ParameterError("layout has non-finite coordinates");
    const Eigen::Index n = layout.size();
    const double s2 = params.sigma_a * params.sigma_a;
    const double denom = 1.0 + 4.0 * s2 * s2; // w0^4 + 4 sigma^4 with w0 = 1
    const Eigen::MatrixXd gram = layout.positions * layout.positions.transpose();
    const Eigen::VectorXd r2 = layout.positions.rowwise().squaredNorm();

    CouplingMatrix out;
    out.kind = CouplingKind::ConfocalConvolved;
    out.normalized = false;
    out.diag_beta = params.beta;
    out.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = std::cos(2.0 * gram(i, j) / denom) / denom *
                             std::exp(-2.0 * s2 * (r2(i) + r2(j)) / denom);
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
        out.values(j, j) += params.beta;
    }
    out.values *= params.prefactor;
    return out;
}

CouplingMatrix hebbian_matrix(const PatternSet& patterns)
{
    const auto& xi = patterns.matrix();
    const double n = static_cast<double>(patterns.size());
    CouplingMatrix out;
    out.kind = CouplingKind::Hebbian;
    out.values = xi.transpose() * xi / n;
    out.values.diagonal().setZero();
    return out;
}

CouplingMatrix pseudoinverse_matrix(const PatternSet& patterns)
{
    const auto& xi = patterns.matrix();
    const double n = static_cast<double>(patterns.size());
    const Eigen::MatrixXd overlap = xi * xi.transpose() / n;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(overlap);
    if (eig.info() != Eigen::Success) throw NumericError("overlap eigen-decomposition failed");
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double cond = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(cond <= kPseudoinverseConditionLimit)) {
        std::ostringstream msg;
        msg << "pattern overlap matrix is singular or ill-conditioned (condition number " << cond
            << " exceeds " << kPseudoinverseConditionLimit
            << "); patterns are duplicated or linearly dependent";
        throw RankError(msg.str());
    }

    // J = xi^T C^{-1} xi / N
    const Eigen::MatrixXd cinv_xi = eig.eigenvectors() *
                                    eig.eigenvalues().cwiseInverse().asDiagonal() *
                                    eig.eigenvectors().transpose() * xi;
    CouplingMatrix out;
    out.kind = CouplingKind::Pseudoinverse;
    out.values = xi.transpose() * cinv_xi / n;
    out.values = 0.5 * (out.values + out.values.transpose()).eval();

    const Eigen::MatrixXd image = out.values * xi.transpose();
    const double err = (image - xi.transpose()).cwiseAbs().maxCoeff();
    if (err > 1e-8) throw NumericError("pseudoinverse projector lost the eigenvector property");

    out.values.diagonal().setZero();
    return out;
}

CouplingMatrix sk_matrix(Eigen::Index n, double variance, std::uint64_t seed)
{
    if (n < 1) throw ParameterError("SK matrix needs n >= 1");
    if (!(variance > 0) || !std::isfinite(variance)) throw ParameterError("SK variance must be positive");
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
    CouplingMatrix out;
    out.kind = CouplingKind::SK;
    out.values = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = gauss(rng);
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    return out;
}

} // namespace glassmem::connectivity
