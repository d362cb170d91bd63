#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "glassmem/random.hpp"

namespace glassmem::connectivity {

// Ensemble positions in the transverse plane, in units of the TEM00 waist w0.
struct EnsembleLayout {
    Eigen::MatrixX2d positions;
    double width = 0.0;
    std::uint64_t seed = 0;

    Eigen::Index size() const { return positions.rows(); }
};

struct ConfocalParams {
    double beta = 10.0;     // self-interaction geometric factor
    double prefactor = 1.0; // -g0^2 Delta_C / (pi (Delta_C^2 + kappa^2)), > 0 for red detuning
    double sigma_a = 0.0;   // ensemble Gaussian width (w0 units), convolved variant only
};

enum class CouplingKind : std::uint8_t {
    Confocal = 0,
    ConfocalConvolved = 1,
    Hebbian = 2,
    Pseudoinverse = 3,
    SK = 4,
};

std::string_view to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(std::string_view name);

// Symmetric dense coupling with provenance. `normalized` marks the
// dimensionless confocal form; `diag_beta` is the beta placed on the
// diagonal (0 for kinds that zero it).
struct CouplingMatrix {
    Eigen::MatrixXd values;
    CouplingKind kind = CouplingKind::SK;
    bool normalized = false;
    double diag_beta = 0.0;

    Eigen::Index size() const { return values.rows(); }

    // Throws ShapeError / NumericError when the invariants do not hold.
    void validate() const;

    // Copy of `values` with the diagonal set to zero.
    Eigen::MatrixXd off_diagonal() const;
};

// Patterns are stored one per row, entries exactly +1 or -1.
class PatternSet {
public:
    PatternSet() = default;
    explicit PatternSet(Eigen::MatrixXd patterns);

    static PatternSet random(Eigen::Index count, Eigen::Index n, Rng& rng);

    const Eigen::MatrixXd& matrix() const { return patterns_; }
    Eigen::Index count() const { return patterns_.rows(); }
    Eigen::Index size() const { return patterns_.cols(); }
    Eigen::VectorXd pattern(Eigen::Index mu) const { return patterns_.row(mu).transpose(); }

private:
    Eigen::MatrixXd patterns_;
};

EnsembleLayout sample_layout(Eigen::Index n, double width, std::uint64_t seed);

CouplingMatrix confocal_matrix(const EnsembleLayout& layout, const ConfocalParams& params = {},
                               bool normalized = true);

// Nonlocal coupling convolved with Gaussian ensemble profiles of width sigma_a.
// Reduces to the unnormalized confocal matrix at sigma_a = 0.
CouplingMatrix confocal_matrix_convolved(const EnsembleLayout& layout, const ConfocalParams& params);

CouplingMatrix hebbian_matrix(const PatternSet& patterns);

// Threshold on the condition number of the pattern overlap matrix.
inline constexpr double kPseudoinverseConditionLimit = 1e10;

CouplingMatrix pseudoinverse_matrix(const PatternSet& patterns);

CouplingMatrix sk_matrix(Eigen::Index n, double variance, std::uint64_t seed);

} // namespace glassmem::connectivity
