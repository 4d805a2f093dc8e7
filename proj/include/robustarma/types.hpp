#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// Core value types shared by every component of the library.
///
/// Conventions used throughout:
///  - An ARMA(p,q) model is written in regression form
///        y_t = mu + sum_i phi_i (y_{t-i} - mu) + a_t - sum_j theta_j a_{t-j},
///    equivalently phi(B)(y_t - mu) = theta(B) a_t with
///        phi(B) = 1 - sum_i phi_i B^i,   theta(B) = 1 - sum_j theta_j B^j.
///  - Stationarity/invertibility means every root z of phi(B) and theta(B)
///    satisfies |z| >= 1 + zeta_margin for a small positive margin.
namespace robustarma {

/// Model orders. Estimation additionally requires n > p + q observations.
struct ArmaSpec {
    std::size_t p = 0;  ///< AR order
    std::size_t q = 0;  ///< MA order
};

/// Parameter vector beta = (phi, theta, mu) in regression form (see file
/// header for the sign convention).
struct ArmaParams {
    std::vector<double> phi;
    std::vector<double> theta;
    double mu = 0.0;

    std::size_t p() const { return phi.size(); }
    std::size_t q() const { return theta.size(); }
};

/// A univariate, uniformly sampled observation sequence y_1..y_n.
struct Series {
    std::vector<double> values;

    Series() = default;
    explicit Series(std::vector<double> v) : values(std::move(v)) {}

    std::size_t n() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    /// True when every entry is finite.
    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Residual-reconstruction branch selector.
enum class Branch { ARMA, BIP };

inline const char* to_string(Branch b) { return b == Branch::ARMA ? "ARMA" : "BIP"; }

/// An innovations sequence reconstructed from observations.
struct Residuals {
    std::vector<double> values;      ///< a_t for t = p+1..n (or the backward range)
    Branch branch = Branch::ARMA;
    double sigma_used = 0.0;         ///< sigma fed into the eta clipping (BIP only)
};

/// Thrown when a parameter vector leaves the stationarity/invertibility
/// region B during an operation that requires membership.
class outside_parameter_region : public std::domain_error {
public:
    explicit outside_parameter_region(const std::string& what) : std::domain_error(what) {}
};

/// Thrown when the data-adaptive weight W_n of the tau estimating equation
/// has a non-positive denominator (degenerate residual configuration).
class degenerate_weight_error : public std::runtime_error {
public:
    explicit degenerate_weight_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robustarma
