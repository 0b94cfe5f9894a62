// oracles.hpp — independent brute-force reference computations for tests
//
// Everything here deliberately avoids the library's code paths: propagator
// entries are evaluated scalar-by-scalar from the defining formulas, and the
// small-N eigensolver goes through the characteristic polynomial
// (Faddeev-LeVerrier traces + Durand-Kerner root finding) with spectral
// projectors for the eigenvectors.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;

// ---------------------------- scalar propagators ----------------------------

inline Matrix cat_matrix(double g11, double g12, double g22, int n) {
    Matrix u(n, n);
    Complex pref = 1.0 / std::sqrt(Complex(0.0, double(n) * g12));
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) {
            double q = double(j) / n, qp = double(l) / n;
            double phase = kPi * double(n) / g12 * (g11 * q * q - 2.0 * qp * q + g22 * qp * qp);
            u(l, j) = pref * std::exp(Complex(0.0, phase));
        }
    return u;
}

inline Complex momentum_phase(double k, int n, double q) {
    double sp = k / (4.0 * kPi * kPi) * (std::sin(2.0 * kPi * q) - 0.5 * std::sin(4.0 * kPi * q));
    return std::exp(Complex(0.0, 2.0 * kPi * double(n) * sp));
}

inline Complex position_phase(double chi, double p) {
    double arg = chi / (2.0 * kPi) * (std::cos(6.0 * kPi * p) - 0.5 * std::sin(4.0 * kPi * p));
    return std::exp(Complex(0.0, arg));
}

inline Matrix dft(int n) {
    Matrix f(n, n);
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            f(l, j) = std::exp(Complex(0.0, -2.0 * kPi * l * j / double(n))) / std::sqrt(double(n));
    return f;
}

// momentum-perturbed map: U_G * diag(momentum phases)
inline Matrix momentum_perturbed(double g11, double g12, double g22, double k, int n) {
    Matrix u = cat_matrix(g11, g12, g22, n);
    for (int j = 0; j < n; ++j) u.col(j) *= momentum_phase(k, n, double(j) / n);
    return u;
}

// ------------------------- characteristic polynomial -------------------------

// Faddeev-LeVerrier: coefficients of det(zI - A) = z^n + c[n-1] z^{n-1} + ... + c[0]
inline std::vector<Complex> char_poly(const Matrix& a) {
    const int n = int(a.rows());
    std::vector<Complex> c(n);
    Matrix m = Matrix::Zero(n, n);
    Complex ck = 1.0;
    for (int k = 1; k <= n; ++k) {
        m = a * m + ck * Matrix::Identity(n, n);
        ck = -(a * m).trace() / double(k);
        c[n - k] = ck;
    }
    return c;
}

// Durand-Kerner on a monic polynomial with the given low-order coefficients
inline std::vector<Complex> poly_roots(const std::vector<Complex>& coeffs) {
    const int n = int(coeffs.size());
    auto eval = [&](Complex z) {
        Complex p = 1.0;
        for (int i = n - 1; i >= 0; --i) p = p * z + coeffs[std::size_t(i)];
        return p;
    };
    std::vector<Complex> z(n);
    Complex seed(0.4, 0.9);
    Complex acc = 1.0;
    for (int i = 0; i < n; ++i) {
        acc *= seed;
        z[i] = acc;
    }
    for (int iter = 0; iter < 500; ++iter) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            Complex step = eval(z[i]) / denom;
            z[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-15) break;
    }
    return z;
}

inline std::vector<Complex> eigenvalues_charpoly(const Matrix& a) {
    return poly_roots(char_poly(a));
}

// eigenvector for eigenvalue lambda[i] via the spectral projector
// prod_{j != i} (A - lambda_j I) applied to a fixed generic vector; valid for
// distinct eigenvalues
inline Vector eigenvector_projector(const Matrix& a, const std::vector<Complex>& lambda, int i) {
    const int n = int(a.rows());
    Vector v(n);
    for (int j = 0; j < n; ++j) v[j] = Complex(1.0 + 0.1 * j, 0.3 - 0.07 * j);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        v = a * v - lambda[std::size_t(j)] * v;
    }
    v.normalize();
    return v;
}

// naive matrix power by repeated multiplication
inline Matrix matrix_power(const Matrix& a, int t) {
    Matrix r = Matrix::Identity(a.rows(), a.cols());
    for (int i = 0; i < t; ++i) r = a * r;
    return r;
}

} // namespace oracle
