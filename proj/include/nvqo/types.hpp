#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace nvqo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Dense operators are 2^N x 2^N; N above the cap is refused.
inline constexpr int kDefaultQubitCap = 12;

int qubit_cap();
void set_qubit_cap(int cap);

inline std::size_t dim_of(int nqubits) { return std::size_t{1} << nqubits; }

// Qubit 0 is the most significant bit of a basis index.
inline std::size_t qubit_mask(int nqubits, int qubit) {
    return std::size_t{1} << (nqubits - 1 - qubit);
}

}  // namespace nvqo
