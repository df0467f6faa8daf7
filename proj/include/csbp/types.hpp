#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace csbp {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point = Eigen::Vector2d;
/// n x 2 array of node coordinates, one node per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical construction failed to meet its own verification tolerance.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A state with non-positive density or pressure was encountered.
class InadmissibleState : public Error {
 public:
  using Error::Error;
};

}  // namespace csbp
