#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace nbe2e {

using cdouble = std::complex<double>;

// Row-major throughout so parameter blocks map directly onto flat storage.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMat = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<Vec>;
using ConstVecMap = Eigen::Map<const Vec>;

// Flat storage with Eigen's packet alignment. Vectorised reductions over a
// map peel a number of leading scalars that depends on the start address, so
// storage that is only malloc-aligned makes sums vary in the last bits from
// run to run.
using AlignedVector = std::vector<double, Eigen::aligned_allocator<double>>;

}  // namespace nbe2e
