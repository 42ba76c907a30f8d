#ifndef TONALEXP_TYPES_HPP
#define TONALEXP_TYPES_HPP

#include <Eigen/Dense>

namespace tonalexp {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

} // namespace tonalexp

#endif
