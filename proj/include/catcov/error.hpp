#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace catcov {

/// Bad input: unreadable files, malformed tables, invalid arguments.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver hit its iteration cap. Carries the offending matrix.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, Eigen::MatrixXd matrix = {})
        : std::runtime_error(what), matrix_(std::move(matrix)) {}

    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

private:
    Eigen::MatrixXd matrix_;
};

} // namespace catcov
