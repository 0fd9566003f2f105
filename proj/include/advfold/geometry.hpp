#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>

namespace advfold {

/// Proper rigid motion (rotation + translation). apply() is expression-friendly:
/// it accepts any 3xN Eigen expression.
template <typename Scalar>
struct RigidTransform {
    Eigen::Matrix<Scalar, 3, 3> rotation = Eigen::Matrix<Scalar, 3, 3>::Identity();
    Eigen::Matrix<Scalar, 3, 1> translation = Eigen::Matrix<Scalar, 3, 1>::Zero();

    template <typename Derived>
    Eigen::Matrix<Scalar, 3, Eigen::Dynamic> apply(const Eigen::MatrixBase<Derived>& points) const {
        return (rotation * points).colwise() + translation;
    }
};

using RigidTransformd = RigidTransform<double>;

/// Least-squares proper rotation + translation taking `mobile` onto `target`
/// (columns are paired points). The SVD sign is corrected so the result is
/// always a rotation, det = +1, never a reflection.
template <typename DerivedT, typename DerivedM>
RigidTransform<typename DerivedT::Scalar> kabsch_fit(const Eigen::MatrixBase<DerivedT>& target,
                                                     const Eigen::MatrixBase<DerivedM>& mobile) {
    using Scalar = typename DerivedT::Scalar;
    using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
    using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

    const Vector3 centroid_target = target.rowwise().mean();
    const Vector3 centroid_mobile = mobile.rowwise().mean();

    const Matrix3 covariance = (mobile.colwise() - centroid_mobile) *
                               (target.colwise() - centroid_target).transpose();

    Eigen::JacobiSVD<Matrix3> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix3 u = svd.matrixU();
    const Matrix3 v = svd.matrixV();

    Vector3 signs = Vector3::Ones();
    if ((v * u.transpose()).determinant() < Scalar(0)) signs(2) = Scalar(-1);

    RigidTransform<Scalar> fit;
    fit.rotation = v * signs.asDiagonal() * u.transpose();
    fit.translation = centroid_target - fit.rotation * centroid_mobile;
    return fit;
}

/// Root-mean-square deviation between paired columns; no alignment is applied.
template <typename DerivedT, typename DerivedM>
typename DerivedT::Scalar rmsd_between(const Eigen::MatrixBase<DerivedT>& target,
                                       const Eigen::MatrixBase<DerivedM>& mobile) {
    return std::sqrt((target - mobile).colwise().squaredNorm().mean());
}

/// Fraction, averaged over the four thresholds, of columns whose Euclidean
/// deviation is strictly below the threshold.
template <typename DerivedT, typename DerivedM, typename Scalar>
Scalar gdt_between(const Eigen::MatrixBase<DerivedT>& target,
                   const Eigen::MatrixBase<DerivedM>& mobile,
                   const std::array<Scalar, 4>& thresholds) {
    const auto deviations = (target - mobile).colwise().norm().eval();
    Eigen::Index hits = 0;
    for (Scalar threshold : thresholds) {
        hits += (deviations.array() < threshold).count();
    }
    return static_cast<Scalar>(hits) / (Scalar(4) * static_cast<Scalar>(target.cols()));
}

/// Squared column-wise deviations (the d(.,.) of the structural metrics).
template <typename DerivedT, typename DerivedM>
Eigen::Matrix<typename DerivedT::Scalar, 1, Eigen::Dynamic> squared_deviations(
    const Eigen::MatrixBase<DerivedT>& target, const Eigen::MatrixBase<DerivedM>& mobile) {
    return (target - mobile).colwise().squaredNorm();
}

}  // namespace advfold
