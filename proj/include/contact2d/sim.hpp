// Ground-truth physics: forward integration of the manipulator dynamics with a
// penalty (spring-damper) contact model against a circular obstacle. The
// recorded contact point and force are what the estimators are judged against.

#pragma once

#include <algorithm>
#include <optional>

#include "model.hpp"

namespace contact2d {

struct Obstacle {
    Vector2d center = Vector2d::Zero();  // world, m
    double radius = 0.1;                 // m
    double stiffness = 1e4;              // N/m of penetration
    double damping = 0.0;                // N s/m on the normal velocity

    void validate() const {
        if (!(radius > 0.0)) throw std::invalid_argument("obstacle radius must be > 0");
        if (!(stiffness > 0.0)) throw std::invalid_argument("obstacle stiffness must be > 0");
        if (damping < 0.0) throw std::invalid_argument("obstacle damping must be >= 0");
    }
};

struct ContactInfo {
    BoundaryPoint point;      // deepest-penetrating boundary point, link frame
    Vector2d point_world;     // same point in world coordinates
    Vector2d force;           // N applied to the robot (along the obstacle normal)
    VectorXd tau;             // joint torques J^T F
    double penetration = 0.0; // m
    int penetrating_links = 0; // >1 violates the single-contact assumption
};

namespace detail {

// Penetration depth of boundary point s of `link` into the obstacle; positive
// inside. Uses a precomputed pose so the dense scan stays cheap.
inline double penetration_at(const RobotModel& model, const LinkPose& pose, int link, double s,
                             const Obstacle& obs) {
    const BoundaryPoint pt = perimeter_point(model, link, s);
    const Vector2d w = pose.origin + pose.rot * pt.local;
    return obs.radius - (w - obs.center).norm();
}

}  // namespace detail

// Finds the deepest-penetrating boundary point of any link inside the obstacle
// by a 1 mm arc-length scan refined by interval halving to 1e-5 m, and returns
// the penalty contact force there. The force is clamped so it never pulls the
// arm into the obstacle.
inline std::optional<ContactInfo> contact_resolve(const RobotModel& model, const VectorXd& q,
                                                  const VectorXd& qdot, const Obstacle& obs) {
    const int n = model.joint_count();
    const auto poses = forward_kinematics(model, q);

    constexpr double coarse = 1e-3;
    constexpr double refine_to = 1e-5;

    int best_link = -1;
    double best_s = 0.0, best_pen = 0.0;
    int penetrating_links = 0;
    for (int link = 0; link < n; ++link) {
        const LinkPose& pose = poses[static_cast<size_t>(link)];
        // quick reject: link fully outside the obstacle's reach
        const LinkParams& lp = model.links[static_cast<size_t>(link)];
        const Vector2d mid = pose.origin + pose.rot * Vector2d(0.5 * lp.length, 0.0);
        const double link_radius = 0.5 * std::hypot(lp.length, lp.width);
        if ((mid - obs.center).norm() > obs.radius + link_radius) continue;

        const double P = model.perimeter(link);
        const int steps = static_cast<int>(std::ceil(P / coarse));
        double link_best_pen = 0.0, link_best_s = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double s = k * P / steps;
            const double pen = detail::penetration_at(model, pose, link, s, obs);
            if (pen > link_best_pen) {
                link_best_pen = pen;
                link_best_s = s;
            }
        }
        if (link_best_pen <= 0.0) continue;
        ++penetrating_links;
        if (link_best_pen > best_pen) {
            best_pen = link_best_pen;
            best_s = link_best_s;
            best_link = link;
        }
    }
    if (best_link < 0) return std::nullopt;

    // local refinement around the coarse maximum
    const LinkPose& pose = poses[static_cast<size_t>(best_link)];
    double step = coarse;
    while (step > refine_to) {
        step *= 0.5;
        const double pen_lo = detail::penetration_at(model, pose, best_link, best_s - step, obs);
        const double pen_hi = detail::penetration_at(model, pose, best_link, best_s + step, obs);
        if (pen_lo > best_pen && pen_lo >= pen_hi) {
            best_pen = pen_lo;
            best_s -= step;
        } else if (pen_hi > best_pen) {
            best_pen = pen_hi;
            best_s += step;
        }
    }

    ContactInfo info;
    info.point = perimeter_point(model, best_link, best_s);
    info.point_world = pose.origin + pose.rot * info.point.local;
    info.penetration = best_pen;
    info.penetrating_links = penetrating_links;

    const Vector2d to_point = info.point_world - obs.center;
    const double dist = to_point.norm();
    const Vector2d nhat = dist > 1e-12 ? Vector2d(to_point / dist) : Vector2d(0.0, 1.0);
    const MatrixXd J = point_jacobian(model, q, info.point);
    const double vn = (J * qdot).dot(nhat);
    const double magnitude = std::max(0.0, obs.stiffness * best_pen - obs.damping * vn);
    info.force = magnitude * nhat;
    info.tau = J.transpose() * info.force;
    return info;
}

struct SimState {
    JointState joints;
    double t = 0.0;
    std::optional<ContactInfo> true_contact;  // contact applied during the last step

    static SimState initial(const VectorXd& q0) {
        return SimState{JointState{q0, VectorXd::Zero(q0.size())}, 0.0, std::nullopt};
    }
};

// One semi-implicit Euler step of M qddot + C qdot + g = tau_m + tau_c with the
// optional penalty contact. Throws if the mass matrix is numerically singular,
// which signals a broken model rather than a recoverable condition.
inline SimState step(const RobotModel& model, const SimState& state, const VectorXd& tau_m,
                     const std::optional<Obstacle>& obstacle, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    const VectorXd& q = state.joints.q;
    const VectorXd& qdot = state.joints.qdot;

    const MatrixXd M = mass_matrix(model, q);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
    const double lam_min = eig.eigenvalues().minCoeff();
    const double lam_max = eig.eigenvalues().maxCoeff();
    if (!(lam_min > 0.0) || lam_max / lam_min > 1e12)
        throw std::runtime_error("mass matrix numerically singular (condition > 1e12)");

    std::optional<ContactInfo> contact;
    if (obstacle) contact = contact_resolve(model, q, qdot, *obstacle);

    VectorXd rhs = tau_m - coriolis_matrix(model, q, qdot) * qdot - gravity_vector(model, q) -
                   model.joint_damping.cwiseProduct(qdot);
    if (contact) rhs += contact->tau;

    const VectorXd qddot = eig.eigenvectors() *
                           (eig.eigenvalues().cwiseInverse().asDiagonal() *
                            (eig.eigenvectors().transpose() * rhs));

    SimState next;
    next.joints.qdot = qdot + qddot * dt;
    next.joints.q = q + next.joints.qdot * dt;
    next.t = state.t + dt;
    next.true_contact = std::move(contact);
    return next;
}

}  // namespace contact2d
