// Operational-space PD control of the end effector (tip of the last link).
// The controller is unaware of any contact; estimation runs purely as an
// observer on the side.

#pragma once

#include "model.hpp"

namespace contact2d {

struct TaskGoal {
    Vector2d x_des = Vector2d::Zero();
    Vector2d xdot_des = Vector2d::Zero();
    double kp = 100.0;  // 1/s^2
    double kv = 20.0;   // 1/s
};

inline Vector2d end_effector_position(const RobotModel& model, const VectorXd& q) {
    return joint_origin(model, q, model.joint_count());
}

inline MatrixXd end_effector_jacobian(const RobotModel& model, const VectorXd& q) {
    const int last = model.joint_count() - 1;
    return point_jacobian(model, q, last, Vector2d(model.links.back().length, 0.0));
}

// tau = J^T Lambda (kp e + kv edot) + g, with the task-space inertia
// Lambda = (J M^-1 J^T + lambda I)^-1 damped so singular configurations never
// fail outright.
inline VectorXd opspace_torques(const RobotModel& model, const VectorXd& q, const VectorXd& qdot,
                                const TaskGoal& goal) {
    if (!(goal.kp > 0.0) || !(goal.kv > 0.0))
        throw std::invalid_argument("task gains must be > 0");
    constexpr double lambda = 1e-6;
    const MatrixXd J = end_effector_jacobian(model, q);
    const MatrixXd M = mass_matrix(model, q);
    const Matrix2d A =
        J * M.ldlt().solve(J.transpose()) + lambda * Matrix2d::Identity();
    const Vector2d x = end_effector_position(model, q);
    const Vector2d xdot = J * qdot;
    const Vector2d accel_des = goal.kp * (goal.x_des - x) + goal.kv * (goal.xdot_des - xdot);
    const Vector2d f_task = A.inverse() * accel_des;
    return J.transpose() * f_task + gravity_vector(model, q);
}

enum class ScenarioKind { hold, track };

struct TrajectoryParams {
    Vector2d hold_point = Vector2d::Zero();
    double track_radius = 0.1;  // m
    double track_period = 4.0;  // s
};

// hold: constant goal at hold_point. track: a circle traversed once per
// period, phased so the curve passes through hold_point at t = 0.
inline TaskGoal scenario_trajectory(ScenarioKind kind, double t, const TrajectoryParams& params,
                                    double kp, double kv) {
    if (t < 0.0) throw std::invalid_argument("t must be >= 0");
    TaskGoal goal;
    goal.kp = kp;
    goal.kv = kv;
    if (kind == ScenarioKind::hold) {
        goal.x_des = params.hold_point;
        goal.xdot_des = Vector2d::Zero();
        return goal;
    }
    const double w = 2.0 * M_PI / params.track_period;
    const Vector2d center = params.hold_point - Vector2d(params.track_radius, 0.0);
    goal.x_des = center + params.track_radius * Vector2d(std::cos(w * t), std::sin(w * t));
    goal.xdot_des = params.track_radius * w * Vector2d(-std::sin(w * t), std::cos(w * t));
    return goal;
}

}  // namespace contact2d
