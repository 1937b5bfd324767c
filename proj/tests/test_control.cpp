#include <gtest/gtest.h>

#include <contact2d/control.hpp>
#include <contact2d/sim.hpp>

using namespace contact2d;

namespace {

RobotModel default_arm() { return RobotModel::uniform(4, 0.5, 0.08, 1.0); }

}  // namespace

TEST(OpspaceTorques, PureGravityCompensationAtGoal) {
    const RobotModel m = default_arm();
    VectorXd q(4);
    q << 0.3, -0.5, 0.7, 0.1;
    TaskGoal goal;
    goal.x_des = end_effector_position(m, q);
    goal.xdot_des = Vector2d::Zero();
    const VectorXd tau = opspace_torques(m, q, VectorXd::Zero(4), goal);
    EXPECT_LT((tau - gravity_vector(m, q)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OpspaceTorques, TaskForceLinearInKp) {
    const RobotModel m = default_arm();
    VectorXd q(4);
    q << 0.3, -0.5, 0.7, 0.1;
    TaskGoal goal;
    goal.x_des = end_effector_position(m, q) + Vector2d(0.05, -0.02);
    goal.kp = 100.0;
    const VectorXd g = gravity_vector(m, q);
    const VectorXd t1 = opspace_torques(m, q, VectorXd::Zero(4), goal) - g;
    goal.kp = 250.0;
    const VectorXd t2 = opspace_torques(m, q, VectorXd::Zero(4), goal) - g;
    EXPECT_LT((t2 - 2.5 * t1).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(OpspaceTorques, TaskInertiaSymmetricPositiveDefinite) {
    const RobotModel m = default_arm();
    VectorXd q(4);
    q << 0.4, -0.8, 0.6, 0.5;  // away from the stretched-out singularity
    const MatrixXd J = end_effector_jacobian(m, q);
    const MatrixXd M = mass_matrix(m, q);
    const Matrix2d A = J * M.ldlt().solve(J.transpose());
    const Matrix2d lambda = A.inverse();
    EXPECT_LT(std::abs(lambda(0, 1) - lambda(1, 0)), 1e-9 * lambda.norm());
    Eigen::SelfAdjointEigenSolver<Matrix2d> eig(0.5 * (lambda + lambda.transpose()));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(OpspaceTorques, RegulatesFromOffsetInFreeSpace) {
    const RobotModel m = default_arm();
    VectorXd q(4);
    q << -0.4, 0.6, 0.4, -0.3;
    const Vector2d target = end_effector_position(m, q) + Vector2d(0.03, 0.04);  // 5 cm away
    TaskGoal goal;
    goal.x_des = target;
    goal.kp = 100.0;
    goal.kv = 20.0;
    SimState state = SimState::initial(q);
    for (int k = 0; k < 2000; ++k) {
        const VectorXd tau = opspace_torques(m, state.joints.q, state.joints.qdot, goal);
        state = step(m, state, tau, std::nullopt, 1e-3);
    }
    EXPECT_LT((end_effector_position(m, state.joints.q) - target).norm(), 1e-3);
}

TEST(ScenarioTrajectory, HoldIsConstant) {
    TrajectoryParams params;
    params.hold_point = Vector2d(0.7, -0.4);
    for (double t : {0.0, 0.37, 2.0, 11.4}) {
        const TaskGoal g = scenario_trajectory(ScenarioKind::hold, t, params, 100.0, 20.0);
        EXPECT_EQ(g.x_des, params.hold_point);
        EXPECT_EQ(g.xdot_des, Vector2d::Zero());
    }
}

TEST(ScenarioTrajectory, TrackIsPeriodicAndStartsAtHoldPoint) {
    TrajectoryParams params;
    params.hold_point = Vector2d(0.7, -0.4);
    params.track_radius = 0.1;
    params.track_period = 4.0;
    const TaskGoal g0 = scenario_trajectory(ScenarioKind::track, 0.0, params, 100.0, 20.0);
    EXPECT_LT((g0.x_des - params.hold_point).norm(), 1e-12);
    for (double t : {0.0, 0.9, 2.2}) {
        const TaskGoal a = scenario_trajectory(ScenarioKind::track, t, params, 100.0, 20.0);
        const TaskGoal b =
            scenario_trajectory(ScenarioKind::track, t + params.track_period, params, 100.0, 20.0);
        EXPECT_LT((a.x_des - b.x_des).norm(), 1e-9);
        EXPECT_LT((a.xdot_des - b.xdot_des).norm(), 1e-9);
    }
}

TEST(ScenarioTrajectory, VelocityConsistentWithPositionDerivative) {
    TrajectoryParams params;
    params.hold_point = Vector2d(0.7, -0.4);
    params.track_radius = 0.1;
    params.track_period = 4.0;
    const double dt = 1e-3;  // 1 kHz sampling
    for (int k = 1; k < 4000; ++k) {
        const double t = k * dt;
        const TaskGoal prev =
            scenario_trajectory(ScenarioKind::track, t - dt, params, 100.0, 20.0);
        const TaskGoal next =
            scenario_trajectory(ScenarioKind::track, t + dt, params, 100.0, 20.0);
        const TaskGoal cur = scenario_trajectory(ScenarioKind::track, t, params, 100.0, 20.0);
        const Vector2d fd = (next.x_des - prev.x_des) / (2.0 * dt);
        EXPECT_LT((fd - cur.xdot_des).norm(), 1e-3);
    }
}

TEST(ScenarioTrajectory, RejectsNegativeTime) {
    TrajectoryParams params;
    EXPECT_THROW(scenario_trajectory(ScenarioKind::hold, -1.0, params, 100.0, 20.0),
                 std::invalid_argument);
}
