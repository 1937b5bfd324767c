#include <gtest/gtest.h>

#include <contact2d/model.hpp>

#include <random>

using namespace contact2d;

namespace {

std::mt19937_64 test_rng(0x5eed0001ull);

double urand(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(test_rng);
}

VectorXd random_q(int n, double lo = -M_PI, double hi = M_PI) {
    VectorXd q(n);
    for (int i = 0; i < n; ++i) q[i] = urand(lo, hi);
    return q;
}

RobotModel random_model(int n) {
    RobotModel m;
    for (int i = 0; i < n; ++i) {
        LinkParams lp;
        lp.length = urand(0.3, 0.7);
        lp.width = urand(0.04, 0.12);
        lp.mass = urand(0.5, 2.0);
        lp.com_offset = urand(0.2, 0.8) * lp.length;
        lp.inertia_zz = 0.0;  // uniform-density default
        m.links.push_back(lp);
    }
    m.gravity = Vector2d(urand(-2.0, 2.0), urand(-12.0, -6.0));
    m.finalize();
    return m;
}

// Test-side forward pass, independent of the library's jacobian assembly:
// positions and velocities propagated joint to joint.
struct LinkMotion {
    Vector2d com;
    Vector2d com_vel;
    double omega;
};

std::vector<LinkMotion> velocity_recursion(const RobotModel& m, const VectorXd& q,
                                           const VectorXd& qdot) {
    std::vector<LinkMotion> out;
    Vector2d p = Vector2d::Zero(), v = Vector2d::Zero();
    double angle = 0.0, omega = 0.0;
    for (int i = 0; i < m.joint_count(); ++i) {
        angle += q[i];
        omega += qdot[i];
        const Matrix2d R = rotation2(angle);
        const Vector2d r_com = R * Vector2d(m.links[i].com_offset, 0.0);
        out.push_back(LinkMotion{p + r_com, v + omega * perp(r_com), omega});
        const Vector2d r_tip = R * Vector2d(m.links[i].length, 0.0);
        v += omega * perp(r_tip);
        p += r_tip;
    }
    return out;
}

double kinetic_energy(const RobotModel& m, const VectorXd& q, const VectorXd& qdot) {
    double T = 0.0;
    const auto motion = velocity_recursion(m, q, qdot);
    for (int i = 0; i < m.joint_count(); ++i)
        T += 0.5 * m.links[i].mass * motion[i].com_vel.squaredNorm() +
             0.5 * m.links[i].inertia_zz * motion[i].omega * motion[i].omega;
    return T;
}

double potential_energy(const RobotModel& m, const VectorXd& q) {
    double V = 0.0;
    const auto motion = velocity_recursion(m, q, VectorXd::Zero(m.joint_count()));
    for (int i = 0; i < m.joint_count(); ++i)
        V -= m.links[i].mass * m.gravity.dot(motion[i].com);
    return V;
}

}  // namespace

TEST(MassMatrix, SingleRodPendulumInertia) {
    RobotModel m;
    // thin uniform rod: explicit rod inertia, geometric width irrelevant here
    m.links.push_back(LinkParams{1.2, 1e-3, 0.7, 0.7 * 1.2 * 1.2 / 12.0, 0.6});
    m.finalize();
    for (double q0 : {0.0, 0.3, -1.2, 2.9}) {
        VectorXd q(1);
        q << q0;
        const MatrixXd M = mass_matrix(m, q);
        EXPECT_NEAR(M(0, 0), 0.7 * 1.2 * 1.2 / 3.0, 1e-12);
    }
}

TEST(MassMatrix, SymmetricEntrywise) {
    const RobotModel m = random_model(4);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd M = mass_matrix(m, random_q(4));
        EXPECT_EQ((M - M.transpose()).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(MassMatrix, MatchesKineticEnergyOracle) {
    const RobotModel m = random_model(4);
    for (int trial = 0; trial < 30; ++trial) {
        const VectorXd q = random_q(4);
        const MatrixXd M = mass_matrix(m, q);
        // polarization of Q(v) = 2 T(q, v) recovers every entry
        MatrixXd M_oracle(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                VectorXd ei = VectorXd::Zero(4), ej = VectorXd::Zero(4);
                ei[i] = 1.0;
                ej[j] = 1.0;
                const double qij = 2.0 * kinetic_energy(m, q, ei + ej);
                const double qi = 2.0 * kinetic_energy(m, q, ei);
                const double qj = 2.0 * kinetic_energy(m, q, ej);
                M_oracle(i, j) = 0.5 * (qij - qi - qj);
            }
        EXPECT_LT((M - M_oracle).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(MassMatrix, PositiveDefiniteOnRandomStates) {
    const RobotModel m = random_model(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const MatrixXd M = mass_matrix(m, random_q(4));
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
        EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(CoriolisMatrix, ZeroVelocityGivesZeroMatrix) {
    const RobotModel m = random_model(4);
    const MatrixXd C = coriolis_matrix(m, random_q(4), VectorXd::Zero(4));
    EXPECT_EQ(C.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CoriolisMatrix, SkewSymmetryOfMdotMinus2C) {
    const RobotModel m = random_model(4);
    constexpr double h = 1e-6;
    for (int trial = 0; trial < 1000; ++trial) {
        const VectorXd q = random_q(4);
        const VectorXd qdot = random_q(4, -1.0, 1.0);
        const MatrixXd C = coriolis_matrix(m, q, qdot);
        const MatrixXd Mdot =
            (mass_matrix(m, q + h * qdot) - mass_matrix(m, q - h * qdot)) / (2.0 * h);
        const double residue = qdot.dot((Mdot - 2.0 * C) * qdot);
        EXPECT_LT(std::abs(residue), 1e-6);
    }
}

TEST(CoriolisMatrix, MatchesLagrangianOracle) {
    const RobotModel m = random_model(4);
    const double h_qdot = 1e-2;  // T is quadratic in qdot, no truncation error
    const double h_t = 1e-4;
    const double h_q = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const VectorXd q = random_q(4);
        const VectorXd qdot = random_q(4, -1.0, 1.0);
        const VectorXd f_impl = coriolis_matrix(m, q, qdot) * qdot;

        // d/dt (dT/dqdot) - dT/dq along the constant-velocity path q + t*qdot
        auto dT_dqdot = [&](const VectorXd& qq, int i) {
            VectorXd vp = qdot, vm = qdot;
            vp[i] += h_qdot;
            vm[i] -= h_qdot;
            return (kinetic_energy(m, qq, vp) - kinetic_energy(m, qq, vm)) / (2.0 * h_qdot);
        };
        VectorXd f_oracle(4);
        for (int i = 0; i < 4; ++i) {
            const double ddt =
                (dT_dqdot(q + h_t * qdot, i) - dT_dqdot(q - h_t * qdot, i)) / (2.0 * h_t);
            VectorXd qp = q, qm = q;
            qp[i] += h_q;
            qm[i] -= h_q;
            const double dT_dq =
                (kinetic_energy(m, qp, qdot) - kinetic_energy(m, qm, qdot)) / (2.0 * h_q);
            f_oracle[i] = ddt - dT_dq;
        }
        EXPECT_LT((f_impl - f_oracle).cwiseAbs().maxCoeff(), 1e-5);
    }
}

TEST(GravityVector, ZeroFieldGivesZero) {
    RobotModel m = random_model(4);
    m.gravity = Vector2d::Zero();
    const VectorXd g = gravity_vector(m, random_q(4));
    EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GravityVector, SingleRodAnalytic) {
    RobotModel m;
    m.links.push_back(LinkParams{0.9, 1e-3, 1.3, 0.0, -1.0});  // uniform density, com = l/2
    m.gravity = Vector2d(0.0, -9.81);
    m.finalize();
    for (double q0 : {0.0, 0.4, -2.0, 1.7}) {
        VectorXd q(1);
        q << q0;
        const VectorXd g = gravity_vector(m, q);
        EXPECT_NEAR(g[0], 1.3 * 9.81 * 0.45 * std::cos(q0), 1e-12);
    }
}

TEST(GravityVector, MatchesPotentialOracle) {
    const RobotModel m = random_model(4);
    constexpr double h = 1e-5;
    for (int trial = 0; trial < 30; ++trial) {
        const VectorXd q = random_q(4);
        const VectorXd g = gravity_vector(m, q);
        for (int i = 0; i < 4; ++i) {
            VectorXd qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            const double g_fd = (potential_energy(m, qp) - potential_energy(m, qm)) / (2.0 * h);
            EXPECT_NEAR(g[i], g_fd, 1e-7);
        }
    }
}

TEST(PointJacobian, ZeroColumnForPointOnJointAxis) {
    const RobotModel m = random_model(4);
    const MatrixXd J = point_jacobian(m, random_q(4), 0, Vector2d::Zero());
    EXPECT_EQ(J.col(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PointJacobian, DistalColumnsExactlyZero) {
    const RobotModel m = random_model(4);
    for (int link = 0; link < 4; ++link) {
        const BoundaryPoint pt = perimeter_point(m, link, 0.123);
        const MatrixXd J = point_jacobian(m, random_q(4), pt);
        for (int j = link + 1; j < 4; ++j) EXPECT_EQ(J.col(j).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(PointJacobian, MatchesFiniteDifference) {
    const RobotModel m = random_model(4);
    constexpr double h = 1e-6;
    for (int trial = 0; trial < 30; ++trial) {
        const VectorXd q = random_q(4);
        const int link = trial % 4;
        const BoundaryPoint pt = perimeter_point(m, link, urand(0.0, m.perimeter(link)));
        const MatrixXd J = point_jacobian(m, q, pt);
        for (int j = 0; j < 4; ++j) {
            VectorXd qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            const Vector2d fd =
                (world_point(m, qp, pt).position - world_point(m, qm, pt).position) / (2.0 * h);
            EXPECT_LT((J.col(j) - fd).norm(), 1e-6);
        }
    }
}

TEST(FrameJacobian, BaseJointIsZeroMatrix) {
    const RobotModel m = random_model(4);
    const MatrixXd J = frame_jacobian(m, random_q(4), 0);
    EXPECT_EQ(J.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FrameJacobian, AngularRowIsProximalIndicator) {
    const RobotModel m = random_model(4);
    const MatrixXd J = frame_jacobian(m, random_q(4), 3);
    EXPECT_EQ(J(2, 0), 1.0);
    EXPECT_EQ(J(2, 1), 1.0);
    EXPECT_EQ(J(2, 2), 1.0);
    EXPECT_EQ(J(2, 3), 0.0);
}

TEST(FrameJacobian, LinearRowsMatchFiniteDifference) {
    const RobotModel m = random_model(4);
    constexpr double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const VectorXd q = random_q(4);
        for (int joint = 0; joint < 4; ++joint) {
            const MatrixXd J = frame_jacobian(m, q, joint);
            for (int j = 0; j < 4; ++j) {
                VectorXd qp = q, qm = q;
                qp[j] += h;
                qm[j] -= h;
                const Vector2d fd =
                    (joint_origin(m, qp, joint) - joint_origin(m, qm, joint)) / (2.0 * h);
                EXPECT_LT((J.block<2, 1>(0, j) - fd).norm(), 1e-6);
            }
        }
    }
}

TEST(PerimeterPoint, HandWalkedRectangle) {
    RobotModel m;
    m.links.push_back(LinkParams{1.0, 0.1, 1.0, 0.0, -1.0});
    m.finalize();
    const auto check = [&](double s, double x, double y, double nx, double ny) {
        const BoundaryPoint pt = perimeter_point(m, 0, s);
        EXPECT_NEAR(pt.local.x(), x, 1e-15) << "s = " << s;
        EXPECT_NEAR(pt.local.y(), y, 1e-15) << "s = " << s;
        EXPECT_NEAR(pt.outward_normal.x(), nx, 1e-15) << "s = " << s;
        EXPECT_NEAR(pt.outward_normal.y(), ny, 1e-15) << "s = " << s;
    };
    // counter-clockwise walk from the proximal bottom corner
    check(0.0, 0.0, -0.05, 0.0, -1.0);
    check(0.5, 0.5, -0.05, 0.0, -1.0);
    check(1.0, 1.0, -0.05, 1.0, 0.0);   // distal end of the first traversed edge
    check(1.05, 1.0, 0.0, 1.0, 0.0);
    check(1.1, 1.0, 0.05, 0.0, 1.0);
    check(1.6, 0.5, 0.05, 0.0, 1.0);
    check(2.1, 0.0, 0.05, -1.0, 0.0);
    check(2.15, 0.0, 0.0, -1.0, 0.0);
    check(2.2, 0.0, -0.05, 0.0, -1.0);  // full perimeter wraps to the start
    // negative s wraps backwards onto the proximal edge (top corner), up to
    // the floating error of the wrap itself
    const BoundaryPoint wrapped = perimeter_point(m, 0, -0.1);
    EXPECT_NEAR(wrapped.local.x(), 0.0, 1e-12);
    EXPECT_NEAR(wrapped.local.y(), 0.05, 1e-12);
    EXPECT_EQ(wrapped.outward_normal.x(), -1.0);
}

TEST(PerimeterPoint, WalkedLengthEqualsPerimeter) {
    const RobotModel m = random_model(3);
    for (int link = 0; link < 3; ++link) {
        const LinkParams& lp = m.links[link];
        const double P = m.perimeter(link);
        // chord sum over a grid aligned with the corners is exact
        const double corners[5] = {0.0, lp.length, lp.length + lp.width,
                                   2.0 * lp.length + lp.width, P};
        double total = 0.0;
        constexpr int per_edge = 1000;
        for (int e = 0; e < 4; ++e)
            for (int k = 0; k < per_edge; ++k) {
                const double s0 = corners[e] + (corners[e + 1] - corners[e]) * k / per_edge;
                const double s1 = corners[e] + (corners[e + 1] - corners[e]) * (k + 1) / per_edge;
                total += (perimeter_point(m, link, s1).local - perimeter_point(m, link, s0).local)
                             .norm();
            }
        EXPECT_NEAR(total, 2.0 * (lp.length + lp.width), 1e-12);
    }
}

TEST(PerimeterPoint, BoundaryWalkInvertible) {
    const RobotModel m = random_model(2);
    for (int link = 0; link < 2; ++link) {
        const double P = m.perimeter(link);
        for (int k = 0; k < 2000; ++k) {
            const double s = P * k / 2000.0;
            const BoundaryPoint pt = perimeter_point(m, link, s);
            const BoundaryPoint back = closest_boundary_point(m, link, pt.local);
            EXPECT_LT((back.local - pt.local).norm(), 1e-12);
        }
    }
}

TEST(WorldPoint, BasePositionAtZeroConfiguration) {
    const RobotModel m = random_model(4);
    const BoundaryPoint pt = perimeter_point(m, 0, 0.0);
    const WorldPoint wp = world_point(m, VectorXd::Zero(4), pt);
    EXPECT_NEAR(wp.position.x(), pt.local.x(), 1e-15);
    EXPECT_NEAR(wp.position.y(), pt.local.y(), 1e-15);
}

TEST(WorldPoint, BaseRotationRotatesNormal) {
    const RobotModel m = random_model(4);
    const BoundaryPoint pt = perimeter_point(m, 0, 0.2);
    VectorXd q = VectorXd::Zero(4);
    const Vector2d n0 = world_point(m, q, pt).normal;
    q[0] = M_PI / 2.0;
    const Vector2d n1 = world_point(m, q, pt).normal;
    EXPECT_LT((n1 - perp(n0)).norm(), 1e-12);
}

TEST(WorldPoint, VelocityConsistentWithJacobian) {
    const RobotModel m = random_model(4);
    constexpr double h = 1e-6;
    for (int trial = 0; trial < 30; ++trial) {
        const VectorXd q = random_q(4);
        const VectorXd qdot = random_q(4, -1.0, 1.0);
        const int link = trial % 4;
        const BoundaryPoint pt = perimeter_point(m, link, urand(0.0, m.perimeter(link)));
        const Vector2d fd = (world_point(m, q + h * qdot, pt).position -
                             world_point(m, q - h * qdot, pt).position) /
                            (2.0 * h);
        const Vector2d v = point_jacobian(m, q, pt) * qdot;
        EXPECT_LT((fd - v).norm(), 1e-5);
    }
}

TEST(RobotModel, RejectsInvalidParameters) {
    RobotModel m;
    m.links.push_back(LinkParams{0.5, 0.08, -1.0, 0.0, -1.0});
    EXPECT_THROW(m.finalize(), std::invalid_argument);
    m.links[0].mass = 1.0;
    m.links[0].length = 0.0;
    EXPECT_THROW(m.finalize(), std::invalid_argument);
    m.links[0].length = 0.5;
    m.links[0].com_offset = 0.6;
    EXPECT_THROW(m.finalize(), std::invalid_argument);
    m.links[0].com_offset = 0.25;
    EXPECT_NO_THROW(m.finalize());
}
