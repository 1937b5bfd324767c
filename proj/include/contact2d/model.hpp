// Planar serial-chain robot description, rigid-body dynamics terms and
// geometric queries (jacobians, link-boundary parameterization).
//
// Conventions used throughout the library:
//  - links and joints are 0-based; joint i is the proximal joint of link i
//  - link frame i: origin on the joint-i axis, +x along the link axis;
//    the link body is the rectangle x in [0, length], y in [-width/2, width/2]
//  - absolute link angle theta_i = sum of q_0..q_i
//  - planar cross product: cross(a, b) = a.x*b.y - a.y*b.x (moment about +z)
//  - perp(v) = (-v.y, v.x)

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace contact2d {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

inline double cross2(const Vector2d& a, const Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
}

inline Vector2d perp(const Vector2d& v) { return Vector2d(-v.y(), v.x()); }

struct LinkParams {
    double length = 0.5;      // m, along local +x
    double width = 0.08;      // m, across the link
    double mass = 1.0;        // kg
    double inertia_zz = 0.0;  // kg m^2 about the COM; 0 selects uniform density
    double com_offset = -1.0; // m along +x from the joint; <0 selects length/2
};

struct RobotModel {
    std::vector<LinkParams> links;
    Vector2d gravity{0.0, -9.81};  // m/s^2 in the plane
    VectorXd joint_damping;        // N m s/rad, simulator-only viscous term

    int joint_count() const { return static_cast<int>(links.size()); }

    double perimeter(int link) const {
        const LinkParams& lp = links.at(static_cast<size_t>(link));
        return 2.0 * (lp.length + lp.width);
    }

    // Uniform-density chain of identical rectangular links.
    static RobotModel uniform(int n, double length, double width, double mass,
                              const Vector2d& gravity = Vector2d(0.0, -9.81)) {
        RobotModel m;
        m.links.assign(static_cast<size_t>(n), LinkParams{length, width, mass, 0.0, -1.0});
        m.gravity = gravity;
        m.joint_damping = VectorXd::Zero(n);
        m.finalize();
        return m;
    }

    // Fills derived defaults (COM at mid-length, uniform-density plate inertia)
    // and checks the invariants. Throws std::invalid_argument on a bad model.
    void finalize() {
        if (links.empty()) throw std::invalid_argument("robot model needs at least one link");
        for (size_t i = 0; i < links.size(); ++i) {
            LinkParams& lp = links[i];
            const std::string where = "link " + std::to_string(i) + ": ";
            if (!(lp.length > 0.0)) throw std::invalid_argument(where + "length must be > 0");
            if (!(lp.width > 0.0)) throw std::invalid_argument(where + "width must be > 0");
            if (!(lp.mass > 0.0)) throw std::invalid_argument(where + "mass must be > 0");
            if (lp.com_offset < 0.0) lp.com_offset = 0.5 * lp.length;
            if (lp.com_offset > lp.length)
                throw std::invalid_argument(where + "com_offset must lie within [0, length]");
            if (lp.inertia_zz <= 0.0)
                lp.inertia_zz = lp.mass * (lp.length * lp.length + lp.width * lp.width) / 12.0;
        }
        if (joint_damping.size() != joint_count()) joint_damping = VectorXd::Zero(joint_count());
        for (int i = 0; i < joint_damping.size(); ++i)
            if (joint_damping[i] < 0.0)
                throw std::invalid_argument("joint_damping must be >= 0");
        if (!gravity.allFinite()) throw std::invalid_argument("gravity must be finite");
    }
};

struct JointState {
    VectorXd q;     // rad
    VectorXd qdot;  // rad/s

    static JointState zero(int n) { return JointState{VectorXd::Zero(n), VectorXd::Zero(n)}; }
};

// A material point on a link's rectangular boundary. `s` is the arc length of
// the counter-clockwise walk that starts at the local corner (0, -width/2) and
// first traverses the y = -width/2 edge toward the link tip. Corners belong to
// the edge that starts at them.
struct BoundaryPoint {
    int link = 0;
    double s = 0.0;
    Vector2d local = Vector2d::Zero();
    Vector2d outward_normal = Vector2d(0.0, -1.0);  // link frame
};

struct LinkPose {
    Vector2d origin;  // world position of the proximal joint
    double angle;     // absolute link angle
    Matrix2d rot;     // world_from_link rotation
};

inline Matrix2d rotation2(double a) {
    Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

inline std::vector<LinkPose> forward_kinematics(const RobotModel& model, const VectorXd& q) {
    const int n = model.joint_count();
    if (q.size() != n) throw std::invalid_argument("q dimension does not match model");
    std::vector<LinkPose> poses(static_cast<size_t>(n));
    Vector2d origin = Vector2d::Zero();
    double angle = 0.0;
    for (int i = 0; i < n; ++i) {
        angle += q[i];
        poses[static_cast<size_t>(i)] = LinkPose{origin, angle, rotation2(angle)};
        origin += poses[static_cast<size_t>(i)].rot * Vector2d(model.links[static_cast<size_t>(i)].length, 0.0);
    }
    return poses;
}

// World position of the origin of joint `joint`; joint == n gives the tip of
// the last link.
inline Vector2d joint_origin(const RobotModel& model, const VectorXd& q, int joint) {
    const auto poses = forward_kinematics(model, q);
    const int n = model.joint_count();
    if (joint < 0 || joint > n) throw std::invalid_argument("joint index out of range");
    if (joint == n) {
        const auto& last = poses.back();
        return last.origin + last.rot * Vector2d(model.links.back().length, 0.0);
    }
    return poses[static_cast<size_t>(joint)].origin;
}

// 2 x n jacobian of a material point given in the frame of `link`. Column j is
// perp(x - p_j) for j <= link and zero for joints distal to the link.
inline MatrixXd point_jacobian(const std::vector<LinkPose>& poses, int link,
                               const Vector2d& local) {
    const int n = static_cast<int>(poses.size());
    if (link < 0 || link >= n) throw std::invalid_argument("link index out of range");
    const Vector2d x = poses[static_cast<size_t>(link)].origin + poses[static_cast<size_t>(link)].rot * local;
    MatrixXd J = MatrixXd::Zero(2, n);
    for (int j = 0; j <= link; ++j)
        J.col(j) = perp(x - poses[static_cast<size_t>(j)].origin);
    return J;
}

inline MatrixXd point_jacobian(const RobotModel& model, const VectorXd& q, int link,
                               const Vector2d& local) {
    return point_jacobian(forward_kinematics(model, q), link, local);
}

inline MatrixXd point_jacobian(const RobotModel& model, const VectorXd& q,
                               const BoundaryPoint& pt) {
    return point_jacobian(model, q, pt.link, pt.local);
}

// 3 x n jacobian (2 linear rows, 1 angular row) of the frame sitting at the
// origin of joint `joint` on the proximal side of that joint, i.e. the frame
// carried by link joint-1 (for joint == 0 it is the fixed base, so the whole
// matrix is zero). Columns j >= joint vanish: distal joints move neither the
// point nor this frame.
inline MatrixXd frame_jacobian(const RobotModel& model, const VectorXd& q, int joint) {
    const int n = model.joint_count();
    if (joint < 0 || joint >= n) throw std::invalid_argument("joint index out of range");
    const auto poses = forward_kinematics(model, q);
    const Vector2d x = poses[static_cast<size_t>(joint)].origin;
    MatrixXd J = MatrixXd::Zero(3, n);
    for (int j = 0; j < joint; ++j) {
        J.block<2, 1>(0, j) = perp(x - poses[static_cast<size_t>(j)].origin);
        J(2, j) = 1.0;
    }
    return J;
}

namespace detail {

// COM jacobian rows stacked per link, used by the dynamics terms below.
inline MatrixXd com_jacobian(const std::vector<LinkPose>& poses, const RobotModel& model,
                             int link) {
    const int n = model.joint_count();
    const LinkParams& lp = model.links[static_cast<size_t>(link)];
    const Vector2d c = poses[static_cast<size_t>(link)].origin +
                       poses[static_cast<size_t>(link)].rot * Vector2d(lp.com_offset, 0.0);
    MatrixXd J = MatrixXd::Zero(2, n);
    for (int j = 0; j <= link; ++j)
        J.col(j) = perp(c - poses[static_cast<size_t>(j)].origin);
    return J;
}

}  // namespace detail

// Joint-space mass matrix by composite summation of per-link translational and
// rotational inertia: M = sum_i (m_i Jv_i^T Jv_i + I_i Jw_i^T Jw_i).
inline MatrixXd mass_matrix(const RobotModel& model, const VectorXd& q) {
    const int n = model.joint_count();
    const auto poses = forward_kinematics(model, q);
    MatrixXd M = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const LinkParams& lp = model.links[static_cast<size_t>(i)];
        const MatrixXd Jv = detail::com_jacobian(poses, model, i);
        M.noalias() += lp.mass * Jv.transpose() * Jv;
        // angular jacobian of link i is 1 for joints 0..i
        for (int r = 0; r <= i; ++r)
            for (int c = 0; c <= i; ++c) M(r, c) += lp.inertia_zz;
    }
    M = 0.5 * (M + M.transpose()).eval();
    return M;
}

// Christoffel-symbol factorization C(q, qdot) with dM/dq by central finite
// differences (step 1e-6 rad). This is the factorization that makes
// Mdot - 2C skew-symmetric, which the momentum observer relies on.
inline MatrixXd coriolis_matrix(const RobotModel& model, const VectorXd& q,
                                const VectorXd& qdot) {
    const int n = model.joint_count();
    if (qdot.size() != n) throw std::invalid_argument("qdot dimension does not match model");
    constexpr double h = 1e-6;
    std::vector<MatrixXd> dM(static_cast<size_t>(n));
    VectorXd qp = q;
    for (int k = 0; k < n; ++k) {
        qp[k] = q[k] + h;
        const MatrixXd Mp = mass_matrix(model, qp);
        qp[k] = q[k] - h;
        const MatrixXd Mm = mass_matrix(model, qp);
        qp[k] = q[k];
        dM[static_cast<size_t>(k)] = (Mp - Mm) / (2.0 * h);
    }
    MatrixXd C = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double cij = 0.0;
            for (int k = 0; k < n; ++k)
                cij += 0.5 *
                       (dM[static_cast<size_t>(k)](i, j) + dM[static_cast<size_t>(j)](i, k) -
                        dM[static_cast<size_t>(i)](j, k)) *
                       qdot[k];
            C(i, j) = cij;
        }
    return C;
}

// Generalized gravity torque g(q) = dV/dq with V the total potential energy,
// entering the dynamics as M qddot + C qdot + g = tau.
inline VectorXd gravity_vector(const RobotModel& model, const VectorXd& q) {
    const int n = model.joint_count();
    const auto poses = forward_kinematics(model, q);
    VectorXd g = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const LinkParams& lp = model.links[static_cast<size_t>(i)];
        const MatrixXd Jv = detail::com_jacobian(poses, model, i);
        g.noalias() -= lp.mass * (Jv.transpose() * model.gravity);
    }
    return g;
}

// Boundary walk: maps arc length s (wrapped modulo the perimeter) to the local
// point and outward normal on the link rectangle.
inline BoundaryPoint perimeter_point(const RobotModel& model, int link, double s) {
    const int n = model.joint_count();
    if (link < 0 || link >= n) throw std::invalid_argument("link index out of range");
    const LinkParams& lp = model.links[static_cast<size_t>(link)];
    const double L = lp.length, w = lp.width, P = 2.0 * (L + w);
    double u = std::fmod(s, P);
    if (u < 0.0) u += P;
    BoundaryPoint pt;
    pt.link = link;
    pt.s = u;
    if (u < L) {  // bottom edge, toward the tip
        pt.local = Vector2d(u, -0.5 * w);
        pt.outward_normal = Vector2d(0.0, -1.0);
    } else if (u < L + w) {  // distal end, upward
        pt.local = Vector2d(L, -0.5 * w + (u - L));
        pt.outward_normal = Vector2d(1.0, 0.0);
    } else if (u < 2.0 * L + w) {  // top edge, back toward the joint
        pt.local = Vector2d(L - (u - L - w), 0.5 * w);
        pt.outward_normal = Vector2d(0.0, 1.0);
    } else {  // proximal end, downward
        pt.local = Vector2d(0.0, 0.5 * w - (u - 2.0 * L - w));
        pt.outward_normal = Vector2d(-1.0, 0.0);
    }
    return pt;
}

// Projects a local point of `link` onto the rectangle boundary and returns the
// full boundary parameterization of the closest boundary point.
inline BoundaryPoint closest_boundary_point(const RobotModel& model, int link,
                                            const Vector2d& local) {
    const LinkParams& lp = model.links[static_cast<size_t>(link)];
    const double L = lp.length, w = lp.width;
    const double x = std::clamp(local.x(), 0.0, L);
    const double y = std::clamp(local.y(), -0.5 * w, 0.5 * w);
    // distances to the four edges of the clamped point
    const double d_bottom = y + 0.5 * w;
    const double d_top = 0.5 * w - y;
    const double d_prox = x;
    const double d_dist = L - x;
    const double dmin = std::min({d_bottom, d_top, d_prox, d_dist});
    double s;
    if (dmin == d_bottom) s = x;
    else if (dmin == d_dist) s = L + (y + 0.5 * w);
    else if (dmin == d_top) s = L + w + (L - x);
    else s = 2.0 * L + w + (0.5 * w - y);
    return perimeter_point(model, link, s);
}

struct WorldPoint {
    Vector2d position;
    Vector2d normal;
};

// Rigid transform of a boundary point (and its normal) into the world frame.
inline WorldPoint world_point(const RobotModel& model, const VectorXd& q,
                              const BoundaryPoint& pt) {
    const auto poses = forward_kinematics(model, q);
    const LinkPose& pose = poses.at(static_cast<size_t>(pt.link));
    return WorldPoint{pose.origin + pose.rot * pt.local, pose.rot * pt.outward_normal};
}

}  // namespace contact2d
