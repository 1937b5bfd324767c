// Analytical collision isolation and identification: resolve the residual into
// an equivalent planar wrench at the contacted link's proximal joint, extract
// the line of action of the force, intersect it with the link rectangle, and
// pick the intersection whose surface normal is compressed by the force.

#pragma once

#include <optional>
#include <vector>

#include "estimate.hpp"
#include "model.hpp"
#include "observer.hpp"

namespace contact2d {

struct WrenchResolution {
    Vector2d force = Vector2d::Zero();  // N, world frame
    double moment = 0.0;                // N m about the joint origin, +z
    double residual = 0.0;              // N m, LSQ misfit of the used rows
    IsolationStatus status = IsolationStatus::ok;
};

// Least-squares solve of gamma_j = perp(p_joint - p_j) . F + Mz over the
// joints proximal to the contact (j = 0..joint). The wrench acts on link
// `joint`, which joint `joint` itself also rotates, so every row carries a
// unit moment entry -- including row `joint`, whose lever arm is zero.
// Needs at least 3 usable rows; contacts on the first two links of the
// default arm are structurally underdetermined.
inline WrenchResolution resolve_wrench(const VectorXd& gamma,
                                       const std::vector<LinkPose>& poses, int joint) {
    const int n = static_cast<int>(poses.size());
    if (joint < 0 || joint >= n) throw std::invalid_argument("joint index out of range");
    WrenchResolution out;
    const int rows = joint + 1;
    if (rows < 3) {
        out.status = IsolationStatus::underdetermined;
        return out;
    }
    const Vector2d origin = poses[static_cast<size_t>(joint)].origin;
    const auto row = [&](int j) {
        const Vector2d lever = perp(origin - poses[static_cast<size_t>(j)].origin);
        return Eigen::Vector3d(lever.x(), lever.y(), 1.0);
    };
    Eigen::Matrix3d AtA = Eigen::Matrix3d::Zero();
    Eigen::Vector3d Atb = Eigen::Vector3d::Zero();
    for (int j = 0; j < rows; ++j) {
        const Eigen::Vector3d a = row(j);
        AtA.noalias() += a * a.transpose();
        Atb.noalias() += gamma[j] * a;
    }
    // singular values through the 3x3 normal matrix; the 1e-8 relative rank
    // threshold screens out configurations the squared system could not solve
    // reliably anyway
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
    eig.computeDirect(AtA);
    const double smax = std::sqrt(std::max(0.0, eig.eigenvalues()(2)));
    const double smin = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
    if (!(smax > 0.0) || smin < 1e-8 * smax) {
        out.status = IsolationStatus::rank_deficient;
        return out;
    }
    const Eigen::Vector3d sol =
        eig.eigenvectors() *
        (eig.eigenvalues().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * Atb));
    out.force = sol.head<2>();
    out.moment = sol(2);
    double misfit2 = 0.0;
    for (int j = 0; j < rows; ++j) {
        const double r = row(j).dot(sol) - gamma[j];
        misfit2 += r * r;
    }
    out.residual = std::sqrt(misfit2);
    return out;
}

inline WrenchResolution resolve_wrench(const VectorXd& gamma, const RobotModel& model,
                                       const VectorXd& q, int joint) {
    return resolve_wrench(gamma, forward_kinematics(model, q), joint);
}

struct LineOfAction {
    Vector2d point;      // perpendicular foot from the resolution origin
    Vector2d direction;  // unit vector along the force
};

// The set { r : cross(r - origin, F) = Mz }. Empty when the force is below
// the 1e-6 N floor.
inline std::optional<LineOfAction> line_of_action(const Vector2d& force, double moment,
                                                  const Vector2d& origin) {
    const double f2 = force.squaredNorm();
    if (f2 < 1e-6 * 1e-6) return std::nullopt;
    LineOfAction line;
    line.point = origin - (moment / f2) * perp(force);
    line.direction = force / std::sqrt(f2);
    return line;
}

namespace detail {

// Intersections of an infinite line (point + t*dir, link frame) with the link
// rectangle boundary; at most two distinct points.
inline std::vector<Vector2d> line_rectangle_intersections(const Vector2d& point,
                                                          const Vector2d& dir, double length,
                                                          double width) {
    const double hw = 0.5 * width;
    const Vector2d corners[4] = {{0.0, -hw}, {length, -hw}, {length, hw}, {0.0, hw}};
    std::vector<Vector2d> hits;
    for (int e = 0; e < 4; ++e) {
        const Vector2d a = corners[e];
        const Vector2d b = corners[(e + 1) % 4];
        const Vector2d ab = b - a;
        const double det = cross2(dir, ab);
        if (std::abs(det) < 1e-14) continue;  // parallel to this edge
        // point + t*dir = a + u*ab
        const double u = cross2(dir, point - a) / det;
        if (u < -1e-12 || u > 1.0 + 1e-12) continue;
        const Vector2d hit = a + std::clamp(u, 0.0, 1.0) * ab;
        bool duplicate = false;
        for (const Vector2d& h : hits)
            if ((h - hit).norm() < 1e-9) duplicate = true;
        if (!duplicate) hits.push_back(hit);
    }
    return hits;
}

}  // namespace detail

// Full analytic pipeline from a residual snapshot to a contact estimate. The
// estimated force is fixed by the wrench resolution; isolation only selects
// the boundary point. Failure modes are reported through status, never by
// guessing.
inline ContactEstimate isolate(const VectorXd& gamma, const RobotModel& model, const VectorXd& q,
                               double epsilon) {
    ContactEstimate est;
    est.method = Method::analytic;

    const Detection det = detect(gamma, epsilon);
    if (!det.contact) {
        est.status = IsolationStatus::no_contact;
        return est;
    }
    const int link = det.last_excited_joint;
    est.link = link;

    const auto poses = forward_kinematics(model, q);
    const WrenchResolution wr = resolve_wrench(gamma, poses, link);
    est.residual = wr.residual;
    if (wr.status != IsolationStatus::ok) {
        est.status = wr.status;
        return est;
    }
    est.force = wr.force;

    const LinkPose& pose = poses[static_cast<size_t>(link)];
    const auto line = line_of_action(wr.force, wr.moment, pose.origin);
    if (!line) {
        est.status = IsolationStatus::zero_force;
        return est;
    }

    // intersect in the link frame
    const Vector2d p_local = pose.rot.transpose() * (line->point - pose.origin);
    const Vector2d d_local = pose.rot.transpose() * line->direction;
    const LinkParams& lp = model.links[static_cast<size_t>(link)];
    const auto hits = detail::line_rectangle_intersections(p_local, d_local, lp.length, lp.width);
    if (hits.empty()) {
        est.status = IsolationStatus::no_intersection;
        return est;
    }

    // the contact force must press into the surface: F . n_out < 0
    constexpr double tol = 1e-9;
    std::optional<BoundaryPoint> chosen;
    int passing = 0;
    for (const Vector2d& hit : hits) {
        const BoundaryPoint bp = closest_boundary_point(model, link, hit);
        const Vector2d n_world = pose.rot * bp.outward_normal;
        if (wr.force.dot(n_world) < -tol) {
            ++passing;
            chosen = bp;
        }
    }
    if (passing != 1) {
        est.status = IsolationStatus::ambiguous;
        return est;
    }
    est.point = *chosen;
    est.point_world = pose.origin + pose.rot * chosen->local;
    est.valid = true;
    return est;
}

}  // namespace contact2d
