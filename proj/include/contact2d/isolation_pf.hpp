// Single-contact particle filter: boundary arc-length particles weighted by a
// half-plane-constrained least-squares fit of the residual, moved by Gaussian
// noise along the boundary and resampled in proportion to weight. Also
// extracts a contact-force estimate from the converged cloud.

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "estimate.hpp"
#include "model.hpp"
#include "observer.hpp"
#include "rng.hpp"

namespace contact2d {

// Admissible contact forces at a surface point: F . normal <= 0, i.e. forces
// that press against the surface from outside.
struct HalfPlane {
    Vector2d normal = Vector2d(0.0, 1.0);  // unit, world frame
};

struct QpSolution {
    Vector2d force = Vector2d::Zero();
    double residual = 0.0;  // ||gamma - J^T F||^2, (N m)^2
    bool constraint_active = false;
};

// Exact minimizer of ||gamma - J^T F||^2 subject to F in the half plane. The
// unconstrained normal equations are solved first (Tikhonov-damped when near
// singular); if the minimizer violates the half plane, the optimum lies on its
// boundary and reduces to a 1-D least squares along the surface tangent.
inline QpSolution qp_solve(const VectorXd& gamma, const MatrixXd& J, const HalfPlane& hp) {
    constexpr double damping = 1e-10;
    QpSolution out;
    Matrix2d A = J * J.transpose();
    const Vector2d b = J * gamma;
    // closed-form eigenvalue bound for the 2x2 PSD matrix
    const double tr = A.trace();
    const double det = A.determinant();
    const double lam_min = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    if (lam_min < damping) A += damping * Matrix2d::Identity();
    Vector2d f = A.inverse() * b;
    if (f.dot(hp.normal) > 0.0) {
        out.constraint_active = true;
        const Vector2d tangent = perp(hp.normal);
        const VectorXd c = J.transpose() * tangent;
        const double cc = c.squaredNorm();
        const double t = cc < damping ? 0.0 : c.dot(gamma) / cc;
        f = t * tangent;
    }
    out.force = f;
    out.residual = (gamma - J.transpose() * f).squaredNorm();
    return out;
}

// Unnormalized weight exp(-QP/(2 T^2)); the caller normalizes over the set.
inline double measurement_weight(double qp_residual, double temperature) {
    return std::exp(-qp_residual / (2.0 * temperature * temperature));
}

struct Particle {
    BoundaryPoint location;
    double weight = 0.0;
    Vector2d solved_force = Vector2d::Zero();
    double qp_residual = 0.0;
};

struct ParticleSet {
    std::vector<Particle> particles;
    bool active = false;
    int below_threshold_ticks = 0;  // consecutive sub-threshold ticks (dropout hysteresis)
    uint64_t rng_seed = 0;
};

struct PfParams {
    int particle_count = 50;
    double motion_sigma = 0.01;      // m of boundary arc length per step
    double temperature = 0.05;       // N m, scale of the measurement exponent
    bool seed_all_distal_links = false;
    int dropout_ticks = 5;
};

// Uniform samples over the boundary of the suspected link, or over all links
// at and beyond it when seed_all_distal_links is set.
inline ParticleSet initialize_particles(const RobotModel& model, int suspected_link,
                                        const PfParams& params, Rng& rng) {
    ParticleSet set;
    set.active = true;
    const int n = model.joint_count();
    const int first = suspected_link;
    const int last = params.seed_all_distal_links ? n - 1 : suspected_link;
    double total = 0.0;
    for (int l = first; l <= last; ++l) total += model.perimeter(l);
    set.particles.reserve(static_cast<size_t>(params.particle_count));
    for (int i = 0; i < params.particle_count; ++i) {
        double u = rng.uniform01() * total;
        int link = first;
        while (link < last && u >= model.perimeter(link)) u -= model.perimeter(link), ++link;
        Particle p;
        p.location = perimeter_point(model, link, u);
        p.weight = 1.0 / params.particle_count;
        set.particles.push_back(p);
    }
    return set;
}

// Solves the per-particle QP and fills solved_force, qp_residual and the
// normalized weight. Returns false when every raw weight underflowed to zero
// and the set was reset to uniform weights instead.
inline bool weigh_particles(ParticleSet& set, const VectorXd& gamma, const RobotModel& model,
                            const VectorXd& q, double temperature) {
    const auto poses = forward_kinematics(model, q);
    double wsum = 0.0;
    for (Particle& p : set.particles) {
        const MatrixXd J = point_jacobian(poses, p.location.link, p.location.local);
        const LinkPose& pose = poses[static_cast<size_t>(p.location.link)];
        const HalfPlane hp{pose.rot * p.location.outward_normal};
        const QpSolution qp = qp_solve(gamma, J, hp);
        p.solved_force = qp.force;
        p.qp_residual = qp.residual;
        p.weight = measurement_weight(qp.residual, temperature);
        wsum += p.weight;
    }
    if (wsum <= 0.0) {
        for (Particle& p : set.particles)
            p.weight = 1.0 / static_cast<double>(set.particles.size());
        return false;
    }
    for (Particle& p : set.particles) p.weight /= wsum;
    return true;
}

// Each particle slides along its link boundary by an independent N(0, sigma^2)
// arc-length displacement; wrap-around keeps it on the boundary.
inline ParticleSet motion_update(const ParticleSet& set, const RobotModel& model, double sigma,
                                 Rng& rng) {
    ParticleSet out = set;
    for (Particle& p : out.particles) {
        const double alpha = sigma * rng.gaussian();
        p.location = perimeter_point(model, p.location.link, p.location.s + alpha);
    }
    return out;
}

// Multinomial resampling: draw particle_count times with replacement with
// probability proportional to weight, then reset to uniform weights.
inline ParticleSet resample(const ParticleSet& set, Rng& rng) {
    const size_t n = set.particles.size();
    std::vector<double> cumulative(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += set.particles[i].weight;
        cumulative[i] = acc;
    }
    cumulative[n - 1] = 1.0;  // guard against round-off at the top end
    ParticleSet out = set;
    for (size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const size_t k = static_cast<size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        out.particles[i] = set.particles[std::min(k, n - 1)];
        out.particles[i].weight = 1.0 / static_cast<double>(n);
    }
    return out;
}

inline double circular_diff(double s, double s0, double perimeter) {
    return std::remainder(s - s0, perimeter);
}

// Cloud consensus: highest-weight particle picks the mode (lowest s on ties),
// particles within 2 cm of arc length on the same link are averaged by weight,
// the mean is snapped back to the boundary and the force re-solved there.
inline ContactEstimate extract_estimate(const ParticleSet& set, const VectorXd& gamma,
                                        const RobotModel& model, const VectorXd& q) {
    ContactEstimate est;
    est.method = Method::particle_filter;
    if (!set.active || set.particles.empty()) {
        est.status = IsolationStatus::no_contact;
        return est;
    }
    const Particle* mode = &set.particles.front();
    for (const Particle& p : set.particles) {
        if (p.weight > mode->weight ||
            (p.weight == mode->weight && (p.location.link < mode->location.link ||
                                          (p.location.link == mode->location.link &&
                                           p.location.s < mode->location.s))))
            mode = &p;
    }
    const int link = mode->location.link;
    const double P = model.perimeter(link);
    constexpr double neighborhood = 0.02;  // m of arc length
    double wsum = 0.0, dsum = 0.0;
    for (const Particle& p : set.particles) {
        if (p.location.link != link) continue;
        const double d = circular_diff(p.location.s, mode->location.s, P);
        if (std::abs(d) > neighborhood) continue;
        wsum += p.weight;
        dsum += p.weight * d;
    }
    const double s_mean = mode->location.s + (wsum > 0.0 ? dsum / wsum : 0.0);
    const BoundaryPoint pt = perimeter_point(model, link, s_mean);

    const auto poses = forward_kinematics(model, q);
    const LinkPose& pose = poses[static_cast<size_t>(link)];
    const MatrixXd J = point_jacobian(poses, pt.link, pt.local);
    const HalfPlane hp{pose.rot * pt.outward_normal};
    const QpSolution qp = qp_solve(gamma, J, hp);

    est.link = link;
    est.point = pt;
    est.point_world = pose.origin + pose.rot * pt.local;
    est.force = qp.force;
    est.residual = qp.residual;
    est.valid = true;
    return est;
}

struct PfStepResult {
    ParticleSet set;
    std::optional<ContactEstimate> estimate;
    bool degenerate_weights = false;  // underflowed weight set reset to uniform
};

// One estimator tick of the single-contact particle filter. Sub-threshold
// residuals deactivate the filter only after params.dropout_ticks consecutive
// ticks; in between the cloud is held as-is and no estimate is produced.
inline PfStepResult pf_step(const ParticleSet& set, const VectorXd& gamma,
                            const RobotModel& model, const VectorXd& q, double epsilon,
                            const PfParams& params, Rng& rng) {
    PfStepResult result;
    const Detection det = detect(gamma, epsilon);
    if (!det.contact) {
        if (!set.active || set.below_threshold_ticks + 1 >= params.dropout_ticks) {
            result.set.active = false;
            result.set.rng_seed = set.rng_seed;
            return result;
        }
        result.set = set;
        ++result.set.below_threshold_ticks;
        return result;
    }

    // a residual at joint j is impossible for a contact proximal to link j; if
    // every particle sits on a link the evidence rules out, start over on the
    // newly suspected link
    bool cloud_consistent = false;
    for (const Particle& p : set.particles)
        if (p.location.link >= det.last_excited_joint) cloud_consistent = true;

    ParticleSet moved = set.active && cloud_consistent
                            ? motion_update(set, model, params.motion_sigma, rng)
                            : initialize_particles(model, det.last_excited_joint, params, rng);
    moved.rng_seed = set.rng_seed;
    moved.below_threshold_ticks = 0;

    result.degenerate_weights = !weigh_particles(moved, gamma, model, q, params.temperature);

    result.estimate = extract_estimate(moved, gamma, model, q);
    result.set = resample(moved, rng);
    return result;
}

}  // namespace contact2d
