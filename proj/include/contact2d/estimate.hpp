#pragma once

#include "model.hpp"

namespace contact2d {

enum class Method { analytic, particle_filter };

enum class IsolationStatus {
    ok,
    no_contact,       // residual below the detection threshold
    underdetermined,  // fewer than 3 joints between contact and base
    rank_deficient,   // wrench system singular at this configuration
    zero_force,       // resolved force below the floor, no line of action
    no_intersection,  // line of action misses the link
    ambiguous         // push-away constraint does not single out a candidate
};

inline const char* to_string(IsolationStatus s) {
    switch (s) {
        case IsolationStatus::ok: return "ok";
        case IsolationStatus::no_contact: return "no_contact";
        case IsolationStatus::underdetermined: return "underdetermined";
        case IsolationStatus::rank_deficient: return "rank_deficient";
        case IsolationStatus::zero_force: return "zero_force";
        case IsolationStatus::no_intersection: return "no_intersection";
        case IsolationStatus::ambiguous: return "ambiguous";
    }
    return "unknown";
}

struct ContactEstimate {
    int link = -1;
    BoundaryPoint point;
    Vector2d point_world = Vector2d::Zero();
    Vector2d force = Vector2d::Zero();  // N, world frame
    bool valid = false;
    Method method = Method::analytic;
    IsolationStatus status = IsolationStatus::ok;
    // model-consistency score: LSQ residual norm (N m) for the analytic
    // method, QP objective value ((N m)^2) for the particle filter
    double residual = 0.0;
};

}  // namespace contact2d
