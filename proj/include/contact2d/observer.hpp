// Generalized-momentum disturbance observer. The residual gamma converges to
// the external contact torque tau_c with first-order dynamics
// gammadot = K (tau_c - gamma), using only q, qdot and the commanded torque --
// no acceleration measurement.

#pragma once

#include <optional>

#include "model.hpp"

namespace contact2d {

struct ObserverState {
    VectorXd integral;   // running value of the integral term, N m s
    VectorXd gamma;      // residual, N m
    VectorXd gains;      // diagonal of K, 1/s
    VectorXd beta_prev;  // g - C^T qdot at the previous sample

    // Starts the observer at gamma = 0 by absorbing the initial momentum into
    // the integral term.
    static ObserverState initialize(const RobotModel& model, const VectorXd& q0,
                                    const VectorXd& qdot0, const VectorXd& gains) {
        const int n = model.joint_count();
        if (gains.size() != n) throw std::invalid_argument("observer gains dimension mismatch");
        for (int i = 0; i < n; ++i)
            if (!(gains[i] > 0.0)) throw std::invalid_argument("observer gains must be > 0");
        ObserverState s;
        s.integral = -(mass_matrix(model, q0) * qdot0);
        s.gamma = VectorXd::Zero(n);
        s.gains = gains;
        s.beta_prev = gravity_vector(model, q0) -
                      coriolis_matrix(model, q0, qdot0).transpose() * qdot0;
        return s;
    }

    static ObserverState initialize(const RobotModel& model, const VectorXd& q0,
                                    const VectorXd& qdot0, double gain) {
        return initialize(model, q0, qdot0,
                          VectorXd::Constant(model.joint_count(), gain));
    }
};

// Explicit-Euler update of gamma = K [M qdot + integral(g - C^T qdot - tau_m
// - gamma) dt]. Call it with the sample that CLOSES an integration interval:
// (q, qdot) measured now and tau_m the torque applied since the previous
// sample. The integrand uses the previous sample's g - C^T qdot so it pairs
// with the same interval as the momentum difference; with that pairing the
// discrete residual is exact (not just O(dt)) whenever M is constant, and
// torque steps between samples leave no spurious residual.
inline ObserverState observer_update(const ObserverState& state, const RobotModel& model,
                                     const VectorXd& q, const VectorXd& qdot,
                                     const VectorXd& tau_m, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    ObserverState next = state;
    next.integral += (state.beta_prev - tau_m - state.gamma) * dt;
    next.gamma = state.gains.asDiagonal() * (mass_matrix(model, q) * qdot + next.integral);
    next.beta_prev =
        gravity_vector(model, q) - coriolis_matrix(model, q, qdot).transpose() * qdot;
    return next;
}

struct Detection {
    bool contact = false;
    int last_excited_joint = -1;  // highest joint index with |gamma| >= epsilon
};

// Thresholds the residual: contact iff the infinity norm reaches epsilon. The
// contact lies on the link of the last excited joint or beyond.
inline Detection detect(const VectorXd& gamma, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    Detection d;
    for (int j = 0; j < gamma.size(); ++j) {
        if (std::abs(gamma[j]) >= epsilon) {
            d.contact = true;
            d.last_excited_joint = j;
        }
    }
    return d;
}

}  // namespace contact2d
