// End-to-end scenario runner: wires the simulator, controller, observer and
// both isolators at their respective rates, writes plot-ready CSV traces and
// computes the summary error metrics from the written trace (so recomputation
// from the file reproduces the summary exactly).

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "control.hpp"
#include "estimate.hpp"
#include "isolation_analytic.hpp"
#include "isolation_pf.hpp"
#include "observer.hpp"
#include "rng.hpp"
#include "signalproc.hpp"
#include "sim.hpp"

namespace contact2d {

namespace detail {

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

struct MethodStats {
    bool any_estimate = false;
    double detection_latency = -1.0;  // s from impact to first valid estimate
    long steady_samples = 0;
    long invalid_steady_samples = 0;  // in-contact steady rows without a held estimate
    double mean_force_error = 0.0, max_force_error = 0.0;  // filtered channels, N
    double mean_point_error = 0.0, max_point_error = 0.0;  // filtered channels, m
    double raw_mean_force_error = 0.0, raw_max_force_error = 0.0;
    double raw_mean_point_error = 0.0, raw_max_point_error = 0.0;
    double peak_transient_force_error = 0.0;  // filtered, over the impact window
};

struct RunSummary {
    bool contact_occurred = false;
    double impact_time = -1.0;
    double transient_window = 0.5;
    long multi_link_warnings = 0;
    MethodStats analytic, pf;
    long an_underdetermined = 0, an_rank_deficient = 0, an_zero_force = 0;
    long an_no_intersection = 0, an_ambiguous = 0;
    long pf_degeneracy_events = 0;

    std::string format() const {
        std::ostringstream out;
        using detail::fmt9;
        out << "scenario\n";
        out << "  contact: " << (contact_occurred ? "yes" : "no") << "\n";
        out << "  impact_time_s: " << fmt9(impact_time) << "\n";
        out << "  transient_window_s: " << fmt9(transient_window) << "\n";
        out << "  multi_link_warnings: " << multi_link_warnings << "\n";
        const auto method = [&](const char* name, const MethodStats& s) {
            out << name << "\n";
            out << "  any_estimate: " << (s.any_estimate ? "yes" : "no") << "\n";
            out << "  detection_latency_s: " << fmt9(s.detection_latency) << "\n";
            out << "  steady_samples: " << s.steady_samples << "\n";
            out << "  invalid_steady_samples: " << s.invalid_steady_samples << "\n";
            out << "  mean_force_error_n: " << fmt9(s.mean_force_error) << "\n";
            out << "  max_force_error_n: " << fmt9(s.max_force_error) << "\n";
            out << "  mean_point_error_m: " << fmt9(s.mean_point_error) << "\n";
            out << "  max_point_error_m: " << fmt9(s.max_point_error) << "\n";
            out << "  raw_mean_force_error_n: " << fmt9(s.raw_mean_force_error) << "\n";
            out << "  raw_max_force_error_n: " << fmt9(s.raw_max_force_error) << "\n";
            out << "  raw_mean_point_error_m: " << fmt9(s.raw_mean_point_error) << "\n";
            out << "  raw_max_point_error_m: " << fmt9(s.raw_max_point_error) << "\n";
            out << "  peak_transient_force_error_n: " << fmt9(s.peak_transient_force_error)
                << "\n";
        };
        method("analytic", analytic);
        method("pf", pf);
        out << "events\n";
        out << "  an_underdetermined: " << an_underdetermined << "\n";
        out << "  an_rank_deficient: " << an_rank_deficient << "\n";
        out << "  an_zero_force: " << an_zero_force << "\n";
        out << "  an_no_intersection: " << an_no_intersection << "\n";
        out << "  an_ambiguous: " << an_ambiguous << "\n";
        out << "  pf_degeneracy_events: " << pf_degeneracy_events << "\n";
        return out.str();
    }
};

struct BenchReport {
    long active_ticks = 0;
    // median per-tick cost over ticks with an excited residual; the median
    // keeps scheduler outliers from skewing a one-core measurement
    double analytic_tick_us = 0.0;
    double pf_tick_us = 0.0;

    std::string format() const {
        std::ostringstream out;
        out << "benchmark\n";
        out << "  active_ticks: " << active_ticks << "\n";
        out << "  analytic_tick_us_median: " << detail::fmt9(analytic_tick_us) << "\n";
        out << "  pf_tick_us_median: " << detail::fmt9(pf_tick_us) << "\n";
        out << "  pf_over_analytic: "
            << detail::fmt9(analytic_tick_us > 0.0 ? pf_tick_us / analytic_tick_us : 0.0) << "\n";
        return out.str();
    }
};

struct RunResult {
    RunSummary summary;
    BenchReport bench;
    std::filesystem::path trace_path, pf_path, summary_path;
};

// ---------------------------------------------------------------------------
// trace parsing and metrics

struct TraceTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int index(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        throw std::runtime_error("trace is missing column '" + name + "'");
    }

    static TraceTable load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open trace " + path.string());
        TraceTable t;
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("empty trace " + path.string());
        std::istringstream header(line);
        std::string name;
        while (std::getline(header, name, ',')) t.columns.push_back(name);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            row.reserve(t.columns.size());
            std::istringstream cells(line);
            std::string cell;
            while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
            if (row.size() != t.columns.size())
                throw std::runtime_error("ragged row in trace " + path.string());
            t.rows.push_back(std::move(row));
        }
        return t;
    }
};

// Error statistics over the post-transient contact window, recomputed from the
// written trace so the summary depends only on the file contents.
inline RunSummary metrics(const std::filesystem::path& trace_csv,
                          double transient_window = 0.5) {
    const TraceTable t = TraceTable::load(trace_csv);
    RunSummary s;
    s.transient_window = transient_window;

    const int c_t = t.index("t");
    const int c_contact = t.index("contact");
    const int c_multi = t.index("multi_links");
    const int c_tick = t.index("est_tick");
    const int c_an_status = t.index("an_status");
    const int c_pf_degen = t.index("pf_degen");
    const int c_true_px = t.index("ftrue_px"), c_true_py = t.index("ftrue_py");
    const int c_true_fx = t.index("ftrue_fx"), c_true_fy = t.index("ftrue_fy");
    const int r_true_px = t.index("true_px"), r_true_py = t.index("true_py");
    const int r_true_fx = t.index("true_fx"), r_true_fy = t.index("true_fy");

    for (const auto& row : t.rows) {
        if (row[c_contact] > 0.5 && s.impact_time < 0.0) {
            s.contact_occurred = true;
            s.impact_time = row[c_t];
        }
        if (row[c_multi] > 1.5) ++s.multi_link_warnings;
        if (row[c_tick] > 0.5) {
            const auto status = static_cast<IsolationStatus>(static_cast<int>(row[c_an_status]));
            switch (status) {
                case IsolationStatus::underdetermined: ++s.an_underdetermined; break;
                case IsolationStatus::rank_deficient: ++s.an_rank_deficient; break;
                case IsolationStatus::zero_force: ++s.an_zero_force; break;
                case IsolationStatus::no_intersection: ++s.an_no_intersection; break;
                case IsolationStatus::ambiguous: ++s.an_ambiguous; break;
                default: break;
            }
            if (row[c_pf_degen] > 0.5) ++s.pf_degeneracy_events;
        }
    }

    const auto method_stats = [&](const std::string& prefix) {
        MethodStats m;
        const int c_valid = t.index(prefix + "_valid");
        const int c_px = t.index("f" + prefix + "_px"), c_py = t.index("f" + prefix + "_py");
        const int c_fx = t.index("f" + prefix + "_fx"), c_fy = t.index("f" + prefix + "_fy");
        const int raw_px = t.index(prefix + "_px"), raw_py = t.index(prefix + "_py");
        const int raw_fx = t.index(prefix + "_fx"), raw_fy = t.index(prefix + "_fy");
        double sum_fe = 0.0, sum_pe = 0.0, raw_sum_fe = 0.0, raw_sum_pe = 0.0;
        for (const auto& row : t.rows) {
            const bool valid = row[c_valid] > 0.5;
            if (valid && !m.any_estimate && s.contact_occurred && row[c_t] >= s.impact_time) {
                m.any_estimate = true;
                m.detection_latency = row[c_t] - s.impact_time;
            }
            if (!s.contact_occurred || row[c_contact] < 0.5) continue;
            const double since_impact = row[c_t] - s.impact_time;
            const double fe = std::hypot(row[c_fx] - row[c_true_fx], row[c_fy] - row[c_true_fy]);
            if (since_impact <= transient_window) {
                if (valid) m.peak_transient_force_error =
                               std::max(m.peak_transient_force_error, fe);
                continue;
            }
            if (!valid) {
                ++m.invalid_steady_samples;
                continue;
            }
            const double pe = std::hypot(row[c_px] - row[c_true_px], row[c_py] - row[c_true_py]);
            const double raw_fe =
                std::hypot(row[raw_fx] - row[r_true_fx], row[raw_fy] - row[r_true_fy]);
            const double raw_pe =
                std::hypot(row[raw_px] - row[r_true_px], row[raw_py] - row[r_true_py]);
            ++m.steady_samples;
            sum_fe += fe;
            sum_pe += pe;
            raw_sum_fe += raw_fe;
            raw_sum_pe += raw_pe;
            m.max_force_error = std::max(m.max_force_error, fe);
            m.max_point_error = std::max(m.max_point_error, pe);
            m.raw_max_force_error = std::max(m.raw_max_force_error, raw_fe);
            m.raw_max_point_error = std::max(m.raw_max_point_error, raw_pe);
        }
        if (m.steady_samples > 0) {
            m.mean_force_error = sum_fe / m.steady_samples;
            m.mean_point_error = sum_pe / m.steady_samples;
            m.raw_mean_force_error = raw_sum_fe / m.steady_samples;
            m.raw_mean_point_error = raw_sum_pe / m.steady_samples;
        }
        return m;
    };
    s.analytic = method_stats("an");
    s.pf = method_stats("pf");
    return s;
}

// ---------------------------------------------------------------------------
// scenario runner

namespace detail {

struct EstimateChannels {
    std::optional<ContactEstimate> held;
    BiquadPair point_filter, force_filter;
    Vector2d filtered_point = Vector2d::Zero();
    Vector2d filtered_force = Vector2d::Zero();

    void step_filters() {
        const Vector2d p = held ? held->point_world : Vector2d::Zero();
        const Vector2d f = held ? held->force : Vector2d::Zero();
        filtered_point = point_filter.step(p);
        filtered_force = force_filter.step(f);
    }
};

}  // namespace detail

inline RunResult run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    const RobotModel& model = cfg.model;
    const int n = model.joint_count();
    const double dt = 1.0 / cfg.sim_rate_hz;
    const int steps = static_cast<int>(std::lround(cfg.duration * cfg.sim_rate_hz));
    const int tick_every = cfg.sim_rate_hz / cfg.estimator_rate_hz;
    const bool run_analytic = cfg.method != RunMethod::pf;
    const bool run_pf = cfg.method != RunMethod::analytic;

    SimState state = SimState::initial(cfg.initial_q);
    ObserverState obs = ObserverState::initialize(model, cfg.initial_q,
                                                  VectorXd::Zero(n), cfg.observer_gain);
    Rng pf_rng(cfg.seed);
    Rng noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    ParticleSet pf_set;
    pf_set.rng_seed = cfg.seed;

    const Biquad proto = design_butterworth2(15.0, cfg.sim_rate_hz);
    detail::EstimateChannels an_ch{std::nullopt, {proto, proto}, {proto, proto}};
    detail::EstimateChannels pf_ch{std::nullopt, {proto, proto}, {proto, proto}};
    BiquadPair true_point_filter{proto, proto}, true_force_filter{proto, proto};

    const std::filesystem::path trace_path = out_dir / "trace.csv";
    const std::filesystem::path pf_path = out_dir / "pf_ticks.csv";
    const std::filesystem::path summary_path = out_dir / "summary.txt";
    std::ofstream trace(trace_path);
    std::ofstream pf_ticks(pf_path);
    if (!trace || !pf_ticks)
        throw std::runtime_error("cannot write outputs under " + out_dir.string());

    // header
    {
        std::ostringstream h;
        h << "t";
        for (int i = 0; i < n; ++i) h << ",q" << i;
        for (int i = 0; i < n; ++i) h << ",qdot" << i;
        for (int i = 0; i < n; ++i) h << ",tau_m" << i;
        for (int i = 0; i < n; ++i) h << ",gamma" << i;
        h << ",contact,true_link,true_s,true_px,true_py,true_fx,true_fy";
        for (int i = 0; i < n; ++i) h << ",tau_c" << i;
        h << ",multi_links,est_tick,det,det_joint";
        h << ",an_valid,an_status,an_link,an_px,an_py,an_fx,an_fy,an_residual";
        h << ",pf_valid,pf_active,pf_link,pf_px,pf_py,pf_fx,pf_fy,pf_residual,pf_degen";
        h << ",ftrue_px,ftrue_py,ftrue_fx,ftrue_fy";
        h << ",fan_px,fan_py,fan_fx,fan_fy";
        h << ",fpf_px,fpf_py,fpf_fx,fpf_fy";
        trace << h.str() << "\n";
    }
    pf_ticks << "t,active,below_ticks,degenerate,particles,mode_link,mode_s,wmean_s,"
                "var_axial_m2,est_valid,est_px,est_py,est_fx,est_fy,est_residual\n";

    BenchReport bench;
    std::vector<double> an_tick_ns, pf_tick_ns;

    IsolationStatus last_an_status = IsolationStatus::no_contact;
    bool last_pf_degen = false;

    VectorXd qdot_meas = state.joints.qdot;  // shared measurement series

    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const VectorXd& q = state.joints.q;
        const VectorXd& qdot = state.joints.qdot;
        const VectorXd gamma = obs.gamma;  // snapshot the estimators see at t

        const TaskGoal goal =
            scenario_trajectory(cfg.scenario, t, cfg.trajectory, cfg.kp, cfg.kv);
        const VectorXd tau_cmd = opspace_torques(model, q, qdot_meas, goal);

        const Detection det = detect(gamma, cfg.detection_threshold);

        const bool est_tick = k % tick_every == 0;
        if (est_tick) {
            last_an_status = IsolationStatus::no_contact;
            last_pf_degen = false;
            if (run_analytic) {
                const auto t0 = std::chrono::steady_clock::now();
                const ContactEstimate est = isolate(gamma, model, q,
                                                    cfg.detection_threshold);
                const auto t1 = std::chrono::steady_clock::now();
                last_an_status = est.status;
                if (est.valid) an_ch.held = est;
                else if (est.status == IsolationStatus::no_contact) an_ch.held.reset();
                if (det.contact)
                    an_tick_ns.push_back(
                        std::chrono::duration<double, std::nano>(t1 - t0).count());
            }
            if (run_pf) {
                const auto t0 = std::chrono::steady_clock::now();
                PfStepResult out = pf_step(pf_set, gamma, model, q,
                                           cfg.detection_threshold, cfg.pf, pf_rng);
                const auto t1 = std::chrono::steady_clock::now();
                pf_set = std::move(out.set);
                last_pf_degen = out.degenerate_weights;
                if (out.estimate && out.estimate->valid) pf_ch.held = *out.estimate;
                if (!pf_set.active) pf_ch.held.reset();
                if (det.contact)
                    pf_tick_ns.push_back(
                        std::chrono::duration<double, std::nano>(t1 - t0).count());
            }
            if (det.contact) ++bench.active_ticks;

            // particle cloud summary for this tick
            {
                double mode_s = 0.0, wmean_s = 0.0, var_axial = 0.0;
                int mode_link = -1;
                long count = static_cast<long>(pf_set.particles.size());
                if (pf_set.active && count > 0) {
                    const Particle* mode = &pf_set.particles.front();
                    double wsum = 0.0, mean_x = 0.0;
                    for (const Particle& p : pf_set.particles) {
                        if (p.weight > mode->weight) mode = &p;
                        wsum += p.weight;
                        mean_x += p.weight * p.location.local.x();
                    }
                    mean_x /= wsum;
                    double acc = 0.0, wmean_diff = 0.0;
                    const double P = model.perimeter(mode->location.link);
                    for (const Particle& p : pf_set.particles) {
                        acc += p.weight * (p.location.local.x() - mean_x) *
                               (p.location.local.x() - mean_x);
                        if (p.location.link == mode->location.link)
                            wmean_diff +=
                                p.weight * circular_diff(p.location.s, mode->location.s, P);
                    }
                    var_axial = acc / wsum;
                    mode_link = mode->location.link;
                    mode_s = mode->location.s;
                    wmean_s = mode->location.s + wmean_diff / wsum;
                }
                using detail::fmt9;
                pf_ticks << fmt9(t) << ',' << (pf_set.active ? 1 : 0) << ','
                         << pf_set.below_threshold_ticks << ',' << (last_pf_degen ? 1 : 0) << ','
                         << count << ',' << mode_link << ',' << fmt9(mode_s) << ','
                         << fmt9(wmean_s) << ',' << fmt9(var_axial) << ','
                         << (pf_ch.held ? 1 : 0) << ','
                         << fmt9(pf_ch.held ? pf_ch.held->point_world.x() : 0.0) << ','
                         << fmt9(pf_ch.held ? pf_ch.held->point_world.y() : 0.0) << ','
                         << fmt9(pf_ch.held ? pf_ch.held->force.x() : 0.0) << ','
                         << fmt9(pf_ch.held ? pf_ch.held->force.y() : 0.0) << ','
                         << fmt9(pf_ch.held ? pf_ch.held->residual : 0.0) << "\n";
            }
        }

        VectorXd tau_applied = tau_cmd;
        if (cfg.noise_tau_std > 0.0)
            for (int i = 0; i < n; ++i)
                tau_applied[i] += noise_rng.gaussian(0.0, cfg.noise_tau_std);

        const SimState next = step(model, state, tau_applied, cfg.obstacle, dt);
        const std::optional<ContactInfo>& contact = next.true_contact;

        // the observer closes the interval [t, t+dt): new sample, old torque
        qdot_meas = next.joints.qdot;
        if (cfg.noise_qdot_std > 0.0)
            for (int i = 0; i < n; ++i)
                qdot_meas[i] += noise_rng.gaussian(0.0, cfg.noise_qdot_std);
        obs = observer_update(obs, model, next.joints.q, qdot_meas, tau_cmd, dt);

        // filtered channels advance every sim step on the held estimates
        an_ch.step_filters();
        pf_ch.step_filters();
        const Vector2d tp = contact ? contact->point_world : Vector2d::Zero();
        const Vector2d tf = contact ? contact->force : Vector2d::Zero();
        const Vector2d ftp = true_point_filter.step(tp);
        const Vector2d ftf = true_force_filter.step(tf);

        using detail::fmt9;
        std::ostringstream row;
        row << fmt9(t);
        for (int i = 0; i < n; ++i) row << ',' << fmt9(q[i]);
        for (int i = 0; i < n; ++i) row << ',' << fmt9(qdot[i]);
        for (int i = 0; i < n; ++i) row << ',' << fmt9(tau_cmd[i]);
        for (int i = 0; i < n; ++i) row << ',' << fmt9(gamma[i]);
        row << ',' << (contact ? 1 : 0);
        row << ',' << (contact ? contact->point.link : -1);
        row << ',' << fmt9(contact ? contact->point.s : 0.0);
        row << ',' << fmt9(tp.x()) << ',' << fmt9(tp.y());
        row << ',' << fmt9(tf.x()) << ',' << fmt9(tf.y());
        for (int i = 0; i < n; ++i) row << ',' << fmt9(contact ? contact->tau[i] : 0.0);
        row << ',' << (contact ? contact->penetrating_links : 0);
        row << ',' << (est_tick ? 1 : 0);
        row << ',' << (det.contact ? 1 : 0) << ',' << det.last_excited_joint;
        row << ',' << (an_ch.held ? 1 : 0) << ',' << static_cast<int>(last_an_status);
        row << ',' << (an_ch.held ? an_ch.held->link : -1);
        row << ',' << fmt9(an_ch.held ? an_ch.held->point_world.x() : 0.0);
        row << ',' << fmt9(an_ch.held ? an_ch.held->point_world.y() : 0.0);
        row << ',' << fmt9(an_ch.held ? an_ch.held->force.x() : 0.0);
        row << ',' << fmt9(an_ch.held ? an_ch.held->force.y() : 0.0);
        row << ',' << fmt9(an_ch.held ? an_ch.held->residual : 0.0);
        row << ',' << (pf_ch.held ? 1 : 0) << ',' << (pf_set.active ? 1 : 0);
        row << ',' << (pf_ch.held ? pf_ch.held->link : -1);
        row << ',' << fmt9(pf_ch.held ? pf_ch.held->point_world.x() : 0.0);
        row << ',' << fmt9(pf_ch.held ? pf_ch.held->point_world.y() : 0.0);
        row << ',' << fmt9(pf_ch.held ? pf_ch.held->force.x() : 0.0);
        row << ',' << fmt9(pf_ch.held ? pf_ch.held->force.y() : 0.0);
        row << ',' << fmt9(pf_ch.held ? pf_ch.held->residual : 0.0);
        row << ',' << (last_pf_degen ? 1 : 0);
        row << ',' << fmt9(ftp.x()) << ',' << fmt9(ftp.y());
        row << ',' << fmt9(ftf.x()) << ',' << fmt9(ftf.y());
        row << ',' << fmt9(an_ch.filtered_point.x()) << ',' << fmt9(an_ch.filtered_point.y());
        row << ',' << fmt9(an_ch.filtered_force.x()) << ',' << fmt9(an_ch.filtered_force.y());
        row << ',' << fmt9(pf_ch.filtered_point.x()) << ',' << fmt9(pf_ch.filtered_point.y());
        row << ',' << fmt9(pf_ch.filtered_force.x()) << ',' << fmt9(pf_ch.filtered_force.y());
        trace << row.str() << "\n";

        state = next;
    }
    trace.close();
    pf_ticks.close();

    RunResult result;
    result.trace_path = trace_path;
    result.pf_path = pf_path;
    result.summary_path = summary_path;
    result.summary = metrics(trace_path);
    const auto median_us = [](std::vector<double>& ns) {
        if (ns.empty()) return 0.0;
        std::nth_element(ns.begin(), ns.begin() + ns.size() / 2, ns.end());
        return ns[ns.size() / 2] / 1000.0;
    };
    bench.analytic_tick_us = median_us(an_tick_ns);
    bench.pf_tick_us = median_us(pf_tick_ns);
    result.bench = bench;

    std::ofstream summary(summary_path);
    summary << result.summary.format() << result.bench.format();
    return result;
}

// Wall-clock demo mode: the sim/control/observer loop and the estimator loop
// run on their own threads, coupled only by the latest-snapshot channel.
// Timing (and therefore the log) is not deterministic here; the deterministic
// interleaved run() above is the reference path.
inline RunSummary run_wallclock(const ScenarioConfig& cfg,
                                const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    struct Snapshot {
        double t;
        VectorXd gamma;
        VectorXd q;
    };
    LatestSnapshotChannel<Snapshot> channel;
    std::atomic<bool> running{true};

    const RobotModel& model = cfg.model;
    const int n = model.joint_count();
    const double dt = 1.0 / cfg.sim_rate_hz;
    const int steps = static_cast<int>(std::lround(cfg.duration * cfg.sim_rate_hz));

    std::thread sim_thread([&] {
        SimState state = SimState::initial(cfg.initial_q);
        ObserverState obs = ObserverState::initialize(model, cfg.initial_q,
                                                      VectorXd::Zero(n), cfg.observer_gain);
        const auto start = std::chrono::steady_clock::now();
        for (int k = 0; k < steps; ++k) {
            const double t = k * dt;
            const TaskGoal goal =
                scenario_trajectory(cfg.scenario, t, cfg.trajectory, cfg.kp, cfg.kv);
            const VectorXd tau = opspace_torques(model, state.joints.q, state.joints.qdot, goal);
            channel.publish(Snapshot{t, obs.gamma, state.joints.q});
            state = step(model, state, tau, cfg.obstacle, dt);
            obs = observer_update(obs, model, state.joints.q, state.joints.qdot, tau, dt);
            std::this_thread::sleep_until(start + std::chrono::duration<double>((k + 1) * dt));
        }
        running = false;
    });

    std::ofstream ticks(out_dir / "pf_ticks_wallclock.csv");
    ticks << "t,active,est_px,est_py,est_fx,est_fy\n";
    Rng rng(cfg.seed);
    ParticleSet set;
    const auto period = std::chrono::duration<double>(1.0 / cfg.estimator_rate_hz);
    auto wake = std::chrono::steady_clock::now();
    while (running) {
        wake += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
        std::this_thread::sleep_until(wake);
        const auto snap = channel.take();
        if (!snap) continue;
        PfStepResult out =
            pf_step(set, snap->gamma, model, snap->q, cfg.detection_threshold, cfg.pf, rng);
        set = std::move(out.set);
        using detail::fmt9;
        ticks << fmt9(snap->t) << ',' << (set.active ? 1 : 0) << ','
              << fmt9(out.estimate ? out.estimate->point_world.x() : 0.0) << ','
              << fmt9(out.estimate ? out.estimate->point_world.y() : 0.0) << ','
              << fmt9(out.estimate ? out.estimate->force.x() : 0.0) << ','
              << fmt9(out.estimate ? out.estimate->force.y() : 0.0) << "\n";
    }
    sim_thread.join();
    return RunSummary{};
}

}  // namespace contact2d
