#include "qoptic/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace qo {

TraceBatch synth_traces(const std::vector<double>& quadratures, const TraceShape& shape,
                        std::uint64_t seed) {
    if (shape.points_per_trace < 100) throw Error("synth_traces: need >= 100 points per trace");
    TraceBatch batch;
    batch.sample_period = 2e-10;
    batch.pulse_period = 13.07e-9;
    if (batch.pulse_period <= 2.0 * shape.response_width)
        throw Error("synth_traces: pulse period must exceed twice the response width");
    const int pts = shape.points_per_trace;
    const int pulse_pts = int(batch.pulse_period / batch.sample_period + 0.5);
    const int pulses_per_trace = std::max(1, (pts - pulse_pts / 2) / pulse_pts);
    const int n_traces = int((quadratures.size() + pulses_per_trace - 1) / pulses_per_trace);
    batch.trigger_offset = 0.5 * batch.pulse_period;
    batch.samples = Eigen::MatrixXd::Zero(n_traces, pts);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    const double w = shape.response_width / batch.sample_period;  // in points
    size_t qi = 0;
    for (int r = 0; r < n_traces; ++r) {
        double drift_phase = uni(rng);
        for (int p = 0; p < pulses_per_trace && qi < quadratures.size(); ++p, ++qi) {
            double center = batch.trigger_offset / batch.sample_period + double(p) * pulse_pts;
            int lo = std::max(0, int(center - 5 * w)), hi = std::min(pts - 1, int(center + 5 * w));
            for (int k = lo; k <= hi; ++k) {
                double u = (k - center) / w;
                batch.samples(r, k) += quadratures[qi] * std::exp(-0.5 * u * u);
            }
        }
        for (int k = 0; k < pts; ++k) {
            double t = k * batch.sample_period;
            if (shape.noise_floor > 0) batch.samples(r, k) += shape.noise_floor * gauss(rng);
            if (shape.drift_amplitude > 0)
                batch.samples(r, k) += shape.drift_amplitude *
                                       std::sin(2.0 * std::numbers::pi * t / shape.drift_period +
                                                drift_phase);
        }
    }
    return batch;
}

ExtractedQuadratures extract_quadratures(const TraceBatch& batch) {
    const Eigen::Index R = batch.samples.rows(), P = batch.samples.cols();
    if (R < 2) throw Error("extract_quadratures: need at least 2 traces");
    // pointwise variance across traces
    Eigen::VectorXd mean = batch.samples.colwise().mean();
    Eigen::VectorXd var(P);
    for (Eigen::Index k = 0; k < P; ++k)
        var(k) = (batch.samples.col(k).array() - mean(k)).square().sum() / double(R - 1);
    // baseline = median of the pointwise variance
    std::vector<double> sorted(var.data(), var.data() + P);
    std::nth_element(sorted.begin(), sorted.begin() + P / 2, sorted.end());
    double baseline = sorted[P / 2];
    double threshold = 3.0 * baseline;

    ExtractedQuadratures out;
    out.threshold = threshold;
    Eigen::Index k = 0;
    while (k < P) {
        if (var(k) > threshold) {
            Eigen::Index b = k;
            while (k < P && var(k) > threshold) ++k;
            out.windows.push_back({int(b), int(k)});
        } else {
            ++k;
        }
    }
    if (out.windows.empty()) throw Error("extract_quadratures: no windows above threshold");

    // per-window weighted mean with local baseline subtraction; the weight is
    // the mean response shape inside the window
    for (Eigen::Index r = 0; r < R; ++r) {
        for (auto [b, e] : out.windows) {
            // local baseline from the flanks
            int fb = std::max<Eigen::Index>(0, b - (e - b)), fe = std::min<Eigen::Index>(P, e + (e - b));
            double base = 0.0;
            int cnt = 0;
            for (int j = fb; j < b; ++j, ++cnt) base += batch.samples(r, j);
            for (Eigen::Index j = e; j < fe; ++j, ++cnt) base += batch.samples(r, j);
            base = cnt ? base / cnt : 0.0;
            double wsum = 0.0, vsum = 0.0;
            for (int j = b; j < e; ++j) {
                double wgt = var(j) - baseline;
                vsum += wgt * (batch.samples(r, j) - base);
                wsum += wgt;
            }
            out.values.push_back(vsum / std::max(wsum, 1e-300));
        }
    }
    return out;
}

std::vector<double> correlator(const std::vector<double>& q1, const std::vector<double>& q2,
                               int window) {
    if (q1.size() != q2.size()) throw Error("correlator: length mismatch");
    if (window < 2) throw Error("correlator: window must be >= 2");
    std::vector<double> out;
    for (size_t b = 0; b + window <= q1.size(); b += window) {
        double m1 = 0, m2 = 0, m12 = 0;
        for (size_t i = b; i < b + window; ++i) {
            m1 += q1[i];
            m2 += q2[i];
            m12 += q1[i] * q2[i];
        }
        m1 /= window;
        m2 /= window;
        m12 /= window;
        out.push_back(m12 - m1 * m2);
    }
    return out;
}

namespace {

struct FitState {
    double a, x, y, z;
};

double residual_rms(const std::vector<double>& s, const std::vector<double>& t, double t0,
                    const FitState& f) {
    double acc = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        double dt = t[i] - t0;
        double ph = f.x * dt * dt + f.y * dt + f.z;
        double d = s[i] - f.a * std::cos(ph);
        acc += d * d;
    }
    return std::sqrt(acc / s.size());
}

// Gauss-Newton with Levenberg damping on (a, x, y, z)
FitState refine(const std::vector<double>& s, const std::vector<double>& t, double t0, FitState f,
                bool fit_x, int iters = 200) {
    double lambda = 1e-3;
    double best = residual_rms(s, t, t0, f);
    for (int it = 0; it < iters; ++it) {
        const int P = fit_x ? 4 : 3;
        Eigen::MatrixXd JtJ = Eigen::MatrixXd::Zero(P, P);
        Eigen::VectorXd Jtr = Eigen::VectorXd::Zero(P);
        for (size_t i = 0; i < s.size(); ++i) {
            double dt = t[i] - t0;
            double ph = f.x * dt * dt + f.y * dt + f.z;
            double c = std::cos(ph), sn = std::sin(ph);
            double r = s[i] - f.a * c;
            Eigen::VectorXd J(P);
            int k = 0;
            J(k++) = c;                       // d/da
            if (fit_x) J(k++) = f.a * sn * dt * dt * (-1.0) * (-1.0);  // d/dx of -a cos -> a sin * dt^2
            J(k++) = f.a * sn * dt;
            J(k++) = f.a * sn;
            // model m = a cos(ph); dm/dph = -a sin(ph); residual r = s - m;
            // dr/dtheta = -dm/dtheta. We accumulate for the normal equations of r.
            JtJ += J * J.transpose();
            Jtr += J * r;
        }
        Eigen::MatrixXd A = JtJ + lambda * Eigen::MatrixXd(JtJ.diagonal().asDiagonal());
        Eigen::VectorXd step = A.ldlt().solve(Jtr);
        FitState g = f;
        int k = 0;
        g.a += step(k++);
        if (fit_x) g.x += -step(k++);
        g.y += -step(k++);
        g.z += -step(k++);
        double rr = residual_rms(s, t, t0, g);
        if (rr < best) {
            best = rr;
            f = g;
            lambda = std::max(lambda * 0.5, 1e-9);
        } else {
            lambda *= 4.0;
            if (lambda > 1e9) break;
        }
    }
    return f;
}

}  // namespace

PhaseModel fit_phase(const std::vector<double>& series, const std::vector<double>& times,
                     double t0, PhaseFitKind kind) {
    if (series.size() != times.size() || series.size() < 8)
        throw Error("fit_phase: need matching series/times with >= 8 points");
    // the paper's operating constraint: at least ~5 points per oscillation
    const double span = times.back() - times.front();
    double a0 = 0.0;
    for (double v : series) a0 = std::max(a0, std::abs(v));
    // coarse scan over frequency and phase offset
    FitState best{a0, 0.0, 0.0, 0.0};
    double best_rms = 1e300;
    const int n_freq = 160;
    const double w_max = 2.0 * std::numbers::pi * double(series.size()) / (5.0 * span);
    for (int fi = 1; fi <= n_freq; ++fi) {
        double w = w_max * fi / n_freq;
        for (int zi = 0; zi < 8; ++zi) {
            FitState f{a0, 0.0, w, 2.0 * std::numbers::pi * zi / 8.0};
            double rr = residual_rms(series, times, t0, f);
            if (rr < best_rms) {
                best_rms = rr;
                best = f;
            }
        }
    }
    best = refine(series, times, t0, best, false);
    if (kind == PhaseFitKind::Quadratic) best = refine(series, times, t0, best, true);
    if (best.a < 0) {  // canonicalize amplitude sign
        best.a = -best.a;
        best.z += std::numbers::pi;
    }
    PhaseModel m;
    m.amplitude = best.a;
    m.x = best.x;
    m.y = best.y;
    m.z = std::fmod(best.z, 2.0 * std::numbers::pi);
    if (m.z < 0) m.z += 2.0 * std::numbers::pi;
    m.t0 = t0;
    m.rms_residual = residual_rms(series, times, t0, best);
    m.converged = m.rms_residual < 0.5 * std::max(best.a, 1e-12);
    return m;
}

double assign_phase(const PhaseModel& model, double t) {
    double dt = t - model.t0;
    double ph = model.x * dt * dt + model.y * dt + model.z;
    ph = std::fmod(ph, 2.0 * std::numbers::pi);
    if (ph < 0) ph += 2.0 * std::numbers::pi;
    return ph;
}

}  // namespace qo
