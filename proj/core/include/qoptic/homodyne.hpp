#pragma once

#include "qoptic/fock.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qo {

// One multimode quadrature measurement. Values are vacuum-normalized
// (vacuum variance 1/2); phases are stored mod 2pi.
struct QuadratureRecord {
    std::vector<double> values;
    std::vector<double> phases;
    std::string tag;
    double t = 0.0;  // seconds
};

struct QuadratureGrid {
    double lo = -8.0;
    double hi = 8.0;
    double step = 0.01;

    QuadratureGrid() = default;
    QuadratureGrid(double l, double h, double s) : lo(l), hi(h), step(s) {
        if (!(lo < hi) || step <= 0) throw Error("QuadratureGrid: invalid bounds");
    }
    /// Default bounds +-(4 + 2 sqrt(N+1)) cover the |N> support to < 1e-8.
    static QuadratureGrid for_cutoff(int cutoff, double step = 0.01) {
        double b = 4.0 + 2.0 * std::sqrt(double(cutoff + 1));
        return QuadratureGrid(-b, b, step);
    }
    Eigen::Index size() const { return Eigen::Index((hi - lo) / step) + 1; }
    double point(Eigen::Index i) const { return lo + double(i) * step; }
};

/// Orthonormal oscillator eigenfunction psi_n(x) (vacuum variance 1/2),
/// three-term recurrence.
double quad_wavefunction(int n, double x);

/// psi_0..psi_nmax at x in one pass.
Eigen::VectorXd quad_wavefunctions(int nmax, double x);

/// Rank-one quadrature projector |X_theta><X_theta| with <n|X_theta> =
/// psi_n(X) e^{i n theta} (single mode).
OperatorMatrix projector(double value, double phase, const FockSpace& space);

/// Measured quadrature observable Q_theta = (a e^{-i theta} + a† e^{i theta})/sqrt(2).
Mat quadrature_operator(const FockSpace& space, int mode, double theta);

/// Variance of the sum observable (Q1 + Q2)/sqrt(2) at local-oscillator
/// phases theta1, theta2 of a 2-mode state.
double two_mode_sum_variance(const DensityOperator& rho, double theta1, double theta2);

/// Joint quadrature density of all modes at the given phases, on a grid per
/// mode (1- and 2-mode states; for 2 modes the table index is i2*G + i1 with
/// x1 varying fastest). Integrates to 1.
Eigen::VectorXd pdf(const DensityOperator& rho, const std::vector<double>& phases,
                    const QuadratureGrid& grid);
Eigen::VectorXd pdf(const StateVector& psi, const std::vector<double>& phases,
                    const QuadratureGrid& grid);

/// I.i.d. quadrature draws; deterministic for a fixed seed. Multimode sampling
/// factorizes marginal-then-conditional on the grid.
std::vector<QuadratureRecord> sample(const DensityOperator& rho, const std::vector<double>& phases,
                                     int count, std::uint64_t seed,
                                     const QuadratureGrid* grid = nullptr);
std::vector<QuadratureRecord> sample(const StateVector& psi, const std::vector<double>& phases,
                                     int count, std::uint64_t seed,
                                     const QuadratureGrid* grid = nullptr);

// Synthetic oscilloscope traces: `samples` is records x points, one detector
// response per pulse period.
struct TraceBatch {
    Eigen::MatrixXd samples;
    double sample_period = 2e-10;   // seconds per point
    double pulse_period = 13.07e-9; // seconds between laser pulses
    double trigger_offset = 0.0;    // seconds from trace start to first pulse peak
};

struct TraceShape {
    double response_width = 2.5e-9;  // Gaussian 1-sigma of the detector response
    double noise_floor = 0.0;        // additive white noise sigma
    double drift_amplitude = 0.0;    // slow additive sinusoid amplitude
    double drift_period = 1e-6;      // seconds
    int points_per_trace = 500;
};

/// Render quadrature values into pulse-shaped traces (row r carries the
/// consecutive values starting at index r * pulses_per_trace).
TraceBatch synth_traces(const std::vector<double>& quadratures, const TraceShape& shape,
                        std::uint64_t seed);

struct ExtractedQuadratures {
    std::vector<double> values;                  // per-window means, time order
    std::vector<std::pair<int, int>> windows;    // [begin, end) point ranges
    double threshold = 0.0;                      // variance threshold used
};

/// Window discovery via pointwise variance thresholding (3x baseline), then
/// per-window mean with local baseline subtraction.
ExtractedQuadratures extract_quadratures(const TraceBatch& batch);

/// Windowed covariance <Q1 Q2> - <Q1><Q2> over consecutive blocks of `window`
/// samples.
std::vector<double> correlator(const std::vector<double>& q1, const std::vector<double>& q2,
                               int window);

// Phase bookkeeping: phi(t) = x t^2 + y t + z relative to cycle start t0; the
// measured series is a cos(phi(t - t0)).
struct PhaseModel {
    double amplitude = 0.0;
    double x = 0.0, y = 0.0, z = 0.0;
    double t0 = 0.0;
    double rms_residual = 0.0;
    bool converged = false;
};

enum class PhaseFitKind { Linear, Quadratic };

/// Least-squares fit of a cos(x t^2 + y t + z) to a uniformly sampled series.
PhaseModel fit_phase(const std::vector<double>& series, const std::vector<double>& times,
                     double t0, PhaseFitKind kind);

/// Mod 2pi of the fitted phase polynomial at time t.
double assign_phase(const PhaseModel& model, double t);

/// |integral phi1* phi2|^2 over a common grid (trapezoid rule); tables must be
/// normalized on the same grid.
double mode_overlap(const std::vector<double>& grid, const std::vector<cxd>& phi1,
                    const std::vector<cxd>& phi2);

/// Homodyne efficiency from a relative frequency offset delta over m optical
/// cycles per pulse: |sin(delta m pi) / (delta m pi)|.
double spectral_visibility(double delta, double m);

}  // namespace qo
